import hashlib
import json
from pathlib import Path

from metadata.manifest import MANIFEST_VERSION, create_for_run, sha256_file, sidecar_paths, write_sidecars


def test_sidecar_names(tmp_path):
    json_path, yaml_path = sidecar_paths(tmp_path / "report.csv")
    assert json_path.name == "report.csv.run.json"
    assert yaml_path.name == "report.csv.run.yaml"


def test_manifest_records_hashes(tmp_path):
    out = tmp_path / "report.json"
    out.write_text("{}\n", encoding="utf-8")
    source = tmp_path / "records.csv"
    source.write_bytes(b"g,value\nA,1\n")
    manifest = create_for_run(out, "benchmark", {"input": Path("records.csv"), "rates": (0.1, 0.5)}, 42, [source])
    assert manifest.manifest_version == MANIFEST_VERSION
    assert manifest.seed == 42
    assert manifest.output.file_size == 3
    assert manifest.inputs[0].file_sha256 == hashlib.sha256(b"g,value\nA,1\n").hexdigest()
    assert manifest.arguments == {"input": "records.csv", "rates": [0.1, 0.5]}
    written = write_sidecars(manifest, out, write_yaml=False)
    assert written == [sidecar_paths(out)[0]]
    assert json.loads(written[0].read_text(encoding="utf-8"))["output"]["file_sha256"] == sha256_file(out)
