import pytest

from errors import DomainError
from settings import DEFAULT_SETTINGS, Settings, load_settings


def test_defaults_without_sources():
    assert load_settings(environ={}) == DEFAULT_SETTINGS


def test_file_then_environment(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text("truth_threshold: 10\nsigma2_floor: null\nthreads: 2\n", encoding="utf-8")
    s = load_settings(path, environ={"SUREMAP_THREADS": "4"})
    assert s.truth_threshold == 10
    assert s.sigma2_floor is None
    assert s.threads == 4


def test_json_settings(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text('{"fallback_sigma2": 0.5}', encoding="utf-8")
    assert load_settings(path, environ={}).fallback_sigma2 == 0.5


@pytest.mark.parametrize(
    "text",
    ["unknown_key: 1\n", "threads: many\n", "- 1\n- 2\n", "threads: 0\n", "max_groups: [\n"],
)
def test_bad_settings_files(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(DomainError):
        load_settings(path, environ={})


def test_missing_file(tmp_path):
    with pytest.raises(DomainError):
        load_settings(tmp_path / "absent.yaml", environ={})


def test_validation():
    with pytest.raises(DomainError):
        Settings(condition_threshold=1.0)
    with pytest.raises(DomainError):
        Settings(fallback_sigma2=0.0)
    with pytest.raises(DomainError, match="truth_threshold"):
        load_settings(environ={"SUREMAP_TRUTH_THRESHOLD": ""})
