# Schema loading and validation utilities
from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

from jsonschema import Draft7Validator, RefResolver, exceptions as js_exceptions

from errors import DataError

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "standards" / "schemas" / "documents"


def _load_json_file(path: Path) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def _preprocess_inherits(doc: Dict[str, Any], base_dir: Path) -> Dict[str, Any]:
    # "inherits": "RelativePath.json" becomes an allOf with a $ref to that file
    inherits = doc.pop('inherits', None)
    if inherits:
        ref_path = (base_dir / inherits).resolve()
        return {
            "allOf": [
                {"$ref": ref_path.as_uri()},
                doc,
            ]
        }
    return doc


@lru_cache(maxsize=None)
def load_validator(schema_path: str | Path) -> Draft7Validator:
    schema_path = Path(schema_path).resolve()
    raw = _load_json_file(schema_path)
    pre = _preprocess_inherits(raw, schema_path.parent)
    resolver = RefResolver(base_uri=schema_path.parent.as_uri() + '/', referrer=pre)
    try:
        Draft7Validator.check_schema(pre)
    except js_exceptions.SchemaError as e:
        raise RuntimeError(f"Invalid schema at {schema_path}: {e}") from e
    return Draft7Validator(pre, resolver=resolver)


def schema_path(name: str) -> Path:
    """Path of a bundled document schema, e.g. 'Summary_v1'."""
    path = SCHEMA_DIR / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled schema named {name}")
    return path


def validate_document(document: Any, schema: str | Path) -> list[str]:
    """All validation errors as 'path: message' lines; empty when valid."""
    path = schema_path(schema) if isinstance(schema, str) and not schema.endswith(".json") else Path(schema)
    validator = load_validator(str(path))
    errors: list[str] = []
    for error in sorted(validator.iter_errors(document), key=lambda e: list(map(str, e.path))):
        loc = "/".join(map(str, error.path))
        errors.append(f"{loc or '<root>'}: {error.message}")
    return errors


def require_valid(document: Any, schema: str, what: str) -> None:
    errors = validate_document(document, schema)
    if errors:
        raise DataError(f"{what} does not match {schema}", errors)
