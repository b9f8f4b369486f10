"""JSON documents for state sets, verifier reports and proof traces."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

from .constructions import FamilyTag, StateSet
from .errors import ValidationError
from .tensor import Dims, ExactScalar, Ket, format_label, parse_label

SCHEMA_VERSION = 1


def _ket_terms(k: Ket) -> list:
    return [[format_label(label, k.dims), amp.to_json()] for label, amp in k.terms]


def _ket_from(dims: Dims, terms: Sequence) -> Ket:
    try:
        return Ket(dims, tuple((parse_label(label), ExactScalar.from_json(amp)) for label, amp in terms))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed ket terms: {exc}") from exc


def stateset_to_json(s: StateSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "StateSet",
        "construction": s.name,
        "params": list(s.params),
        "dims": list(s.dims),
        "notes": list(s.notes),
        "alphas": [{"tag": t.to_json(), "terms": _ket_terms(k)} for k, t in s.alphas],
        "psis": [{"terms": _ket_terms(k)} for k in s.psis],
    }


def check_version(doc: Any, kind: str) -> None:
    if not isinstance(doc, dict):
        raise ValidationError("document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}")
    if doc.get("kind", kind) != kind:
        raise ValidationError(f"expected a {kind} document, got {doc.get('kind')!r}")


def stateset_from_json(doc: dict) -> StateSet:
    """Inverse of stateset_to_json. A document may omit alphas (plain custom sets)."""
    check_version(doc, "StateSet")
    try:
        dims = Dims(doc["dims"])
        psis = tuple(_ket_from(dims, p["terms"]) for p in doc["psis"])
        alphas = tuple((_ket_from(dims, a["terms"]), FamilyTag.from_json(a["tag"]))
                       for a in doc.get("alphas", ()))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed StateSet document: missing or bad {exc}") from exc
    if not psis:
        raise ValidationError("StateSet document lists no states")
    return StateSet(dims, alphas, psis, str(doc.get("construction", "custom")),
                    tuple(int(p) for p in doc.get("params", ())), tuple(doc.get("notes", ())))


def dump(doc: dict, path: str | Path | None = None) -> str:
    text = json.dumps(doc, indent=1, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


def save_stateset(s: StateSet, path: str | Path) -> None:
    dump(stateset_to_json(s), path)


def load_stateset(path: str | Path) -> StateSet:
    return stateset_from_json(load(path))


def wrap(kind: str, body: dict) -> dict:
    """Versioned envelope for report and trace documents."""
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}
