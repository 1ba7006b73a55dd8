"""Bit-exact JSON file formats.

Every file is an envelope ``{"format_version": 1, "kind": ..., "payload":
...}`` whose payload contains integers only: field elements as integers
below 2^m, matrices as row-major integer arrays, permutations as 1-based
image arrays, braid words as arrays of signed integers (with
``{"body": ..., "count": ...}`` objects for repetitions and nested arrays
for shared subwords).  Serialization is deterministic, so seeded runs
produce byte-identical files.

Public and private instance halves always live in separate files; loaders
check the kind on every load so an attack driver can refuse private
material outright.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .braid import BraidWord, EvalParams, MatPerm, _Repeat
from .field import GF2m
from .perm import Perm
from .protocol import InstancePrivate, InstancePublic, SharedKey, Transcript

__all__ = [
    "FORMAT_VERSION",
    "KINDS",
    "FormatError",
    "save_envelope",
    "load_envelope",
    "word_to_json",
    "word_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "matperm_to_json",
    "matperm_from_json",
    "save_instance_public",
    "load_instance_public",
    "save_instance_private",
    "load_instance_private",
    "save_transcript",
    "load_transcript",
    "save_key",
    "load_key",
    "save_stats",
]

FORMAT_VERSION = 1
KINDS = ("instance_public", "instance_private", "transcript", "key", "stats")


class FormatError(ValueError):
    """A file failed to parse or carried the wrong kind/version."""


def save_envelope(path, kind: str, payload: dict) -> None:
    if kind not in KINDS:
        raise FormatError(f"unknown envelope kind {kind!r}")
    doc = {"format_version": FORMAT_VERSION, "kind": kind, "payload": payload}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_envelope(path, expect_kind: str | None = None) -> tuple[str, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"format_version", "kind", "payload"}:
        raise FormatError(f"{path}: not an envelope")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {doc['format_version']!r}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise FormatError(f"{path}: unknown kind {kind!r}")
    if expect_kind is not None and kind != expect_kind:
        raise FormatError(f"{path}: expected kind {expect_kind!r}, found {kind!r}")
    return kind, doc["payload"]


# -- leaf encoders ----------------------------------------------------------


def field_to_json(field: GF2m) -> dict:
    return {"degree": field.degree, "modulus": field.modulus}


def field_from_json(obj) -> GF2m:
    try:
        return GF2m(int(obj["degree"]), int(obj["modulus"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad field parameters: {exc}") from exc


def word_to_json(word: BraidWord):
    out = []
    for part in word._parts:
        if isinstance(part, int):
            out.append(part)
        elif isinstance(part, _Repeat):
            out.append({"body": word_to_json(part.body), "count": part.count})
        else:
            out.append(word_to_json(part))
    return out


def word_from_json(obj) -> BraidWord:
    if not isinstance(obj, list):
        raise FormatError("braid word must be an array")
    parts = []
    for item in obj:
        if isinstance(item, bool):
            raise FormatError("braid letters must be integers")
        if isinstance(item, int):
            parts.append(BraidWord([item]))
        elif isinstance(item, list):
            parts.append(word_from_json(item))
        elif isinstance(item, dict) and set(item) == {"body", "count"}:
            parts.append(word_from_json(item["body"]).power(int(item["count"])))
        else:
            raise FormatError(f"bad braid word element: {item!r}")
    return BraidWord.concat(*parts) if parts else BraidWord()


def matrix_to_json(mat: np.ndarray) -> list[int]:
    return [int(v) for v in mat.reshape(-1)]


def matrix_from_json(obj, n: int, field: GF2m) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != n * n:
        raise FormatError(f"matrix must be a row-major array of {n * n} integers")
    vals = []
    for v in obj:
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < field.order:
            raise FormatError(f"bad field element {v!r}")
        vals.append(v)
    return np.array(vals, dtype=field.dtype).reshape(n, n)


def perm_to_json(perm: Perm) -> list[int]:
    return perm.to_one_line()


def perm_from_json(obj, n: int) -> Perm:
    if not isinstance(obj, list) or len(obj) != n:
        raise FormatError(f"permutation must be a 1-based image array of length {n}")
    try:
        return Perm.from_one_line(obj)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad permutation: {exc}") from exc


def matperm_to_json(mp: MatPerm) -> dict:
    return {"mat": matrix_to_json(mp.mat), "perm": perm_to_json(mp.perm)}


def matperm_from_json(obj, n: int, field: GF2m) -> MatPerm:
    if not isinstance(obj, dict) or set(obj) != {"mat", "perm"}:
        raise FormatError("matrix-permutation pair must have 'mat' and 'perm'")
    return MatPerm(matrix_from_json(obj["mat"], n, field), perm_from_json(obj["perm"], n))


# -- envelope payloads -------------------------------------------------------


def save_instance_public(path, pub: InstancePublic) -> None:
    params = pub.params
    payload = {
        "n": params.n,
        "field": field_to_json(params.field),
        "tau": list(params.tau),
        "a_gens": [word_to_json(w) for w in pub.a_gens],
        "c_gens": [matrix_to_json(m) for m in pub.c_gens],
    }
    save_envelope(path, "instance_public", payload)


def load_instance_public(path) -> InstancePublic:
    _, payload = load_envelope(path, expect_kind="instance_public")
    try:
        field = field_from_json(payload["field"])
        n = int(payload["n"])
        tau = tuple(int(t) for t in payload["tau"])
        params = EvalParams(field, n, tau)
        a_gens = [word_from_json(w) for w in payload["a_gens"]]
        c_gens = [matrix_from_json(m, n, field) for m in payload["c_gens"]]
        return InstancePublic(params, a_gens, c_gens)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_instance_private(path, priv: InstancePrivate, params: EvalParams) -> None:
    payload = {
        "n": params.n,
        "field": field_to_json(params.field),
        "b_gens": [word_to_json(w) for w in priv.b_gens],
        "d_gens": [matrix_to_json(m) for m in priv.d_gens],
    }
    save_envelope(path, "instance_private", payload)


def load_instance_private(path, params: EvalParams) -> InstancePrivate:
    _, payload = load_envelope(path, expect_kind="instance_private")
    try:
        field = field_from_json(payload["field"])
        n = int(payload["n"])
        if field != params.field or n != params.n:
            raise FormatError("private instance does not match the public parameters")
        b_gens = [word_from_json(w) for w in payload["b_gens"]]
        d_gens = [matrix_from_json(m, n, field) for m in payload["d_gens"]]
        return InstancePrivate(b_gens, d_gens)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_transcript(path, transcript: Transcript, params: EvalParams) -> None:
    payload = {
        "n": params.n,
        "field": field_to_json(params.field),
        "alice": matperm_to_json(transcript.alice_msg),
        "bob": matperm_to_json(transcript.bob_msg) if transcript.bob_msg is not None else None,
    }
    save_envelope(path, "transcript", payload)


def load_transcript(path, params: EvalParams) -> Transcript:
    _, payload = load_envelope(path, expect_kind="transcript")
    try:
        field = field_from_json(payload["field"])
        n = int(payload["n"])
        if field != params.field or n != params.n:
            raise FormatError("transcript does not match the public parameters")
        alice = matperm_from_json(payload["alice"], n, field)
        bob = (
            matperm_from_json(payload["bob"], n, field)
            if payload.get("bob") is not None
            else None
        )
        return Transcript(alice, bob)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_key(path, key: SharedKey, params: EvalParams) -> None:
    payload = {
        "n": params.n,
        "field": field_to_json(params.field),
        "key": matperm_to_json(key.key),
    }
    save_envelope(path, "key", payload)


def load_key(path) -> SharedKey:
    _, payload = load_envelope(path, expect_kind="key")
    try:
        field = field_from_json(payload["field"])
        n = int(payload["n"])
        return SharedKey(matperm_from_json(payload["key"], n, field))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_stats(path, stats: dict) -> None:
    save_envelope(path, "stats", stats)
