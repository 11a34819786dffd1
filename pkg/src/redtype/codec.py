"""Byte serialization of typed values.

Encodings are canonical: every value has exactly one byte string, and
``decode`` accepts exactly the image of ``encode`` (anything else is a
DecodeError).  Integers use the same signed-decimal form the store's
INCR produces, so a counter written here can be incremented there and
read back without ever leaving the codec's image.

  int    -> ASCII signed decimal, no leading zeros, never "-0"
  float  -> shortest round-trip decimal, always with '.' or exponent
  bool   -> b"true" / b"false"
  text   -> raw UTF-8
  record -> compact JSON object, fields in declaration order,
            e.g. {"body":"hello","id":1}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .syntax import (
    BOOL,
    FLOAT,
    INT,
    TEXT,
    BaseType,
    RecordDecl,
    RecordRef,
)


@dataclass(frozen=True)
class RecordValue:
    """A constructed record: declaration name plus field payloads in order."""

    name: str
    values: tuple[Any, ...]


@dataclass(frozen=True)
class TypedValue:
    base: BaseType
    value: Any


class DecodeError(Exception):
    def __init__(self, base_name: str, data: bytes, reason: str = ""):
        shown = data[:64] + (b"..." if len(data) > 64 else b"")
        msg = f"cannot decode {shown!r} as {base_name}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.base_name = base_name
        self.data = data


def _record_decl(base: RecordRef, records: Mapping[str, RecordDecl] | None) -> RecordDecl:
    if records is None or base.name not in records:
        raise KeyError(f"unknown record declaration '{base.name}'")
    return records[base.name]


def _json_scalar(value: Any, base: BaseType) -> Any:
    # Field payloads go into the JSON object as-is; shape was validated
    # at construction time, so this only guards against drift.
    if base == INT:
        assert isinstance(value, int) and not isinstance(value, bool)
    elif base == FLOAT:
        assert isinstance(value, float) and math.isfinite(value)
    elif base == BOOL:
        assert isinstance(value, bool)
    else:
        assert isinstance(value, str)
    return value


def encode(v: TypedValue, records: Mapping[str, RecordDecl] | None = None) -> bytes:
    base = v.base
    if base == INT:
        return str(v.value).encode("ascii")
    if base == FLOAT:
        return repr(v.value).encode("ascii")
    if base == BOOL:
        return b"true" if v.value else b"false"
    if base == TEXT:
        return v.value.encode("utf-8")
    assert isinstance(base, RecordRef)
    decl = _record_decl(base, records)
    rec: RecordValue = v.value
    obj = {name: _json_scalar(val, fbase) for (name, fbase), val in zip(decl.fields, rec.values)}
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def decode(
    data: bytes, base: BaseType, records: Mapping[str, RecordDecl] | None = None
) -> TypedValue:
    if base == INT:
        try:
            s = data.decode("ascii")
            n = int(s)
        except (UnicodeDecodeError, ValueError):
            raise DecodeError("int", data) from None
        if str(n) != s:
            raise DecodeError("int", data, "not canonical")
        return TypedValue(INT, n)

    if base == FLOAT:
        try:
            s = data.decode("ascii")
            f = float(s)
        except (UnicodeDecodeError, ValueError):
            raise DecodeError("float", data) from None
        if not math.isfinite(f) or repr(f) != s:
            raise DecodeError("float", data, "not canonical")
        return TypedValue(FLOAT, f)

    if base == BOOL:
        if data == b"true":
            return TypedValue(BOOL, True)
        if data == b"false":
            return TypedValue(BOOL, False)
        raise DecodeError("bool", data)

    if base == TEXT:
        try:
            return TypedValue(TEXT, data.decode("utf-8"))
        except UnicodeDecodeError:
            raise DecodeError("text", data, "invalid UTF-8") from None

    assert isinstance(base, RecordRef)
    decl = _record_decl(base, records)
    try:
        pairs = json.loads(data.decode("utf-8"), object_pairs_hook=list)
    except (UnicodeDecodeError, ValueError, RecursionError):
        raise DecodeError(decl.name, data, "not a JSON object") from None
    if not (isinstance(pairs, list) and all(isinstance(p, tuple) for p in pairs)):
        raise DecodeError(decl.name, data, "not a JSON object")
    if [p[0] for p in pairs] != [n for n, _ in decl.fields]:
        raise DecodeError(decl.name, data, "field names or order mismatch")
    values: list[Any] = []
    for (fname, fbase), (_, raw) in zip(decl.fields, pairs):
        if fbase == INT:
            ok = isinstance(raw, int) and not isinstance(raw, bool)
        elif fbase == FLOAT:
            ok = isinstance(raw, float) and math.isfinite(raw)
        elif fbase == BOOL:
            ok = isinstance(raw, bool)
        else:
            ok = isinstance(raw, str)
        if not ok:
            raise DecodeError(decl.name, data, f"field '{fname}' has the wrong type")
        values.append(raw)
    out = TypedValue(base, RecordValue(decl.name, tuple(values)))
    # One canonical byte string per value: reject every other spelling
    # (whitespace, \u escapes, exponent variants) by re-encoding.
    if encode(out, records) != data:
        raise DecodeError(decl.name, data, "not canonical")
    return out
