"""In-memory store with Redis runtime semantics for the supported commands.

The point of this module is to be an exact oracle for the runtime type
discipline the checker guarantees against: operations on a key holding
the wrong kind of value produce the WRONGTYPE error reply, arithmetic
on unparseable strings produces the not-an-integer / not-a-float error
replies, and everything else follows the real store's observable
behavior (absent keys read as empty, RPOP deletes emptied lists, SINTER
output is sorted bytewise, and so on).

``exec_command`` never raises; malformed input comes back as ErrReply.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

WRONGTYPE_MSG = "WRONGTYPE Operation against a key holding the wrong kind of value"
NOT_INT_MSG = "ERR value is not an integer or out of range"
NOT_FLOAT_MSG = "ERR value is not a valid float"
NONFINITE_MSG = "ERR increment would produce NaN or Infinity"


# ---- stored values --------------------------------------------------------


@dataclass(frozen=True)
class Str:
    data: bytes


@dataclass(frozen=True)
class ListV:
    """Items left-to-right; index 0 is the head LPUSH prepends to."""

    items: tuple[bytes, ...]


@dataclass(frozen=True)
class SetV:
    members: frozenset[bytes]


@dataclass(frozen=True)
class HashV:
    fields: tuple[tuple[str, bytes], ...]  # insertion-ordered


StoreValue = Str | ListV | SetV | HashV
State = dict[str, StoreValue]


# ---- replies ---------------------------------------------------------------


@dataclass(frozen=True)
class SimpleStatus:
    text: str


@dataclass(frozen=True)
class IntReply:
    value: int


@dataclass(frozen=True)
class BulkReply:
    data: bytes | None  # None is the nil reply


@dataclass(frozen=True)
class MultiBulk:
    items: tuple[bytes, ...]


@dataclass(frozen=True)
class ErrReply:
    message: str


Reply = SimpleStatus | IntReply | BulkReply | MultiBulk | ErrReply

OK = SimpleStatus("OK")
PONG = SimpleStatus("PONG")


def _parse_stored_int(raw: bytes) -> int | None:
    """Strict signed decimal: no sign-plus, no blanks, no leading zeros."""
    try:
        s = raw.decode("ascii")
        n = int(s)
    except (UnicodeDecodeError, ValueError):
        return None
    return n if str(n) == s else None


_FLOAT_RE = re.compile(rb"\A[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")


def _parse_stored_float(raw: bytes) -> float | None:
    if not _FLOAT_RE.match(raw):
        return None
    return float(raw)


def _format_float(value: float) -> bytes:
    return repr(value).encode("ascii")


def _key(argv: Sequence[bytes], i: int) -> str:
    return argv[i].decode("latin-1")


def exec_command(state: Mapping[str, StoreValue], argv: Sequence[bytes]) -> tuple[State, Reply]:
    """Run one wire command against ``state``; returns (new state, reply).

    Pure: the input state is never mutated, and equal inputs give equal
    outputs.
    """
    new: State = dict(state)
    if not argv:
        return new, ErrReply("ERR empty command")
    name = argv[0].decode("latin-1").upper()
    arity = _ARITIES.get(name)
    if arity is None:
        return new, ErrReply(f"ERR unknown command '{argv[0].decode('latin-1')}'")
    if len(argv) != arity:
        return new, ErrReply(f"ERR wrong number of arguments for '{name.lower()}' command")

    if name == "PING":
        return new, PONG

    if name == "SET":
        new[_key(argv, 1)] = Str(bytes(argv[2]))
        return new, OK

    if name == "SETNX":
        k = _key(argv, 1)
        if k in new:
            return new, IntReply(0)
        new[k] = Str(bytes(argv[2]))
        return new, IntReply(1)

    if name == "GET":
        v = new.get(_key(argv, 1))
        if v is None:
            return new, BulkReply(None)
        if isinstance(v, Str):
            return new, BulkReply(v.data)
        return new, ErrReply(WRONGTYPE_MSG)

    if name == "DEL":
        k = _key(argv, 1)
        if k in new:
            del new[k]
            return new, IntReply(1)
        return new, IntReply(0)

    if name == "INCR":
        k = _key(argv, 1)
        v = new.get(k)
        if v is None:
            raw = b"0"
        elif isinstance(v, Str):
            raw = v.data
        else:
            return new, ErrReply(WRONGTYPE_MSG)
        n = _parse_stored_int(raw)
        if n is None:
            return new, ErrReply(NOT_INT_MSG)
        new[k] = Str(str(n + 1).encode("ascii"))
        return new, IntReply(n + 1)

    if name == "INCRBYFLOAT":
        k = _key(argv, 1)
        d = _parse_stored_float(argv[2])
        if d is None:
            return new, ErrReply(NOT_FLOAT_MSG)
        v = new.get(k)
        if v is None:
            raw = b"0"
        elif isinstance(v, Str):
            raw = v.data
        else:
            return new, ErrReply(WRONGTYPE_MSG)
        old = _parse_stored_float(raw)
        if old is None:
            return new, ErrReply(NOT_FLOAT_MSG)
        result = old + d
        if not math.isfinite(result):
            return new, ErrReply(NONFINITE_MSG)
        encoded = _format_float(result)
        new[k] = Str(encoded)
        return new, BulkReply(encoded)

    if name == "LPUSH":
        k = _key(argv, 1)
        v = new.get(k)
        if v is None:
            items = (bytes(argv[2]),)
        elif isinstance(v, ListV):
            items = (bytes(argv[2]),) + v.items
        else:
            return new, ErrReply(WRONGTYPE_MSG)
        new[k] = ListV(items)
        return new, IntReply(len(items))

    if name == "LLEN":
        v = new.get(_key(argv, 1))
        if v is None:
            return new, IntReply(0)
        if isinstance(v, ListV):
            return new, IntReply(len(v.items))
        return new, ErrReply(WRONGTYPE_MSG)

    if name == "RPOP":
        k = _key(argv, 1)
        v = new.get(k)
        if v is None:
            return new, BulkReply(None)
        if not isinstance(v, ListV):
            return new, ErrReply(WRONGTYPE_MSG)
        popped = v.items[-1]
        rest = v.items[:-1]
        if rest:
            new[k] = ListV(rest)
        else:
            del new[k]
        return new, BulkReply(popped)

    if name == "SADD":
        k = _key(argv, 1)
        member = bytes(argv[2])
        v = new.get(k)
        if v is None:
            new[k] = SetV(frozenset((member,)))
            return new, IntReply(1)
        if not isinstance(v, SetV):
            return new, ErrReply(WRONGTYPE_MSG)
        if member in v.members:
            return new, IntReply(0)
        new[k] = SetV(v.members | {member})
        return new, IntReply(1)

    if name == "SINTER":
        sets: list[frozenset[bytes]] = []
        for i in (1, 2):
            v = new.get(_key(argv, i))
            if v is None:
                sets.append(frozenset())
            elif isinstance(v, SetV):
                sets.append(v.members)
            else:
                return new, ErrReply(WRONGTYPE_MSG)
        return new, MultiBulk(tuple(sorted(sets[0] & sets[1])))

    if name == "HSET":
        k = _key(argv, 1)
        f = argv[2].decode("latin-1")
        value = bytes(argv[3])
        v = new.get(k)
        if v is None:
            new[k] = HashV(((f, value),))
            return new, IntReply(1)
        if not isinstance(v, HashV):
            return new, ErrReply(WRONGTYPE_MSG)
        fields = dict(v.fields)
        created = f not in fields
        fields[f] = value
        new[k] = HashV(tuple(fields.items()))
        return new, IntReply(1 if created else 0)

    assert name == "HGET"
    v = new.get(_key(argv, 1))
    if v is None:
        return new, BulkReply(None)
    if not isinstance(v, HashV):
        return new, ErrReply(WRONGTYPE_MSG)
    f = argv[2].decode("latin-1")
    for fname, data in v.fields:
        if fname == f:
            return new, BulkReply(data)
    return new, BulkReply(None)


_ARITIES = {
    "PING": 1,
    "SET": 3,
    "SETNX": 3,
    "GET": 2,
    "DEL": 2,
    "INCR": 2,
    "INCRBYFLOAT": 3,
    "LPUSH": 3,
    "LLEN": 2,
    "RPOP": 2,
    "SADD": 3,
    "SINTER": 3,
    "HSET": 4,
    "HGET": 3,
}


class MemoryStore:
    """Mutable wrapper holding one State and applying commands in order."""

    def __init__(self) -> None:
        self._state: State = {}

    def execute(self, argv: Sequence[bytes]) -> Reply:
        self._state, reply = exec_command(self._state, argv)
        return reply

    def reset(self) -> None:
        self._state = {}

    @property
    def state(self) -> State:
        return dict(self._state)

    def snapshot(self) -> list[dict[str, object]]:
        """Deterministic typed dump, sorted by key; used by --dump-store."""
        out: list[dict[str, object]] = []
        for k in sorted(self._state):
            v = self._state[k]
            if isinstance(v, Str):
                entry: dict[str, object] = {"type": "string", "value": v.data.decode("latin-1")}
            elif isinstance(v, ListV):
                entry = {"type": "list", "value": [b.decode("latin-1") for b in v.items]}
            elif isinstance(v, SetV):
                entry = {"type": "set", "value": [b.decode("latin-1") for b in sorted(v.members)]}
            else:
                entry = {
                    "type": "hash",
                    "value": {f: data.decode("latin-1") for f, data in sorted(v.fields)},
                }
            out.append({"key": k, **entry})
        return out
