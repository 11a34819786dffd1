"""Syntax tree for the checked Redis command language.

A program is a list of record declarations followed by a block of
commands.  Commands name their keys statically (keys are symbols, not
expressions), which is what makes the whole-program key/type analysis
in ``checker`` possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# base types: what a single stored value deserializes to


class BaseType:
    """Scalar payload type: int, float, bool, text, or a named record."""

    __slots__ = ()


@dataclass(frozen=True)
class IntType(BaseType):
    pass


@dataclass(frozen=True)
class FloatType(BaseType):
    pass


@dataclass(frozen=True)
class BoolType(BaseType):
    pass


@dataclass(frozen=True)
class TextType(BaseType):
    pass


@dataclass(frozen=True)
class RecordRef(BaseType):
    """Reference to a record declaration by name."""

    name: str


INT = IntType()
FLOAT = FloatType()
BOOL = BoolType()
TEXT = TextType()


# ---------------------------------------------------------------------------
# type tags: what kind of value a key holds


class TypeTag:
    """Shape of the value stored at one key."""

    __slots__ = ()


@dataclass(frozen=True)
class StringOf(TypeTag):
    base: BaseType


@dataclass(frozen=True)
class ListOf(TypeTag):
    base: BaseType


@dataclass(frozen=True)
class SetOf(TypeTag):
    base: BaseType


@dataclass(frozen=True)
class HashOf(TypeTag):
    """Hash tag; ``fields`` is an ordered association list.

    Field values are string tags (hashes nest scalars, not containers);
    the parser enforces this for source programs.
    """

    fields: tuple[tuple[str, TypeTag], ...]


def hash_of(*fields: tuple[str, TypeTag]) -> HashOf:
    """Convenience constructor so callers don't spell nested tuples."""
    return HashOf(tuple(fields))


# ---------------------------------------------------------------------------
# expressions (value arguments of commands)


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class TextLit(Expr):
    value: str


@dataclass(frozen=True)
class Var(Expr):
    """Reference to the bound result of an earlier command."""

    name: str


@dataclass(frozen=True)
class RecordLit(Expr):
    """Record construction with positional arguments, e.g. Message{"hi", 1}."""

    name: str
    args: tuple[Expr, ...]


def expr_free_vars(e: Expr) -> set[str]:
    """Names of all variables occurring in ``e``."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, RecordLit):
        out: set[str] = set()
        for a in e.args:
            out |= expr_free_vars(a)
        return out
    return set()


# ---------------------------------------------------------------------------
# commands and programs


@dataclass(frozen=True)
class Span:
    """Source position (1-based line and column) of a command's opcode."""

    line: int
    col: int


# opcode -> (number of key arguments, has hash field, number of value
# arguments, takes a type tag).  Single source of truth for arity; the
# parser, checker, executor, and fuzzer all read this table.
COMMAND_SHAPES: dict[str, tuple[int, bool, int, bool]] = {
    "ping": (0, False, 0, False),
    "set": (1, False, 1, False),
    "setnx": (1, False, 1, False),
    "get": (1, False, 0, False),
    "del": (1, False, 0, False),
    "incr": (1, False, 0, False),
    "incrbyfloat": (1, False, 1, False),
    "lpush": (1, False, 1, False),
    "llen": (1, False, 0, False),
    "rpop": (1, False, 0, False),
    "sadd": (1, False, 1, False),
    "sinter": (2, False, 0, False),
    "hset": (1, True, 1, False),
    "hget": (1, True, 0, False),
    "declare": (1, False, 0, True),
}

OPCODES = frozenset(COMMAND_SHAPES)


@dataclass(frozen=True)
class Command:
    """One statement: optional binder, opcode, static keys, value args.

    ``span`` is carried for error reporting but ignored by structural
    equality so printed-and-reparsed programs compare equal.
    """

    opcode: str
    keys: tuple[str, ...] = ()
    args: tuple[Expr, ...] = ()
    field_name: str | None = None
    declared: TypeTag | None = None
    binder: str | None = None
    span: Span = field(default=Span(1, 1), compare=False)


@dataclass(frozen=True)
class RecordDecl:
    """Named flat record; field payloads are scalars, never records."""

    name: str
    fields: tuple[tuple[str, BaseType], ...]


@dataclass(frozen=True)
class Program:
    records: tuple[RecordDecl, ...]
    body: tuple[Command, ...]


def record_table(p: Program) -> dict[str, RecordDecl]:
    return {r.name: r for r in p.records}
