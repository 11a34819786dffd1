"""Static checking: fold a symbolic key/type dictionary over a program.

Each command is a dictionary transformer with a precondition.  Checking
walks the body left to right from an initial dictionary (empty unless
the caller assumes otherwise), threading the dictionary and an
environment of binder result types, and stops at the first violated
precondition.  An accepted program cannot raise a WRONGTYPE or
integer/float parse error when run against a store that matches the
initial dictionary; that guarantee is what the differential fuzzer
hammers on.

A dictionary entry means "if this key exists in the store, it holds a
value of this shape".  Keys can be tracked yet absent (declare writes
nothing; RPOP deletes an emptied list), which is why setnx carries an
equality precondition on tracked keys: its write-if-absent behavior
would otherwise smuggle a string of the wrong type under an existing
entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import typedict
from .syntax import (
    BOOL,
    FLOAT,
    INT,
    TEXT,
    BaseType,
    BoolLit,
    Command,
    Expr,
    FloatLit,
    HashOf,
    IntLit,
    ListOf,
    Program,
    RecordDecl,
    RecordLit,
    RecordRef,
    SetOf,
    Span,
    StringOf,
    TextLit,
    TypeTag,
    Var,
    record_table,
)
from .typedict import Found, Stuck, TypeDict

# Stable machine-readable constraint identifiers, used in JSON reports.
NOT_MEMBER = "NotMember-violated"
LIST_OR_NX = "ListOrNX-violated"
SET_OR_NX = "SetOrNX-violated"
STRING_OR_NX = "StringOrNX-violated"
HASH_OR_NX = "HashOrNX-violated"
GET_EQUALITY = "GetEquality-failed"
GET_STUCK = "GetStuck"
ELEMENT_MISMATCH = "ElementTypeMismatch"
UNKNOWN_RECORD = "UnknownRecord"
UNKNOWN_VARIABLE = "UnknownVariable"
ARITY_MISMATCH = "ArityMismatch"


# ---- result types ----------------------------------------------------------


class ResultType:
    __slots__ = ()


@dataclass(frozen=True)
class StatusResult(ResultType):
    pass


@dataclass(frozen=True)
class IntResult(ResultType):
    pass


@dataclass(frozen=True)
class FloatResult(ResultType):
    pass


@dataclass(frozen=True)
class BoolResult(ResultType):
    pass


@dataclass(frozen=True)
class UnitResult(ResultType):
    pass


@dataclass(frozen=True)
class MaybeResult(ResultType):
    base: BaseType


@dataclass(frozen=True)
class ListResult(ResultType):
    base: BaseType


STATUS = StatusResult()
INT_RESULT = IntResult()
FLOAT_RESULT = FloatResult()
BOOL_RESULT = BoolResult()
UNIT = UnitResult()

_SCALAR_BASES: dict[type, BaseType] = {IntResult: INT, FloatResult: FLOAT, BoolResult: BOOL}


# ---- outcomes ---------------------------------------------------------------


class CheckError(Exception):
    """A violated precondition, located at one command."""

    def __init__(self, span: Span | None, opcode: str | None, constraint: str, detail: str):
        at = f"{span.line}:{span.col}: " if span else ""
        op = f"{opcode}: " if opcode else ""
        super().__init__(f"{at}{constraint}: {op}{detail}")
        self.span = span
        self.opcode = opcode
        self.constraint = constraint
        self.detail = detail


@dataclass
class CheckOk:
    initial: TypeDict
    final: TypeDict
    result: ResultType


CheckReport = CheckOk | CheckError


# ---- expressions ------------------------------------------------------------


def infer_expr(
    env: Mapping[str, ResultType],
    records: Mapping[str, RecordDecl],
    e: Expr,
) -> BaseType:
    """Base type of a value expression; raises CheckError (span-less)."""
    if isinstance(e, IntLit):
        return INT
    if isinstance(e, FloatLit):
        return FLOAT
    if isinstance(e, BoolLit):
        return BOOL
    if isinstance(e, TextLit):
        return TEXT
    if isinstance(e, Var):
        rt = env.get(e.name)
        if rt is None:
            raise CheckError(None, None, UNKNOWN_VARIABLE, f"no binder named '{e.name}' in scope")
        base = _SCALAR_BASES.get(type(rt))
        if base is None:
            raise CheckError(
                None,
                None,
                ELEMENT_MISMATCH,
                f"binder '{e.name}' has result type {result_text(rt)}, which cannot appear in an expression",
            )
        return base
    assert isinstance(e, RecordLit)
    decl = records.get(e.name)
    if decl is None:
        raise CheckError(None, None, UNKNOWN_RECORD, f"no record named '{e.name}' is declared")
    if len(e.args) != len(decl.fields):
        raise CheckError(
            None,
            None,
            ARITY_MISMATCH,
            f"record '{e.name}' has {len(decl.fields)} fields but {len(e.args)} arguments were given",
        )
    for (fname, fbase), arg in zip(decl.fields, e.args):
        got = infer_expr(env, records, arg)
        if got != fbase:
            raise CheckError(
                None,
                None,
                ELEMENT_MISMATCH,
                f"field '{fname}' of record '{e.name}' takes {_base_name(fbase)}, got {_base_name(got)}",
            )
    return RecordRef(e.name)


def _base_name(b: BaseType) -> str:
    if b == INT:
        return "int"
    if b == FLOAT:
        return "float"
    if b == BOOL:
        return "bool"
    if b == TEXT:
        return "text"
    assert isinstance(b, RecordRef)
    return b.name


def _tag_name(tag: TypeTag) -> str:
    if isinstance(tag, StringOf):
        return f"string<{_base_name(tag.base)}>"
    if isinstance(tag, ListOf):
        return f"list<{_base_name(tag.base)}>"
    if isinstance(tag, SetOf):
        return f"set<{_base_name(tag.base)}>"
    assert isinstance(tag, HashOf)
    return "hash<" + ", ".join(f"{n}: {_tag_name(t)}" for n, t in tag.fields) + ">"


def result_text(rt: ResultType) -> str:
    """Surface spelling of a result type, as used in reports."""
    if isinstance(rt, StatusResult):
        return "status"
    if isinstance(rt, IntResult):
        return "integer"
    if isinstance(rt, FloatResult):
        return "double"
    if isinstance(rt, BoolResult):
        return "boolean"
    if isinstance(rt, UnitResult):
        return "unit"
    if isinstance(rt, MaybeResult):
        return f"maybe<{_base_name(rt.base)}>"
    assert isinstance(rt, ListResult)
    return f"list<{_base_name(rt.base)}>"


def _check_tag_records(tag: TypeTag, records: Mapping[str, RecordDecl]) -> str | None:
    """Name of the first undeclared record referenced by ``tag``, if any."""
    if isinstance(tag, (StringOf, ListOf, SetOf)):
        base = tag.base
        if isinstance(base, RecordRef) and base.name not in records:
            return base.name
        return None
    assert isinstance(tag, HashOf)
    for _, ftag in tag.fields:
        bad = _check_tag_records(ftag, records)
        if bad:
            return bad
    return None


# ---- commands ---------------------------------------------------------------


def check_command(
    xs: TypeDict,
    env: Mapping[str, ResultType],
    records: Mapping[str, RecordDecl],
    cmd: Command,
    strict: bool = False,
) -> tuple[TypeDict, ResultType]:
    """Post-dictionary and result type of one command.

    Raises CheckError (with the command's span attached) on the first
    violated precondition.
    """
    try:
        return _check_command(xs, env, records, cmd, strict)
    except CheckError as err:
        if err.span is None:
            raise CheckError(cmd.span, cmd.opcode, err.constraint, err.detail) from None
        raise


def _found_tag(xs: TypeDict, k: str) -> TypeTag:
    look = typedict.dict_get(xs, k)
    if isinstance(look, Stuck):
        raise CheckError(None, None, GET_STUCK, f"key '{k}' is not in the dictionary")
    assert isinstance(look, Found)
    return look.tag


def _check_command(
    xs: TypeDict,
    env: Mapping[str, ResultType],
    records: Mapping[str, RecordDecl],
    cmd: Command,
    strict: bool,
) -> tuple[TypeDict, ResultType]:
    op = cmd.opcode

    if op == "ping":
        return xs, STATUS

    if op == "declare":
        k = cmd.keys[0]
        if typedict.dict_member(xs, k):
            raise CheckError(
                None, None, NOT_MEMBER, f"key '{k}' is already tracked as {_tag_name(_found_tag(xs, k))}"
            )
        assert cmd.declared is not None
        bad = _check_tag_records(cmd.declared, records)
        if bad:
            raise CheckError(None, None, UNKNOWN_RECORD, f"no record named '{bad}' is declared")
        return typedict.dict_set(xs, k, cmd.declared), UNIT

    if op == "set":
        k = cmd.keys[0]
        a = infer_expr(env, records, cmd.args[0])
        return typedict.dict_set(xs, k, StringOf(a)), STATUS

    if op == "setnx":
        k = cmd.keys[0]
        a = infer_expr(env, records, cmd.args[0])
        if typedict.dict_member(xs, k):
            tag = _found_tag(xs, k)
            if tag != StringOf(a):
                raise CheckError(
                    None,
                    None,
                    GET_EQUALITY,
                    f"key '{k}' is tracked as {_tag_name(tag)}, but setnx may write a "
                    f"string<{_base_name(a)}> if the key is unset",
                )
            return xs, BOOL_RESULT
        return typedict.dict_set(xs, k, StringOf(a)), BOOL_RESULT

    if op == "get":
        k = cmd.keys[0]
        tag = _found_tag(xs, k)
        if not isinstance(tag, StringOf):
            raise CheckError(
                None, None, GET_EQUALITY, f"key '{k}' holds {_tag_name(tag)}, not a string"
            )
        return xs, MaybeResult(tag.base)

    if op == "del":
        return typedict.dict_del(xs, cmd.keys[0]), INT_RESULT

    if op == "incr":
        k = cmd.keys[0]
        tag = _found_tag(xs, k)
        if tag != StringOf(INT):
            raise CheckError(
                None, None, GET_EQUALITY, f"key '{k}' holds {_tag_name(tag)}, not string<int>"
            )
        return xs, INT_RESULT

    if op == "incrbyfloat":
        k = cmd.keys[0]
        a = infer_expr(env, records, cmd.args[0])
        if a != FLOAT:
            raise CheckError(
                None, None, ELEMENT_MISMATCH, f"incrbyfloat takes a float increment, got {_base_name(a)}"
            )
        tag = _found_tag(xs, k)
        if tag != StringOf(FLOAT):
            raise CheckError(
                None, None, GET_EQUALITY, f"key '{k}' holds {_tag_name(tag)}, not string<float>"
            )
        return xs, FLOAT_RESULT

    if op == "lpush":
        k = cmd.keys[0]
        a = infer_expr(env, records, cmd.args[0])
        if not typedict.or_nx(typedict.is_list, xs, k):
            raise CheckError(
                None,
                None,
                LIST_OR_NX,
                f"key '{k}' holds {_tag_name(_found_tag(xs, k))}, not a list",
            )
        if strict:
            look = typedict.dict_get(xs, k)
            if isinstance(look, Found) and look.tag != ListOf(a):
                raise CheckError(
                    None,
                    None,
                    ELEMENT_MISMATCH,
                    f"key '{k}' holds {_tag_name(look.tag)}; cannot push {_base_name(a)} elements in strict mode",
                )
        return typedict.dict_set(xs, k, ListOf(a)), INT_RESULT

    if op == "llen":
        k = cmd.keys[0]
        if not typedict.or_nx(typedict.is_list, xs, k):
            raise CheckError(
                None,
                None,
                LIST_OR_NX,
                f"key '{k}' holds {_tag_name(_found_tag(xs, k))}, not a list",
            )
        return xs, INT_RESULT

    if op == "rpop":
        k = cmd.keys[0]
        tag = _found_tag(xs, k)
        if not isinstance(tag, ListOf):
            raise CheckError(
                None, None, GET_EQUALITY, f"key '{k}' holds {_tag_name(tag)}, not a list"
            )
        return xs, MaybeResult(tag.base)

    if op == "sadd":
        k = cmd.keys[0]
        a = infer_expr(env, records, cmd.args[0])
        if not typedict.or_nx(typedict.is_set, xs, k):
            raise CheckError(
                None,
                None,
                SET_OR_NX,
                f"key '{k}' holds {_tag_name(_found_tag(xs, k))}, not a set",
            )
        if strict:
            look = typedict.dict_get(xs, k)
            if isinstance(look, Found) and look.tag != SetOf(a):
                raise CheckError(
                    None,
                    None,
                    ELEMENT_MISMATCH,
                    f"key '{k}' holds {_tag_name(look.tag)}; cannot add {_base_name(a)} elements in strict mode",
                )
        return typedict.dict_set(xs, k, SetOf(a)), INT_RESULT

    if op == "sinter":
        k1, k2 = cmd.keys
        tags = []
        for k in (k1, k2):
            tag = _found_tag(xs, k)
            if not isinstance(tag, SetOf):
                raise CheckError(
                    None, None, GET_EQUALITY, f"key '{k}' holds {_tag_name(tag)}, not a set"
                )
            tags.append(tag)
        if tags[0].base != tags[1].base:
            raise CheckError(
                None,
                None,
                GET_EQUALITY,
                f"keys '{k1}' and '{k2}' hold {_tag_name(tags[0])} and {_tag_name(tags[1])}; "
                "sinter needs equal element types",
            )
        return xs, ListResult(tags[0].base)

    if op == "hset":
        k = cmd.keys[0]
        a = infer_expr(env, records, cmd.args[0])
        if not typedict.or_nx(typedict.is_hash, xs, k):
            raise CheckError(
                None,
                None,
                HASH_OR_NX,
                f"key '{k}' holds {_tag_name(_found_tag(xs, k))}, not a hash",
            )
        assert cmd.field_name is not None
        return typedict.hash_set(xs, k, cmd.field_name, StringOf(a)), BOOL_RESULT

    if op == "hget":
        k = cmd.keys[0]
        assert cmd.field_name is not None
        look = typedict.hash_get(xs, k, cmd.field_name)
        if isinstance(look, Stuck):
            raise CheckError(
                None,
                None,
                GET_STUCK,
                f"no hash field '{cmd.field_name}' is tracked under key '{k}'",
            )
        assert isinstance(look, Found)
        if not isinstance(look.tag, StringOf):
            raise CheckError(
                None,
                None,
                GET_EQUALITY,
                f"field '{cmd.field_name}' of '{k}' holds {_tag_name(look.tag)}, not a string",
            )
        return xs, MaybeResult(look.tag.base)

    raise CheckError(None, None, ARITY_MISMATCH, f"unknown command '{op}'")


# ---- programs ---------------------------------------------------------------


def check_program(
    program: Program,
    initial: TypeDict | None = None,
    strict: bool = False,
) -> CheckReport:
    """Check a whole program; total, returns CheckOk or the first CheckError."""
    records = record_table(program)
    xs: TypeDict = list(initial) if initial else []
    start: TypeDict = list(xs)
    env: dict[str, ResultType] = {}
    result: ResultType = UNIT
    for cmd in program.body:
        try:
            xs, result = check_command(xs, env, records, cmd, strict)
        except CheckError as err:
            return err
        if cmd.binder is not None:
            env[cmd.binder] = result
    return CheckOk(start, xs, result)
