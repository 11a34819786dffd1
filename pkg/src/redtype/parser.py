"""Surface syntax: lexer, parser, and pretty printer.

The grammar is whitespace-insensitive with '#' line comments.  Keys and
hash fields are bare symbols and may contain hyphens (some-set); binder
and record names must avoid the reserved words so that printed programs
re-lex unambiguously.  ``print_program`` emits a canonical form that
parses back to a structurally equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    BOOL,
    FLOAT,
    INT,
    OPCODES,
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
)

_BASE_KEYWORDS = {"int": INT, "float": FLOAT, "bool": BOOL, "text": TEXT}
_TAG_KEYWORDS = {"string", "list", "set", "hash"}

RESERVED = frozenset(OPCODES) | _TAG_KEYWORDS | set(_BASE_KEYWORDS) | {
    "program",
    "record",
    "true",
    "false",
}


class ParseError(Exception):
    def __init__(self, line: int, column: int, expected: str, found: str):
        super().__init__(f"{line}:{column}: expected {expected}, found {found}")
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT INT FLOAT STRING LBRACE RBRACE LT GT COLON COMMA ARROW EOF
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "STRING":
            return "text literal"
        return f"'{self.text}'"


def _ident_start(c: str) -> bool:
    return c.isascii() and (c.isalpha() or c == "_")


def _ident_cont(c: str) -> bool:
    return c.isascii() and (c.isalnum() or c in "_-")


def _digit(c: str) -> bool:
    # Not str.isdigit(): that accepts superscripts and other Unicode
    # digits that int()/float() reject.
    return "0" <= c <= "9"


_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}

_PUNCT = {"{": "LBRACE", "}": "RBRACE", "<": "LT", ">": "GT", ":": "COLON", ",": "COMMA"}


def _lex(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def bump(text: str) -> None:
        nonlocal line, col
        for c in text:
            if c == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            bump(c)
            i += 1
            continue
        if c == "#":
            j = source.find("\n", i)
            if j == -1:
                j = n
            bump(source[i:j])
            i = j
            continue

        start_line, start_col = line, col

        if _ident_start(c):
            j = i + 1
            while j < n and _ident_cont(source[j]):
                j += 1
            text = source[i:j]
            tokens.append(_Token("IDENT", text, start_line, start_col))
            bump(text)
            i = j
            continue

        if _digit(c) or (c == "-" and i + 1 < n and _digit(source[i + 1])):
            j = i + 1
            while j < n and _digit(source[j]):
                j += 1
            kind = "INT"
            if j < n and source[j] == "." and j + 1 < n and _digit(source[j + 1]):
                kind = "FLOAT"
                j += 1
                while j < n and _digit(source[j]):
                    j += 1
                if j < n and source[j] in "eE":
                    k = j + 1
                    if k < n and source[k] in "+-":
                        k += 1
                    if k < n and _digit(source[k]):
                        while k < n and _digit(source[k]):
                            k += 1
                        j = k
                    else:
                        raise ParseError(start_line, start_col, "exponent digits", "malformed float literal")
            text = source[i:j]
            tokens.append(_Token(kind, text, start_line, start_col))
            bump(text)
            i = j
            continue

        if c == '"':
            bump(c)
            i += 1
            chars: list[str] = []
            while True:
                if i >= n:
                    raise ParseError(start_line, start_col, "closing '\"'", "end of input")
                c = source[i]
                if c == '"':
                    bump(c)
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError(line, col, "escape character", "end of input")
                    esc = source[i + 1]
                    if esc not in _ESCAPES:
                        raise ParseError(line, col, "one of \\\" \\\\ \\n \\t", f"'\\{esc}'")
                    chars.append(_ESCAPES[esc])
                    bump(source[i : i + 2])
                    i += 2
                    continue
                chars.append(c)
                bump(c)
                i += 1
            tokens.append(_Token("STRING", "".join(chars), start_line, start_col))
            continue

        if c == "<" and i + 1 < n and source[i + 1] == "-":
            tokens.append(_Token("ARROW", "<-", start_line, start_col))
            bump("<-")
            i += 2
            continue

        if c in _PUNCT:
            tokens.append(_Token(_PUNCT[c], c, start_line, start_col))
            bump(c)
            i += 1
            continue

        raise ParseError(start_line, start_col, "a token", f"character {c!r}")

    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, expected: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(tok.line, tok.col, expected, tok.describe())

    def expect(self, kind: str, expected: str) -> _Token:
        if self.peek().kind != kind:
            raise self.fail(expected)
        return self.advance()

    def expect_word(self, word: str) -> _Token:
        t = self.peek()
        if t.kind != "IDENT" or t.text != word:
            raise self.fail(f"'{word}'")
        return self.advance()

    def ident(self, expected: str) -> _Token:
        return self.expect("IDENT", expected)

    def fresh_name(self, role: str) -> _Token:
        t = self.ident(f"{role} name")
        if t.text in RESERVED:
            raise ParseError(t.line, t.col, f"{role} name", f"reserved word '{t.text}'")
        return t

    # ---- grammar productions ------------------------------------------

    def program(self) -> Program:
        records: list[RecordDecl] = []
        seen_records: set[str] = set()
        while self.peek().kind == "IDENT" and self.peek().text == "record":
            records.append(self.record_decl(seen_records))
        self.expect_word("program")
        self.expect("LBRACE", "'{'")
        body: list[Command] = []
        binders: set[str] = set()
        while not (self.peek().kind == "RBRACE"):
            if self.peek().kind == "EOF":
                raise self.fail("'}'")
            body.append(self.statement(binders))
        self.advance()  # RBRACE
        if self.peek().kind != "EOF":
            raise self.fail("end of input")
        return Program(tuple(records), tuple(body))

    def record_decl(self, seen_records: set[str]) -> RecordDecl:
        self.expect_word("record")
        name = self.fresh_name("record")
        if name.text in seen_records:
            raise ParseError(name.line, name.col, "a new record name", f"duplicate record '{name.text}'")
        seen_records.add(name.text)
        self.expect("LBRACE", "'{'")
        fields: list[tuple[str, BaseType]] = []
        seen: set[str] = set()
        while True:
            fname = self.ident("field name")
            if fname.text in seen:
                raise ParseError(fname.line, fname.col, "a new field name", f"duplicate field '{fname.text}'")
            seen.add(fname.text)
            self.expect("COLON", "':'")
            base = self.base_type(allow_record=False)
            fields.append((fname.text, base))
            if self.peek().kind == "COMMA":
                self.advance()
                continue
            break
        self.expect("RBRACE", "'}'")
        return RecordDecl(name.text, tuple(fields))

    def base_type(self, allow_record: bool) -> BaseType:
        t = self.ident("a base type")
        if t.text in _BASE_KEYWORDS:
            return _BASE_KEYWORDS[t.text]
        if not allow_record:
            raise ParseError(t.line, t.col, "a scalar base type (int, float, bool, text)", f"'{t.text}'")
        if t.text in RESERVED:
            raise ParseError(t.line, t.col, "a base type", f"reserved word '{t.text}'")
        return RecordRef(t.text)

    def type_tag(self) -> TypeTag:
        t = self.ident("a type tag (string, list, set, hash)")
        if t.text in ("string", "list", "set"):
            self.expect("LT", "'<'")
            base = self.base_type(allow_record=True)
            self.expect("GT", "'>'")
            return {"string": StringOf, "list": ListOf, "set": SetOf}[t.text](base)
        if t.text == "hash":
            self.expect("LT", "'<'")
            fields: list[tuple[str, TypeTag]] = []
            seen: set[str] = set()
            while True:
                fname = self.ident("hash field name")
                if fname.text in seen:
                    raise ParseError(fname.line, fname.col, "a new hash field", f"duplicate field '{fname.text}'")
                seen.add(fname.text)
                self.expect("COLON", "':'")
                ftag_tok = self.peek()
                ftag = self.type_tag()
                if not isinstance(ftag, StringOf):
                    raise ParseError(
                        ftag_tok.line, ftag_tok.col, "a string<...> field tag", tag_text(ftag)
                    )
                fields.append((fname.text, ftag))
                if self.peek().kind == "COMMA":
                    self.advance()
                    continue
                break
            self.expect("GT", "'>'")
            return HashOf(tuple(fields))
        raise ParseError(t.line, t.col, "a type tag (string, list, set, hash)", f"'{t.text}'")

    def statement(self, binders: set[str]) -> Command:
        t = self.peek()
        if t.kind != "IDENT":
            raise self.fail("a command")
        binder: str | None = None
        if t.text not in OPCODES:
            name = self.fresh_name("binder")
            if name.text in binders:
                raise ParseError(name.line, name.col, "a new binder name", f"duplicate binder '{name.text}'")
            binders.add(name.text)
            binder = name.text
            self.expect("ARROW", "'<-'")
            t = self.peek()
            if t.kind != "IDENT" or t.text not in OPCODES:
                raise self.fail("a command")
        op_tok = self.advance()
        return self.command(op_tok, binder)

    def command(self, op_tok: _Token, binder: str | None) -> Command:
        op = op_tok.text
        span = Span(op_tok.line, op_tok.col)
        if op == "ping":
            return Command("ping", binder=binder, span=span)
        if op == "declare":
            key = self.ident("a key")
            self.expect("COLON", "':'")
            tag = self.type_tag()
            return Command("declare", keys=(key.text,), declared=tag, binder=binder, span=span)
        if op == "sinter":
            k1 = self.ident("a key")
            k2 = self.ident("a key")
            return Command("sinter", keys=(k1.text, k2.text), binder=binder, span=span)
        if op in ("hset", "hget"):
            key = self.ident("a key")
            fld = self.ident("a hash field")
            if op == "hset":
                value = self.expr()
                return Command(
                    "hset", keys=(key.text,), args=(value,), field_name=fld.text, binder=binder, span=span
                )
            return Command("hget", keys=(key.text,), field_name=fld.text, binder=binder, span=span)
        if op in ("set", "setnx", "lpush", "sadd", "incrbyfloat"):
            key = self.ident("a key")
            value = self.expr()
            return Command(op, keys=(key.text,), args=(value,), binder=binder, span=span)
        # get / del / incr / llen / rpop
        key = self.ident("a key")
        return Command(op, keys=(key.text,), binder=binder, span=span)

    def expr(self) -> Expr:
        t = self.peek()
        if t.kind == "INT":
            self.advance()
            return IntLit(int(t.text))
        if t.kind == "FLOAT":
            self.advance()
            value = float(t.text)
            if value in (float("inf"), float("-inf")):
                raise ParseError(t.line, t.col, "a representable float", "literal out of range")
            return FloatLit(value)
        if t.kind == "STRING":
            self.advance()
            return TextLit(t.text)
        if t.kind == "IDENT":
            self.advance()
            if t.text == "true":
                return BoolLit(True)
            if t.text == "false":
                return BoolLit(False)
            if self.peek().kind == "LBRACE":
                self.advance()
                args = [self.expr()]
                while self.peek().kind == "COMMA":
                    self.advance()
                    args.append(self.expr())
                self.expect("RBRACE", "'}'")
                return RecordLit(t.text, tuple(args))
            return Var(t.text)
        raise self.fail("an expression")


def parse_program(source: str) -> Program:
    """Parse a full source file.  Raises ParseError with line/column."""
    return _Parser(_lex(source)).program()


def parse_type_tag(text: str) -> TypeTag:
    """Parse a standalone type tag, e.g. from an assumption file."""
    p = _Parser(_lex(text))
    tag = p.type_tag()
    if p.peek().kind != "EOF":
        raise p.fail("end of input")
    return tag


# ---------------------------------------------------------------------------
# pretty printing


def base_text(b: BaseType) -> str:
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


def tag_text(tag: TypeTag) -> str:
    if isinstance(tag, StringOf):
        return f"string<{base_text(tag.base)}>"
    if isinstance(tag, ListOf):
        return f"list<{base_text(tag.base)}>"
    if isinstance(tag, SetOf):
        return f"set<{base_text(tag.base)}>"
    assert isinstance(tag, HashOf)
    inner = ", ".join(f"{name}: {tag_text(t)}" for name, t in tag.fields)
    return f"hash<{inner}>"


def float_text(value: float) -> str:
    """Shortest float form that the lexer accepts (always has a '.')."""
    s = repr(value)
    if "e" in s or "E" in s:
        mantissa, _, exponent = s.partition("e")
        if "." not in mantissa:
            mantissa += ".0"
        return f"{mantissa}e{exponent}"
    if "." not in s:
        s += ".0"
    return s


def text_literal(value: str) -> str:
    out = ['"']
    for c in value:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        else:
            out.append(c)
    out.append('"')
    return "".join(out)


def expr_text(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, FloatLit):
        return float_text(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, TextLit):
        return text_literal(e.value)
    if isinstance(e, Var):
        return e.name
    assert isinstance(e, RecordLit)
    return f"{e.name}{{{', '.join(expr_text(a) for a in e.args)}}}"


def command_text(c: Command) -> str:
    head = f"{c.binder} <- " if c.binder else ""
    if c.opcode == "ping":
        return head + "ping"
    if c.opcode == "declare":
        return head + f"declare {c.keys[0]} : {tag_text(c.declared)}"
    if c.opcode == "sinter":
        return head + f"sinter {c.keys[0]} {c.keys[1]}"
    if c.opcode == "hset":
        return head + f"hset {c.keys[0]} {c.field_name} {expr_text(c.args[0])}"
    if c.opcode == "hget":
        return head + f"hget {c.keys[0]} {c.field_name}"
    if c.args:
        return head + f"{c.opcode} {c.keys[0]} {expr_text(c.args[0])}"
    return head + f"{c.opcode} {c.keys[0]}"


def print_program(p: Program) -> str:
    lines: list[str] = []
    for r in p.records:
        fields = ", ".join(f"{name}: {base_text(b)}" for name, b in r.fields)
        lines.append(f"record {r.name} {{ {fields} }}")
    lines.append("program {")
    for c in p.body:
        lines.append("  " + command_text(c))
    lines.append("}")
    return "\n".join(lines) + "\n"
