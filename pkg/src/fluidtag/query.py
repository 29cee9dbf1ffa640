"""Query language: recursive-descent parser, renderer, and two evaluators.

Five query forms: presence (`has user/tag`), numeric comparison
(`user/tag > 4`), textual match (`user/tag matches word`), set contents
(`user/tag contains word`), and the logical combinators `and`, `or`,
`except`.  `and`/`except` bind tighter than `or`; same-level operators
associate left; keywords are case-insensitive while paths stay
case-sensitive.

Equality comparisons additionally accept the literals `true`/`false` so the
toolkit-membership workflow (`einsteintoolkit.org/includes = True`) works;
boolean operands match only boolean instances and support `=`/`!=` only.

`eval_query` answers from the store indexes; `brute_force_eval` is the
index-free oracle with the identical contract, used to cross-check it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from fluidtag.errors import QuerySyntaxError
from fluidtag.model import parse_tag_path
from fluidtag.store import TagStore, tokenize_text

NUMERIC_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Presence:
    tag: str


@dataclass(frozen=True)
class Numeric:
    tag: str
    op: str
    value: object  # int | float, or bool for =/!= literals


@dataclass(frozen=True)
class Textual:
    tag: str
    text: str


@dataclass(frozen=True)
class SetContains:
    tag: str
    text: str


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Except:
    left: object
    right: object


# --------------------------------------------------------------------- lexer

_WORD_RE = re.compile(r"[A-Za-z0-9_.\-/+]+")
_INT_RE = re.compile(r"-?\d+\Z")
_ESCAPES = {"n": "\n", "t": "\t"}


@dataclass(frozen=True)
class _Token:
    kind: str  # word | quoted | op | lparen | rparen
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "(":
            out.append(_Token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            out.append(_Token("rparen", c, i))
            i += 1
            continue
        if c == '"':
            j = i + 1
            buf = []
            closed = False
            while j < n:
                ch = text[j]
                if ch == "\\":
                    if j + 1 >= n:
                        raise QuerySyntaxError("dangling escape", pos=j)
                    nxt = text[j + 1]
                    buf.append(_ESCAPES.get(nxt, nxt))
                    j += 2
                    continue
                if ch == '"':
                    closed = True
                    break
                buf.append(ch)
                j += 1
            if not closed:
                raise QuerySyntaxError("unterminated string", pos=i)
            out.append(_Token("quoted", "".join(buf), i))
            i = j + 1
            continue
        if text[i:i + 2] in ("<=", ">=", "!="):
            out.append(_Token("op", text[i:i + 2], i))
            i += 2
            continue
        if c in "=<>":
            out.append(_Token("op", c, i))
            i += 1
            continue
        m = _WORD_RE.match(text, i)
        if m:
            out.append(_Token("word", m.group(), i))
            i = m.end()
            continue
        raise QuerySyntaxError(f"unexpected character {c!r}", pos=i)
    return out


# -------------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def advance(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("unexpected end of query", pos=len(self.text))
        self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "word" and tok.text.lower() in words

    def expr(self):
        node = self.and_expr()
        while self.at_keyword("or"):
            self.advance()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self):
        node = self.unary()
        while self.at_keyword("and", "except"):
            kw = self.advance().text.lower()
            right = self.unary()
            node = And(node, right) if kw == "and" else Except(node, right)
        return node

    def unary(self):
        tok = self.peek()
        if tok is not None and tok.kind == "lparen":
            self.advance()
            node = self.expr()
            closing = self.peek()
            if closing is None or closing.kind != "rparen":
                raise QuerySyntaxError("unbalanced parentheses", pos=tok.pos)
            self.advance()
            return node
        return self.atom()

    def _path(self, tok: _Token) -> str:
        try:
            return str(parse_tag_path(tok.text))
        except Exception:
            raise QuerySyntaxError(f"expected tag path, got {tok.text!r}", pos=tok.pos) from None

    def atom(self):
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("expected a query term", pos=len(self.text))
        if self.at_keyword("has"):
            self.advance()
            path_tok = self.advance()
            if path_tok.kind != "word":
                raise QuerySyntaxError("expected tag path after 'has'", pos=path_tok.pos)
            return Presence(self._path(path_tok))
        if tok.kind != "word":
            raise QuerySyntaxError(f"unexpected token {tok.text!r}", pos=tok.pos)
        tag = self._path(self.advance())
        op_tok = self.peek()
        if op_tok is None:
            raise QuerySyntaxError("expected an operator after tag path", pos=len(self.text))
        if op_tok.kind == "op":
            self.advance()
            return self._comparison(tag, op_tok)
        if op_tok.kind == "word" and op_tok.text.lower() in ("matches", "contains"):
            self.advance()
            operand = self.advance()
            if operand.kind not in ("word", "quoted"):
                raise QuerySyntaxError("expected text operand", pos=operand.pos)
            if not operand.text:
                raise QuerySyntaxError("empty text operand", pos=operand.pos)
            if op_tok.text.lower() == "matches":
                return Textual(tag, operand.text)
            return SetContains(tag, operand.text)
        raise QuerySyntaxError(f"unknown operator {op_tok.text!r}", pos=op_tok.pos)

    def _comparison(self, tag: str, op_tok: _Token):
        operand = self.advance()
        if operand.kind != "word":
            raise QuerySyntaxError("expected a number", pos=operand.pos)
        word = operand.text
        if word.lower() in ("true", "false"):
            if op_tok.text not in ("=", "!="):
                raise QuerySyntaxError(
                    f"boolean literals support = and != only, not {op_tok.text!r}",
                    pos=op_tok.pos)
            return Numeric(tag, op_tok.text, word.lower() == "true")
        try:
            number = int(word) if _INT_RE.match(word) else float(word)
        except ValueError:
            raise QuerySyntaxError(f"expected a number, got {word!r}",
                                   pos=operand.pos) from None
        if number != number or number in (float("inf"), float("-inf")):
            raise QuerySyntaxError("numbers must be finite", pos=operand.pos)
        return Numeric(tag, op_tok.text, number)


def parse_query(text: str):
    parser = _Parser(text)
    if parser.peek() is None:
        raise QuerySyntaxError("empty query", pos=0)
    node = parser.expr()
    trailing = parser.peek()
    if trailing is not None:
        raise QuerySyntaxError(f"unexpected trailing input {trailing.text!r}",
                               pos=trailing.pos)
    return node


# ------------------------------------------------------------------ renderer

def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _render_operand(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def render_query(ast) -> str:
    """Fully parenthesized text form; parsing it recovers the same tree."""
    if isinstance(ast, Presence):
        return f"has {ast.tag}"
    if isinstance(ast, Numeric):
        return f"{ast.tag} {ast.op} {_render_operand(ast.value)}"
    if isinstance(ast, Textual):
        return f'{ast.tag} matches "{_escape(ast.text)}"'
    if isinstance(ast, SetContains):
        return f'{ast.tag} contains "{_escape(ast.text)}"'
    if isinstance(ast, And):
        return f"({render_query(ast.left)} and {render_query(ast.right)})"
    if isinstance(ast, Or):
        return f"({render_query(ast.left)} or {render_query(ast.right)})"
    if isinstance(ast, Except):
        return f"({render_query(ast.left)} except {render_query(ast.right)})"
    raise TypeError(f"not a query node: {ast!r}")


# ----------------------------------------------------------------- evaluator

def _compare(op: str, left, right) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def _contiguous(haystack: list[str], needle: list[str]) -> bool:
    if not needle:
        return False
    limit = len(haystack) - len(needle)
    return any(haystack[i:i + len(needle)] == needle for i in range(limit + 1))


def eval_query(store: TagStore, ast, actor: str | None) -> set[str]:
    """Index-backed evaluation.  Instances whose tag the actor cannot read
    are treated as absent, so shrinking rights never grows a result."""
    if isinstance(ast, And):
        return eval_query(store, ast.left, actor) & eval_query(store, ast.right, actor)
    if isinstance(ast, Or):
        return eval_query(store, ast.left, actor) | eval_query(store, ast.right, actor)
    if isinstance(ast, Except):
        return eval_query(store, ast.left, actor) - eval_query(store, ast.right, actor)

    if not store.tag_readable(ast.tag, actor):
        return set()
    if isinstance(ast, Presence):
        return set(store.presence_index(ast.tag))
    if isinstance(ast, Numeric):
        buckets = store.primitive_index(ast.tag)
        if isinstance(ast.value, bool):
            if ast.op == "=":
                return set(buckets.get(("bool", ast.value), set()))
            return set(buckets.get(("bool", not ast.value), set()))
        out: set[str] = set()
        for key, ids in buckets.items():
            if key[0] == "num" and _compare(ast.op, key[1], ast.value):
                out |= ids
        return out
    if isinstance(ast, Textual):
        needle = tokenize_text(ast.text)
        if not needle:
            return set()
        token_buckets = store.token_index(ast.tag)
        candidates: set[str] | None = None
        for token in needle:
            ids = token_buckets.get(token)
            if not ids:
                return set()
            candidates = set(ids) if candidates is None else candidates & ids
        if len(needle) == 1:
            return candidates
        out = set()
        for oid in candidates:
            value = store.visible_instance(actor, oid, ast.tag)
            if value is not None and value.kind == "string" and \
                    _contiguous(tokenize_text(value.payload), needle):
                out.add(oid)
        return out
    if isinstance(ast, SetContains):
        return set(store.primitive_index(ast.tag).get(("elem", ast.text), set()))
    raise TypeError(f"not a query node: {ast!r}")


def brute_force_eval(store: TagStore, ast, actor: str | None) -> set[str]:
    """Reference evaluator: full scan of every object, no index use."""
    return {oid for oid in store.all_object_ids() if _holds(store, ast, oid, actor)}


_BRUTE_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def _holds(store: TagStore, ast, oid: str, actor: str | None) -> bool:
    if isinstance(ast, And):
        return _holds(store, ast.left, oid, actor) and _holds(store, ast.right, oid, actor)
    if isinstance(ast, Or):
        return _holds(store, ast.left, oid, actor) or _holds(store, ast.right, oid, actor)
    if isinstance(ast, Except):
        return _holds(store, ast.left, oid, actor) and not _holds(store, ast.right, oid, actor)

    value = store.visible_instance(actor, oid, ast.tag)
    if value is None:
        return False
    if isinstance(ast, Presence):
        return True
    if isinstance(ast, Numeric):
        if isinstance(ast.value, bool):
            return value.kind == "boolean" and _compare(ast.op, value.payload, ast.value)
        return value.kind in ("integer", "float") and _compare(ast.op, value.payload, ast.value)
    if isinstance(ast, Textual):
        if value.kind != "string":
            return False
        hay = _BRUTE_TOKEN_RE.findall(value.payload.casefold())
        needle = _BRUTE_TOKEN_RE.findall(ast.text.casefold())
        return _contiguous(hay, needle)
    if isinstance(ast, SetContains):
        return value.kind == "string-set" and ast.text in value.payload
    raise TypeError(f"not a query node: {ast!r}")
