"""A small boolean language over test assignments.

Grammar::

    expr    := conj ("or" conj)*
    conj    := unary ("and" unary)*
    unary   := "not" unary | atom
    atom    := "(" expr ")" | "true" | "false"
             | "covered" "(" INT ("," INT)* ")"
             | NAME OP VALUE
             | NAME ["not"] "in" "{" VALUE ("," VALUE)* "}"
    OP      := "=" | "==" | "!=" | "≠" | "<" | "<=" | "≤" | ">" | ">=" | "≥"

Values are bare tokens or quoted strings. ``=``/``!=``/``in`` compare tokens
as strings; the ordering operators require both sides to be numeric.
``covered(n, ...)`` is true when every listed code unit was executed.
"""
from __future__ import annotations

import re
from typing import Callable, Iterable, Mapping

Predicate = Callable[[Mapping[str, str], frozenset], bool]


class GuardError(ValueError):
    pass


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<op><=|>=|==|!=|[=<>≤≥≠])
      | (?P<punct>[(){},])
      | (?P<str>"[^"]*"|'[^']*')
      | (?P<word>[^\s(){},=<>!≤≥≠"']+)
    )""",
    re.VERBOSE,
)

_KEYWORDS = {"and", "or", "not", "in", "true", "false", "covered"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GuardError(f"cannot parse guard {text!r} near {text[pos:]!r}")
        pos = m.end()
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "str":
            kind, value = "value", value[1:-1]
        out.append((kind, value))
    return out


def _number(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise GuardError(f"ordering comparison needs a numeric value, got {token!r}") from None


_ORDER = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "≤": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "≥": lambda a, b: a >= b,
}


class _Parser:
    def __init__(self, text: str, names: set[str] | None, allow_covered: bool):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.names = names
        self.allow_covered = allow_covered
        self.referenced: set[str] = set()

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise GuardError(f"unexpected end of guard {self.text!r}")
        if expected is not None and tok[1] != expected:
            raise GuardError(f"expected {expected!r} in guard {self.text!r}, found {tok[1]!r}")
        self.pos += 1
        return tok

    def at_word(self, word: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "word" and tok[1] == word

    def parse(self) -> Predicate:
        pred = self.disjunction()
        if self.peek() is not None:
            raise GuardError(f"trailing input in guard {self.text!r}: {self.peek()[1]!r}")
        return pred

    def disjunction(self) -> Predicate:
        parts = [self.conjunction()]
        while self.at_word("or"):
            self.take()
            parts.append(self.conjunction())
        if len(parts) == 1:
            return parts[0]
        return lambda a, c: any(p(a, c) for p in parts)

    def conjunction(self) -> Predicate:
        parts = [self.unary()]
        while self.at_word("and"):
            self.take()
            parts.append(self.unary())
        if len(parts) == 1:
            return parts[0]
        return lambda a, c: all(p(a, c) for p in parts)

    def unary(self) -> Predicate:
        if self.at_word("not"):
            self.take()
            inner = self.unary()
            return lambda a, c: not inner(a, c)
        return self.atom()

    def value(self) -> str:
        kind, text = self.take()
        if kind not in ("word", "value"):
            raise GuardError(f"expected a value in guard {self.text!r}, found {text!r}")
        return text

    def value_set(self) -> frozenset[str]:
        self.take("{")
        values = {self.value()}
        while self.peek() and self.peek()[1] == ",":
            self.take()
            values.add(self.value())
        self.take("}")
        return frozenset(values)

    def atom(self) -> Predicate:
        kind, text = self.take()
        if text == "(" and kind == "punct":
            inner = self.disjunction()
            self.take(")")
            return inner
        if kind != "word":
            raise GuardError(f"unexpected {text!r} in guard {self.text!r}")
        if text == "true":
            return lambda a, c: True
        if text == "false":
            return lambda a, c: False
        if text == "covered":
            if not self.allow_covered:
                raise GuardError(f"covered() is only allowed in kill guards: {self.text!r}")
            self.take("(")
            units = {self._int(self.value())}
            while self.peek() and self.peek()[1] == ",":
                self.take()
                units.add(self._int(self.value()))
            self.take(")")
            need = frozenset(units)
            return lambda a, c: need <= c
        if text in _KEYWORDS:
            raise GuardError(f"unexpected keyword {text!r} in guard {self.text!r}")

        name = text
        if self.names is not None and name not in self.names:
            raise GuardError(f"guard {self.text!r} references unknown parameter {name!r}")
        self.referenced.add(name)

        negate = False
        if self.at_word("not"):
            self.take()
            negate = True
            if not self.at_word("in"):
                raise GuardError(f"expected 'in' after 'not' in guard {self.text!r}")
        if self.at_word("in"):
            self.take()
            options = self.value_set()
            if negate:
                return lambda a, c: a[name] not in options
            return lambda a, c: a[name] in options

        kind, op = self.take()
        if kind != "op":
            raise GuardError(f"expected a comparison after {name!r} in guard {self.text!r}")
        rhs = self.value()
        if op in ("=", "=="):
            return lambda a, c: a[name] == rhs
        if op in ("!=", "≠"):
            return lambda a, c: a[name] != rhs
        bound = _number(rhs)
        cmp = _ORDER[op]
        return lambda a, c: cmp(_number(a[name]), bound)

    @staticmethod
    def _int(token: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise GuardError(f"covered() takes integer unit ids, got {token!r}") from None


class Guard:
    """A compiled guard expression."""

    def __init__(self, text: str, names: Iterable[str] | None = None, allow_covered: bool = False):
        self.text = str(text).strip()
        parser = _Parser(self.text, set(names) if names is not None else None, allow_covered)
        self._pred = parser.parse()
        self.referenced = frozenset(parser.referenced)

    def __call__(self, assignment: Mapping[str, str], covered: Iterable[int] = frozenset()) -> bool:
        try:
            return bool(self._pred(assignment, frozenset(covered)))
        except KeyError as exc:
            raise GuardError(f"guard {self.text!r}: assignment lacks parameter {exc.args[0]!r}") from None

    def __repr__(self) -> str:
        return f"Guard({self.text!r})"
