"""Minimal s-expression reader for proof files.

Atoms are symbols, keywords (``:name``), integers and double-quoted strings.
Lists are Python lists; strings are returned as ``Str`` to keep them apart
from symbols. ``;`` starts a comment.
"""
from __future__ import annotations

import re


class SexpError(Exception):
    def __init__(self, msg, line, col):
        self.line, self.col = line, col
        super().__init__(f"line {line}, col {col}: {msg}")


class Str(str):
    """A quoted string atom."""


class Sym(str):
    """A bare symbol or keyword."""


_TOKEN = re.compile(r'''\s+|;[^\n]*|(?P<open>\()|(?P<close>\))|"(?P<str>(?:[^"\\]|\\.)*)"|(?P<atom>[^\s()";]+)''')


def _pos(text, i):
    line = text.count("\n", 0, i) + 1
    return line, i - (text.rfind("\n", 0, i) + 1) + 1


def _tokens(text):
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise SexpError("unterminated string" if text[i] == '"' else f"bad character {text[i]!r}",
                            *_pos(text, i))
        if m.group("open"):
            yield "(", None, i
        elif m.group("close"):
            yield ")", None, i
        elif m.group("str") is not None:
            raw = m.group("str")
            yield "str", Str(re.sub(r"\\(.)", r"\1", raw)), i
        elif m.group("atom"):
            a = m.group("atom")
            yield "atom", (int(a) if re.fullmatch(r"-?\d+", a) else Sym(a)), i
        i = m.end()


def read(text: str):
    """Parse exactly one s-expression."""
    stack: list = [[]]
    starts: list = []
    for kind, val, i in _tokens(text):
        if kind == "(":
            stack.append([])
            starts.append(i)
        elif kind == ")":
            if len(stack) == 1:
                raise SexpError("unbalanced ')'", *_pos(text, i))
            done = stack.pop()
            starts.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(val)
    if len(stack) > 1:
        raise SexpError("unclosed '('", *_pos(text, starts[-1]))
    if len(stack[0]) != 1:
        raise SexpError(f"expected one expression, found {len(stack[0])}", 1, 1)
    return stack[0][0]


def split_args(items: list):
    """Separate ``:key value`` pairs from positional items."""
    kw, pos = {}, []
    i = 0
    while i < len(items):
        x = items[i]
        if isinstance(x, Sym) and x.startswith(":"):
            if i + 1 >= len(items):
                raise ValueError(f"keyword {x} without a value")
            kw[x[1:]] = items[i + 1]
            i += 2
        else:
            pos.append(x)
            i += 1
    return kw, pos


def dump(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(dump(y) for y in x) + ")"
    if isinstance(x, Str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return str(x)
