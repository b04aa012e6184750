"""Recursive-descent parser for ``.pw`` programs and relational assertions."""
from __future__ import annotations

import re
from fractions import Fraction

from . import ast as A


class ParseError(Exception):
    def __init__(self, msg, line=None, col=None):
        self.msg = msg
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + msg)


KEYWORDS = {
    "program", "param", "var", "fun", "begin", "end", "skip", "abort", "if",
    "then", "else", "while", "for", "to", "true", "false", "uniform", "flip",
    "forall", "exists", "in",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:@\d+)?)
  | (?P<op><==>|==>|<\$|:=|->|::|\+\+|&&|\|\||!=|<=|>=|[=<>+\-*/%^!(){}\[\],;:.])
""", re.VERBOSE)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            word = m.group()
            if kind == "ident" and word in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, word, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, text: str, relational: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.relational = relational

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text, kind=None) -> bool:
        t = self.tok
        return t.text == text and t.kind != "eof" and (kind is None or t.kind == kind)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance().text

    def number(self) -> int:
        if self.tok.kind != "num":
            self.error(f"expected number, found {self.tok.text or 'end of input'!r}")
        return int(self.advance().text)

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def loc(self):
        return (self.tok.line, self.tok.col)

    def done(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # -- programs
    def program(self) -> A.Program:
        self.expect("program")
        name = self.ident()
        params, funcs, vars_ = [], [], []
        seen: set = set()

        def declare(n, tok):
            if n in seen:
                self.error(f"duplicate declaration of {n!r}", tok)
            seen.add(n)

        while self.at("param"):
            loc = self.loc()
            self.advance()
            tok = self.tok
            pname = self.ident()
            declare(pname, tok)
            self.expect(":")
            ptype = self.type_()
            default = None
            if self.accept("="):
                default = self.rational() if isinstance(ptype, A.TRat) else self.expr()
            self.accept(";")
            params.append(A.Param(pname, ptype, default, loc=loc))
        while self.at("var") or self.at("fun"):
            loc = self.loc()
            if self.accept("fun"):
                tok = self.tok
                fname = self.ident()
                declare(fname, tok)
                self.expect("(")
                args = []
                if not self.at(")"):
                    while True:
                        aname = self.ident()
                        self.expect(":")
                        args.append((aname, self.type_()))
                        if not self.accept(","):
                            break
                self.expect(")")
                self.expect(":")
                ret = self.type_()
                self.expect("=")
                body = self.expr()
                self.accept(";")
                funcs.append(A.FunDecl(fname, tuple(args), ret, body, loc=loc))
            else:
                self.advance()
                tok = self.tok
                vname = self.ident()
                declare(vname, tok)
                self.expect(":")
                vtype = self.type_()
                self.expect("=")
                init = self.expr()
                self.accept(";")
                vars_.append(A.VarDecl(vname, vtype, init, loc=loc))
        self.expect("begin")
        body = self.stmts(("end",))
        self.expect("end")
        self.done()
        return A.Program(name, tuple(params), tuple(funcs), tuple(vars_), body)

    def rational(self) -> A.Expr:
        loc = self.loc()
        if self.tok.kind == "ident":
            return A.Name(self.ident(), loc=loc)
        num = self.number()
        if self.accept("/"):
            return A.Lit(Fraction(num, self.number()), loc=loc)
        return A.Lit(Fraction(num), loc=loc)

    # -- types
    def type_(self) -> A.TypeSyntax:
        loc = self.loc()
        word = self.ident()
        if word == "bool":
            return A.TBool(loc=loc)
        if word == "rat":
            return A.TRat(loc=loc)
        if word == "enum":
            self.expect("{")
            labels = [self.ident()]
            while self.accept(","):
                labels.append(self.ident())
            self.expect("}")
            return A.TEnum(tuple(labels), loc=loc)
        self.expect("(")
        if word == "range":
            t = A.TRange(self.expr(), loc=loc)
        elif word == "zmod":
            t = A.TZMod(self.expr(), loc=loc)
        elif word == "int":
            lo = self.expr()
            self.expect(",")
            t = A.TInt(lo, self.expr(), loc=loc)
        elif word == "tuple":
            elems = [self.type_()]
            while self.accept(","):
                elems.append(self.type_())
            t = A.TTuple(tuple(elems), loc=loc)
        elif word in ("array", "list"):
            size = self.expr()
            self.expect(",")
            elem = self.type_()
            t = (A.TArray if word == "array" else A.TList)(size, elem, loc=loc)
        else:
            self.error(f"unknown type {word!r}")
        self.expect(")")
        return t

    # -- statements
    def stmts(self, stops) -> A.Stmt:
        out = []
        while not any(self.at(s) for s in stops) and self.tok.kind != "eof":
            out.append(self.stmt())
        return A.seq(out) if len(out) != 1 else out[0]

    def block(self) -> A.Stmt:
        self.expect("{")
        body = self.stmts(("}",))
        self.expect("}")
        return body

    def stmt(self) -> A.Stmt:
        loc = self.loc()
        if self.accept("skip"):
            self.expect(";")
            return A.Skip(loc=loc)
        if self.accept("abort"):
            self.expect(";")
            return A.Abort(loc=loc)
        if self.accept("if"):
            cond = self.expr()
            then = self.block()
            else_: A.Stmt = A.Skip()
            if self.accept("else"):
                else_ = self.stmt() if self.at("if") else self.block()
            return A.If(cond, then, else_, loc=loc)
        if self.accept("while"):
            cond = self.expr()
            return A.While(cond, self.block(), loc=loc)
        if self.accept("for"):
            v = self.ident()
            self.expect("=")
            lo = self.expr()
            self.expect("to")
            hi = self.expr()
            return A.For(v, lo, hi, self.block(), loc=loc)
        if self.tok.kind == "ident":
            v = self.ident()
            index = None
            if self.accept("["):
                index = self.expr()
                self.expect("]")
            if self.accept(":="):
                e = self.expr()
                self.expect(";")
                return A.Assign(v, e, index, loc=loc)
            if self.accept("<$"):
                d = self.dist()
                self.expect(";")
                return A.Sample(v, d, index, loc=loc)
            self.error(f"expected ':=' or '<$', found {self.tok.text!r}")
        self.error(f"expected statement, found {self.tok.text or 'end of input'!r}")

    def dist(self) -> A.Dist:
        loc = self.loc()
        if self.accept("uniform"):
            if self.accept("{"):
                elems = [self.expr()]
                while self.accept(","):
                    elems.append(self.expr())
                self.expect("}")
                return A.UniformSet(tuple(elems), loc=loc)
            self.expect("(")
            t = self.type_()
            self.expect(")")
            return A.UniformType(t, loc=loc)
        if self.accept("flip"):
            self.expect("(")
            p = self.rational()
            self.expect(")")
            return A.Bernoulli(p, loc=loc)
        self.error(f"expected distribution, found {self.tok.text!r}")

    # -- expressions
    def expr(self) -> A.Expr:
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.iff()

    def quant(self) -> A.Expr:
        loc = self.loc()
        kind = self.advance().text
        v = self.ident()
        if self.accept(":"):
            domain = self.type_()
        else:
            self.expect("in")
            self.expect("{")
            items = [self.expr()]
            while self.accept(","):
                items.append(self.expr())
            self.expect("}")
            domain = tuple(items)
        self.expect(",")
        return A.Quant(kind, v, domain, self.expr(), loc=loc)

    def iff(self):
        left = self.implies()
        while self.at("<==>"):
            loc = self.loc()
            self.advance()
            left = A.Binary("<==>", left, self.implies(), loc=loc)
        return left

    def implies(self):
        left = self.or_()
        if self.at("==>"):
            loc = self.loc()
            self.advance()
            right = self.expr() if self.at("forall") or self.at("exists") else self.implies()
            return A.Binary("==>", left, right, loc=loc)
        return left

    def _left_assoc(self, sub, ops):
        left = sub()
        while self.tok.kind == "op" and self.tok.text in ops:
            loc = self.loc()
            op = self.advance().text
            left = A.Binary(op, left, sub(), loc=loc)
        return left

    def or_(self):
        return self._left_assoc(self.xor, ("||",))

    def xor(self):
        return self._left_assoc(self.and_, ("^",))

    def and_(self):
        return self._left_assoc(self.cmp, ("&&",))

    def cmp(self):
        left = self.cons()
        if self.tok.kind == "op" and self.tok.text in _CMP_OPS:
            loc = self.loc()
            op = self.advance().text
            left = A.Binary(op, left, self.cons(), loc=loc)
            if self.tok.kind == "op" and self.tok.text in _CMP_OPS:
                self.error("comparison operators do not chain")
        return left

    def cons(self):
        left = self.append()
        if self.at("::"):
            loc = self.loc()
            self.advance()
            return A.Binary("::", left, self.cons(), loc=loc)
        return left

    def append(self):
        return self._left_assoc(self.add, ("++",))

    def add(self):
        return self._left_assoc(self.mul, ("+", "-"))

    def mul(self):
        return self._left_assoc(self.unary, ("*", "/", "%"))

    def unary(self):
        loc = self.loc()
        if self.at("-", "op"):
            self.advance()
            arg = self.unary()
            if isinstance(arg, A.Lit) and isinstance(arg.value, int) and not isinstance(arg.value, bool):
                return A.Lit(-arg.value, loc=loc)
            return A.Unary("-", arg, loc=loc)
        if self.at("!", "op"):
            self.advance()
            return A.Unary("!", self.unary(), loc=loc)
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while True:
            loc = self.loc()
            if self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                e = A.Index(e, idx, loc=loc)
            elif self.at(".") and self.peek().kind == "num":
                self.advance()
                e = A.Proj(e, self.number(), loc=loc)
            elif (self.relational and self.at("{") and self.peek().kind == "num"
                  and self.peek(2).text == "}"):
                self.advance()
                side = self.number()
                self.expect("}")
                if side not in (1, 2):
                    self.error("side tag must be 1 or 2")
                if isinstance(e, A.Name) and e.tag is None:
                    e = A.Name(e.id, side, loc=e.loc)
                else:
                    e = A.Tagged(e, side, loc=loc)
            else:
                return e

    def primary(self):
        loc = self.loc()
        t = self.tok
        if t.kind == "num":
            self.advance()
            return A.Lit(int(t.text), loc=loc)
        if self.accept("true"):
            return A.Lit(True, loc=loc)
        if self.accept("false"):
            return A.Lit(False, loc=loc)
        if self.accept("if"):
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            return A.Cond(c, a, self.expr(), loc=loc)
        if self.at("forall") or self.at("exists"):
            return self.quant()
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return A.Call(t.text, tuple(args), loc=loc)
            return A.Name(t.text, loc=loc)
        if self.accept("("):
            items = [self.expr()]
            while self.accept(","):
                items.append(self.expr())
            self.expect(")")
            return items[0] if len(items) == 1 else A.TupleE(tuple(items), loc=loc)
        if self.accept("["):
            items = []
            if not self.at("]"):
                items.append(self.expr())
                while self.accept(","):
                    items.append(self.expr())
            self.expect("]")
            return A.ListE(tuple(items), loc=loc)
        self.error(f"expected expression, found {t.text or 'end of input'!r}")


def parse_program(text: str) -> A.Program:
    return Parser(text).program()


def parse_expr(text: str, relational: bool = True) -> A.Expr:
    p = Parser(text, relational=relational)
    e = p.expr()
    p.done()
    return e


def parse_type(text: str) -> A.TypeSyntax:
    p = Parser(text)
    t = p.type_()
    p.done()
    return t


def parse_stmts(text: str) -> A.Stmt:
    p = Parser(text)
    s = p.stmts(())
    p.done()
    return s


def parse_lambda(text: str) -> tuple[str, A.Expr]:
    """``fun v -> e`` as used for bijections in proof scripts."""
    p = Parser(text, relational=True)
    p.expect("fun")
    v = p.ident()
    p.expect("->")
    body = p.expr()
    p.done()
    return v, body
