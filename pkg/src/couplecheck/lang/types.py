"""Finite types of the while-language and their carriers."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator


class TypeExpr:
    """Base class of resolved (ground) types. Every carrier is finite."""

    def domain_size(self) -> int:
        raise NotImplementedError

    def values(self) -> Iterator:
        raise NotImplementedError

    def contains(self, v) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class BoolT(TypeExpr):
    def domain_size(self):
        return 2

    def values(self):
        yield False
        yield True

    def contains(self, v):
        return isinstance(v, bool)

    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class RangeT(TypeExpr):
    """{0, ..., n-1}."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"range({self.n}) is empty")

    def domain_size(self):
        return self.n

    def values(self):
        return iter(range(self.n))

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool) and 0 <= v < self.n

    def __str__(self):
        return f"range({self.n})"


@dataclass(frozen=True)
class ZModT(TypeExpr):
    """Integers modulo n, represented by 0..n-1."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"zmod({self.n}) needs modulus >= 2")

    def domain_size(self):
        return self.n

    def values(self):
        return iter(range(self.n))

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool) and 0 <= v < self.n

    def __str__(self):
        return f"zmod({self.n})"


@dataclass(frozen=True)
class IntT(TypeExpr):
    """Signed bounded integers lo..hi inclusive."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"int({self.lo}, {self.hi}) is empty")

    def domain_size(self):
        return self.hi - self.lo + 1

    def values(self):
        return iter(range(self.lo, self.hi + 1))

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi

    def __str__(self):
        return f"int({self.lo}, {self.hi})"


@dataclass(frozen=True)
class EnumT(TypeExpr):
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("enum needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate enum label")

    def domain_size(self):
        return len(self.labels)

    def values(self):
        return iter(self.labels)

    def contains(self, v):
        return v in self.labels

    def __str__(self):
        return "enum{" + ", ".join(self.labels) + "}"


@dataclass(frozen=True)
class TupleT(TypeExpr):
    elems: tuple[TypeExpr, ...]

    def domain_size(self):
        size = 1
        for t in self.elems:
            size *= t.domain_size()
        return size

    def values(self):
        return itertools.product(*(list(t.values()) for t in self.elems))

    def contains(self, v):
        return (isinstance(v, tuple) and len(v) == len(self.elems)
                and all(t.contains(x) for t, x in zip(self.elems, v)))

    @property
    def homogeneous(self) -> bool:
        return len(set(self.elems)) <= 1

    def __str__(self):
        if self.elems and self.homogeneous and len(self.elems) > 1:
            return f"array({len(self.elems)}, {self.elems[0]})"
        return "tuple(" + ", ".join(map(str, self.elems)) + ")"


@dataclass(frozen=True)
class ListT(TypeExpr):
    """Sequences of length 0..max_len over elem."""

    max_len: int
    elem: TypeExpr

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError("list bound must be positive")

    def domain_size(self):
        k = self.elem.domain_size()
        return sum(k ** i for i in range(self.max_len + 1))

    def values(self):
        vals = list(self.elem.values())
        for length in range(self.max_len + 1):
            yield from itertools.product(vals, repeat=length)

    def contains(self, v):
        return (isinstance(v, tuple) and len(v) <= self.max_len
                and all(self.elem.contains(x) for x in v))

    def __str__(self):
        return f"list({self.max_len}, {self.elem})"


# Expression-only types: never the type of a variable.

@dataclass(frozen=True)
class AnyIntT(TypeExpr):
    """Unbounded integer intermediate (arithmetic results on plain ints)."""

    def domain_size(self):
        raise TypeError("unbounded integer type has no finite carrier")

    def values(self):
        raise TypeError("unbounded integer type has no finite carrier")

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool)

    def __str__(self):
        return "int"


@dataclass(frozen=True)
class AnyListT(TypeExpr):
    """Type of list expressions whose bound is not known statically."""

    elem: TypeExpr | None

    def domain_size(self):
        raise TypeError("unbounded list type has no finite carrier")

    def values(self):
        raise TypeError("unbounded list type has no finite carrier")

    def contains(self, v):
        return isinstance(v, tuple)

    def __str__(self):
        return f"list({self.elem})"


@dataclass(frozen=True)
class RatT(TypeExpr):
    """Rational meta-parameters (coin biases). Not allowed for variables."""

    def domain_size(self):
        raise TypeError("rationals have no finite carrier")

    def values(self):
        raise TypeError("rationals have no finite carrier")

    def contains(self, v):
        from fractions import Fraction
        return isinstance(v, Fraction)

    def __str__(self):
        return "rat"


def enumerate_type(t: TypeExpr) -> list:
    """Deterministic, duplicate-free enumeration of the carrier of ``t``."""
    return list(t.values())


def domain_size(t: TypeExpr) -> int:
    return t.domain_size()


def is_intlike(t: TypeExpr) -> bool:
    return isinstance(t, (RangeT, IntT, AnyIntT))


def is_numeric(t: TypeExpr) -> bool:
    return isinstance(t, (RangeT, IntT, AnyIntT, ZModT))


def is_finite(t: TypeExpr) -> bool:
    if isinstance(t, (AnyIntT, AnyListT, RatT)):
        return False
    if isinstance(t, TupleT):
        return all(is_finite(e) for e in t.elems)
    if isinstance(t, ListT):
        return is_finite(t.elem)
    return True
