"""Countable (and finite) abelian groups behind one interface.

Every builder and verifier in latininf is group-generic: it only talks to a
``GroupKernel`` (op / inv / identity / enumerate / codec). Kernels are
immutable once built and safe to share between verifier workers.

Descriptor grammar (``parse_group``)::

    Z | Q | E2 | E2:<bits> | Zn:<n> | sum(<desc>,...) | prod(<desc>,<desc>)

Element payloads:

    Z, Zn, E2     int                       (E2 under bitwise xor)
    Q             int when integral, else a reduced Fraction
    sum / prod    tuple of component payloads

``E2:<bits>`` is the finite block {0..2^bits-1} of E2; ``prod`` only accepts
finite factors.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce
from operator import mul

from latininf.errors import (
    DescriptorSyntaxError, ElementMismatch, OutOfRange, UnsupportedGroup,
)
from latininf.utils.constants import ALL_INVOLUTIONS, OTHER, SQUAREFUL
from latininf.utils.formatting import format_rational, normalize_rational, parse_rational


class GroupKernel:
    """A group given by codec, operation, inverse, identity and an enumeration.

    ``order`` is ``None`` for infinite groups. ``enumerate`` is a bijection
    ℕ → G (finite groups: {0..order-1} → G, OutOfRange past the order) and
    ``index_of`` is its inverse.
    """

    descriptor: str
    order: int | None
    classification: str
    involution_free: bool
    exponent_two: bool

    # ── element handling ──

    def coerce(self, g):
        """Return the canonical payload for ``g`` or raise ElementMismatch."""
        raise NotImplementedError

    def contains(self, g) -> bool:
        try:
            self.coerce(g)
        except ElementMismatch:
            return False
        return True

    def encode(self, g) -> str:
        raise NotImplementedError

    def decode(self, text: str):
        raise NotImplementedError

    # ── group structure ──

    def op(self, g, h):
        return self._op(self.coerce(g), self.coerce(h))

    def inv(self, g):
        return self._inv(self.coerce(g))

    def identity(self):
        raise NotImplementedError

    def square(self, g):
        g = self.coerce(g)
        return self._op(g, g)

    def _op(self, g, h):
        raise NotImplementedError

    def _inv(self, g):
        raise NotImplementedError

    # ── enumeration ──

    def enumerate(self, k: int):
        if k < 0:
            raise OutOfRange(f"enumeration index must be >= 0, got {k}")
        if self.order is not None and k >= self.order:
            raise OutOfRange(
                f"{self.descriptor} has order {self.order}; no element at index {k}"
            )
        return self._enumerate(k)

    def index_of(self, g) -> int:
        return self._index_of(self.coerce(g))

    def _enumerate(self, k: int):
        raise NotImplementedError

    def _index_of(self, g) -> int:
        raise NotImplementedError

    def elements(self) -> list:
        """All elements of a finite group, in enumeration order."""
        if self.order is None:
            raise UnsupportedGroup(f"{self.descriptor} is infinite; cannot list elements")
        return [self._enumerate(k) for k in range(self.order)]

    def cyclic_factors(self) -> list[int]:
        """Orders of the cyclic factors (trivial factors dropped); finite only."""
        raise UnsupportedGroup(f"{self.descriptor} is infinite; no cyclic decomposition")

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    def __repr__(self) -> str:
        return f"GroupKernel({self.descriptor!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupKernel) and other.descriptor == self.descriptor

    def __hash__(self) -> int:
        return hash(self.descriptor)


def _is_int(g) -> bool:
    return isinstance(g, int) and not isinstance(g, bool)


def _parse_int_literal(text: str, descriptor: str) -> int:
    try:
        return int(str(text).strip())
    except ValueError:
        raise DescriptorSyntaxError(f"Invalid {descriptor} element literal {text!r}")


# ─── Z ───────────────────────────────────────────────────────────────

class IntegerGroup(GroupKernel):
    """(ℤ, +), enumerated 0, 1, -1, 2, -2, ..."""

    descriptor = "Z"
    order = None
    classification = SQUAREFUL
    involution_free = True
    exponent_two = False

    def coerce(self, g):
        if not _is_int(g):
            raise ElementMismatch(f"{g!r} is not an element of Z")
        return g

    def encode(self, g) -> str:
        return str(self.coerce(g))

    def decode(self, text: str):
        return _parse_int_literal(text, "Z")

    def identity(self):
        return 0

    def _op(self, g, h):
        return g + h

    def _inv(self, g):
        return -g

    def _enumerate(self, k: int):
        if k % 2:
            return (k + 1) // 2
        return -(k // 2)

    def _index_of(self, g) -> int:
        if g > 0:
            return 2 * g - 1
        return -2 * g


# ─── Q ───────────────────────────────────────────────────────────────

def fusc(n: int) -> int:
    """Stern's diatomic sequence; fusc(m)/fusc(m+1) walks the Calkin-Wilf tree."""
    a, b = 1, 0
    while n:
        if n & 1:
            b += a
        else:
            a += b
        n >>= 1
    return b


def calkin_wilf(m: int) -> Fraction:
    """The m-th positive rational (m >= 1) in Calkin-Wilf breadth-first order."""
    return Fraction(fusc(m), fusc(m + 1))


def calkin_wilf_index(x: Fraction) -> int:
    """Inverse of ``calkin_wilf`` for a positive rational."""
    p, q = x.numerator, x.denominator
    runs: list[tuple[int, int]] = []  # (bit, count), leaf to root
    while not (p == 1 and q == 1):
        if p < q:
            t = q // p - (1 if q % p == 0 else 0)
            runs.append((0, t))
            q -= t * p
        else:
            t = p // q - (1 if p % q == 0 else 0)
            runs.append((1, t))
            p -= t * q
    m = 1
    for bit, count in reversed(runs):
        m <<= count
        if bit:
            m |= (1 << count) - 1
    return m


class RationalGroup(GroupKernel):
    """(ℚ, +): 0 first, then ±q_m with q_m the Calkin-Wilf order."""

    descriptor = "Q"
    order = None
    classification = SQUAREFUL
    involution_free = True
    exponent_two = False

    def coerce(self, g):
        if _is_int(g):
            return g
        if isinstance(g, Fraction):
            return normalize_rational(g)
        raise ElementMismatch(f"{g!r} is not an element of Q")

    def encode(self, g) -> str:
        return format_rational(self.coerce(g))

    def decode(self, text: str):
        try:
            return parse_rational(text)
        except ValueError as e:
            raise DescriptorSyntaxError(str(e))

    def identity(self):
        return 0

    def _op(self, g, h):
        return normalize_rational(g + h)

    def _inv(self, g):
        return -g

    def _enumerate(self, k: int):
        if k == 0:
            return 0
        q = normalize_rational(calkin_wilf((k + 1) // 2))
        return q if k % 2 else -q

    def _index_of(self, g) -> int:
        if g == 0:
            return 0
        m = calkin_wilf_index(Fraction(abs(g)))
        return 2 * m - 1 if g > 0 else 2 * m


# ─── E2 ──────────────────────────────────────────────────────────────

class ElementaryTwoGroup(GroupKernel):
    """Naturals under bitwise xor; ``bits`` bounds the finite block E2:<bits>."""

    exponent_two = True

    def __init__(self, bits: int | None = None):
        if bits is not None and bits < 0:
            raise DescriptorSyntaxError(f"E2 block needs bits >= 0, got {bits}")
        self.bits = bits
        if bits is None:
            self.descriptor = "E2"
            self.order = None
            self.classification = ALL_INVOLUTIONS
            self.involution_free = False
        else:
            self.descriptor = f"E2:{bits}"
            self.order = 1 << bits
            self.classification = SQUAREFUL
            self.involution_free = bits == 0

    def coerce(self, g):
        if not _is_int(g) or g < 0:
            raise ElementMismatch(f"{g!r} is not an element of {self.descriptor}")
        if self.order is not None and g >= self.order:
            raise ElementMismatch(f"{g} lies outside {self.descriptor}")
        return g

    def encode(self, g) -> str:
        return str(self.coerce(g))

    def decode(self, text: str):
        return self.coerce(_parse_int_literal(text, self.descriptor))

    def identity(self):
        return 0

    def _op(self, g, h):
        return g ^ h

    def _inv(self, g):
        return g

    def _enumerate(self, k: int):
        return k

    def _index_of(self, g) -> int:
        return g

    def cyclic_factors(self) -> list[int]:
        if self.bits is None:
            return super().cyclic_factors()
        return [2] * self.bits


# ─── Zn ──────────────────────────────────────────────────────────────

class CyclicGroup(GroupKernel):
    """ℤ/nℤ on {0..n-1}."""

    classification = SQUAREFUL

    def __init__(self, n: int):
        if n < 1:
            raise DescriptorSyntaxError(f"Zn:<n> requires n >= 1, got {n}")
        self.n = n
        self.descriptor = f"Zn:{n}"
        self.order = n
        self.involution_free = n % 2 == 1
        self.exponent_two = n <= 2

    def coerce(self, g):
        if not _is_int(g) or not 0 <= g < self.n:
            raise ElementMismatch(f"{g!r} is not an element of {self.descriptor}")
        return g

    def encode(self, g) -> str:
        return str(self.coerce(g))

    def decode(self, text: str):
        return self.coerce(_parse_int_literal(text, self.descriptor))

    def identity(self):
        return 0

    def _op(self, g, h):
        return (g + h) % self.n

    def _inv(self, g):
        return -g % self.n

    def _enumerate(self, k: int):
        return k

    def _index_of(self, g) -> int:
        return g

    def cyclic_factors(self) -> list[int]:
        return [self.n] if self.n > 1 else []


# ─── sums / products ─────────────────────────────────────────────────

def _unpair(k: int, oa: int | None, ob: int | None) -> tuple[int, int]:
    """Split ``k`` into component indices (i, j) for orders oa, ob."""
    if ob is not None:
        return divmod(k, ob)
    if oa is not None:
        j, i = divmod(k, oa)
        return i, j
    # Cantor pairing for two infinite factors
    w = (math.isqrt(8 * k + 1) - 1) // 2
    j = k - w * (w + 1) // 2
    return w - j, j


def _pair(i: int, j: int, oa: int | None, ob: int | None) -> int:
    if ob is not None:
        return i * ob + j
    if oa is not None:
        return j * oa + i
    w = i + j
    return w * (w + 1) // 2 + j


def _split_top(text: str) -> list[str]:
    """Split on commas at parenthesis depth 0."""
    parts, depth, start = [], 0, 0
    for pos, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DescriptorSyntaxError(f"Unbalanced parentheses in {text!r}")
        elif ch == "," and depth == 0:
            parts.append(text[start:pos])
            start = pos + 1
    if depth:
        raise DescriptorSyntaxError(f"Unbalanced parentheses in {text!r}")
    parts.append(text[start:])
    return parts


class DirectSum(GroupKernel):
    """Direct sum of component kernels; elements are tuples."""

    def __init__(self, components: list[GroupKernel], tag: str = "sum"):
        if not components:
            raise DescriptorSyntaxError(f"{tag}(...) needs at least one component")
        if tag == "prod":
            if len(components) != 2:
                raise DescriptorSyntaxError("prod(...) takes exactly two components")
            if not all(c.is_finite for c in components):
                raise UnsupportedGroup(
                    "prod(...) is only implemented for finite factors; use sum(...)"
                )
        self.components = tuple(components)
        self.descriptor = f"{tag}({','.join(c.descriptor for c in components)})"
        orders = [c.order for c in components]
        self.order = None if None in orders else reduce(mul, orders, 1)
        # tail_orders[c] = order of components[c:], None if infinite
        self._tail_orders: list[int | None] = []
        for c in range(len(orders)):
            tail = orders[c:]
            self._tail_orders.append(None if None in tail else reduce(mul, tail, 1))
        self.involution_free = all(c.involution_free for c in components)
        self.exponent_two = all(c.exponent_two for c in components)
        if self.order is not None:
            self.classification = SQUAREFUL
        elif any(c.order is None and c.classification == SQUAREFUL for c in components):
            self.classification = SQUAREFUL
        elif self.exponent_two:
            self.classification = ALL_INVOLUTIONS
        else:
            self.classification = OTHER

    def coerce(self, g):
        if isinstance(g, list):
            g = tuple(g)
        if not isinstance(g, tuple) or len(g) != len(self.components):
            raise ElementMismatch(f"{g!r} is not an element of {self.descriptor}")
        return tuple(c.coerce(x) for c, x in zip(self.components, g))

    def encode(self, g) -> str:
        g = self.coerce(g)
        return "(" + ",".join(c.encode(x) for c, x in zip(self.components, g)) + ")"

    def decode(self, text: str):
        text = str(text).strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise DescriptorSyntaxError(f"Expected a parenthesised tuple, got {text!r}")
        parts = _split_top(text[1:-1])
        if len(parts) != len(self.components):
            raise DescriptorSyntaxError(
                f"{self.descriptor} elements have {len(self.components)} components, got {text!r}"
            )
        return tuple(c.decode(p) for c, p in zip(self.components, parts))

    def identity(self):
        return tuple(c.identity() for c in self.components)

    def _op(self, g, h):
        return tuple(c._op(x, y) for c, x, y in zip(self.components, g, h))

    def _inv(self, g):
        return tuple(c._inv(x) for c, x in zip(self.components, g))

    def _enumerate(self, k: int):
        out = []
        last = len(self.components) - 1
        for c, comp in enumerate(self.components):
            if c == last:
                out.append(comp._enumerate(k))
                break
            i, k = _unpair(k, comp.order, self._tail_orders[c + 1])
            out.append(comp._enumerate(i))
        return tuple(out)

    def _index_of(self, g) -> int:
        k = self.components[-1]._index_of(g[-1])
        for c in range(len(self.components) - 2, -1, -1):
            comp = self.components[c]
            k = _pair(comp._index_of(g[c]), k, comp.order, self._tail_orders[c + 1])
        return k

    def cyclic_factors(self) -> list[int]:
        if self.order is None:
            return super().cyclic_factors()
        return [n for c in self.components for n in c.cyclic_factors()]


# ─── descriptor parser ───────────────────────────────────────────────

def parse_group(spec: str) -> GroupKernel:
    """Parse a group descriptor into a kernel.

    Examples: ``Z``, ``Q``, ``E2``, ``E2:4``, ``Zn:6``, ``sum(Z,Zn:3)``,
    ``prod(Zn:5,Zn:7)``. Whitespace is ignored.
    """
    if not isinstance(spec, str):
        raise DescriptorSyntaxError(f"Group descriptor must be text, got {spec!r}")
    text = "".join(spec.split())
    if not text:
        raise DescriptorSyntaxError("Empty group descriptor")
    return _parse(text)


def _parse(text: str) -> GroupKernel:
    if text == "Z":
        return IntegerGroup()
    if text == "Q":
        return RationalGroup()
    if text == "E2":
        return ElementaryTwoGroup()
    if text.startswith("E2:"):
        return ElementaryTwoGroup(_parse_param(text[3:], text))
    if text.startswith("Zn:"):
        return CyclicGroup(_parse_param(text[3:], text))
    for tag in ("sum", "prod"):
        if text.startswith(tag + "("):
            if not text.endswith(")"):
                raise DescriptorSyntaxError(f"Missing ')' in {text!r}")
            inner = text[len(tag) + 1:-1]
            parts = _split_top(inner)
            if any(p == "" for p in parts):
                raise DescriptorSyntaxError(f"Empty component in {text!r}")
            return DirectSum([_parse(p) for p in parts], tag=tag)
    if "(" in text:
        head = text.split("(", 1)[0]
        raise UnsupportedGroup(f"Unknown group constructor {head!r} in {text!r}")
    raise DescriptorSyntaxError(f"Invalid group descriptor {text!r}")


def _parse_param(raw: str, text: str) -> int:
    if not raw.isdigit():
        raise DescriptorSyntaxError(f"Expected a natural number parameter in {text!r}")
    return int(raw)


def finite_abelian(factors: list[int]) -> GroupKernel:
    """Build Z_{n1} ⊕ Z_{n2} ⊕ ... from a list of cyclic orders."""
    factors = [n for n in factors if n != 1]
    if any(n < 1 for n in factors):
        raise DescriptorSyntaxError(f"Cyclic orders must be >= 1, got {factors}")
    if not factors:
        return CyclicGroup(1)
    if len(factors) == 1:
        return CyclicGroup(factors[0])
    return DirectSum([CyclicGroup(n) for n in factors])


# ─── nim arithmetic ──────────────────────────────────────────────────

@lru_cache(maxsize=None)
def nim_mul(x: int, y: int) -> int:
    """Nim product; with xor as addition, {0..2^(2^m)-1} is a field.

    Karatsuba-style split at X = 2^(L/2) using X⊗X = X ⊕ X/2.
    """
    if x < 0 or y < 0:
        raise ValueError(f"nim_mul takes naturals, got ({x}, {y})")
    if x < 2 or y < 2:
        return x * y
    width = 2
    while max(x, y) >> width:
        width <<= 1
    half = width >> 1
    mask = (1 << half) - 1
    x1, x0 = x >> half, x & mask
    y1, y0 = y >> half, y & mask
    a = nim_mul(x0, y0)
    b = nim_mul(x1, y1)
    c = nim_mul(x0 ^ x1, y0 ^ y1)
    return ((c ^ a) << half) ^ nim_mul(b, 1 << (half - 1)) ^ a


def mex_nim_mul(x: int, y: int, _memo: dict | None = None) -> int:
    """Nim product from the mex recursion (slow; oracle for small values)."""
    memo = {} if _memo is None else _memo
    key = (x, y)
    if key in memo:
        return memo[key]
    seen = set()
    for a in range(x):
        for b in range(y):
            seen.add(
                mex_nim_mul(a, y, memo) ^ mex_nim_mul(x, b, memo) ^ mex_nim_mul(a, b, memo)
            )
    value = 0
    while value in seen:
        value += 1
    memo[key] = value
    return value
