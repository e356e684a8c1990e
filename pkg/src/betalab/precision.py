"""Certified evaluation of the map x -> b*x mod 1.

Bases are exact rationals, exact real-quadratic numbers, or high-precision
decimal literals; orbit points are dyadic interval enclosures.  Every emitted digit
floor(b*x) is certified: either the enclosure of b*x stays inside one integer
cell, or an exact backing resolves the branch (points exactly at a cut take the
right-continuous branch, so T(x) = 0 with digit floor(b*x)).  Interval runs
restart with doubled precision on any ambiguous branch; decimal-literal bases
carry no exact certificates, so persistent ambiguity there raises instead of
silently guessing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .exactnum import (
    Quadratic,
    round_down,
    round_up,
    scaled_ceil,
    scaled_floor,
    squarefree_split,
)

ExactValue = Fraction | Quadratic


class AmbiguousBranch(ArithmeticError):
    """Enclosure of b*x straddles an integer; refine and retry."""


class PrecisionExhausted(ArithmeticError):
    """Doubling reached the budget cap without resolving every branch."""


class UndeterminedValue(ArithmeticError):
    """A sign or membership query cannot be certified at any allowed precision."""


@dataclass(frozen=True)
class Enclosure:
    """Dyadic interval [lo, hi] around a point, with an optional exact value.

    `exact` is set only for bases/points living in Q or Q(sqrt(d)); decimal
    literal bases never produce exact orbit certificates.
    """

    lo: Fraction
    hi: Fraction
    exact: ExactValue | None = None

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("empty enclosure")
        if isinstance(self.exact, Quadratic):
            if self.exact.cmp_rational(self.lo) < 0 or self.exact.cmp_rational(self.hi) > 0:
                raise ValueError("exact value escapes enclosure")
        elif self.exact is not None:
            if not self.lo <= self.exact <= self.hi:
                raise ValueError("exact value escapes enclosure")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.midpoint())

    def is_certified_zero(self) -> bool:
        if self.exact is not None:
            if isinstance(self.exact, Quadratic):
                return self.exact.is_zero()
            return self.exact == 0
        return self.lo == 0 and self.hi == 0

    def certified_positive(self) -> bool:
        if self.lo > 0:
            return True
        if isinstance(self.exact, Quadratic):
            return self.exact.cmp_rational(0) > 0
        if self.exact is not None:
            return self.exact > 0
        return False


@dataclass(frozen=True)
class PrecisionBudget:
    """Bit budget for an interval orbit: start, cap, restart-by-doubling."""

    initial_bits: int
    max_bits: int

    @classmethod
    def for_orbit(cls, log2_b_hi: float, n_steps: int, digits_required: int) -> "PrecisionBudget":
        # each step multiplies the width by b, so reserve n*log2(b) bits plus
        # output precision and guard bits
        need = math.ceil(n_steps * max(log2_b_hi, 0.0)) + 64
        need += math.ceil(digits_required * math.log2(10)) + 8
        need = max(need, 128)
        return cls(initial_bits=need, max_bits=need * 64)


class DescriptorError(ValueError):
    """Malformed or out-of-range base descriptor."""


@dataclass(frozen=True)
class BetaNumber:
    """A base b > 1 with a certified dyadic enclosure.

    kind is one of "rational", "quadratic", "bigfloat".  Rational and quadratic
    bases carry exact values (decidable equality, exact floors); bigfloat bases
    are decimal literals whose enclosure can be re-rounded to any precision but
    which never certify exact identities.
    """

    kind: str
    descriptor: str
    bits: int
    lo: Fraction
    hi: Fraction
    floor_b: int
    ceil_b: int
    _rational: Fraction | None = None
    _quad: Quadratic | None = None
    _literal: Fraction | None = None  # backing value for bigfloat re-rounding

    def exact_value(self) -> ExactValue | None:
        if self.kind == "rational":
            return self._rational
        if self.kind == "quadratic":
            return self._quad
        return None

    def bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        """Enclosure rounded outward to `bits` fractional bits."""
        if self.kind == "rational":
            return round_down(self._rational, bits), round_up(self._rational, bits)
        if self.kind == "quadratic":
            return self._quad.bounds(bits)
        return round_down(self._literal, bits), round_up(self._literal, bits)

    def scaled_bounds(self, bits: int) -> tuple[int, int]:
        """Integer mantissas (lo, hi) at scale 2^-bits."""
        lo, hi = self.bounds(bits)
        return scaled_floor(lo, bits), scaled_ceil(hi, bits)

    def log2_upper(self) -> float:
        """A float upper bound on log2(b)."""
        hi = self.hi
        return math.log2(hi.numerator) - math.log2(hi.denominator) + 1e-9

    def __float__(self) -> float:
        return float((self.lo + self.hi) / 2)

    def __str__(self) -> str:
        return self.descriptor


_INT_RE = re.compile(r"^[+]?\d+$")
_RAT_RE = re.compile(r"^(\d+)\s*/\s*(\d+)$")
_DEC_RE = re.compile(r"^(\d+\.\d+)(?:@(\d+))?$")
_QUAD_RE = re.compile(
    r"^\(?\s*(?:(\d+(?:/\d+)?)\s*)?([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?"
    r"sqrt\s*\(?\s*(\d+)\s*\)?\s*\)?\s*(?:/\s*(\d+))?$"
)

DEFAULT_DECIMAL_BITS = 256


def _build_rational(value: Fraction, descriptor: str, bits: int) -> BetaNumber:
    lo, hi = round_down(value, bits), round_up(value, bits)
    fb = value.numerator // value.denominator
    cb = -((-value.numerator) // value.denominator)
    return BetaNumber("rational", descriptor, bits, lo, hi, fb, cb, _rational=value)

def _build_quadratic(q: Quadratic, descriptor: str, bits: int) -> BetaNumber:
    lo, hi = q.bounds(bits)
    fb = q.floor()
    return BetaNumber("quadratic", descriptor, bits, lo, hi, fb, fb + 1, _quad=q)

def _build_bigfloat(value: Fraction, descriptor: str, bits: int) -> BetaNumber:
    lo, hi = round_down(value, bits), round_up(value, bits)
    flo = lo.numerator // lo.denominator
    fhi = hi.numerator // hi.denominator
    if flo != fhi:
        raise DescriptorError(f"enclosure of {descriptor!r} straddles an integer at {bits} bits")
    cb = flo if lo == hi and lo == flo else flo + 1
    return BetaNumber("bigfloat", descriptor, bits, lo, hi, flo, cb, _literal=value)


def parse_beta(text: str, default_bits: int = DEFAULT_DECIMAL_BITS) -> BetaNumber:
    """Parse a base descriptor.

    Grammar: INT | "p/q" | "(u+v*sqrtD)/w" (parentheses, v and w optional)
    | decimal literal with optional "@bits" precision request.  The value must
    exceed 1.
    """
    s = text.strip()
    if m := _INT_RE.match(s):
        val = Fraction(int(s))
        if val <= 1:
            raise DescriptorError(f"base must exceed 1, got {s!r}")
        return _build_rational(val, s, default_bits)
    if m := _RAT_RE.match(s):
        val = Fraction(int(m.group(1)), int(m.group(2)))
        if val <= 1:
            raise DescriptorError(f"base must exceed 1, got {s!r}")
        return _build_rational(val, s, default_bits)
    if m := _DEC_RE.match(s):
        val = Fraction(m.group(1))
        bits = int(m.group(2)) if m.group(2) else default_bits
        if bits < 4:
            raise DescriptorError("precision request below 4 bits")
        if val <= 1:
            raise DescriptorError(f"base must exceed 1, got {s!r}")
        return _build_bigfloat(val, s, bits)
    if m := _QUAD_RE.match(s):
        u = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        sign = -1 if m.group(2) == "-" else 1
        v = Fraction(m.group(3)) if m.group(3) else Fraction(1)
        d = int(m.group(4))
        w = Fraction(m.group(5)) if m.group(5) else Fraction(1)
        sq, d0 = squarefree_split(d)
        v = sign * v * sq
        if d0 <= 1:
            val = (u + v * d0) / w if d0 == 1 else u / w
            if val <= 1:
                raise DescriptorError(f"base must exceed 1, got {s!r}")
            return _build_rational(val, s, default_bits)
        q = Quadratic(u / w, v / w, d0)
        if q.cmp_rational(1) <= 0:
            raise DescriptorError(f"base must exceed 1, got {s!r}")
        return _build_quadratic(q, s, default_bits)
    raise DescriptorError(f"cannot parse base descriptor {text!r}")


def beta_from_exact(value: ExactValue, bits: int = DEFAULT_DECIMAL_BITS) -> BetaNumber:
    """Wrap an exact rational or quadratic value > 1 as a BetaNumber."""
    if isinstance(value, Quadratic):
        if value.cmp_rational(1) <= 0:
            raise DescriptorError("base must exceed 1")
        return _build_quadratic(value, repr(value), bits)
    value = Fraction(value)
    if value <= 1:
        raise DescriptorError("base must exceed 1")
    return _build_rational(value, str(value), bits)


# ---------------------------------------------------------------------------
# single certified step


def _exact_floor(y: ExactValue) -> int:
    if isinstance(y, Quadratic):
        return y.floor()
    return y.numerator // y.denominator


def _exact_mul(a: ExactValue, x: ExactValue) -> ExactValue:
    if isinstance(a, Quadratic):
        return a * x
    if isinstance(x, Quadratic):
        return x * a
    return a * x


def tb_apply(b: BetaNumber, x: Enclosure) -> tuple[Enclosure, int]:
    """One certified step: returns (enclosure of {b*x}, digit floor(b*x)).

    x must satisfy 0 <= x <= 1; the endpoint 1 is admitted so the orbit of 1
    can be seeded directly.  Raises AmbiguousBranch when the product enclosure
    straddles an integer and no exact backing can resolve it.
    """
    if x.lo < 0 or x.hi > 1:
        raise ValueError("point enclosure must lie in [0, 1]")
    y_lo = b.lo * x.lo
    y_hi = b.hi * x.hi
    b_exact = b.exact_value()
    y_exact: ExactValue | None = None
    if b_exact is not None and x.exact is not None:
        y_exact = _exact_mul(b_exact, x.exact)
    k_lo = y_lo.numerator // y_lo.denominator
    k_hi = y_hi.numerator // y_hi.denominator
    if y_exact is not None:
        k = _exact_floor(y_exact)
        frac_exact = y_exact - k
        lo = max(y_lo - k, Fraction(0))
        hi = min(y_hi - k, Fraction(1))
        if isinstance(frac_exact, Quadratic):
            qlo, qhi = frac_exact.bounds(128)
            lo, hi = max(lo, qlo), min(hi, qhi)
        else:
            lo, hi = max(lo, frac_exact), min(hi, frac_exact)
        return Enclosure(lo, hi, exact=frac_exact), k
    if k_lo != k_hi:
        raise AmbiguousBranch(f"b*x in [{float(y_lo):.6g}, {float(y_hi):.6g}] straddles an integer")
    return Enclosure(y_lo - k_lo, y_hi - k_lo, exact=None), k_lo


# ---------------------------------------------------------------------------
# orbit engines

_EXACT_PATH_CUTOFF = 5000


def _coerce_seed(x0: object) -> ExactValue | Enclosure:
    if isinstance(x0, Enclosure):
        return x0
    if isinstance(x0, Quadratic):
        return x0
    if isinstance(x0, float):
        return Fraction(x0)
    if isinstance(x0, (int, Fraction)):
        return Fraction(x0)
    raise TypeError(f"unsupported orbit seed {type(x0).__name__}")


def _seed_bounds(seed: ExactValue | Enclosure) -> tuple[Fraction, Fraction, ExactValue | None]:
    if isinstance(seed, Enclosure):
        return seed.lo, seed.hi, seed.exact
    if isinstance(seed, Quadratic):
        lo, hi = seed.bounds(128)
        return lo, hi, seed
    return seed, seed, seed


def _check_seed_range(lo: Fraction, hi: Fraction) -> None:
    if lo < 0 or hi > 1:
        raise ValueError("orbit seed must lie in [0, 1]")


def _exact_orbit(
    b_val: ExactValue, seed: ExactValue, n_steps: int, out_bits: int
) -> tuple[list[Enclosure], list[int]]:
    if isinstance(b_val, Quadratic) and isinstance(seed, Fraction):
        seed = Quadratic(seed, Fraction(0), b_val.d)
    points: list[Enclosure] = []
    digits: list[int] = []
    x = seed
    for _ in range(n_steps):
        y = _exact_mul(b_val, x)
        k = _exact_floor(y)
        x = y - k
        digits.append(k)
        if isinstance(x, Quadratic):
            if x.v == 0:
                x = x.u  # fall back to plain rationals once the sqrt part cancels
                lo, hi = round_down(x, out_bits), round_up(x, out_bits)
                points.append(Enclosure(lo, hi, exact=x))
            else:
                lo, hi = x.bounds(out_bits)
                points.append(Enclosure(lo, hi, exact=x))
        else:
            lo, hi = round_down(x, out_bits), round_up(x, out_bits)
            points.append(Enclosure(lo, hi, exact=x))
    return points, digits


def _interval_orbit_attempt(
    b: BetaNumber,
    lo0: Fraction,
    hi0: Fraction,
    n_steps: int,
    bits: int,
    width_bits: int,
    log2b_up: float,
) -> tuple[list[tuple[int, int, int]], list[int]]:
    """One fixed-budget interval pass.

    Returns per-step (lo_mantissa, hi_mantissa, scale) triples plus digits, or
    raises AmbiguousBranch.  The working scale shrinks as remaining steps drop,
    which keeps the big-integer products near the minimum needed size.
    """
    b_lo_full, b_hi_full = b.scaled_bounds(bits)
    slack = width_bits + 64

    def scale_for(i: int) -> int:
        rem = n_steps - i - 1
        return min(bits, max(slack, math.ceil(rem * log2b_up) + slack))

    s = min(bits, max(slack, math.ceil(n_steps * log2b_up) + slack))
    x_lo = scaled_floor(lo0, s)
    x_hi = scaled_ceil(hi0, s)
    out: list[tuple[int, int, int]] = []
    digits: list[int] = []
    for i in range(n_steps):
        shift = bits - s
        b_lo = b_lo_full >> shift
        b_hi = -((-b_hi_full) >> shift)
        y_lo = (x_lo * b_lo) >> s
        y_hi = -((-(x_hi * b_hi)) >> s)
        k_lo = y_lo >> s
        k_hi = y_hi >> s
        if k_lo != k_hi:
            raise AmbiguousBranch(f"step {i}: enclosure straddles an integer at {bits} bits")
        k = k_lo
        x_lo = y_lo - (k << s)
        x_hi = y_hi - (k << s)
        s_next = scale_for(i)
        if s_next < s:
            drop = s - s_next
            x_lo >>= drop
            x_hi = -((-x_hi) >> drop)
            s = s_next
        out.append((x_lo, x_hi, s))
        digits.append(k)
    return out, digits


def _width_ok(triples: list[tuple[int, int, int]], digits_required: int) -> bool:
    for lo, hi, s in triples:
        # (hi - lo)/2^s <= 10^-digits  <=>  (hi - lo) * 10^digits <= 2^s
        if (hi - lo) * 10**digits_required > (1 << s):
            return False
    return True


def _triples_to_enclosures(triples: list[tuple[int, int, int]]) -> list[Enclosure]:
    return [Enclosure(Fraction(lo, 1 << s), Fraction(hi, 1 << s)) for lo, hi, s in triples]


def _mid_float(lo: int, hi: int, s: int) -> float:
    tot = lo + hi
    shift = max(0, tot.bit_length() - 56)
    return math.ldexp(float(tot >> shift), shift - s - 1)


def orbit_with_digits(
    b: BetaNumber,
    x0: object,
    n_steps: int,
    digits_required: int = 12,
    budget: PrecisionBudget | None = None,
    method: str = "auto",
) -> tuple[list[Enclosure], list[int], int]:
    """Certified orbit T(x0), T^2(x0), ..., T^n(x0) with digits floor(b*T^i x0).

    method "auto" prefers the exact field path for rational/quadratic bases on
    short orbits; "interval" forces pure interval arithmetic (restarting with
    doubled precision on ambiguity); "exact" requires an exact backing.
    Returns (points, digits, bits_used); bits_used is 0 on the exact path.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if method not in ("auto", "interval", "exact"):
        raise ValueError(f"unknown orbit method {method!r}")
    seed = _coerce_seed(x0)
    lo0, hi0, seed_exact = _seed_bounds(seed)
    _check_seed_range(lo0, hi0)
    b_exact = b.exact_value()
    out_bits = math.ceil(digits_required * math.log2(10)) + 4

    exact_possible = b_exact is not None and seed_exact is not None
    if exact_possible and isinstance(seed_exact, Quadratic):
        exact_possible = isinstance(b_exact, Quadratic) and b_exact.d == seed_exact.d
    if method == "exact" or (method == "auto" and exact_possible and n_steps <= _EXACT_PATH_CUTOFF):
        if not exact_possible:
            raise ValueError("exact orbit path needs an exact base and seed")
        points, digits = _exact_orbit(b_exact, seed_exact, n_steps, out_bits)
        return points, digits, 0

    log2b_up = b.log2_upper()
    if budget is None:
        budget = PrecisionBudget.for_orbit(log2b_up, n_steps, digits_required)
    bits = budget.initial_bits
    while True:
        try:
            triples, digits = _interval_orbit_attempt(
                b, lo0, hi0, n_steps, bits, out_bits, log2b_up
            )
            if _width_ok(triples, digits_required):
                return _triples_to_enclosures(triples), digits, bits
        except AmbiguousBranch:
            if exact_possible and method != "interval":
                points, digits = _exact_orbit(b_exact, seed_exact, n_steps, out_bits)
                return points, digits, 0
        bits *= 2
        if bits > budget.max_bits:
            raise PrecisionExhausted(
                f"orbit needs more than {budget.max_bits} bits "
                "(seed suspiciously close to a preimage of a branch cut?)"
            )


def tb_orbit(
    b: BetaNumber,
    x0: object,
    n_steps: int,
    digits_required: int = 12,
    budget: PrecisionBudget | None = None,
    method: str = "auto",
) -> list[Enclosure]:
    points, _, _ = orbit_with_digits(b, x0, n_steps, digits_required, budget, method)
    return points


def tb_orbit_floats(
    b: BetaNumber,
    x0: object,
    n_steps: int,
    digits_required: int = 9,
    budget: PrecisionBudget | None = None,
) -> list[float]:
    """Orbit midpoints as floats (certified to ~10^-digits_required each).

    Interval engine without Fraction wrapping; falls back to the exact path if
    a branch stays ambiguous and an exact backing exists.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    seed = _coerce_seed(x0)
    lo0, hi0, seed_exact = _seed_bounds(seed)
    _check_seed_range(lo0, hi0)
    b_exact = b.exact_value()
    exact_possible = b_exact is not None and seed_exact is not None
    if exact_possible and isinstance(seed_exact, Quadratic):
        exact_possible = isinstance(b_exact, Quadratic) and b_exact.d == seed_exact.d
    log2b_up = b.log2_upper()
    if budget is None:
        budget = PrecisionBudget.for_orbit(log2b_up, n_steps, digits_required)
    out_bits = math.ceil(digits_required * math.log2(10)) + 4
    bits = budget.initial_bits
    while True:
        try:
            triples, _ = _interval_orbit_attempt(b, lo0, hi0, n_steps, bits, out_bits, log2b_up)
            if _width_ok(triples, digits_required):
                return [_mid_float(lo, hi, s) for lo, hi, s in triples]
        except AmbiguousBranch:
            if exact_possible:
                points, _ = _exact_orbit(b_exact, seed_exact, n_steps, out_bits)
                return [float(p) for p in points]
        bits *= 2
        if bits > budget.max_bits:
            raise PrecisionExhausted(
                f"orbit needs more than {budget.max_bits} bits "
                "(seed suspiciously close to a preimage of a branch cut?)"
            )
