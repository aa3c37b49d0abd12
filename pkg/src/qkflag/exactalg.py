"""Exact arithmetic in q and z1..zr: sparse polynomials over arbitrary-precision
rationals, and rational functions kept with factored binomial denominators.

Exponent vectors are tuples (power of q, then powers of z1..zr). Coefficients
are Python ints or Fractions; all operations are exact. Every value is
immutable after construction, so instances may be shared freely across
threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    DatumMismatchError,
    ExponentOverflowError,
    GradingError,
    InternalInvariantError,
    PoleError,
)

Exponents = tuple[int, ...]
Coeff = Union[int, Fraction]

# Hard cap on any single exponent. Exceeding it raises, never wraps.
EXPONENT_LIMIT = 2**62


def _check_exponents(exps: Exponents, nvars: int, allow_negative: bool = False) -> None:
    if len(exps) != nvars:
        raise DatumMismatchError(f"exponent vector {exps} has length {len(exps)}, expected {nvars}")
    for e in exps:
        if not isinstance(e, int):
            raise TypeError(f"exponent {e!r} is not an integer")
        if e > EXPONENT_LIMIT or e < -EXPONENT_LIMIT:
            raise ExponentOverflowError(f"exponent {e} exceeds limit {EXPONENT_LIMIT}")
        if e < 0 and not allow_negative:
            raise ValueError(f"negative exponent {e} in {exps}")


def coeff_str(c: Coeff) -> str:
    """Canonical "num/den" rendering of a coefficient."""
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    return f"{c}/1"


def coeff_from_str(text: str) -> Coeff:
    num_s, den_s = text.split("/")
    num, den = int(num_s), int(den_s)
    if den == 1:
        return num
    return Fraction(num, den)


def _term_key(exps: Exponents) -> tuple[int, Exponents]:
    # Canonical term order: total degree, then lexicographic exponent vector.
    return (sum(exps), exps)


class MultiPolynomial:
    """Sparse exact polynomial in q and z1..zr.

    ``rank`` counts the z variables; exponent vectors have length rank + 1
    with q first. No zero coefficients are stored, so equal polynomials
    compare equal structurally.
    """

    __slots__ = ("rank", "_terms")

    def __init__(self, rank: int, terms: Mapping[Exponents, Coeff] | None = None):
        if rank < 0:
            raise ValueError("rank must be nonnegative")
        nvars = rank + 1
        clean: dict[Exponents, Coeff] = {}
        if terms:
            for exps, c in terms.items():
                if c == 0:
                    continue
                exps = tuple(exps)
                _check_exponents(exps, nvars)
                clean[exps] = c
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("MultiPolynomial is immutable")

    @classmethod
    def _combined(cls, rank: int, terms: dict) -> "MultiPolynomial":
        """Internal fast path for results of arithmetic on validated operands.

        Callers guarantee tuple keys of the right length, nonnegative integer
        entries, and no stored zeros; only exponent growth is re-checked.
        """
        if terms:
            peak = max(max(e) for e in terms)
            if peak > EXPONENT_LIMIT:
                raise ExponentOverflowError(f"exponent {peak} exceeds limit {EXPONENT_LIMIT}")
        self = object.__new__(cls)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "_terms", terms)
        return self

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, rank: int) -> "MultiPolynomial":
        return cls(rank, {})

    @classmethod
    def constant(cls, rank: int, c: Coeff) -> "MultiPolynomial":
        return cls(rank, {tuple([0] * (rank + 1)): c})

    @classmethod
    def one(cls, rank: int) -> "MultiPolynomial":
        return cls.constant(rank, 1)

    @classmethod
    def monomial(cls, rank: int, exps: Sequence[int], c: Coeff = 1) -> "MultiPolynomial":
        return cls(rank, {tuple(exps): c})

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def total_degree(self) -> int:
        """Max total degree over all terms; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def sorted_terms(self) -> list[tuple[Exponents, Coeff]]:
        return sorted(self._terms.items(), key=lambda item: _term_key(item[0]))

    def terms(self) -> Mapping[Exponents, Coeff]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPolynomial):
            return NotImplemented
        return self.rank == other.rank and self._terms == other._terms

    def __hash__(self):
        return hash((self.rank, tuple(self.sorted_terms())))

    def __repr__(self) -> str:
        return f"MultiPolynomial(rank={self.rank}, {render_poly(self)!r})"

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other) -> "MultiPolynomial":
        if isinstance(other, MultiPolynomial):
            if other.rank != self.rank:
                raise DatumMismatchError(f"rank mismatch: {self.rank} vs {other.rank}")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPolynomial.constant(self.rank, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "MultiPolynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for exps, c in other._terms.items():
            s = out.get(exps, 0) + c
            if s == 0:
                out.pop(exps, None)
            else:
                out[exps] = s
        return MultiPolynomial._combined(self.rank, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPolynomial":
        return MultiPolynomial._combined(self.rank, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "MultiPolynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "MultiPolynomial":
        return (-self) + other

    def __mul__(self, other) -> "MultiPolynomial":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return MultiPolynomial.zero(self.rank)
            return MultiPolynomial._combined(
                self.rank, {e: c * other for e, c in self._terms.items()}
            )
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Exponents, Coeff] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPolynomial._combined(self.rank, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPolynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = MultiPolynomial.one(self.rank)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- evaluation and reindexing --------------------------------------

    def evaluate(self, q0: Coeff, zvals: Sequence[Coeff]) -> Fraction:
        """Exact value at q = q0, z_i = zvals[i]."""
        if len(zvals) != self.rank:
            raise DatumMismatchError(f"expected {self.rank} z-values, got {len(zvals)}")
        point = (Fraction(q0), *(Fraction(v) for v in zvals))
        total = Fraction(0)
        for exps, c in self._terms.items():
            term = Fraction(c)
            for base, e in zip(point, exps):
                term *= base**e
            total += term
        return total

    def embed(self, new_rank: int, z_index_map: Sequence[int]) -> "MultiPolynomial":
        """Reindex z variables: old position j becomes z_index_map[j] in a rank-new_rank ring."""
        if len(z_index_map) != self.rank:
            raise DatumMismatchError("index map length must equal rank")
        if len(set(z_index_map)) != len(z_index_map):
            raise ValueError("index map must be injective")
        out: dict[Exponents, Coeff] = {}
        for exps, c in self._terms.items():
            new = [0] * (new_rank + 1)
            new[0] = exps[0]
            for j, e in enumerate(exps[1:]):
                new[1 + z_index_map[j]] = e
            out[tuple(new)] = c
        return MultiPolynomial(new_rank, out)


@dataclass(frozen=True, order=True)
class BinomialFactor:
    """The denominator factor 1 - q^a * z^m.

    The monomial must be non-constant (a > 0 or m != 0), which keeps the
    factor invertible as a rational function and series-expandable.
    """

    a: int
    m: Exponents

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("q-exponent a must be nonnegative")
        object.__setattr__(self, "m", tuple(self.m))
        _check_exponents(self.m, len(self.m))
        if self.a == 0 and all(e == 0 for e in self.m):
            raise ValueError("binomial factor monomial must be non-constant")
        if self.a > EXPONENT_LIMIT:
            raise ExponentOverflowError(f"exponent {self.a} exceeds limit")

    @property
    def rank(self) -> int:
        return len(self.m)

    def monomial_exponents(self) -> Exponents:
        return (self.a, *self.m)

    def as_polynomial(self) -> MultiPolynomial:
        rank = self.rank
        one = tuple([0] * (rank + 1))
        return MultiPolynomial(rank, {one: 1, self.monomial_exponents(): -1})

    def describe(self) -> str:
        return render_poly(self.as_polynomial())


Denominator = tuple[tuple[BinomialFactor, int], ...]


def _freeze_denominator(factors: Mapping[BinomialFactor, int] | Iterable) -> Denominator:
    counts: dict[BinomialFactor, int] = {}
    items = factors.items() if isinstance(factors, Mapping) else factors
    for entry in items:
        if isinstance(entry, BinomialFactor):
            f, k = entry, 1
        else:
            f, k = entry
        if k < 0:
            raise ValueError("factor multiplicity must be nonnegative")
        if k:
            counts[f] = counts.get(f, 0) + k
    return tuple(sorted(counts.items()))


class FactoredRational:
    """numerator / prod (1 - q^a z^m)^multiplicity, exact.

    The denominator is never expanded. Normalization divides the numerator
    by denominator binomials until none divides; equal rational functions
    may still differ structurally, and ``equals`` decides true equality.
    """

    __slots__ = ("rank", "numerator", "denominator")

    def __init__(self, numerator: MultiPolynomial, denominator: Denominator):
        object.__setattr__(self, "rank", numerator.rank)
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)
        for f, _ in denominator:
            if f.rank != numerator.rank:
                raise DatumMismatchError("denominator factor rank differs from numerator")

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("FactoredRational is immutable")

    @classmethod
    def build(
        cls,
        numerator: MultiPolynomial,
        factors: Mapping[BinomialFactor, int] | Iterable = (),
        normalize: bool = True,
    ) -> "FactoredRational":
        r = cls(numerator, _freeze_denominator(factors))
        return r.normalized() if normalize else r

    @classmethod
    def one(cls, rank: int) -> "FactoredRational":
        return cls(MultiPolynomial.one(rank), ())

    @classmethod
    def from_polynomial(cls, p: MultiPolynomial) -> "FactoredRational":
        return cls(p, ())

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def denominator_map(self) -> dict[BinomialFactor, int]:
        return dict(self.denominator)

    def normalized(self) -> "FactoredRational":
        """Divide the numerator by denominator binomials until none divides."""
        num = self.numerator
        if num.is_zero():
            return FactoredRational(num, ())
        counts = dict(self.denominator)
        changed = True
        while changed:
            changed = False
            for f in list(counts):
                while counts.get(f, 0) > 0:
                    q = poly_divide_binomial(num, f)
                    if q is None:
                        break
                    num = q
                    counts[f] -= 1
                    changed = True
                if counts.get(f) == 0:
                    del counts[f]
        return FactoredRational(num, tuple(sorted(counts.items())))

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "FactoredRational") -> "FactoredRational":
        if not isinstance(other, FactoredRational):
            return NotImplemented
        return frac_sum([self, other])

    def __mul__(self, other) -> "FactoredRational":
        return frac_mul(self, other)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, FactoredRational):
            return NotImplemented
        return frac_equal(self, other)

    def __hash__(self):  # structural; equal-by-value objects may hash apart
        raise TypeError("FactoredRational is unhashable; compare with frac_equal")

    def equals(self, other: "FactoredRational") -> bool:
        return frac_equal(self, other)

    def __repr__(self) -> str:
        return f"FactoredRational({render_frac(self)!r})"

    def structurally_equal(self, other: "FactoredRational") -> bool:
        return (
            self.rank == other.rank
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def poly_mul(p: MultiPolynomial, q: MultiPolynomial) -> MultiPolynomial:
    return p * q


def poly_divide_binomial(p: MultiPolynomial, f: BinomialFactor) -> MultiPolynomial | None:
    """Exact quotient p / (1 - M) with M = q^a z^m, or None when not divisible.

    Terms are grouped into residue lines {rep + k*M : k >= 0} along the
    monomial direction. Multiplication by 1 - M acts line by line, so p is
    divisible exactly when every line's coefficient total is zero, and the
    quotient coefficients are the running prefix sums along each line.
    Failure costs one pass over the terms; no side effects on failure.
    """
    if f.rank != p.rank:
        raise DatumMismatchError("rank mismatch in binomial division")
    if p.is_zero():
        return p
    shift = f.monomial_exponents()
    if not any(shift):
        raise InternalInvariantError("binomial factor monomial must be non-constant")
    # cheapest filter first: 1 - M vanishes at the all-ones point
    if sum(p.terms().values()) != 0:
        return None
    lines: dict[Exponents, list[tuple[int, Coeff]]] = {}
    for exps, c in p.terms().items():
        k = min(exps[i] // s for i, s in enumerate(shift) if s)
        rep = tuple(a - k * s for a, s in zip(exps, shift))
        lines.setdefault(rep, []).append((k, c))
    for entries in lines.values():
        if sum(c for _, c in entries) != 0:
            return None
    quotient: dict[Exponents, Coeff] = {}
    for rep, entries in lines.items():
        entries.sort()
        top_k = entries[-1][0]
        running: Coeff = 0
        idx = 0
        for k in range(top_k):
            if idx < len(entries) and entries[idx][0] == k:
                running += entries[idx][1]
                idx += 1
            if running != 0:
                exps = tuple(a + k * s for a, s in zip(rep, shift))
                quotient[exps] = running
    return MultiPolynomial._combined(p.rank, quotient)


def _complement_product(num: MultiPolynomial, own: Mapping[BinomialFactor, int],
                        lcm: Mapping[BinomialFactor, int]) -> MultiPolynomial:
    """num * prod of (lcm / own) factors, expanded."""
    out = num
    for f, k in lcm.items():
        extra = k - own.get(f, 0)
        if extra < 0:
            raise InternalInvariantError("denominator exceeds its lcm")
        for _ in range(extra):
            out = out * f.as_polynomial()
    return out


def frac_sum(terms: Sequence[FactoredRational]) -> FactoredRational:
    """Exact sum over the factored least common denominator."""
    if not terms:
        raise ValueError("frac_sum needs at least one term")
    rank = terms[0].rank
    for t in terms:
        if t.rank != rank:
            raise DatumMismatchError("rank mismatch in rational sum")
    lcm: dict[BinomialFactor, int] = {}
    for t in terms:
        for f, k in t.denominator:
            if lcm.get(f, 0) < k:
                lcm[f] = k
    total = MultiPolynomial.zero(rank)
    for t in terms:
        total = total + _complement_product(t.numerator, dict(t.denominator), lcm)
    return FactoredRational.build(total, lcm)


def frac_add(r: FactoredRational, s: FactoredRational) -> FactoredRational:
    return frac_sum([r, s])


def frac_mul(r: FactoredRational, s) -> FactoredRational:
    """Exact product of r with a rational, polynomial, or scalar."""
    if isinstance(s, FactoredRational):
        if s.rank != r.rank:
            raise DatumMismatchError("rank mismatch in rational product")
        den: dict[BinomialFactor, int] = dict(r.denominator)
        for f, k in s.denominator:
            den[f] = den.get(f, 0) + k
        return FactoredRational.build(r.numerator * s.numerator, den)
    if isinstance(s, (MultiPolynomial, int, Fraction)):
        return FactoredRational.build(r.numerator * s, dict(r.denominator))
    raise TypeError(f"cannot multiply FactoredRational by {type(s).__name__}")


def frac_equal(r: FactoredRational, s: FactoredRational) -> bool:
    """Exact equality as rational functions, via cross-multiplication.

    Common denominator factors are cancelled first; the comparison itself is
    a deterministic polynomial identity, never probabilistic.
    """
    if r.rank != s.rank:
        raise DatumMismatchError("rank mismatch in rational comparison")
    r_den = dict(r.denominator)
    s_den = dict(s.denominator)
    left = r.numerator
    right = s.numerator
    for f in set(r_den) | set(s_den):
        shared = min(r_den.get(f, 0), s_den.get(f, 0))
        for _ in range(s_den.get(f, 0) - shared):
            left = left * f.as_polynomial()
        for _ in range(r_den.get(f, 0) - shared):
            right = right * f.as_polynomial()
    return left == right


def _grade(exps: Exponents, grading: str) -> int:
    if grading == "q":
        return exps[0]
    return sum(exps)


def series_expand(r: FactoredRational, order: int, grading: str = "q") -> list[MultiPolynomial]:
    """Graded coefficients of the geometric expansion of r up to ``order``.

    grading "q" grades by the q-exponent and returns polynomials in z; it
    requires every denominator factor to carry a positive q-power. grading
    "joint" grades by q-exponent plus total z-degree and works for any
    non-constant factors.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if grading not in ("q", "joint"):
        raise GradingError(f"unknown grading {grading!r}")
    if grading == "q":
        for f, _ in r.denominator:
            if f.a == 0:
                raise GradingError(
                    f"q-grading undefined: factor {f.describe()} has no q-power; use joint grading"
                )
    acc: dict[Exponents, Coeff] = {
        e: c for e, c in r.numerator.terms().items() if _grade(e, grading) <= order
    }
    for f, mult in r.denominator:
        shift = f.monomial_exponents()
        step = _grade(shift, grading)
        if step <= 0:
            raise GradingError(f"factor {f.describe()} does not increase the {grading} grade")
        expansion: list[tuple[Exponents, int]] = []
        k = 0
        while k * step <= order:
            exps = tuple(e * k for e in shift)
            expansion.append((exps, math.comb(k + mult - 1, mult - 1)))
            k += 1
        nxt: dict[Exponents, Coeff] = {}
        for e1, c1 in acc.items():
            g1 = _grade(e1, grading)
            for e2, c2 in expansion:
                if g1 + _grade(e2, grading) > order:
                    break
                e = tuple(a + b for a, b in zip(e1, e2))
                s = nxt.get(e, 0) + c1 * c2
                if s == 0:
                    nxt.pop(e, None)
                else:
                    nxt[e] = s
        acc = nxt
    buckets: list[dict[Exponents, Coeff]] = [dict() for _ in range(order + 1)]
    for exps, c in acc.items():
        g = _grade(exps, grading)
        if grading == "q":
            exps = (0, *exps[1:])
        buckets[g][exps] = c
    return [MultiPolynomial(r.rank, b) for b in buckets]


def evaluate_at(r: FactoredRational, q0: Coeff, zvals: Sequence[Coeff]) -> Fraction:
    """Exact rational value of r at q = q0, z = zvals; poles are reported."""
    value = r.numerator.evaluate(q0, zvals)
    q0 = Fraction(q0)
    zpt = [Fraction(v) for v in zvals]
    for f, mult in r.denominator:
        mono = q0**f.a
        for base, e in zip(zpt, f.m):
            mono *= base**e
        factor_value = 1 - mono
        if factor_value == 0:
            raise PoleError(f"evaluation point lies on the pole {f.describe()}", factor=f)
        value /= factor_value**mult
    return Fraction(value)


def rename_rational(r: FactoredRational, new_rank: int, z_index_map: Sequence[int]) -> FactoredRational:
    """Reindex a rational's z variables through an injective position map."""
    num = r.numerator.embed(new_rank, z_index_map)
    factors: dict[BinomialFactor, int] = {}
    for f, k in r.denominator:
        new_m = [0] * new_rank
        for j, e in enumerate(f.m):
            new_m[z_index_map[j]] = e
        factors[BinomialFactor(f.a, tuple(new_m))] = k
    return FactoredRational.build(num, factors, normalize=False)


# ---------------------------------------------------------------------------
# Serialization and rendering
# ---------------------------------------------------------------------------


def poly_to_obj(p: MultiPolynomial) -> dict:
    return {
        "rank": p.rank,
        "terms": [[list(exps), coeff_str(c)] for exps, c in p.sorted_terms()],
    }


def poly_from_obj(obj: Mapping) -> MultiPolynomial:
    rank = int(obj["rank"])
    terms = {tuple(int(e) for e in exps): coeff_from_str(c) for exps, c in obj["terms"]}
    return MultiPolynomial(rank, terms)


def frac_to_obj(r: FactoredRational) -> dict:
    return {
        "rank": r.rank,
        "numerator": poly_to_obj(r.numerator)["terms"],
        "denominator": [
            {"a": f.a, "m": list(f.m), "multiplicity": k} for f, k in r.denominator
        ],
    }


def frac_from_obj(obj: Mapping) -> FactoredRational:
    rank = int(obj["rank"])
    num = poly_from_obj({"rank": rank, "terms": obj["numerator"]})
    factors = {
        BinomialFactor(int(d["a"]), tuple(int(e) for e in d["m"])): int(d["multiplicity"])
        for d in obj["denominator"]
    }
    return FactoredRational.build(num, factors, normalize=False)


def frac_to_json(r: FactoredRational) -> str:
    """Canonical single-line JSON; byte-stable for golden and cache tests."""
    return json.dumps(frac_to_obj(r), sort_keys=True, separators=(",", ":"))


def frac_from_json(text: str) -> FactoredRational:
    return frac_from_obj(json.loads(text))


def default_z_names(rank: int) -> list[str]:
    return [f"z{i + 1}" for i in range(rank)]


def _render_monomial(exps: Exponents, names: Sequence[str], power_fmt: str) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 0:
            continue
        parts.append(name if e == 1 else power_fmt.format(name=name, exp=e))
    return " ".join(parts)


def render_poly(p: MultiPolynomial, z_names: Sequence[str] | None = None, latex: bool = False) -> str:
    """Human-readable polynomial in canonical term order."""
    names = ["q"] + list(z_names if z_names is not None else default_z_names(p.rank))
    if latex:
        names = [n if n == "q" else _latex_name(n) for n in names]
    power_fmt = "{name}^{{{exp}}}" if latex else "{name}^{exp}"
    if p.is_zero():
        return "0"
    chunks = []
    for i, (exps, c) in enumerate(p.sorted_terms()):
        mono = _render_monomial(exps, names, power_fmt)
        cf = Fraction(c)
        neg = cf < 0
        mag = -cf if neg else cf
        if mono and mag == 1:
            body = mono
        else:
            coeff_txt = str(mag.numerator) if mag.denominator == 1 else (
                f"\\frac{{{mag.numerator}}}{{{mag.denominator}}}" if latex else f"{mag.numerator}/{mag.denominator}"
            )
            body = f"{coeff_txt} {mono}".strip()
        if i == 0:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(chunks)


def _latex_name(name: str) -> str:
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return f"{head}_{{{tail}}}" if tail else head


def render_frac(r: FactoredRational, z_names: Sequence[str] | None = None, latex: bool = False) -> str:
    num_txt = render_poly(r.numerator, z_names, latex)
    if not r.denominator:
        return num_txt
    factor_chunks = []
    for f, k in r.denominator:
        inner = render_poly(f.as_polynomial(), z_names, latex)
        power = (f"^{{{k}}}" if latex else f"^{k}") if k > 1 else ""
        factor_chunks.append(f"({inner}){power}")
    den_txt = " ".join(factor_chunks)
    if latex:
        return f"\\frac{{{num_txt}}}{{{den_txt}}}"
    return f"({num_txt}) / [{den_txt}]"
