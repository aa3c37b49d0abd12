"""The fermionic recursion engine.

Computes the J-function coefficients J_alpha over the cone of a Cartan datum
by memoized dynamic programming: the beta = alpha term of the defining sum is
moved to the left, so each new value is the lower-interval sum divided by the
pivot binomial 1 - q^{(alpha,alpha)/2} z^{alpha*}. The un-rearranged sum is
reserved for the verify module, keeping computation and checking independent.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cartan import (
    CartanDatum,
    ConeVector,
    height,
    interval_below,
    norm_half,
    star_monomial,
)
from .errors import (
    CacheCorruptError,
    DatumMismatchError,
    InternalInvariantError,
    PoleError,
)
from .exactalg import (
    BinomialFactor,
    Coeff,
    FactoredRational,
    MultiPolynomial,
    coeff_str,
    frac_equal,
    frac_from_obj,
    frac_sum,
    frac_to_json,
    frac_to_obj,
)

ENGINE_VERSION = "1"


class JTable:
    """Memoized map from cone vectors to computed J values for one datum.

    Entries are insert-once: an insert at an occupied key asserts equality
    with the stored value, so concurrent population cannot corrupt the table.
    """

    def __init__(self, datum: CartanDatum, engine_version: str = ENGINE_VERSION):
        self.datum = datum
        self.engine_version = engine_version
        self._entries: dict[ConeVector, FactoredRational] = {}

    def __contains__(self, alpha: ConeVector) -> bool:
        return alpha in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, alpha: ConeVector) -> FactoredRational:
        return self._entries[alpha]

    def insert(self, alpha: ConeVector, value: FactoredRational) -> None:
        if alpha.datum != self.datum:
            raise DatumMismatchError("entry key belongs to a different datum")
        existing = self._entries.get(alpha)
        if existing is not None:
            if not frac_equal(existing, value):
                raise InternalInvariantError(
                    f"conflicting J values at alpha = {alpha}; entries are never overwritten"
                )
            return
        self._entries[alpha] = value

    def items_sorted(self) -> list[tuple[ConeVector, FactoredRational]]:
        return sorted(self._entries.items(), key=lambda kv: kv[0].coeffs)


def q_pochhammer(gamma: ConeVector) -> dict[BinomialFactor, int]:
    """Denominator multiset {1 - q^{d_i s} : i, 1 <= s <= c_i}; empty for gamma = 0."""
    rank = gamma.datum.rank
    d = gamma.datum.symmetrizers
    zero_m = (0,) * rank
    counts: dict[BinomialFactor, int] = {}
    for i, c in enumerate(gamma.coeffs):
        for s in range(1, c + 1):
            f = BinomialFactor(d[i] * s, zero_m)
            counts[f] = counts.get(f, 0) + 1
    return counts


def _weight_monomial(beta: ConeVector) -> MultiPolynomial:
    return MultiPolynomial.monomial(beta.datum.rank, (norm_half(beta), *star_monomial(beta)))


def _solve_entry(alpha: ConeVector, table: JTable) -> FactoredRational:
    """One recursion step: lower-interval sum divided by the pivot binomial."""
    rank = alpha.datum.rank
    if alpha.is_zero():
        return FactoredRational.one(rank)
    terms = []
    for beta in interval_below(alpha):
        if beta == alpha:
            continue
        j_beta = table.get(beta)
        den = dict(j_beta.denominator)
        for f, k in q_pochhammer(alpha - beta).items():
            den[f] = den.get(f, 0) + k
        terms.append(
            FactoredRational.build(j_beta.numerator * _weight_monomial(beta), den, normalize=False)
        )
    total = frac_sum(terms)
    # The pivot is non-constant even when (alpha, alpha) = 0: alpha != 0 gives z^{alpha*} != 1.
    pivot = BinomialFactor(norm_half(alpha), star_monomial(alpha))
    den = total.denominator_map()
    den[pivot] = den.get(pivot, 0) + 1
    return FactoredRational.build(total.numerator, den)


def compute_j(alpha: ConeVector, table: JTable) -> FactoredRational:
    """J_alpha, filling the table over the whole lower interval of alpha.

    Every beta < alpha genuinely appears in the sum, so the interval is the
    true working set; population runs bottom-up by height.
    """
    if alpha.datum != table.datum:
        raise DatumMismatchError("table is bound to a different datum")
    if alpha in table:
        return table.get(alpha)
    pending = sorted(interval_below(alpha), key=lambda b: (height(b), b.coeffs))
    for beta in pending:
        if beta in table:
            continue
        table.insert(beta, _solve_entry(beta, table))
    return table.get(alpha)


def closed_form_sl2(d: int) -> FactoredRational:
    """prod_{s=1}^{d} (1-q^s)^{-1} (1-q^s z1)^{-1} in rank 1."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    factors: dict[BinomialFactor, int] = {}
    for s in range(1, d + 1):
        factors[BinomialFactor(s, (0,))] = 1
        factors[BinomialFactor(s, (1,))] = 1
    return FactoredRational.build(MultiPolynomial.one(1), factors, normalize=False)


def generating_series(table: JTable, bound: ConeVector) -> list[tuple[ConeVector, FactoredRational]]:
    """Truncated generating sum as (alpha, J_alpha) pairs for alpha <= bound.

    The x^alpha bookkeeping stays symbolic: the exponent alpha is the key and
    no x-arithmetic is performed.
    """
    compute_j(bound, table)
    return [(beta, table.get(beta)) for beta in interval_below(bound)]


# ---------------------------------------------------------------------------
# Affine (t, u, v) chart
# ---------------------------------------------------------------------------

ChartExponents = tuple[int, ...]  # (t_1 .. t_{N-1}, u, v); t exponents may be negative


@dataclass(frozen=True)
class ChartRational:
    """Rational function on the (t, u, v) torus chart of affine type A.

    This is the one context that permits Laurent monomials: after the
    relation t_1 ... t_N = 1 eliminates t_N, exponents of the surviving
    t variables may be negative. Denominator factors are (1 - X^monomial).
    """

    tvars: int
    numerator: tuple[tuple[ChartExponents, Coeff], ...]
    factors: tuple[tuple[ChartExponents, int], ...]

    def var_names(self) -> list[str]:
        return [f"t{j}" for j in range(1, self.tvars + 1)] + ["u", "v"]

    def evaluate(self, tvals: Sequence[Coeff], uval: Coeff, vval: Coeff) -> Fraction:
        if len(tvals) != self.tvars:
            raise DatumMismatchError(f"expected {self.tvars} t-values")
        point = [Fraction(x) for x in tvals] + [Fraction(uval), Fraction(vval)]
        if any(x == 0 for x in point[: self.tvars]):
            raise ZeroDivisionError("t-coordinates must be nonzero on the torus chart")
        total = Fraction(0)
        for exps, c in self.numerator:
            term = Fraction(c)
            for base, e in zip(point, exps):
                term *= base**e
            total += term
        for exps, mult in self.factors:
            mono = Fraction(1)
            for base, e in zip(point, exps):
                mono *= base**e
            val = 1 - mono
            if val == 0:
                raise PoleError(f"chart evaluation hit the pole 1 - X^{exps}", factor=exps)
            total /= val**mult
        return total

    def is_monomial(self) -> ChartExponents | None:
        """The exponent vector when the value is a single monic monomial, else None."""
        if self.factors or len(self.numerator) != 1:
            return None
        exps, c = self.numerator[0]
        return exps if c == 1 else None

    def to_obj(self) -> dict:
        return {
            "tvars": self.tvars,
            "numerator": [[list(e), coeff_str(c)] for e, c in self.numerator],
            "factors": [{"monomial": list(e), "multiplicity": k} for e, k in self.factors],
        }


def chart_exponent_map(exps: tuple[int, ...], nodes: int) -> ChartExponents:
    """Map a (q, z_0..z_{N-1}) exponent vector into the (t, u, v) chart.

    q -> v^2 and z_i -> t_{i+1} t_i^{-1} u^{delta_{0,i}} with indices mod N
    (t_0 is read as t_N), then t_N is eliminated through t_1 ... t_N = 1.
    """
    if len(exps) != nodes + 1:
        raise DatumMismatchError("exponent vector does not match the number of nodes")
    f = [0] * (nodes + 1)  # pre-elimination t_1..t_N exponents; f[0] unused
    for i in range(nodes):
        c = exps[1 + i]
        if not c:
            continue
        f[i + 1] += c
        f[nodes if i == 0 else i] -= c
    drop = f[nodes]
    t_part = tuple(f[k] - drop for k in range(1, nodes))
    return (*t_part, exps[1], 2 * exps[0])


def affine_chart_substitute(r: FactoredRational, nodes: int) -> ChartRational:
    """Exact monomial substitution of an affine-A rational into the chart."""
    if nodes < 2:
        raise DatumMismatchError("the chart needs at least 2 nodes")
    if r.rank != nodes:
        raise DatumMismatchError(f"rational has rank {r.rank}, expected {nodes}")
    num: dict[ChartExponents, Coeff] = {}
    for exps, c in r.numerator.terms().items():
        key = chart_exponent_map(exps, nodes)
        s = num.get(key, 0) + c
        if s == 0:
            num.pop(key, None)
        else:
            num[key] = s
    factors: dict[ChartExponents, int] = {}
    for f, k in r.denominator:
        key = chart_exponent_map(f.monomial_exponents(), nodes)
        factors[key] = factors.get(key, 0) + k
    return ChartRational(
        tvars=nodes - 1,
        numerator=tuple(sorted(num.items())),
        factors=tuple(sorted(factors.items())),
    )


# ---------------------------------------------------------------------------
# Disk cache: one file per (datum, engine version)
# ---------------------------------------------------------------------------


def _alpha_key(alpha: ConeVector) -> str:
    return ",".join(str(c) for c in alpha.coeffs)


def _datum_fingerprint(datum: CartanDatum) -> dict:
    return {
        "label": datum.label,
        "rank": datum.rank,
        "matrix": [list(row) for row in datum.matrix],
        "symmetrizers": list(datum.symmetrizers),
        "affine": datum.affine,
    }


def cache_filename(datum: CartanDatum, engine_version: str = ENGINE_VERSION) -> str:
    safe = re.sub(r"[^A-Za-z0-9_.-]", "_", datum.label)
    if len(safe) > 40:
        digest = hashlib.sha256(datum.label.encode()).hexdigest()[:12]
        safe = f"{safe[:28]}_{digest}"
    return f"{safe}__v{engine_version}.json"


def table_to_json(table: JTable) -> str:
    obj = {
        "engine_version": table.engine_version,
        "datum": _datum_fingerprint(table.datum),
        "entries": {_alpha_key(a): frac_to_obj(v) for a, v in table.items_sorted()},
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def save_table(table: JTable, directory) -> str:
    from pathlib import Path

    path = Path(directory) / cache_filename(table.datum, table.engine_version)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_to_json(table) + "\n", encoding="utf-8")
    return str(path)


def load_table(datum: CartanDatum, directory, engine_version: str = ENGINE_VERSION) -> JTable | None:
    """Load the cache for a datum; None when absent or written by another engine
    version (those are silently recomputed). Structural damage raises."""
    from pathlib import Path

    path = Path(directory) / cache_filename(datum, engine_version)
    if not path.exists():
        return None
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheCorruptError(f"cache file {path} is unreadable: {exc}") from exc
    if not isinstance(obj, dict) or "entries" not in obj:
        raise CacheCorruptError(f"cache file {path} has no entries object")
    if obj.get("engine_version") != engine_version:
        return None
    if obj.get("datum") != _datum_fingerprint(datum):
        return None
    table = JTable(datum, engine_version)
    for key, frac_obj in obj["entries"].items():
        try:
            coeffs = tuple(int(c) for c in key.split(","))
            alpha = ConeVector(datum, coeffs)
            value = frac_from_obj(frac_obj)
        except Exception as exc:
            raise CacheCorruptError(f"cache entry {key!r} in {path} is corrupt: {exc}") from exc
        if value.rank != datum.rank:
            raise CacheCorruptError(f"cache entry {key!r} in {path} has wrong rank")
        table.insert(alpha, value)
    return table


def entry_bytes(value: FactoredRational) -> bytes:
    """Canonical byte serialization used by cache-identity checks."""
    return frac_to_json(value).encode("utf-8")
