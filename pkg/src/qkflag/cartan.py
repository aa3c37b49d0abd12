"""Root-system kernel: Cartan types, the symmetric bilinear form, the positive
cone, and the small closed-form statistics attached to cone vectors.

Finite types A..G are catalogued with Bourbaki numbering; untwisted affine
type A is catalogued as "A<n>~" with node 0 first. Symmetrizers d_i are
min-normalized (min d_i = 1), so q_i = q^{d_i} puts short indices at
exponent 1.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    CartanParseError,
    DatumMismatchError,
    NotInConeError,
    UnsupportedTypeError,
)
from .exactalg import MultiPolynomial

_LABEL_RE = re.compile(r"^([A-Za-z])([0-9]+)(~?)$")

_FINITE_RANK_RANGES = {
    "A": (1, None),
    "B": (2, None),
    "C": (2, None),
    "D": (3, None),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}


@dataclass(frozen=True)
class CartanDatum:
    """A symmetrizable Cartan matrix with its min-normalized symmetrizers.

    ``rank`` is the number of nodes (for affine labels this counts the
    extended diagram). ``matrix`` rows/columns follow the catalogued
    numbering; ``bilinear[i][j] = d_i * a_ij`` is the even invariant form.
    """

    label: str
    rank: int
    matrix: tuple[tuple[int, ...], ...]
    symmetrizers: tuple[int, ...]
    affine: bool
    verified: bool = True  # False for escape-hatch affine data; outputs are conjectural

    def __post_init__(self):
        _validate_datum(self)

    @property
    def bilinear(self) -> tuple[tuple[int, ...], ...]:
        d, a = self.symmetrizers, self.matrix
        return tuple(tuple(d[i] * a[i][j] for j in range(self.rank)) for i in range(self.rank))

    def is_simply_laced(self) -> bool:
        return not self.affine and all(d == 1 for d in self.symmetrizers)

    def z_names(self) -> list[str]:
        # Affine diagrams number nodes from 0, finite ones from 1.
        base = 0 if self.affine else 1
        return [f"z{i + base}" for i in range(self.rank)]

    def zero(self) -> "ConeVector":
        return ConeVector(self, (0,) * self.rank)

    def simple(self, index: int) -> "ConeVector":
        coeffs = [0] * self.rank
        coeffs[index] = 1
        return ConeVector(self, tuple(coeffs))

    def cone(self, coeffs: Sequence[int]) -> "ConeVector":
        return ConeVector(self, tuple(coeffs))


@dataclass(frozen=True)
class ConeVector:
    """A nonnegative integer combination of the simple basis of one datum."""

    datum: CartanDatum
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) != self.datum.rank:
            raise DatumMismatchError(
                f"vector length {len(self.coeffs)} does not match rank {self.datum.rank}"
            )
        if any((not isinstance(c, int)) or c < 0 for c in self.coeffs):
            raise NotInConeError(f"coefficients {self.coeffs} leave the nonnegative cone")

    def _check_same(self, other: "ConeVector") -> None:
        if self.datum != other.datum:
            raise DatumMismatchError("cone vectors belong to different Cartan data")

    def __add__(self, other: "ConeVector") -> "ConeVector":
        self._check_same(other)
        return ConeVector(self.datum, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ConeVector") -> "ConeVector":
        self._check_same(other)
        diff = tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        if any(c < 0 for c in diff):
            raise NotInConeError(f"{self.coeffs} - {other.coeffs} leaves the cone")
        return ConeVector(self.datum, diff)

    def __le__(self, other: "ConeVector") -> bool:
        self._check_same(other)
        return all(a <= b for a, b in zip(self.coeffs, other.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coeffs) + ")"


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def _chain_matrix(n: int) -> list[list[int]]:
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n - 1):
        a[i][i + 1] = -1
        a[i + 1][i] = -1
    return a


def _finite_matrix(letter: str, n: int) -> list[list[int]]:
    if letter == "A":
        return _chain_matrix(n)
    if letter == "B":
        a = _chain_matrix(n)
        a[n - 1][n - 2] = -2
        return a
    if letter == "C":
        a = _chain_matrix(n)
        a[n - 2][n - 1] = -2
        return a
    if letter == "D":
        a = _chain_matrix(n)
        a[n - 2][n - 1] = a[n - 1][n - 2] = 0
        a[n - 3][n - 1] = a[n - 1][n - 3] = -1
        return a
    if letter == "E":
        a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
        edges = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5)]
        if n >= 7:
            edges.append((5, 6))
        if n == 8:
            edges.append((6, 7))
        for i, j in edges:
            a[i][j] = a[j][i] = -1
        return a
    if letter == "F":
        return [[2, -1, 0, 0], [-1, 2, -1, 0], [0, -2, 2, -1], [0, 0, -1, 2]]
    if letter == "G":
        return [[2, -1], [-3, 2]]
    raise UnsupportedTypeError(f"unknown finite type letter {letter!r}")


def _affine_a_matrix(nodes: int) -> list[list[int]]:
    if nodes == 2:
        return [[2, -2], [-2, 2]]
    a = [[2 if i == j else 0 for j in range(nodes)] for i in range(nodes)]
    for i in range(nodes):
        j = (i + 1) % nodes
        a[i][j] = a[j][i] = -1
    return a


def parse_cartan_type(text: str) -> CartanDatum:
    """Resolve a type label like "A3", "G2", or "A1~" to its Cartan datum."""
    m = _LABEL_RE.match(text.strip())
    if not m:
        raise CartanParseError(
            f"malformed type string {text!r}; expected <letter><rank> or A<rank>~"
        )
    letter, rank_s, tilde = m.group(1).upper(), m.group(2), m.group(3)
    n = int(rank_s)
    if tilde:
        if letter != "A":
            raise UnsupportedTypeError(
                f"affine type {text!r} is not supported; only untwisted affine A (\"A<n>~\")"
            )
        if n < 1:
            raise UnsupportedTypeError("affine A requires rank >= 1")
        nodes = n + 1
        matrix = _affine_a_matrix(nodes)
        return CartanDatum(
            label=f"A{n}~",
            rank=nodes,
            matrix=tuple(tuple(row) for row in matrix),
            symmetrizers=(1,) * nodes,
            affine=True,
        )
    if letter not in _FINITE_RANK_RANGES:
        raise UnsupportedTypeError(f"unknown type letter {letter!r} in {text!r}")
    lo, hi = _FINITE_RANK_RANGES[letter]
    if n < lo or (hi is not None and n > hi):
        raise UnsupportedTypeError(f"rank {n} is not valid for type {letter}")
    matrix = _finite_matrix(letter, n)
    d = infer_symmetrizers(matrix)
    return CartanDatum(
        label=f"{letter}{n}",
        rank=n,
        matrix=tuple(tuple(row) for row in matrix),
        symmetrizers=d,
        affine=False,
    )


def catalogued_finite_labels(max_rank: int = 8) -> list[str]:
    """All finite labels with rank <= max_rank, for cross-type property tests."""
    out = []
    for letter, (lo, hi) in _FINITE_RANK_RANGES.items():
        top = min(hi, max_rank) if hi is not None else max_rank
        out.extend(f"{letter}{n}" for n in range(lo, top + 1))
    return out


# ---------------------------------------------------------------------------
# Validation and symmetrizers
# ---------------------------------------------------------------------------


def _connected_components(matrix: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(matrix)
    seen: set[int] = set()
    comps = []
    for start in range(n):
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if j not in seen and matrix[i][j] != 0 and i != j:
                    seen.add(j)
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def infer_symmetrizers(matrix: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Solve d_i a_ij = d_j a_ji for positive integers, min 1 per component."""
    n = len(matrix)
    _check_gcm(matrix)
    d: list[Fraction | None] = [None] * n
    for comp in _connected_components(matrix):
        root = comp[0]
        d[root] = Fraction(1)
        stack = [root]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or matrix[i][j] == 0:
                    continue
                ratio = Fraction(matrix[i][j], matrix[j][i])
                val = d[i] * ratio  # type: ignore[operand]
                if d[j] is None:
                    d[j] = val
                    stack.append(j)
                elif d[j] != val:
                    raise UnsupportedTypeError("matrix is not symmetrizable")
        comp_vals = [d[i] for i in comp]
        denom_lcm = 1
        for v in comp_vals:
            denom_lcm = denom_lcm * v.denominator // _gcd(denom_lcm, v.denominator)  # type: ignore[union-attr]
        ints = [int(v * denom_lcm) for v in comp_vals]  # type: ignore[operator]
        g = 0
        for x in ints:
            g = _gcd(g, x)
        ints = [x // g for x in ints]
        if min(ints) != 1:
            raise UnsupportedTypeError(
                "matrix has no integer symmetrizer with min 1 on every component"
            )
        for i, v in zip(comp, ints):
            d[i] = Fraction(v)
    result = tuple(int(v) for v in d)  # type: ignore[arg-type]
    for i in range(n):
        for j in range(n):
            if result[i] * matrix[i][j] != result[j] * matrix[j][i]:
                raise UnsupportedTypeError("matrix is not symmetrizable")
    return result


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _check_gcm(matrix: Sequence[Sequence[int]]) -> None:
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise UnsupportedTypeError("Cartan matrix must be square")
    for i in range(n):
        if matrix[i][i] != 2:
            raise UnsupportedTypeError(f"diagonal entry a[{i}][{i}] must be 2")
        for j in range(n):
            if i == j:
                continue
            if matrix[i][j] > 0:
                raise UnsupportedTypeError(f"off-diagonal entry a[{i}][{j}] must be <= 0")
            if (matrix[i][j] == 0) != (matrix[j][i] == 0):
                raise UnsupportedTypeError(f"zero pattern not symmetric at ({i},{j})")


def _symmetric_definiteness(b: Sequence[Sequence[int]]) -> tuple[bool, int]:
    """Exact PSD test via symmetric elimination; returns (psd, kernel_dim)."""
    n = len(b)
    m = [[Fraction(x) for x in row] for row in b]
    kernel_dim = 0
    for k in range(n):
        piv = m[k][k]
        if piv < 0:
            return False, 0
        if piv == 0:
            if any(m[k][j] != 0 for j in range(k + 1, n)):
                return False, 0
            kernel_dim += 1
            continue
        for i in range(k + 1, n):
            factor = m[i][k] / piv
            for j in range(k, n):
                m[i][j] -= factor * m[k][j]
    return True, kernel_dim


def _validate_datum(datum: CartanDatum) -> None:
    n = datum.rank
    if n <= 0:
        raise UnsupportedTypeError("rank must be positive")
    _check_gcm(datum.matrix)
    d = datum.symmetrizers
    if len(d) != n or any((not isinstance(x, int)) or x <= 0 for x in d):
        raise UnsupportedTypeError("symmetrizers must be positive integers")
    if min(d) != 1:
        raise UnsupportedTypeError("symmetrizers must be min-normalized (min d_i = 1)")
    for i in range(n):
        for j in range(n):
            if d[i] * datum.matrix[i][j] != d[j] * datum.matrix[j][i]:
                raise UnsupportedTypeError("symmetrizers do not symmetrize the matrix")
    b = datum.bilinear
    psd, kernel_dim = _symmetric_definiteness(b)
    if not datum.affine:
        if not psd or kernel_dim != 0:
            raise UnsupportedTypeError("finite datum requires a positive definite form")
    else:
        if not psd or kernel_dim != 1:
            raise UnsupportedTypeError(
                "affine datum requires a positive semidefinite form with 1-dim kernel"
            )


# ---------------------------------------------------------------------------
# Operations on cone vectors
# ---------------------------------------------------------------------------


def form_pair(beta: ConeVector, gamma: ConeVector) -> int:
    """The even invariant form (beta, gamma) = sum beta_i b_ij gamma_j."""
    if beta.datum != gamma.datum:
        raise DatumMismatchError("form_pair requires vectors over one datum")
    b = beta.datum.bilinear
    return sum(
        beta.coeffs[i] * b[i][j] * gamma.coeffs[j]
        for i in range(beta.datum.rank)
        for j in range(beta.datum.rank)
        if beta.coeffs[i] and gamma.coeffs[j]
    )


def norm_half(beta: ConeVector) -> int:
    """(beta, beta)/2, always an integer because the form is even."""
    pairing = form_pair(beta, beta)
    half, rem = divmod(pairing, 2)
    if rem:
        raise DatumMismatchError("form is not even; (beta, beta) must be divisible by 2")
    return half


def height(gamma: ConeVector) -> int:
    return sum(gamma.coeffs)


def interval_below(alpha: ConeVector) -> list[ConeVector]:
    """All beta with 0 <= beta <= alpha componentwise, in lexicographic order."""
    ranges = [range(c + 1) for c in alpha.coeffs]
    return [ConeVector(alpha.datum, combo) for combo in itertools.product(*ranges)]


def cone_vectors_up_to_height(datum: CartanDatum, bound: int) -> list[ConeVector]:
    """All cone vectors of height <= bound, in lexicographic order."""
    out = []
    for combo in itertools.product(range(bound + 1), repeat=datum.rank):
        if sum(combo) <= bound:
            out.append(ConeVector(datum, combo))
    return out


def star_monomial(beta: ConeVector) -> tuple[int, ...]:
    """Exponent vector of z^{beta*}; the star map relabels bases coordinatewise."""
    return beta.coeffs


def eigencharacter(alpha: ConeVector) -> MultiPolynomial:
    """The boundary-equation weight q^{(alpha,alpha)/2} z^{alpha*} as a monomial."""
    return MultiPolynomial.monomial(alpha.datum.rank, (norm_half(alpha), *star_monomial(alpha)))


def vanishing_orders(datum: CartanDatum, extrapolate: bool = False) -> tuple[int, ...]:
    """Boundary vanishing orders per index: 1 at short indices, the square-length
    ratio at long ones. These are the min-normalized symmetrizers of the
    transposed matrix. Affine input is rejected unless extrapolate=True, since
    the statement is established for finite types only."""
    if datum.affine and not extrapolate:
        raise UnsupportedTypeError(
            "vanishing orders are established for finite types; pass extrapolate=True to extend"
        )
    transpose = [[datum.matrix[j][i] for j in range(datum.rank)] for i in range(datum.rank)]
    return infer_symmetrizers(transpose)


def discrepancy(alpha: ConeVector) -> int:
    """Resolution discrepancy |alpha| + (alpha,alpha)/2 - 2 (simply-laced finite only)."""
    if not alpha.datum.is_simply_laced():
        raise UnsupportedTypeError("discrepancy is defined for simply-laced finite types")
    if alpha.is_zero():
        raise ValueError("discrepancy requires alpha != 0")
    return height(alpha) + norm_half(alpha) - 2


def deligne_pair(n1: int, n2: int) -> int:
    """Weight of the pairing of line bundles of degrees n1, n2; equals 2 n1 n2."""
    return (n1 + n2 + 1) * (n1 + n2) - (n1 + 1) * n1 - (n2 + 1) * n2


def det_character(datum: CartanDatum, coeffs: Sequence[int]) -> int:
    """Determinant-bundle weight of a full-lattice vector, equal to (gamma, gamma).

    Computed along two independent routes - the pairing decomposition
    sum_i (b_ii/2) * pair(n_i, n_i) + sum_{i<j} b_ij * pair(n_i, n_j) and the
    direct quadratic form - which must agree exactly.
    """
    coeffs = tuple(int(c) for c in coeffs)
    if len(coeffs) != datum.rank:
        raise DatumMismatchError("vector length does not match rank")
    b = datum.bilinear
    n = datum.rank
    via_pairing = 0
    for i in range(n):
        half_bii, rem = divmod(b[i][i], 2)
        if rem:
            raise DatumMismatchError("diagonal of the even form must be even")
        via_pairing += half_bii * deligne_pair(coeffs[i], coeffs[i])
    for i in range(n):
        for j in range(i + 1, n):
            via_pairing += b[i][j] * deligne_pair(coeffs[i], coeffs[j])
    direct = sum(coeffs[i] * b[i][j] * coeffs[j] for i in range(n) for j in range(n))
    if via_pairing != direct:
        raise DatumMismatchError(
            f"pairing decomposition {via_pairing} disagrees with the form {direct}"
        )
    return direct


def _strict_int(x, what: str) -> int:
    # bool is an int subclass but never a sensible matrix entry
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    raise UnsupportedTypeError(f"{what} must be an integer, got {x!r}")


def make_custom_datum(
    matrix: Sequence[Sequence[int]],
    symmetrizers: Sequence[int] | None = None,
    affine: bool = False,
    label: str | None = None,
    verified: bool = True,
) -> CartanDatum:
    """Build a datum from a raw matrix, inferring symmetrizers when omitted."""
    mat = tuple(tuple(_strict_int(x, "matrix entry") for x in row) for row in matrix)
    if symmetrizers is None:
        d = infer_symmetrizers(mat)
    else:
        d = tuple(_strict_int(x, "symmetrizer") for x in symmetrizers)
    if label is None:
        body = ";".join(",".join(str(x) for x in row) for row in mat)
        label = f"custom[{body}]" + ("~" if affine else "")
    return CartanDatum(
        label=label,
        rank=len(mat),
        matrix=mat,
        symmetrizers=d,
        affine=affine,
        verified=verified,
    )
