"""Exact computation of equivariant K-theoretic J-function coefficients of
flag manifolds via the fermionic recursion, for finite simple and untwisted
affine type-A root systems."""

from .cartan import (
    CartanDatum,
    ConeVector,
    cone_vectors_up_to_height,
    deligne_pair,
    det_character,
    discrepancy,
    eigencharacter,
    form_pair,
    height,
    interval_below,
    make_custom_datum,
    norm_half,
    parse_cartan_type,
    star_monomial,
    vanishing_orders,
)
from .exactalg import (
    BinomialFactor,
    FactoredRational,
    MultiPolynomial,
    evaluate_at,
    frac_add,
    frac_equal,
    frac_mul,
    frac_sum,
    poly_divide_binomial,
    poly_mul,
    rename_rational,
    series_expand,
)
from .jrecursion import (
    ENGINE_VERSION,
    ChartRational,
    JTable,
    affine_chart_substitute,
    closed_form_sl2,
    compute_j,
    generating_series,
    load_table,
    q_pochhammer,
    save_table,
)
from .verify import (
    VerificationReport,
    recursion_residual,
    verify_affine_chart,
    verify_determinant_identity,
    verify_positivity,
    verify_recursion,
    verify_subdiagram,
)

__version__ = "0.1.0"
