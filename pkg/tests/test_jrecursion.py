"""Recursion-engine tests.

The strongest oracle here is numeric: table entries are checked against the
un-rearranged defining relation evaluated in plain Fractions at random
rational points, bypassing the polynomial engine entirely.
"""

import random
from fractions import Fraction

import pytest

from qkflag.cartan import (
    catalogued_finite_labels,
    interval_below,
    norm_half,
    parse_cartan_type,
)
from qkflag.errors import CacheCorruptError, InternalInvariantError
from qkflag.exactalg import (
    BinomialFactor,
    FactoredRational,
    MultiPolynomial,
    evaluate_at,
    frac_equal,
    frac_mul,
    frac_to_json,
    rename_rational,
)
from qkflag.jrecursion import (
    ENGINE_VERSION,
    JTable,
    affine_chart_substitute,
    chart_exponent_map,
    closed_form_sl2,
    compute_j,
    generating_series,
    load_table,
    q_pochhammer,
    save_table,
)


def poch_value(datum, gamma, q0):
    """(q)_gamma at a rational point, straight from the defining product."""
    value = Fraction(1)
    for i, c in enumerate(gamma.coeffs):
        for s in range(1, c + 1):
            value *= 1 - q0 ** (datum.symmetrizers[i] * s)
    return value


def unreduced_residual_at_point(datum, alpha, table, q0, zvals):
    """J_alpha(pt) minus the full interval sum (beta = alpha included), numerically."""
    lhs = evaluate_at(table.get(alpha), q0, zvals)
    rhs = Fraction(0)
    for beta in interval_below(alpha):
        weight = q0 ** norm_half(beta)
        for i, c in enumerate(beta.coeffs):
            weight *= Fraction(zvals[i]) ** c
        rhs += weight / poch_value(datum, alpha - beta, q0) * evaluate_at(table.get(beta), q0, zvals)
    return lhs - rhs


# ---------------------------------------------------------------------------
# q-Pochhammer
# ---------------------------------------------------------------------------


def test_pochhammer_simply_laced():
    d = parse_cartan_type("A1")
    got = q_pochhammer(d.cone([2]))
    assert got == {BinomialFactor(1, (0,)): 1, BinomialFactor(2, (0,)): 1}


def test_pochhammer_g2_uses_symmetrizers():
    d = parse_cartan_type("G2")
    got = q_pochhammer(d.cone([1, 1]))
    assert got == {BinomialFactor(3, (0, 0)): 1, BinomialFactor(1, (0, 0)): 1}


def test_pochhammer_zero_is_empty():
    assert q_pochhammer(parse_cartan_type("A2").zero()) == {}


def test_pochhammer_repeated_exponents_merge():
    d = parse_cartan_type("A2")
    got = q_pochhammer(d.cone([2, 1]))
    assert got == {BinomialFactor(1, (0, 0)): 2, BinomialFactor(2, (0, 0)): 1}


# ---------------------------------------------------------------------------
# compute_j
# ---------------------------------------------------------------------------


def test_base_case_is_one():
    for label in catalogued_finite_labels(4) + ["A1~", "A2~"]:
        d = parse_cartan_type(label)
        value = compute_j(d.zero(), JTable(d))
        assert value.structurally_equal(FactoredRational.one(d.rank))


def test_a1_alpha_one():
    d = parse_cartan_type("A1")
    got = compute_j(d.cone([1]), JTable(d))
    assert got.numerator == MultiPolynomial.one(1)
    assert got.denominator_map() == {BinomialFactor(1, (0,)): 1, BinomialFactor(1, (1,)): 1}


def test_a1_alpha_two_against_closed_form():
    d = parse_cartan_type("A1")
    got = compute_j(d.cone([2]), JTable(d))
    assert frac_equal(got, closed_form_sl2(2))


def test_closed_form_examples():
    assert closed_form_sl2(0).structurally_equal(FactoredRational.one(1))
    d1 = closed_form_sl2(1)
    assert d1.denominator_map() == {BinomialFactor(1, (0,)): 1, BinomialFactor(1, (1,)): 1}
    assert len(closed_form_sl2(2).denominator_map()) == 4


@pytest.mark.parametrize("label", catalogued_finite_labels(4) + ["A1~", "A2~"])
def test_simple_coroot_closed_form(label):
    d = parse_cartan_type(label)
    table = JTable(d)
    for i in range(d.rank):
        value = compute_j(d.simple(i), table)
        di = d.symmetrizers[i]
        m = [0] * d.rank
        m[i] = 1
        expected = FactoredRational.build(
            MultiPolynomial.one(d.rank),
            {BinomialFactor(di, (0,) * d.rank): 1, BinomialFactor(di, tuple(m)): 1},
            normalize=False,
        )
        assert frac_equal(value, expected)


def test_unreduced_recursion_at_random_points():
    rng = random.Random(2718281)
    cases = [("A1", (2,)), ("A2", (2, 1)), ("B2", (1, 2)), ("G2", (1, 1)), ("A1~", (2, 1))]
    for label, coeffs in cases:
        d = parse_cartan_type(label)
        table = JTable(d)
        alpha = d.cone(coeffs)
        compute_j(alpha, table)
        for _ in range(5):
            q0 = Fraction(rng.randint(1, 4), rng.randint(5, 9))
            zvals = [Fraction(rng.randint(1, 6), rng.randint(7, 11)) for _ in range(d.rank)]
            for beta in interval_below(alpha):
                assert unreduced_residual_at_point(d, beta, table, q0, zvals) == 0


def test_memo_determinism_fresh_vs_warm():
    d = parse_cartan_type("A2")
    fresh = JTable(d)
    target = d.cone([2, 2])
    a = compute_j(target, fresh)
    warm = JTable(d)
    compute_j(d.cone([1, 1]), warm)
    b = compute_j(target, warm)
    assert frac_equal(a, b)
    assert frac_to_json(a) == frac_to_json(b)


def test_insert_guard_rejects_conflicting_values():
    d = parse_cartan_type("A1")
    table = JTable(d)
    alpha = d.cone([1])
    compute_j(alpha, table)
    with pytest.raises(InternalInvariantError):
        table.insert(alpha, FactoredRational.one(1))
    # idempotent insert of an equal value is fine
    table.insert(alpha, compute_j(alpha, JTable(d)))


def test_pivot_nonconstant_even_at_affine_null_vectors():
    d = parse_cartan_type("A2~")
    delta = d.cone([1, 1, 1])
    assert norm_half(delta) == 0
    pivot = BinomialFactor(norm_half(delta), delta.coeffs)
    assert pivot.a == 0 and any(pivot.m)
    value = compute_j(delta, JTable(d))
    assert pivot in value.denominator_map()


def test_levi_restriction_structural():
    # alpha supported on a sub-diagram computes identically in the sub-type
    big = parse_cartan_type("A3")
    small = parse_cartan_type("A2")
    alpha = big.cone([2, 1, 0])
    v_big = compute_j(alpha, JTable(big))
    v_small = compute_j(small.cone([2, 1]), JTable(small))
    assert frac_equal(v_big, rename_rational(v_small, 3, (0, 1)))


def test_orthogonal_supports_factorize():
    big = parse_cartan_type("A3")
    alpha = big.cone([1, 0, 1])
    v_big = compute_j(alpha, JTable(big))
    a1 = parse_cartan_type("A1")
    j1 = compute_j(a1.cone([1]), JTable(a1))
    lhs = rename_rational(j1, 3, (0,))
    rhs = rename_rational(j1, 3, (2,))
    assert frac_equal(v_big, frac_mul(lhs, rhs))


def test_generating_series_truncation():
    d = parse_cartan_type("A2")
    table = JTable(d)
    pairs = generating_series(table, d.cone([1, 1]))
    assert [a.coeffs for a, _ in pairs] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert pairs[0][1].structurally_equal(FactoredRational.one(2))
    single = generating_series(JTable(parse_cartan_type("A1")), parse_cartan_type("A1").zero())
    assert len(single) == 1


def test_error_contracts():
    from qkflag.errors import DatumMismatchError
    from qkflag.exactalg import frac_sum, frac_mul
    from qkflag.jrecursion import affine_chart_substitute

    d = parse_cartan_type("A2")
    other = parse_cartan_type("B2")
    table = JTable(d)
    with pytest.raises(DatumMismatchError):
        compute_j(other.cone([1, 0]), table)
    with pytest.raises(DatumMismatchError):
        table.insert(other.zero(), FactoredRational.one(2))
    with pytest.raises(ValueError):
        frac_sum([])
    with pytest.raises(TypeError):
        frac_mul(FactoredRational.one(1), "x")
    with pytest.raises(ValueError):
        closed_form_sl2(-1)
    r = FactoredRational.one(3)
    with pytest.raises(DatumMismatchError):
        affine_chart_substitute(r, 2)  # rank mismatch
    with pytest.raises(DatumMismatchError):
        affine_chart_substitute(FactoredRational.one(1), 1)  # too few nodes


def test_chart_evaluate_contracts():
    d = parse_cartan_type("A1~")
    value = compute_j(d.simple(0), JTable(d))
    chart = affine_chart_substitute(value, 2)
    from qkflag.errors import DatumMismatchError, PoleError

    with pytest.raises(DatumMismatchError):
        chart.evaluate([1, 2], 1, Fraction(1, 2))  # wrong t count
    with pytest.raises(ZeroDivisionError):
        chart.evaluate([0], 1, Fraction(1, 2))
    with pytest.raises(PoleError):
        chart.evaluate([1], 1, 1)  # v = 1 makes 1 - v^2 vanish


def test_concurrent_population_is_consistent():
    # distinct alphas at the same height may be populated concurrently;
    # the insert-if-absent guard keeps the shared table coherent
    from concurrent.futures import ThreadPoolExecutor

    d = parse_cartan_type("A2")
    table = JTable(d)
    targets = [d.cone(c) for c in [(2, 1), (1, 2), (2, 2), (0, 2), (2, 0)]]
    with ThreadPoolExecutor(max_workers=4) as pool:
        list(pool.map(lambda a: compute_j(a, table), targets))
    reference = JTable(d)
    for alpha in targets:
        assert frac_to_json(compute_j(alpha, reference)) == frac_to_json(table.get(alpha))


def test_golden_serialization_bytes():
    # canonical term order (total degree, then lex) pins these bytes
    d = parse_cartan_type("A1")
    value = compute_j(d.cone([2]), JTable(d))
    assert frac_to_json(value) == (
        '{"denominator":[{"a":1,"m":[0],"multiplicity":1},'
        '{"a":1,"m":[1],"multiplicity":1},'
        '{"a":2,"m":[0],"multiplicity":1},'
        '{"a":4,"m":[2],"multiplicity":1}],'
        '"numerator":[[[0,0],"1/1"],[[2,1],"1/1"]],"rank":1}'
    )


# ---------------------------------------------------------------------------
# Affine (t, u, v) chart
# ---------------------------------------------------------------------------


def test_chart_q_maps_to_v_squared():
    for nodes in (2, 3, 4):
        exps = chart_exponent_map((1,) + (0,) * nodes, nodes)
        assert exps == (0,) * (nodes - 1) + (0, 2)


def test_chart_telescoping_product():
    for nodes in range(2, 6):
        r = FactoredRational.from_polynomial(
            MultiPolynomial.monomial(nodes, (0, *([1] * nodes)))
        )
        image = affine_chart_substitute(r, nodes)
        assert image.is_monomial() == (*([0] * (nodes - 1)), 1, 0)


def test_chart_constant_is_constant():
    image = affine_chart_substitute(FactoredRational.one(3), 3)
    assert image.is_monomial() == (0, 0, 0, 0)


def test_chart_laurent_exponents_appear():
    # z_1 in the 2-node chart is t1^{-2}
    r = FactoredRational.from_polynomial(MultiPolynomial.monomial(2, (0, 0, 1)))
    image = affine_chart_substitute(r, 2)
    assert image.is_monomial() == (-2, 0, 0)


def test_chart_evaluation_matches_substitution():
    d = parse_cartan_type("A1~")
    value = compute_j(d.cone([1, 1]), JTable(d))
    chart = affine_chart_substitute(value, 2)
    t1, u, v = Fraction(2, 3), Fraction(1, 5), Fraction(1, 2)
    # z_0 = t1 * t2^{-1} * u with t2 = 1/t1; z_1 = t2 / t1
    z0 = t1 * t1 * u
    z1 = 1 / (t1 * t1)
    direct = chart.evaluate([t1], u, v)
    composed = evaluate_at(value, v * v, [z0, z1])
    assert direct == composed


# ---------------------------------------------------------------------------
# Disk cache
# ---------------------------------------------------------------------------


def test_cache_roundtrip_byte_identity(tmp_path):
    d = parse_cartan_type("A2")
    table = JTable(d)
    compute_j(d.cone([2, 1]), table)
    save_table(table, tmp_path)
    loaded = load_table(d, tmp_path)
    assert loaded is not None
    assert len(loaded) == len(table)
    for alpha, value in table.items_sorted():
        assert frac_to_json(loaded.get(alpha)) == frac_to_json(value)
    # writing the loaded table back is byte-identical
    path1 = save_table(table, tmp_path / "x")
    path2 = save_table(loaded, tmp_path / "y")
    assert open(path1, "rb").read() == open(path2, "rb").read()


def test_cache_version_mismatch_ignored(tmp_path):
    d = parse_cartan_type("A1")
    table = JTable(d, engine_version="0-legacy")
    compute_j(d.cone([1]), table)
    save_table(table, tmp_path)
    assert load_table(d, tmp_path, engine_version="0-legacy") is not None
    # current engine version does not see the legacy file name
    assert load_table(d, tmp_path) is None


def test_cache_truncated_file_raises(tmp_path):
    d = parse_cartan_type("A1")
    table = JTable(d)
    compute_j(d.cone([1]), table)
    path = save_table(table, tmp_path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('{"engine_version": "' + ENGINE_VERSION + '", "entries": {"0": ')
    with pytest.raises(CacheCorruptError):
        load_table(d, tmp_path)


def test_cache_corrupt_entry_names_key(tmp_path):
    d = parse_cartan_type("A1")
    table = JTable(d)
    compute_j(d.cone([1]), table)
    path = save_table(table, tmp_path)
    text = open(path, encoding="utf-8").read()
    broken = text.replace('"1/1"', '"one"', 1)
    open(path, "w", encoding="utf-8").write(broken)
    with pytest.raises(CacheCorruptError) as err:
        load_table(d, tmp_path)
    assert "entry" in str(err.value)
