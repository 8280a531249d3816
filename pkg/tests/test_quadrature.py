import numpy as np
import pytest

from hhverify.catalog import affine, get_function
from hhverify.errors import DimMismatch, DomainViolation, ParameterOutOfRange
from hhverify.hermitian import HermitianMatrix, UnitVector
from hhverify.quadrature import (
    BACKWARD,
    FORWARD,
    QuadratureSpec,
    SegmentTable,
    composite_rule,
    integrate_operator_segment,
    integrate_scalar_form,
    integrate_scalar_product_form,
)
from hhverify.sampling import random_hermitian, random_unit_vector

import oracles

ZERO, ONE = HermitianMatrix.diag([0.0]), HermitianMatrix.diag([1.0])
X1 = UnitVector([1.0])


def test_spec_validation():
    for bad in [dict(panels=0), dict(nodes_per_panel=1), dict(nodes_per_panel=17), dict(panels=10**5, nodes_per_panel=16)]:
        with pytest.raises(ParameterOutOfRange):
            QuadratureSpec(**bad)


def test_rule_weights_sum_to_one():
    t, w = composite_rule(5, 7)
    assert t.size == 35 and np.all((t > 0) & (t < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


def test_affine_operator_integral():
    for k in range(20):
        A, B = random_hermitian(1 + k % 8, (-2, 3), 2 * k), random_hermitian(1 + k % 8, (-2, 3), 2 * k + 1)
        r = integrate_operator_segment(affine(1.5, -0.5), A, B)
        expected = 1.5 * (A.data + B.data) / 2 - 0.5 * np.eye(A.dim)
        scale = max(1.0, A.norm, B.norm)
        assert np.max(np.abs(r.value.data - expected)) <= 1e-12 * scale
        assert r.error_estimate <= 1e-12 * scale


def test_square_dim_one():
    r = integrate_operator_segment(get_function("square"), ZERO, ONE)
    assert r.value.data[0, 0].real == pytest.approx(1 / 3, abs=1e-15)


def test_square_closed_form():
    for k in range(50):
        dim = 1 + k % 8
        A, B = random_hermitian(dim, (-2, 2), 100 + k), random_hermitian(dim, (-2, 2), 200 + k)
        r = integrate_operator_segment(get_function("square"), A, B)
        ref = oracles.square_segment_integral(A.data, B.data)
        assert np.max(np.abs(r.value.data - ref)) <= 1e-10 * max(1.0, A.norm, B.norm) ** 2


def test_scalar_form_examples():
    assert integrate_scalar_form(get_function("identity"), ZERO, ONE, X1).value == pytest.approx(0.5, abs=1e-15)
    A, B = random_hermitian(3, (0, 1), 1), random_hermitian(3, (0, 1), 2)
    x = random_unit_vector(3, 3)
    assert integrate_scalar_form(get_function("constant"), A, B, x).value == pytest.approx(1.0, abs=1e-14)
    r = integrate_scalar_form(affine(2, 1), A, B, x, QuadratureSpec(1, 2))
    assert r.error_estimate <= 1e-14


def test_product_form_examples():
    f, g = get_function("identity"), get_function("square")
    assert integrate_scalar_product_form(f, g, ZERO, ONE, X1).value == pytest.approx(1 / 4, abs=1e-15)
    assert integrate_scalar_product_form(f, f, ZERO, ONE, X1).value == pytest.approx(1 / 3, abs=1e-15)
    c = get_function("constant")
    A, B = random_hermitian(4, (0, 1), 1), random_hermitian(4, (0, 1), 2)
    assert integrate_scalar_product_form(c, c, A, B, random_unit_vector(4, 0)).value == pytest.approx(1.0, abs=1e-14)


def test_backward_orientation_starts_at_b():
    # tA + (1-t)B: on [0, 1/2] the segment sits near B
    table = SegmentTable(ZERO, ONE, QuadratureSpec(2, 2), BACKWARD)
    forms = table.forms(get_function("identity"), X1)
    t, _ = composite_rule(2, 2)
    np.testing.assert_allclose(forms[: t.size], 1 - t)


@pytest.mark.parametrize("k,fid,gid", [(2, "identity", "square"), (3, "square", "cube"), (4, "cube", "cube")])
def test_polynomial_exactness(k, fid, gid):
    # degree(f) + degree(g) <= 2k - 1 is integrated exactly by one k-point panel
    f, g = get_function(fid), get_function(gid)
    for seed in range(10):
        A, B = random_hermitian(3, (-1, 1), seed), random_hermitian(3, (-1, 1), seed + 50)
        x = random_unit_vector(3, seed)
        got = integrate_scalar_product_form(f, g, A, B, x, QuadratureSpec(1, k))
        ref = integrate_scalar_product_form(f, g, A, B, x, QuadratureSpec(16, 16))
        assert abs(got.value - ref.value) <= 1e-12
        assert got.error_estimate <= 1e-12


@pytest.mark.parametrize("fid", ["inverse", "xlogx", "power-1.5"])
def test_error_estimate_decreases_with_refinement(fid):
    A, B = random_hermitian(3, (0.05, 2), 1), random_hermitian(3, (0.05, 2), 2)
    errs = [integrate_operator_segment(get_function(fid), A, B, QuadratureSpec(p, 3)).error_estimate for p in (1, 2, 4, 8)]
    for a, b in zip(errs, errs[1:]):
        assert b < a or b <= 1e-14


def test_error_estimate_is_two_resolution_difference():
    A, B = random_hermitian(2, (0.05, 2), 3), random_hermitian(2, (0.05, 2), 4)
    f = get_function("inverse")
    r = integrate_operator_segment(f, A, B, QuadratureSpec(3, 4))

    def direct(panels):
        t, w = composite_rule(panels, 4)
        return sum(wk * _apply_at(f, A, B, tk) for tk, wk in zip(t, w))

    fine, coarse = direct(6), direct(3)
    assert np.max(np.abs(r.value.data - fine)) <= 1e-14
    assert r.error_estimate == pytest.approx(np.linalg.norm(fine - coarse, 2), rel=1e-8)
    assert r.error_estimate > 0


def _apply_at(f, A, B, t):
    from hhverify.hermitian import apply_function, segment_point

    return apply_function(f, segment_point(A, B, t)).data


@pytest.mark.parametrize("fid", ["square", "inverse", "xlogx", "power-1.5"])
def test_swap_symmetry(fid):
    f = get_function(fid)
    for seed in range(10):
        A, B = random_hermitian(4, (0.1, 3), seed), random_hermitian(4, (0.1, 3), seed + 99)
        ab, ba = integrate_operator_segment(f, A, B), integrate_operator_segment(f, B, A)
        assert np.max(np.abs(ab.value.data - ba.value.data)) <= 1e-12 * max(1.0, ab.value.norm)


@pytest.mark.parametrize("fid,gid", [("identity", "square"), ("inverse", "xlogx"), ("power-1.5", "inverse"), ("square", "square")])
def test_dim_one_trapezoid_oracle(fid, gid):
    f, g = get_function(fid), get_function(gid)
    rng = np.random.default_rng(7)
    for _ in range(10):
        a, b = rng.uniform(0.1, 2, 2)
        A, B = HermitianMatrix.diag([a]), HermitianMatrix.diag([b])
        op = integrate_operator_segment(f, A, B).value.data[0, 0].real
        assert op == pytest.approx(oracles.trapezoid(lambda t: oracles.rule(fid)(oracles.forward(a, b)(t))), abs=1e-8)
        sf = integrate_scalar_form(f, A, B, X1).value
        assert sf == pytest.approx(oracles.trapezoid(lambda t: oracles.rule(fid)(oracles.backward(a, b)(t))), abs=1e-8)
        pf = integrate_scalar_product_form(f, g, A, B, X1).value
        assert pf == pytest.approx(oracles.integrals(fid, gid, a, b)[2], abs=1e-8)


def test_errors():
    with pytest.raises(DimMismatch):
        integrate_operator_segment(get_function("square"), ONE, HermitianMatrix.identity(2))
    with pytest.raises(DomainViolation):
        integrate_operator_segment(get_function("inverse"), ZERO, ONE)
    with pytest.raises(DimMismatch):
        integrate_scalar_form(get_function("square"), ONE, ONE, random_unit_vector(2, 0))
    assert SegmentTable(ZERO, ONE).orientation == FORWARD
