import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhverify.catalog import affine, get_function
from hhverify.errors import DimMismatch, DomainViolation, NonFiniteEntries, NotHermitian, ParameterOutOfRange
from hhverify.hermitian import (
    SPECTRAL_TOL,
    HermitianMatrix,
    Relation,
    UnitVector,
    apply_function,
    loewner_compare,
    quadratic_form,
    segment_point,
    spectral_decompose,
)
from hhverify.sampling import random_hermitian, random_unit_vector

SWAP = [[0, 1], [1, 0]]


def test_decompose_diagonal():
    dec = spectral_decompose(HermitianMatrix.diag([3, 1]))
    np.testing.assert_allclose(dec.eigenvalues, [1, 3])
    np.testing.assert_allclose(np.abs(dec.eigenvectors), [[0, 1], [1, 0]])


def test_decompose_swap():
    dec = spectral_decompose(HermitianMatrix(SWAP))
    np.testing.assert_allclose(dec.eigenvalues, [-1, 1], atol=1e-15)
    U = dec.eigenvectors
    # columns are fixed up to a phase
    for col, ref in zip(U.T, ([1, -1], [1, 1])):
        ref = np.array(ref) / np.sqrt(2)
        assert abs(abs(np.vdot(ref, col)) - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 3, 8])
def test_decompose_identity(n):
    dec = spectral_decompose(HermitianMatrix.identity(n))
    np.testing.assert_allclose(dec.eigenvalues, np.ones(n))
    assert dec.residual <= SPECTRAL_TOL


@pytest.mark.parametrize("dim", [1, 2, 5, 8])
def test_decomposition_invariants(dim):
    A = random_hermitian(dim, (-3, 5), 11 + dim)
    dec = A.decomposition
    U = dec.eigenvectors
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert np.linalg.norm(U.conj().T @ U - np.eye(dim), 2) <= SPECTRAL_TOL
    assert np.linalg.norm(dec.reconstruct() - A.data, 2) <= dec.residual + 1e-15
    assert dec.residual <= SPECTRAL_TOL * max(1.0, A.norm)


def test_decompose_is_deterministic():
    A = random_hermitian(6, (0, 1), 3)
    a, b = spectral_decompose(A), spectral_decompose(HermitianMatrix(A.data.copy()))
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()


def test_construction_errors():
    with pytest.raises(NonFiniteEntries):
        HermitianMatrix([[np.nan, 0], [0, 1]])
    with pytest.raises(NotHermitian):
        HermitianMatrix([[0, 1], [0, 0]])
    with pytest.raises(DimMismatch):
        HermitianMatrix(np.zeros((2, 3)))


def test_small_asymmetry_is_symmetrized():
    A = HermitianMatrix([[1, 1e-13], [0, 2]])
    assert np.array_equal(A.data, A.data.conj().T)


def test_apply_square_of_swap():
    np.testing.assert_allclose(apply_function(get_function("square"), HermitianMatrix(SWAP)).data, np.eye(2), atol=1e-14)


def test_apply_identity_and_constant():
    A = random_hermitian(4, (-2, 3), 5)
    np.testing.assert_allclose(apply_function(get_function("identity"), A).data, A.data, atol=1e-13)
    np.testing.assert_allclose(apply_function(get_function("constant"), A).data, np.eye(4), atol=1e-13)


def test_apply_commutes_with_argument():
    A = random_hermitian(5, (0.1, 3), 9)
    F = apply_function(get_function("xlogx"), A)
    assert np.linalg.norm(F @ A - A @ F, 2) <= 1e-10 * max(1, F.norm, A.norm)


def test_apply_domain_violation():
    with pytest.raises(DomainViolation) as info:
        apply_function(get_function("inverse"), HermitianMatrix.diag([-1.0, 1.0]))
    assert info.value.eigenvalue == pytest.approx(-1.0)


def test_apply_clips_within_guard():
    out = apply_function(get_function("sqrt"), HermitianMatrix.diag([-1e-12, 4.0]))
    np.testing.assert_allclose(np.diag(out.data).real, [0.0, 2.0])


def _poly_matrix(coeffs, A):
    out = np.zeros_like(A.data)
    P = np.eye(A.dim, dtype=complex)
    for c in coeffs:
        out = out + c * P
        P = P @ A.data
    return out


dims = st.integers(1, 8)
seeds = st.integers(0, 2**32)
coeffs = st.lists(st.floats(-2, 2), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(dims, seeds, coeffs, coeffs)
def test_functional_calculus_is_multiplicative(dim, seed, p, q):
    from hhverify.catalog import ConvexityClass, ScalarFunction

    def fn(c):
        return ScalarFunction(
            f"poly{c}", (-10.0, 10.0), lambda t: np.polynomial.polynomial.polyval(t, c), ConvexityClass.UNKNOWN,
            False, None, tuple(c),
        )

    A = random_hermitian(dim, (-2, 2), seed)
    pq = np.polynomial.polynomial.polymul(p, q)
    P, Q, PQ = apply_function(fn(p), A), apply_function(fn(q), A), apply_function(fn(list(pq)), A)
    scale = max(1.0, P.norm * Q.norm, PQ.norm)
    assert np.max(np.abs(PQ.data - P @ Q)) <= 1e-9 * scale
    # polynomial calculus matches direct evaluation
    assert np.max(np.abs(P.data - _poly_matrix(p, A))) <= 1e-10 * max(1.0, P.norm, np.sum(np.abs(p)) * 2 ** len(p))


@settings(max_examples=60, deadline=None)
@given(dims, seeds)
def test_pointwise_order_lifts_to_operator_order(dim, seed):
    A = random_hermitian(dim, (0.01, 3), seed)
    # t <= t^2 + 1/4 everywhere
    f, g = get_function("identity"), affine(0, 0.25)
    sq = get_function("square")
    lower = apply_function(f, A)
    upper = apply_function(sq, A) + apply_function(g, A)
    assert loewner_compare(lower, upper).leq
    # xlogx <= t^2 on (0, inf)
    assert loewner_compare(apply_function(get_function("xlogx"), A), apply_function(sq, A)).leq


def test_loewner_examples():
    assert loewner_compare(HermitianMatrix.diag([0, 0]), HermitianMatrix.diag([1, 2])).relation is Relation.LEQ
    assert loewner_compare(HermitianMatrix.diag([1, 2]), HermitianMatrix.diag([0, 0])).relation is Relation.GEQ
    v = loewner_compare(HermitianMatrix.diag([0, 1]), HermitianMatrix.diag([1, 0]))
    assert v.relation is Relation.INCOMPARABLE
    assert v.witness_min_eig == pytest.approx(-1) and v.witness_max_eig == pytest.approx(1)
    A = random_hermitian(3, (0, 1), 1)
    assert loewner_compare(A, A).relation is Relation.EQUAL


def test_loewner_tolerance_boundary():
    A = HermitianMatrix.diag([0.0, 0.0])
    assert loewner_compare(A, HermitianMatrix.diag([-5e-10, 1.0])).leq
    assert not loewner_compare(A, HermitianMatrix.diag([-5e-9, 1.0])).leq
    with pytest.raises(DimMismatch):
        loewner_compare(A, HermitianMatrix.identity(3))


def test_quadratic_form_examples():
    D = HermitianMatrix.diag([0, 1])
    assert quadratic_form(D, [1, 0]) == 0
    assert quadratic_form(D, UnitVector.normalized([1, 1])) == pytest.approx(0.5)
    x = random_unit_vector(5, 7)
    assert quadratic_form(HermitianMatrix.identity(5), x) == pytest.approx(1, abs=1e-14)
    with pytest.raises(DimMismatch):
        quadratic_form(D, random_unit_vector(3, 1))
    with pytest.raises(ParameterOutOfRange):
        UnitVector([1, 1])


@settings(max_examples=200, deadline=None)
@given(dims, seeds)
def test_rayleigh_quotient_in_spectral_hull(dim, seed):
    A = random_hermitian(dim, (-4, 4), seed)
    v = quadratic_form(A, random_unit_vector(dim, seed + 1))
    slack = 1e-12 * max(1.0, A.norm)
    assert A.min_eig - slack <= v <= A.max_eig + slack


def test_segment_point_examples():
    A, B = HermitianMatrix(SWAP), HermitianMatrix.identity(2)
    assert np.array_equal(segment_point(A, B, 0).data, A.data)
    assert np.array_equal(segment_point(A, B, 1).data, B.data)
    np.testing.assert_allclose(segment_point(A, B, 0.5).data, [[0.5, 0.5], [0.5, 0.5]])
    mid = segment_point(HermitianMatrix.diag([0, 0]), HermitianMatrix.diag([2, 4]), 0.5)
    np.testing.assert_allclose(mid.data, np.diag([1, 2]))
    with pytest.raises(ParameterOutOfRange):
        segment_point(A, B, 1.5)
    with pytest.raises(DimMismatch):
        segment_point(A, HermitianMatrix.identity(3), 0.5)


def test_segment_spectrum_containment():
    rng = np.random.default_rng(0)
    for k in range(1000):
        dim = 1 + k % 8
        lo, hi = sorted(rng.uniform(-5, 5, 2))
        A = random_hermitian(dim, (lo, hi), 2 * k)
        B = random_hermitian(dim, (lo, hi), 2 * k + 1)
        S = segment_point(A, B, float(rng.uniform()))
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        assert lo - slack <= S.min_eig and S.max_eig <= hi + slack


def test_arithmetic_stays_hermitian():
    A, B = random_hermitian(3, (0, 1), 1), random_hermitian(3, (0, 1), 2)
    for M in (A + B, A - B, -A, 2 * A, A / 4):
        assert isinstance(M, HermitianMatrix)
        assert np.array_equal(M.data, M.data.conj().T)
    assert isinstance(A @ B, np.ndarray)
