"""Checkers for the Hermite-Hadamard-type inequalities of two operator convex functions.

Every checker evaluates the left- and right-hand sides exactly as displayed,
arranged so the claimed relation reads ``lhs <= rhs``, and returns a report
rather than raising when the relation fails.

Orientation matters for bookkeeping only: the two-function inequalities
integrate along ``tA + (1-t)B`` while the one-function refinement chain
integrates along ``(1-t)A + tB``. Both integrals are equal by ``t -> 1-t``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import pairwise

import numpy as np

from .catalog import ConvexityClass, Synchrony, SynchronyVerdict, product
from .errors import ConvergenceFailure, DimMismatch, PreconditionFailed
from .hermitian import (
    FORM_IMAG_TOL,
    HermitianMatrix,
    OrderVerdict,
    apply_function,
    as_hermitian,
    as_unit,
    guard_domain,
    loewner_compare,
    quadratic_form,
)
from .quadrature import BACKWARD, FORWARD, QuadratureSpec, SegmentTable, integrate_operator_segment
from .sampling import derive_subseed, random_hermitian, random_unit_vector

NO_INTEGRAL = "-"

SUITE_IDS = (
    "thm1-chain",
    "lemma-2.1",
    "thm3-2.2",
    "thm4-2.7",
    "thm5-2.9",
    "thm6-3.1",
    "chain-3.2",
    "chain-3.3",
    "rem-3.4",
    "rem-3.5",
    "rem-3.6",
    "rem-3.7",
    "rem-3.8",
    "rem-3.9",
    "example-3",
)


@dataclass(frozen=True)
class Tolerance:
    absolute: float = 1e-9
    relative: float = 1e-9

    def bound(self, scale: float, quad: float = 0.0) -> float:
        return self.absolute + self.relative * scale + quad


class Verdict(str, enum.Enum):
    PASS = "PASS"
    VIOLATION = "VIOLATION"


@dataclass(frozen=True)
class InequalityReport:
    inequality_id: str
    lhs: float
    rhs: float
    tolerance_used: float
    orientation: str = NO_INTEGRAL
    quad_error: float = 0.0
    context: dict = field(default_factory=dict, compare=False)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def verdict(self) -> Verdict:
        return Verdict.PASS if self.margin >= -self.tolerance_used else Verdict.VIOLATION

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def with_context(self, **context) -> InequalityReport:
        return replace(self, context={**self.context, **context})


def _report(id, lhs, rhs, tol: Tolerance, terms=(), quad=0.0, orientation=NO_INTEGRAL):
    scale = max([1.0, abs(lhs), abs(rhs), *(abs(t) for t in terms)])
    return InequalityReport(id, float(lhs), float(rhs), tol.bound(scale, quad), orientation, float(quad))


@dataclass(frozen=True)
class FunctionalTriple:
    m_value: float
    n_value: float
    p_value: float
    forms: tuple[float, float, float, float]  # <f(A)x,x>, <g(A)x,x>, <f(B)x,x>, <g(B)x,x>

    @property
    def scale(self) -> float:
        return max(1.0, *(abs(v) for v in (self.m_value, self.n_value, self.p_value, *self.forms)))


def compute_mnp(f, g, A, B, x) -> FunctionalTriple:
    A, B, x = as_hermitian(A), as_hermitian(B), as_unit(x)
    if A.dim != B.dim:
        raise DimMismatch(f"dims differ: {A.dim} vs {B.dim}")
    fa, ga = quadratic_form(apply_function(f, A), x), quadratic_form(apply_function(g, A), x)
    fb, gb = quadratic_form(apply_function(f, B), x), quadratic_form(apply_function(g, B), x)
    fg = product(f, g)
    p = quadratic_form(apply_function(fg, A) + apply_function(fg, B), x)
    return FunctionalTriple(fa * ga + fb * gb, fa * gb + fb * ga, p, (fa, ga, fb, gb))


def require_convex(*fs):
    for f in fs:
        if f.convexity_class is not ConvexityClass.OPERATOR_CONVEX:
            raise PreconditionFailed(f"{f.id} is not tagged operator convex")


def nonnegative_on(f, lo: float, hi: float, points: int = 1001) -> bool:
    t = guard_domain(np.linspace(lo, hi, points), f.domain, max(abs(lo), abs(hi)))
    return bool(np.all(f(t) >= -1e-12))


def _require_nonnegative(fs, lo, hi):
    for f in fs:
        if not nonnegative_on(f, lo, hi):
            raise PreconditionFailed(f"{f.id} takes negative values on [{lo:g}, {hi:g}]")


# -- one-function checks ---------------------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    """Operator-order links of the refined Hermite-Hadamard chain.

    ``stages`` are, in order: f((A+B)/2), the quarter-point average, the
    segment integral, the averaged upper bound, and (f(A)+f(B))/2.
    """

    stages: tuple[HermitianMatrix, ...]
    links: tuple[OrderVerdict, ...]
    quad_error: float
    tolerance_used: float
    inequality_id: str = "thm1-chain"

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(v.witness_min_eig for v in self.links)

    @property
    def passed(self) -> bool:
        return all(v.leq for v in self.links)

    def outer_bounds(self) -> tuple[OrderVerdict, OrderVerdict]:
        """The plain two-sided bounds f((A+B)/2) <= integral <= (f(A)+f(B))/2."""
        s = self.stages
        return (
            loewner_compare(s[0], s[2], 0.0, atol=self.tolerance_used),
            loewner_compare(s[2], s[4], 0.0, atol=self.tolerance_used),
        )

    def as_report(self) -> InequalityReport:
        # reads as 0 <= smallest eigenvalue over all link gaps
        return InequalityReport(
            self.inequality_id, 0.0, min(self.gaps), self.tolerance_used, FORWARD, self.quad_error
        )


def check_hh_chain(f, A, B, tol: Tolerance = Tolerance(), spec: QuadratureSpec = QuadratureSpec()) -> ChainReport:
    require_convex(f)
    A, B = as_hermitian(A), as_hermitian(B)
    if A.dim != B.dim:
        raise DimMismatch(f"dims differ: {A.dim} vs {B.dim}")
    fA, fB = apply_function(f, A), apply_function(f, B)
    mid = apply_function(f, (A + B) / 2)
    quarters = 0.5 * (apply_function(f, (3 * A + B) / 4) + apply_function(f, (A + 3 * B) / 4))
    integral = integrate_operator_segment(f, A, B, spec)
    ends = (fA + fB) / 2
    stages = (mid, quarters, integral.value, 0.5 * (mid + ends), ends)
    scale = max(1.0, *(s.norm for s in stages))
    threshold = tol.bound(scale, integral.error_estimate)
    links = tuple(loewner_compare(a, b, 0.0, atol=threshold) for a, b in pairwise(stages))
    return ChainReport(stages, links, integral.error_estimate, threshold)


def phi_values(f, A, B, x, grid_points: int = 101) -> tuple[np.ndarray, np.ndarray]:
    """Grid ``t`` and ``phi(t) = <f((1-t)A + tB) x, x>``."""
    A, B, x = as_hermitian(A), as_hermitian(B), as_unit(x)
    if not (A.dim == B.dim == x.dim):
        raise DimMismatch("matrix and vector dims differ")
    t = np.linspace(0.0, 1.0, grid_points)
    stack = (1 - t)[:, None, None] * A.data + t[:, None, None] * B.data
    lam, U = np.linalg.eigh((stack + np.swapaxes(stack, -1, -2).conj()) / 2)
    w = np.abs(np.einsum("kij,i->kj", U.conj(), x.entries)) ** 2
    vals = f(guard_domain(lam, f.domain, max(1.0, A.norm, B.norm)))
    return t, np.einsum("kj,kj->k", vals, w)


def phi_midpoint_slacks(f, A, B, x, grid_points: int = 101):
    """``(phi(t1) + phi(t2))/2 - phi((t1+t2)/2)`` over all grid pairs whose midpoint is a node."""
    t, phi = phi_values(f, A, B, x, grid_points)
    i, j = np.triu_indices(t.size, k=2)
    keep = (i + j) % 2 == 0
    i, j = i[keep], j[keep]
    k = (i + j) // 2
    return t[i], t[j], (phi[i] + phi[j]) / 2 - phi[k], phi[k], (phi[i] + phi[j]) / 2


def check_phi_convexity(f, A, B, x, grid_points: int = 101, tol: Tolerance = Tolerance()) -> InequalityReport:
    require_convex(f)
    _, _, slack, mid_vals, avg_vals = phi_midpoint_slacks(f, A, B, x, grid_points)
    worst = int(np.argmin(slack))
    scale_terms = (np.max(np.abs(mid_vals)), np.max(np.abs(avg_vals)))
    return _report("lemma-2.1", mid_vals[worst], avg_vals[worst], tol, scale_terms, orientation=FORWARD)


# -- two-function checks ---------------------------------------------------------


class PairEvaluation:
    """Shared matrix work for one endpoint pair ``(A, B)`` and functions ``f, g``.

    Matrix functions and the segment eigendecompositions are computed once;
    each probe vector then costs only quadratic forms.
    """

    def __init__(
        self, f, g, A, B, spec: QuadratureSpec = QuadratureSpec(), tol: Tolerance = Tolerance(),
        table: SegmentTable | None = None,
    ):
        self.f, self.g = f, g
        self.A, self.B = as_hermitian(A), as_hermitian(B)
        if self.A.dim != self.B.dim:
            raise DimMismatch(f"dims differ: {self.A.dim} vs {self.B.dim}")
        self.spec, self.tol = spec, tol
        if table is not None:
            # a caller may share one table among many function pairs on the same segment
            if table.orientation != BACKWARD or table.spec != spec or table.dim != self.A.dim:
                raise ValueError("shared segment table does not match this evaluation")
            self.__dict__["table"] = table
        self.hull = (min(self.A.min_eig, self.B.min_eig), max(self.A.max_eig, self.B.max_eig))
        self._probes = {}

    @cached_property
    def fg(self):
        return product(self.f, self.g)

    @cached_property
    def mid(self) -> HermitianMatrix:
        return (self.A + self.B) / 2

    @cached_property
    def matrices(self) -> dict[str, HermitianMatrix]:
        f, g, fg = self.f, self.g, self.fg
        out = {}
        for name, M in (("A", self.A), ("B", self.B), ("mid", self.mid)):
            out["f" + name] = apply_function(f, M)
            out["g" + name] = apply_function(g, M)
            out["fg" + name] = apply_function(fg, M)
        return out

    @cached_property
    def stacked(self):
        """Matrices as one array with names and per-matrix scales, for batched forms."""
        names = tuple(self.matrices)
        stack = np.stack([self.matrices[k].data for k in names])
        scales = np.maximum(1.0, np.linalg.norm(stack, axis=(1, 2)))
        return names, stack, scales

    @cached_property
    def table(self) -> SegmentTable:
        return SegmentTable(self.A, self.B, self.spec, BACKWARD)

    @cached_property
    def operator_integrals(self):
        return self.table.operator_integral(self.f), self.table.operator_integral(self.g)

    @cached_property
    def _nonnegative(self) -> bool:
        return nonnegative_on(self.f, *self.hull) and nonnegative_on(self.g, *self.hull)

    def nonnegative(self) -> bool:
        return self._nonnegative

    def probe(self, x) -> Probe:
        """Per-vector quantities, cached so several checks on one ``x`` share them."""
        x = as_unit(x)
        key = x.entries.tobytes()
        if key not in self._probes:
            self._probes[key] = Probe(self, x)
        return self._probes[key]

    def _require_nonnegative(self):
        if not self._nonnegative:
            _require_nonnegative((self.f, self.g), *self.hull)

    def product_upper(self, x) -> InequalityReport:
        require_convex(self.f, self.g)
        self._require_nonnegative()
        return self.probe(x).product_upper()

    def midpoint_product(self, x, allow_signed: bool = False) -> InequalityReport:
        require_convex(self.f, self.g)
        if not allow_signed:
            self._require_nonnegative()
        return self.probe(x).midpoint_product()

    def cross_product(self, x, allow_signed: bool = False) -> InequalityReport:
        require_convex(self.f, self.g)
        if not allow_signed:
            self._require_nonnegative()
        return self.probe(x).cross_product()

    def cebysev(self, x, synchrony: SynchronyVerdict) -> InequalityReport:
        return self.probe(x).cebysev(synchrony)

    def mnp_chain(self, x, synchrony: SynchronyVerdict):
        return self.probe(x).mnp_chain(synchrony)

    def remark_bounds(self, x, synchrony: SynchronyVerdict) -> list[InequalityReport]:
        require_convex(self.f, self.g)
        return self.probe(x).remark_bounds(synchrony, self.nonnegative())


class Probe:
    """All scalar quantities for one unit vector ``x``; evaluated lazily."""

    def __init__(self, ev: PairEvaluation, x):
        self.ev, self.x = ev, x
        self.tol = ev.tol

    @cached_property
    def _forms(self) -> dict[str, float]:
        names, stack, scales = self.ev.stacked
        x = self.x.entries
        if stack.shape[-1] != x.size:
            raise DimMismatch(f"matrix dim {stack.shape[-1]} vs vector dim {x.size}")
        v = np.einsum("i,kij,j->k", x.conj(), stack, x)
        bad = np.abs(v.imag) > FORM_IMAG_TOL * scales
        if np.any(bad):
            raise ConvergenceFailure(f"quadratic form has imaginary part {v.imag[bad][0]:.3e}")
        return dict(zip(names, v.real.tolist()))

    def _form(self, key) -> float:
        return self._forms[key]

    @cached_property
    def mnp(self) -> FunctionalTriple:
        fa, ga, fb, gb = (self._form(k) for k in ("fA", "gA", "fB", "gB"))
        p = self._form("fgA") + self._form("fgB")
        return FunctionalTriple(fa * ga + fb * gb, fa * gb + fb * ga, p, (fa, ga, fb, gb))

    @cached_property
    def at_mid(self) -> tuple[float, float, float]:
        return self._form("fmid"), self._form("gmid"), self._form("fgmid")

    @cached_property
    def integrals(self):
        """Integrals of <f>, <g>, <fg> and <f><g> along tA + (1-t)B."""
        table = self.ev.table
        w = table.weights(self.x)
        ff = table.forms(self.ev.f, weights=w)
        gg = table.forms(self.ev.g, weights=w)
        fg = table.forms(self.ev.fg, weights=w)
        return tuple(table.integrate_many(ff, gg, fg, ff * gg))

    def product_upper(self) -> InequalityReport:
        t = self.mnp
        prod = self.integrals[3]
        return _report(
            "thm3-2.2", prod.value, t.m_value / 3 + t.n_value / 6, self.tol,
            (t.scale,), prod.error_estimate, BACKWARD,
        )

    def midpoint_product(self) -> InequalityReport:
        t = self.mnp
        fm, gm, _ = self.at_mid
        prod = self.integrals[3]
        rhs = prod.value / 2 + t.m_value / 12 + t.n_value / 6
        return _report("thm4-2.7", fm * gm, rhs, self.tol, (t.scale, prod.value), prod.error_estimate / 2, BACKWARD)

    def cross_product(self) -> InequalityReport:
        t = self.mnp
        fm, gm, _ = self.at_mid
        i_f, i_g, _, prod = self.integrals
        lhs = fm * i_g.value + gm * i_f.value
        rhs = prod.value / 2 + t.m_value / 12 + t.n_value / 6 + fm * gm
        quad = abs(fm) * i_g.error_estimate + abs(gm) * i_f.error_estimate + prod.error_estimate / 2
        terms = (t.scale, fm * i_g.value, gm * i_f.value, prod.value, fm * gm)
        return _report("thm5-2.9", lhs, rhs, self.tol, terms, quad, BACKWARD)

    def cebysev(self, synchrony: SynchronyVerdict) -> InequalityReport:
        fa, ga, _, _ = self.mnp.forms
        fga = self._form("fgA")
        if synchrony.kind is Synchrony.SYNCHRONOUS:
            return _report("thm6-3.1", fa * ga, fga, self.tol, (fa, ga))
        if synchrony.kind is Synchrony.ASYNCHRONOUS:
            return _report("thm6-3.1", fga, fa * ga, self.tol, (fa, ga))
        raise PreconditionFailed("Cebysev inequality needs a synchronous or asynchronous pair")

    def mnp_chain(self, synchrony: SynchronyVerdict) -> tuple[InequalityReport, InequalityReport]:
        t = self.mnp
        s = t.scale
        if synchrony.kind is Synchrony.SYNCHRONOUS:
            return (
                _report("chain-3.2/N-M", t.n_value, t.m_value, self.tol, (s,)),
                _report("chain-3.2/M-P", t.m_value, t.p_value, self.tol, (s,)),
            )
        if synchrony.kind is Synchrony.ASYNCHRONOUS:
            return (
                _report("chain-3.3/N-M", t.m_value, t.n_value, self.tol, (s,)),
                _report("chain-3.3/M-P", t.p_value, t.m_value, self.tol, (s,)),
            )
        raise PreconditionFailed("M/N/P chain needs a synchronous or asynchronous pair")

    def remark_bounds(self, synchrony: SynchronyVerdict, nonnegative: bool) -> list[InequalityReport]:
        """Displayed bounds for the pair's synchrony class, plus ``-pf`` variants.

        The ``-pf`` variants put products of forms <f>.<g> wherever the display
        uses the form of the product <fg>.
        """
        t = self.mnp
        fm, gm, fgm = self.at_mid
        i_f, i_g, i_fg, prod = self.integrals
        tol, s = self.tol, t.scale
        cross = fm * i_g.value + gm * i_f.value
        cross_err = abs(fm) * i_g.error_estimate + abs(gm) * i_f.error_estimate
        out = []
        if synchrony.kind is Synchrony.SYNCHRONOUS:
            P = t.p_value
            if nonnegative:
                out.append(_report("rem-3.4", prod.value, P / 2, tol, (s,), prod.error_estimate, BACKWARD))
            out += [
                _report("rem-3.5", fm * gm, i_fg.value / 2 + P / 4, tol, (s,), i_fg.error_estimate / 2, BACKWARD),
                _report("rem-3.5-pf", fm * gm, prod.value / 2 + P / 4, tol, (s,), prod.error_estimate / 2, BACKWARD),
                _report(
                    "rem-3.6", cross, i_fg.value / 2 + P / 4 + fgm, tol,
                    (s, fm * i_g.value, gm * i_f.value), cross_err + i_fg.error_estimate / 2, BACKWARD,
                ),
                _report(
                    "rem-3.6-pf", cross, prod.value / 2 + P / 4 + fm * gm, tol,
                    (s, fm * i_g.value, gm * i_f.value), cross_err + prod.error_estimate / 2, BACKWARD,
                ),
            ]
        elif synchrony.kind is Synchrony.ASYNCHRONOUS:
            N = t.n_value
            if nonnegative:
                out += [
                    _report("rem-3.7", i_fg.value, N / 2, tol, (s,), i_fg.error_estimate, BACKWARD),
                    _report("rem-3.7-pf", prod.value, N / 2, tol, (s,), prod.error_estimate, BACKWARD),
                ]
            rhs8 = prod.value / 2 + N / 4
            F, G = self.ev.operator_integrals
            fmid, gmid = self.ev.matrices["fmid"], self.ev.matrices["gmid"]
            # the operator sum is not Hermitian; its form's real part is the form of its Hermitian part
            C = fmid.data @ G.value.data + gmid.data @ F.value.data
            lhs9 = complex(self.x.entries.conj() @ C @ self.x.entries).real
            err9 = fmid.norm * G.error_estimate + gmid.norm * F.error_estimate
            rhs9 = prod.value / 2 + N / 4 + fm * gm
            out += [
                _report("rem-3.8", fgm, rhs8, tol, (s,), prod.error_estimate / 2, BACKWARD),
                _report("rem-3.8-pf", fm * gm, rhs8, tol, (s,), prod.error_estimate / 2, BACKWARD),
                _report("rem-3.9", lhs9, rhs9, tol, (s, cross), err9 + prod.error_estimate / 2, BACKWARD),
                _report("rem-3.9-pf", cross, rhs9, tol, (s, cross), cross_err + prod.error_estimate / 2, BACKWARD),
            ]
        else:
            raise PreconditionFailed("remark bounds need a synchronous or asynchronous pair")
        return out


def check_product_upper(f, g, A, B, x, spec: QuadratureSpec = QuadratureSpec(), tol: Tolerance = Tolerance()):
    return PairEvaluation(f, g, A, B, spec, tol).product_upper(x)


def check_midpoint_product(f, g, A, B, x, spec=QuadratureSpec(), tol=Tolerance(), allow_signed=False):
    return PairEvaluation(f, g, A, B, spec, tol).midpoint_product(x, allow_signed)


def check_cross_product(f, g, A, B, x, spec=QuadratureSpec(), tol=Tolerance(), allow_signed=False):
    return PairEvaluation(f, g, A, B, spec, tol).cross_product(x, allow_signed)


def check_cebysev(f, g, A, x, synchrony: SynchronyVerdict, tol: Tolerance = Tolerance()):
    return PairEvaluation(f, g, A, A, tol=tol).cebysev(x, synchrony)


def check_mnp_chain(f, g, A, B, x, synchrony: SynchronyVerdict, tol: Tolerance = Tolerance()):
    return PairEvaluation(f, g, A, B, tol=tol).mnp_chain(x, synchrony)


def check_remark_bounds(f, g, A, B, x, synchrony, spec=QuadratureSpec(), tol=Tolerance()):
    return PairEvaluation(f, g, A, B, spec, tol).remark_bounds(x, synchrony)


# -- the worked example ----------------------------------------------------------

EXAMPLE_INTERVALS = {"example-3/3.4": (0.0, 1.0), "example-3/3.8": (-1.0, 0.0)}


def example_trial(dim, trial, seed, probes=8, spec=QuadratureSpec(), tol=Tolerance()) -> list[InequalityReport]:
    """One trial of the identity/square example on both intervals.

    On [0, 1] the pair is synchronous and nonnegative: the integral of
    <S x,x><S^2 x,x> is bounded by P/2. On [-1, 0] it is asynchronous and
    <((A+B)/2)^3 x,x> is bounded by half that integral plus N/4.
    """
    from .catalog import get_function

    identity, square = get_function("identity"), get_function("square")
    out = []
    for case, interval in EXAMPLE_INTERVALS.items():
        tags = _stream_tags(interval, dim)
        seeds = {k: derive_subseed(seed, trial, tag) for k, tag in tags.items() if k != "x"}
        A = random_hermitian(dim, interval, seeds["A"])
        B = random_hermitian(dim, interval, seeds["B"])
        ev = PairEvaluation(identity.restrict(interval), square.restrict(interval), A, B, spec, tol)
        for probe in range(probes):
            xseed = derive_subseed(seed, trial, f"{tags['x']}/{probe}")
            p = ev.probe(random_unit_vector(dim, xseed))
            t = p.mnp
            if case == "example-3/3.4":
                prod = p.integrals[3]
                rep = _report(case, prod.value, t.p_value / 2, tol, (t.scale,), prod.error_estimate, BACKWARD)
            else:
                prod = p.integrals[3]
                rhs = prod.value / 2 + t.n_value / 4
                rep = _report(case, p.at_mid[2], rhs, tol, (t.scale,), prod.error_estimate / 2, BACKWARD)
            out.append(rep.with_context(
                dim=dim, trial=trial, probe=probe, functions=["identity", "square"],
                interval=list(interval), subseeds={**seeds, "x": xseed},
            ))
    return out


def _stream_tags(interval, dim) -> dict[str, str]:
    lo, hi = interval
    base = f"[{lo!r},{hi!r}]/dim={dim}"
    return {"A": f"A/{base}", "B": f"B/{base}", "x": f"x/{base}"}


def run_worked_example(dim: int, trials: int, seed: int, probes: int = 8, spec=QuadratureSpec(), tol=Tolerance()):
    out = []
    for trial in range(trials):
        out += example_trial(dim, trial, seed, probes, spec, tol)
    return out
