"""Scalar functions with operator-convexity, sign and monotonicity metadata.

Also hosts the synchrony classifier and a randomized operator-convexity
falsifier.
"""

from __future__ import annotations

import enum
import re
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import BadInterval, ConfigInvalid, DomainViolation, ParameterOutOfRange
from .hermitian import HermitianMatrix, apply_function, loewner_compare

EPSILON = 1e-3
DEFAULT_HI = 10.0
METADATA_GRID = 1001
SIGN_TOL = 1e-12


class ConvexityClass(str, enum.Enum):
    OPERATOR_CONVEX = "OPERATOR_CONVEX"
    OPERATOR_CONCAVE = "OPERATOR_CONCAVE"
    NOT_OPERATOR_CONVEX = "NOT_OPERATOR_CONVEX"
    UNKNOWN = "UNKNOWN"


class Monotonicity(str, enum.Enum):
    INCREASING = "INCREASING"
    DECREASING = "DECREASING"
    NONMONOTONE = "NONMONOTONE"


class Synchrony(str, enum.Enum):
    SYNCHRONOUS = "SYNCHRONOUS"
    ASYNCHRONOUS = "ASYNCHRONOUS"
    NEITHER = "NEITHER"


def _interval(interval) -> tuple[float, float]:
    lo, hi = (float(v) for v in interval)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise BadInterval(f"invalid interval [{lo!r}, {hi!r}]")
    return lo, hi


def _grid(interval, points=METADATA_GRID) -> np.ndarray:
    lo, hi = interval
    return np.linspace(lo, hi, points)


def classify_monotonicity(rule, interval, points=METADATA_GRID) -> Monotonicity:
    d = np.diff(rule(_grid(interval, points)))
    if np.all(d >= -SIGN_TOL):
        return Monotonicity.INCREASING
    if np.all(d <= SIGN_TOL):
        return Monotonicity.DECREASING
    return Monotonicity.NONMONOTONE


def is_nonnegative(rule, interval, points=METADATA_GRID) -> bool:
    return bool(np.all(rule(_grid(interval, points)) >= -SIGN_TOL))


@dataclass(frozen=True)
class ScalarFunction:
    """A real function on a closed interval, evaluated elementwise on arrays.

    ``coefficients`` holds ascending power-series coefficients for
    polynomials and is ``None`` otherwise.
    """

    id: str
    domain: tuple[float, float]
    rule: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    convexity_class: ConvexityClass
    nonnegative_on_domain: bool
    monotonicity: Monotonicity
    coefficients: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "domain", _interval(self.domain))
        values = self.rule(_grid(self.domain))
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{self.id}: non-finite values on its domain")
        if self.nonnegative_on_domain and np.any(values < -SIGN_TOL):
            raise ValueError(f"{self.id}: tagged nonnegative but takes negative values")

    def __call__(self, t):
        return self.rule(np.asarray(t, dtype=float))

    @property
    def degree(self) -> int | None:
        return None if self.coefficients is None else len(self.coefficients) - 1

    def covers(self, interval) -> bool:
        lo, hi = interval
        return self.domain[0] <= lo and hi <= self.domain[1]

    def restrict(self, interval) -> ScalarFunction:
        """Same function on a subinterval, with sign/monotonicity recomputed."""
        interval = _interval(interval)
        if not self.covers(interval):
            bad = interval[0] if interval[0] < self.domain[0] else interval[1]
            raise DomainViolation(bad, self.domain)
        return replace(
            self,
            domain=interval,
            nonnegative_on_domain=is_nonnegative(self.rule, interval),
            monotonicity=classify_monotonicity(self.rule, interval),
        )


def _poly_rule(coefficients):
    c = np.asarray(coefficients, dtype=float)
    return lambda t: np.polynomial.polynomial.polyval(t, c)


def _describe(id, domain, rule, cls, coefficients=None) -> ScalarFunction:
    domain = _interval(domain)
    return ScalarFunction(
        id=id,
        domain=domain,
        rule=rule,
        convexity_class=cls,
        nonnegative_on_domain=is_nonnegative(rule, domain),
        monotonicity=classify_monotonicity(rule, domain),
        coefficients=None if coefficients is None else tuple(float(c) for c in coefficients),
    )


def affine(a: float, b: float, *, concave: bool = False, domain=(-DEFAULT_HI, DEFAULT_HI), id=None):
    """``t -> a t + b``; affine maps are operator convex and operator concave."""
    cls = ConvexityClass.OPERATOR_CONCAVE if concave else ConvexityClass.OPERATOR_CONVEX
    if id is None:
        id = f"affine({a:g},{b:g})" + ("-concave" if concave else "")
    return _describe(id, domain, _poly_rule([b, a]), cls, [b, a])


def power(r: float, *, hi: float = DEFAULT_HI, eps: float = EPSILON, id=None):
    """``t -> t**r`` on ``[eps, hi]``; operator convex for ``1 <= r <= 2``."""
    if not 1.0 <= r <= 2.0:
        raise ParameterOutOfRange(f"power exponent {r!r} outside [1, 2]")
    return _describe(id or f"power({r:g})", (eps, hi), lambda t: np.power(t, r), ConvexityClass.OPERATOR_CONVEX)


@lru_cache(maxsize=256)
def product(f: ScalarFunction, g: ScalarFunction) -> ScalarFunction:
    """Pointwise product on the common domain (no convexity claim)."""
    lo, hi = max(f.domain[0], g.domain[0]), min(f.domain[1], g.domain[1])
    coeffs = None
    if f.coefficients is not None and g.coefficients is not None:
        coeffs = np.polynomial.polynomial.polymul(f.coefficients, g.coefficients)
    return _describe(f"{f.id}*{g.id}", (lo, hi), lambda t: f.rule(t) * g.rule(t), ConvexityClass.UNKNOWN, coeffs)


def builtin_catalog() -> list[ScalarFunction]:
    C = ConvexityClass
    return [
        affine(1, 0, id="identity"),
        affine(1, 0, concave=True, id="identity-concave"),
        affine(0, 1, id="constant"),
        affine(-1, 0, id="negate"),
        _describe("square", (-DEFAULT_HI, DEFAULT_HI), lambda t: t * t, C.OPERATOR_CONVEX, [0, 0, 1]),
        power(1.5, id="power-1.5"),
        _describe("inverse", (EPSILON, DEFAULT_HI), lambda t: 1.0 / t, C.OPERATOR_CONVEX),
        _describe("xlogx", (EPSILON, DEFAULT_HI), lambda t: t * np.log(t), C.OPERATOR_CONVEX),
        _describe("sqrt", (0.0, DEFAULT_HI), np.sqrt, C.OPERATOR_CONCAVE),
        _describe("cube", (-DEFAULT_HI, DEFAULT_HI), lambda t: t**3, C.NOT_OPERATOR_CONVEX, [0, 0, 0, 1]),
    ]


CATALOG = {f.id: f for f in builtin_catalog()}

_PARAM = re.compile(r"^(affine|power)\(([^()]*)\)$")


def get_function(id: str) -> ScalarFunction:
    """Catalog lookup; also accepts ``affine(a,b)`` and ``power(r)``."""
    id = id.strip()
    if id in CATALOG:
        return CATALOG[id]
    m = _PARAM.match(id.replace(" ", ""))
    if m:
        try:
            args = [float(v) for v in m.group(2).split(",")]
            if m.group(1) == "affine" and len(args) == 2:
                return affine(*args)
            if m.group(1) == "power" and len(args) == 1:
                return power(args[0])
        except (ValueError, ParameterOutOfRange) as exc:
            raise ConfigInvalid(f"bad function parameters in {id!r}: {exc}") from exc
    raise ConfigInvalid(f"unknown function id {id!r}; known: {', '.join(CATALOG)}")


@dataclass(frozen=True)
class SynchronyVerdict:
    kind: Synchrony
    breaks_synchronous: tuple[float, float] | None = None  # (t, s) with product < -1e-12
    breaks_asynchronous: tuple[float, float] | None = None  # (t, s) with product > 1e-12

    @property
    def witness(self):
        if self.kind is Synchrony.SYNCHRONOUS:
            return self.breaks_asynchronous
        if self.kind is Synchrony.ASYNCHRONOUS:
            return self.breaks_synchronous
        return self.breaks_synchronous, self.breaks_asynchronous


def check_synchronous(f, g, interval, grid_points: int = 201) -> SynchronyVerdict:
    """Grid test of the sign of ``(f(t) - f(s)) (g(t) - g(s))`` over all pairs."""
    interval = _interval(interval)
    if grid_points < 2:
        raise ParameterOutOfRange("grid_points must be at least 2")
    for h in (f, g):
        if not h.covers(interval):
            raise DomainViolation(interval[0] if interval[0] < h.domain[0] else interval[1], h.domain)
    t = _grid(interval, grid_points)
    ft, gt = f(t), g(t)
    prod = (ft[:, None] - ft[None, :]) * (gt[:, None] - gt[None, :])
    i_min = np.unravel_index(np.argmin(prod), prod.shape)
    i_max = np.unravel_index(np.argmax(prod), prod.shape)
    breaks_sync = (float(t[i_min[0]]), float(t[i_min[1]])) if prod[i_min] < -SIGN_TOL else None
    breaks_async = (float(t[i_max[0]]), float(t[i_max[1]])) if prod[i_max] > SIGN_TOL else None
    if breaks_sync is None:
        kind = Synchrony.SYNCHRONOUS
    elif breaks_async is None:
        kind = Synchrony.ASYNCHRONOUS
    else:
        kind = Synchrony.NEITHER
    return SynchronyVerdict(kind, breaks_sync, breaks_async)


class ConvexityStatus(str, enum.Enum):
    NO_VIOLATION_FOUND = "NO_VIOLATION_FOUND"
    VIOLATED = "VIOLATED"


def convexity_gap(f, A, B, lam: float, concave: bool = False) -> HermitianMatrix:
    """``(1-lam) f(A) + lam f(B) - f((1-lam) A + lam B)``, negated for concavity."""
    C = (1 - lam) * A + lam * B
    gap = (1 - lam) * apply_function(f, A) + lam * apply_function(f, B) - apply_function(f, C)
    return -gap if concave else gap


@dataclass(frozen=True)
class Counterexample:
    A: HermitianMatrix
    B: HermitianMatrix
    lam: float
    min_eig_of_gap: float
    trial_index: int
    concave: bool = False

    def recheck(self, f) -> float:
        """Recompute the smallest eigenvalue of the convexity gap from stored data."""
        return convexity_gap(f, self.A, self.B, self.lam, self.concave).min_eig


@dataclass(frozen=True)
class ConvexityVerdict:
    status: ConvexityStatus
    counterexample: Counterexample | None
    trials_used: int


def certify_operator_convex(
    f: ScalarFunction,
    interval,
    dim: int,
    trials: int,
    seed: int,
    *,
    tol: float = 1e-9,
    concave: bool = False,
) -> ConvexityVerdict:
    """Randomized search for a violation of operator convexity (or concavity).

    Each trial draws ``A``, ``B`` with spectra in ``interval`` and tests
    ``lam = 1/2`` and a uniform ``lam``. Trials are seeded from
    ``(seed, trial_index)`` so the outcome does not depend on evaluation order.
    """
    from .sampling import derive_subseed, random_hermitian

    interval = _interval(interval)
    if not f.covers(interval):
        raise DomainViolation(interval[0] if interval[0] < f.domain[0] else interval[1], f.domain)
    if dim < 1 or trials < 1:
        raise ParameterOutOfRange("dim and trials must be positive")
    for i in range(trials):
        A = random_hermitian(dim, interval, derive_subseed(seed, i, "certify/A"))
        B = random_hermitian(dim, interval, derive_subseed(seed, i, "certify/B"))
        u = np.random.default_rng(derive_subseed(seed, i, "certify/lambda")).uniform()
        for lam in (0.5, float(u)):
            C = (1 - lam) * A + lam * B
            lhs = apply_function(f, C)
            rhs = (1 - lam) * apply_function(f, A) + lam * apply_function(f, B)
            if concave:
                lhs, rhs = rhs, lhs
            verdict = loewner_compare(lhs, rhs, tol)
            if not verdict.leq:
                cx = Counterexample(A, B, lam, verdict.witness_min_eig, i, concave)
                return ConvexityVerdict(ConvexityStatus.VIOLATED, cx, i + 1)
    return ConvexityVerdict(ConvexityStatus.NO_VIOLATION_FOUND, None, trials)
