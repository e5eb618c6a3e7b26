"""Shared numerical kernels: adaptive quadrature, special functions, root finding, RNG.

The quadrature kernel is a vectorized adaptive Gauss-Kronrod (G7/K15) scheme.
Integrands may be vector valued: ``f(x)`` called with a node array of shape
``(m,)`` may return shape ``(m,)`` or ``(k, m)``; the integral is taken over
the last axis and the error is controlled per component.  This is what lets
the energy integrals evaluate a whole batch of potentials (and inner marginal
integrals at all outer nodes) in one adaptive pass.

Semi-infinite domains are mapped onto (0, 1) by r = lo + expm1(t/(1-t)); the
doubly infinite line is mapped onto (-1, 1) by r = t/(1-t**2).  Kronrod nodes
are interior, so endpoint singularities and the images of infinity are never
evaluated.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.special

__all__ = [
    "QuadratureSpec",
    "Interval",
    "NonConvergence",
    "NoBracket",
    "integrate_1d",
    "integrate_1d_with_error",
    "integrate_2d",
    "erfcx",
    "erfcx_sandwich",
    "find_root",
    "rng_stream",
]


class NonConvergence(RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget.

    Carries the best estimate and its error so the caller can refine or reject.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NoBracket(ValueError):
    """Root bracket does not change sign."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for the adaptive quadrature kernel.

    The estimated error of a converged integral I is at most
    max(abs_tol, rel_tol * |I|), per component for vector integrands.
    ``truncation_threshold`` is the convention (relative to the integrand
    peak) below which callers may truncate supports and domains.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 4000
    truncation_threshold: float = 1e-14

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def tightened(self, factor: float = 1e-2) -> "QuadratureSpec":
        """Spec with tolerances scaled by ``factor`` (for inner integrals)."""
        return QuadratureSpec(
            self.abs_tol * factor,
            self.rel_tol * factor,
            self.max_subdivisions,
            self.truncation_threshold,
        )


@dataclass(frozen=True)
class Interval:
    """Integration interval; ``hi`` (or ``lo``) may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def of(domain) -> "Interval":
        if isinstance(domain, Interval):
            return domain
        lo, hi = domain
        return Interval(float(lo), float(hi))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


# Standard QUADPACK dqk15 abscissae and weights on [-1, 1].
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_GAUSS_IDX = np.arange(1, 15, 2)
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])

_INITIAL_PANELS = 4


def _panel(f, a, b):
    """Kronrod estimate and |K - G| error on [a, b]; vector-safe."""
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _XK
    fx = np.asarray(f(x), dtype=float)
    if fx.shape[-1] != 15:
        raise ValueError("integrand must return one value per node (last axis)")
    if not np.all(np.isfinite(fx)):
        raise ValueError(f"integrand not finite inside panel [{a}, {b}]")
    k = half * (fx @ _WK)
    g = half * (fx[..., _GAUSS_IDX] @ _WG)
    return k, np.abs(k - g)


# Exponents above this clamp map to radii ~ e^650 where every admissible
# (decaying) integrand has vanished; those nodes contribute exactly zero and
# evaluating them would only overflow the Jacobian.
_TAU_MAX = 650.0


def _half_line_map(t):
    tau_raw = t / (1.0 - t)
    dead = tau_raw > _TAU_MAX
    tau = np.where(dead, _TAU_MAX, tau_raw)
    jac = np.where(dead, 0.0, np.exp(tau) / (1.0 - t) ** 2)
    return np.expm1(tau), jac


def _transform(f, domain: Interval):
    """Map an infinite domain to a finite one; returns (g, finite_interval).

    Half lines use r = lo + expm1(t/(1-t)) on (0, 1): the exponential
    stretching keeps algebraically decaying tails (down to r^(-1.1))
    resolvable where a linear-rational map would need panels below machine
    epsilon.  Admissible integrands must decay at infinity.
    """
    lo, hi = domain.lo, domain.hi
    if domain.finite:
        return f, domain
    if math.isfinite(lo) and hi == math.inf:
        def g(t, _f=f, _lo=lo):
            r, jac = _half_line_map(t)
            return _f(_lo + r) * jac
        return g, Interval(0.0, 1.0)
    if lo == -math.inf and math.isfinite(hi):
        def g(t, _f=f, _hi=hi):
            r, jac = _half_line_map(t)
            return _f(_hi - r) * jac
        return g, Interval(0.0, 1.0)
    def g(t, _f=f):
        w = 1.0 - t * t
        return _f(t / w) * (1.0 + t * t) / w**2
    return g, Interval(-1.0, 1.0)


def integrate_1d_with_error(f, domain, spec: QuadratureSpec | None = None):
    """Adaptively integrate ``f`` over ``domain``; returns (value, error).

    ``f`` must accept a node array and return values with the node axis last;
    leading axes are integrated component-wise.  Raises NonConvergence when
    the subdivision budget is exhausted before the tolerance is met.
    """
    spec = spec or QuadratureSpec()
    domain = Interval.of(domain)
    if domain.lo == domain.hi:
        probe = np.asarray(f(np.array([domain.lo])), dtype=float)
        return np.zeros(probe.shape[:-1])[()], 0.0
    g, box = _transform(f, domain)

    edges = np.linspace(box.lo, box.hi, _INITIAL_PANELS + 1)
    heap = []
    total = None
    total_err = None
    counter = 0
    for a, b in zip(edges[:-1], edges[1:]):
        k, e = _panel(g, a, b)
        total = k if total is None else total + k
        total_err = e if total_err is None else total_err + e
        heapq.heappush(heap, (-float(np.max(e)), counter, a, b, k, e))
        counter += 1

    for _ in range(spec.max_subdivisions):
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            return total[()] if np.ndim(total) else float(total), total_err
        _, _, a, b, k, e = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        k1, e1 = _panel(g, a, mid)
        k2, e2 = _panel(g, mid, b)
        total = total - k + k1 + k2
        total_err = total_err - e + e1 + e2
        heapq.heappush(heap, (-float(np.max(e1)), counter, a, mid, k1, e1))
        counter += 1
        heapq.heappush(heap, (-float(np.max(e2)), counter, mid, b, k2, e2))
        counter += 1

    tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
    if np.all(total_err <= tol):
        return total[()] if np.ndim(total) else float(total), total_err
    raise NonConvergence(
        f"quadrature did not converge after {spec.max_subdivisions} subdivisions "
        f"(err {np.max(total_err):.3e})",
        estimate=total,
        error=total_err,
    )


def integrate_1d(f, domain, spec: QuadratureSpec | None = None):
    """Adaptive 1D integral of ``f`` over ``domain`` (see module docstring)."""
    value, _ = integrate_1d_with_error(f, domain, spec)
    return value


def integrate_2d(f, domain_x, domain_y, spec: QuadratureSpec | None = None):
    """Nested adaptive 2D integral of ``f(x, y)``.

    The outer integral runs over y, the inner over x with tightened
    tolerances.  ``f`` must broadcast over an array first argument with a
    scalar second argument.  Integrands singular on sets of measure zero
    (e.g. a log singularity on the diagonal) are handled by subdivision;
    genuinely distributional kernels (delta-like contact terms) are out of
    scope and are treated analytically by their callers.
    """
    spec = spec or QuadratureSpec()
    inner_spec = spec.tightened()

    def outer(ys):
        ys = np.atleast_1d(ys)
        return np.array(
            [integrate_1d(lambda x, _y=y: f(x, _y), domain_x, inner_spec) for y in ys]
        )

    return integrate_1d(outer, domain_y, spec)


def erfcx(x):
    """Scaled complementary error function e^(x^2) erfc(x), x >= 0.

    Strictly decreasing from erfcx(0) = 1, asymptotic to 1/(sqrt(pi) x).
    Relative error at the 1e-15 level (well inside the 1e-12 contract).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("erfcx defined here for x >= 0 only")
    out = scipy.special.erfcx(arr)
    return float(out) if np.ndim(x) == 0 else out


def erfcx_sandwich(x):
    """Elementary two-sided bound for erfcx: lower, upper arrays.

    2/(sqrt(pi)(x + sqrt(x^2+2))) <= erfcx(x) <= 2/(sqrt(pi)(x + sqrt(x^2+4/pi))),
    with equality of the upper bound at x = 0.
    """
    x = np.asarray(x, dtype=float)
    sq = np.sqrt(np.pi)
    lower = 2.0 / (sq * (x + np.sqrt(x * x + 2.0)))
    upper = 2.0 / (sq * (x + np.sqrt(x * x + 4.0 / np.pi)))
    return lower, upper


def find_root(f, bracket, tol: float = 1e-12) -> float:
    """Root of ``f`` inside ``bracket`` with |f(root)| <= tol.

    Brent's bisection/secant hybrid underneath.  Raises NoBracket when
    f does not change sign over the bracket.
    """
    box = Interval.of(bracket)
    flo, fhi = f(box.lo), f(box.hi)
    if flo == 0.0:
        return box.lo
    if fhi == 0.0:
        return box.hi
    if flo * fhi > 0:
        raise NoBracket(f"f({box.lo}) = {flo:.3e} and f({box.hi}) = {fhi:.3e} have the same sign")
    root = scipy.optimize.brentq(f, box.lo, box.hi, xtol=1e-15, rtol=8.9e-16)
    if abs(f(root)) > tol:
        raise NonConvergence(f"|f(root)| = {abs(f(root)):.3e} > tol = {tol:.3e}")
    return float(root)


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic, independent random stream for (seed, key...)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))
