"""Interaction energies: pair expectation, Hartree term, indirect energy.

Everything reduces to one-dimensional integrals in the separation coordinate
u = x - y:

  <sum_{i<j} v(|x_i-x_j|)>  =  int_0^inf h(u) v(u) du,
  D(rho, rho)               =  int_0^inf C(u) v(u) du,

where h(u) = int rho2(y+u, y) dy is the pair-separation density (even, total
mass N(N-1) over the line) and C(u) = int rho(x) rho(x+u) dx the density
autocorrelation.  Both inner integrals are adaptive and vector valued, so a
whole batch of potentials is priced at one adaptive pass.  The contact
potential acts on the coincidence diagonal instead:

  <delta> = (1/2) int rho2(x, x) dx,      D = (1/2) int rho^2.

Shifting a potential by a constant, v -> v - c, shifts the indirect energy by
+c N / 2; this falls out of the same integrals since int h = N(N-1)/2 and
int C = N^2 / 2 (checked in the tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import Interval, QuadratureSpec, integrate_1d, integrate_1d_with_error
from .potentials import Contact, Potential
from .states import DensityProfile, TrialState, density

__all__ = [
    "EnergyBreakdown",
    "interaction_expectation",
    "hartree",
    "indirect_energy",
    "interaction_energies",
    "window_mass",
    "expectation_via_2d",
]

DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class EnergyBreakdown:
    """Expectation, Hartree term, and their difference I_xc = <V> - D."""

    expectation_v: float
    hartree: float
    i_xc: float
    quadrature_error_estimate: float

    def to_record(self) -> dict:
        return {
            "expectation_v": self.expectation_v,
            "hartree": self.hartree,
            "i_xc": self.i_xc,
            "err": self.quadrature_error_estimate,
        }


def _support(state: TrialState) -> Interval:
    return Interval(
        state.grid_center - state.grid_halfwidth,
        state.grid_center + state.grid_halfwidth,
    )


def _is_contact(p: Potential) -> bool:
    return isinstance(p, Contact)


def pair_separation_density(state: TrialState, spec: QuadratureSpec):
    """Vectorized h(u) = int rho2(y+u, y) dy (one inner adaptive pass)."""
    box = _support(state)
    inner = spec.tightened()

    def h(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))

        def integrand(y):
            return state.rho2(y[None, :] + u[:, None], y[None, :])

        return integrate_1d(integrand, box, inner)

    return h


def density_autocorrelation(state: TrialState, spec: QuadratureSpec):
    """Vectorized C(u) = int rho(x) rho(x+u) dx."""
    box = _support(state)
    inner = spec.tightened()

    def c(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))

        def integrand(x):
            return state.rho(x)[None, :] * state.rho(x[None, :] + u[:, None])

        return integrate_1d(integrand, box, inner)

    return c


def _contact_expectation(state: TrialState, spec: QuadratureSpec):
    box = _support(state)
    return integrate_1d_with_error(lambda x: 0.5 * state.rho2(x, x), box, spec)


def _separation_grid(state, span: float) -> np.ndarray:
    """Dense u nodes for interpolating h and C: fine near contact, coarse far."""
    fine = getattr(state, "feature_scale", state.grid_halfwidth / 12.0)
    coarse = state.grid_halfwidth / 12.0
    lead = min(10.0 * fine, span)
    head = np.linspace(0.0, lead, 1001)
    n_tail = max(2, int(math.ceil((span - lead) / (coarse / 150.0))))
    tail = np.linspace(lead, span, n_tail)
    return np.unique(np.concatenate([head, tail]))


def _interpolated_correlations(state, spec):
    """Cubic splines of h(u) and C(u) plus an interpolation-error estimate.

    Both correlation functions are sampled in one vector-valued adaptive pass
    each; the spline deviation is measured at inter-node midpoints.
    """
    box = _support(state)
    span = box.hi - box.lo
    u = _separation_grid(state, span)
    h = pair_separation_density(state, spec)
    c = density_autocorrelation(state, spec)
    h_vals, c_vals = h(u), c(u)
    h_spline = CubicSpline(u, h_vals, extrapolate=False)
    c_spline = CubicSpline(u, c_vals, extrapolate=False)

    probe = 0.5 * (u[:-1:97] + u[1:][::97])
    dev = max(
        float(np.max(np.abs(h_spline(probe) - h(probe)))),
        float(np.max(np.abs(c_spline(probe) - c(probe)))),
    )
    scale = max(float(np.max(h_vals)), float(np.max(c_vals)), 1e-300)

    def h_fn(t):
        return np.nan_to_num(h_spline(t), nan=0.0)

    def c_fn(t):
        return np.nan_to_num(c_spline(t), nan=0.0)

    return h_fn, c_fn, span, dev / scale


def _integrate_separation(f, span: float, p: Potential, spec) -> tuple:
    """int_0^span f(u) v(u) du, split at the potential's non-smooth radii."""
    edges = [0.0] + [b for b in sorted(p.breakpoints()) if 0.0 < b < span] + [span]
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = integrate_1d_with_error(lambda t: f(t) * p.value(t), Interval(a, b), spec)
        total += float(val)
        err += float(e)
    return total, err


def _batched_energies(state, pointwise, spec):
    """(expectations, hartrees, error) for all non-contact potentials at once."""
    if not pointwise:
        return [], [], 0.0
    h_fn, c_fn, span, spline_rel = _interpolated_correlations(state, spec)
    exp_vals = np.empty(len(pointwise))
    har_vals = np.empty(len(pointwise))
    err = 0.0
    for k, p in enumerate(pointwise):
        ev, e1 = _integrate_separation(h_fn, span, p, spec)
        hv, e2 = _integrate_separation(c_fn, span, p, spec)
        exp_vals[k] = ev
        har_vals[k] = hv
        err = max(err, e1 + e2 + spline_rel * (abs(ev) + abs(hv)))
    return exp_vals, har_vals, err


def interaction_expectation(
    state: TrialState, p: Potential, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """<psi| sum_{i<j} v(|x_i - x_j|) |psi>."""
    if _is_contact(p):
        return float(_contact_expectation(state, spec)[0])
    exp_vals, _, _ = _batched_energies(state, [p], spec)
    return float(exp_vals[0])


def hartree(target, p: Potential, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """D(rho, rho) = (1/2) iint rho(x) rho(y) v(|x-y|) dx dy.

    ``target`` may be a TrialState (analytic density) or a DensityProfile
    (cubic-spline interpolant of the samples, zero outside the grid).
    """
    if isinstance(target, DensityProfile):
        state = _ProfileDensity(target)
    else:
        state = target
    if _is_contact(p):
        box = _support(state)
        val = integrate_1d(lambda x: 0.5 * state.rho(x) ** 2, box, spec)
        return float(val)
    c = density_autocorrelation(state, spec)
    box = _support(state)
    span = box.hi - box.lo
    val, _ = _integrate_separation(lambda u: c(u), span, p, spec)
    return val


class _ProfileDensity:
    """Adapter giving a grid profile the density surface of a state."""

    def __init__(self, profile: DensityProfile):
        self._spline = CubicSpline(profile.x, profile.values, extrapolate=False)
        self.grid_center = 0.5 * (profile.grid.x0 + profile.grid.hi)
        self.grid_halfwidth = 0.5 * (profile.grid.hi - profile.grid.x0)
        self.n_particles = profile.n_particles

    def rho(self, x):
        return np.nan_to_num(self._spline(np.asarray(x, dtype=float)), nan=0.0)


def indirect_energy(
    state: TrialState, p: Potential, spec: QuadratureSpec = DEFAULT_SPEC
) -> EnergyBreakdown:
    """Full breakdown for one (state, potential) pair; I_xc = <V> - D."""
    return interaction_energies(state, [p], spec)[0]


def interaction_energies(
    state: TrialState, potentials, spec: QuadratureSpec = DEFAULT_SPEC
) -> list[EnergyBreakdown]:
    """Breakdowns for many potentials, sharing the adaptive passes."""
    potentials = list(potentials)
    pointwise = [p for p in potentials if not _is_contact(p)]
    exp_vals, har_vals, batch_err = _batched_energies(state, pointwise, spec)

    contact_cache = None
    out = []
    k = 0
    for p in potentials:
        if _is_contact(p):
            if contact_cache is None:
                cexp, cerr = _contact_expectation(state, spec)
                chart = hartree(state, p, spec)
                contact_cache = (float(cexp), chart, float(np.max(cerr)))
            expectation, har, err = contact_cache
        else:
            expectation, har, err = float(exp_vals[k]), float(har_vals[k]), batch_err
            k += 1
        out.append(EnergyBreakdown(expectation, har, expectation - har, err))
    return out


def window_mass(state: TrialState, r: float, z, profile: DensityProfile | None = None):
    """alpha(r, z) = int_{z-r}^{z+r} rho(x) dx, the windowed density mass.

    Cross-validation oracle for the Cauchy-Schwarz step of the two-moment
    bound: int alpha(r, z)^2 dz <= (2r)^2 int rho^2.  Exact for the
    piecewise-linear interpolant of the profile.  Vectorized over z.
    """
    if r < 0:
        raise ValueError("window radius must be nonnegative")
    prof = profile if profile is not None else density(state)
    x = prof.x
    vals = prof.values
    dx = prof.grid.dx
    cum = np.concatenate([[0.0], np.cumsum(0.5 * dx * (vals[1:] + vals[:-1]))])

    def cum_at(t):
        t = np.clip(t, x[0], x[-1])
        j = np.clip(((t - x[0]) / dx).astype(int), 0, len(x) - 2)
        frac = t - x[j]
        rho_t = vals[j] + (vals[j + 1] - vals[j]) * frac / dx
        return cum[j] + 0.5 * frac * (vals[j] + rho_t)

    z = np.asarray(z, dtype=float)
    return (cum_at(z + r) - cum_at(z - r))[()]


def expectation_via_2d(state: TrialState, p: Potential, spec: QuadratureSpec | None = None):
    """Direct 2D-quadrature cross-check of the expectation for N = 2.

    Integrates |psi(x, y)|^2 v(|x - y|) on the support square; kept as the
    independent dual route to the separation-coordinate evaluation.
    """
    from .numerics import integrate_2d

    if state.n_particles != 2:
        raise ValueError("2D cross-check applies to two particles")
    spec = spec or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-8)
    box = _support(state)

    def f(x, y):
        return 0.5 * state.rho2(x, y) * p.value(np.abs(x - y))

    return integrate_2d(f, box, box, spec)
