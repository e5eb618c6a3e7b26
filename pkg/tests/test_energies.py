import math

import numpy as np
import pytest

from lieboxford.energies import (
    expectation_via_2d,
    hartree,
    indirect_energy,
    interaction_energies,
    interaction_expectation,
    window_mass,
)
from lieboxford.potentials import (
    ApproxContact,
    Contact,
    ConvexSoftCoulomb,
    Homogeneous,
    RegularizedCoulomb,
    ShiftedPotential,
)
from lieboxford.states import (
    CorrelatedGaussianPair,
    DensityProfile,
    GaussianProduct,
    HermiteSlater,
    UniformGrid,
    density,
    density_power_integral,
    random_state_suite,
)

GAUSS_PAIR = GaussianProduct((0.0, 0.0), 1.0, "symmetric")
ANTI_PAIR = GaussianProduct((-0.8, 0.8), 0.9, "antisymmetric")


def uniform_profile(value=2.0, lo=0.0, hi=1.0, n=1001):
    grid = UniformGrid(lo, (hi - lo) / (n - 1), n)
    return DensityProfile(grid, np.full(n, float(value)), value * (hi - lo))


class TestContact:
    def test_symmetric_gaussian_pair_expectation(self):
        # int phi^4 = 1/(2 sqrt(pi)) for phi^2 the standard normal density
        val = interaction_expectation(GAUSS_PAIR, Contact())
        assert val == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-9)

    def test_antisymmetric_expectation_vanishes(self):
        assert interaction_expectation(ANTI_PAIR, Contact()) == pytest.approx(0.0, abs=1e-12)

    def test_breakdown_anchor(self):
        b = indirect_energy(GAUSS_PAIR, Contact())
        assert b.hartree == pytest.approx(1 / math.sqrt(math.pi), rel=1e-9)
        assert b.i_xc == pytest.approx(-1 / (2 * math.sqrt(math.pi)), rel=1e-9)
        assert b.i_xc == b.expectation_v - b.hartree  # identity, exact

    def test_antisymmetric_ixc_is_minus_half_density_square(self):
        b = indirect_energy(ANTI_PAIR, Contact())
        ref = -0.5 * density_power_integral(density(ANTI_PAIR), 2.0)
        assert b.i_xc == pytest.approx(ref, abs=1e-9)


class TestMollifierSweep:
    def test_approx_contact_converges_to_doubled_contact(self):
        # v_sigma(|x_i - x_j|) mollifies 2*delta (even extension carries mass 2),
        # so the sweep approaches twice the contact values as a Cauchy sequence.
        state = CorrelatedGaussianPair(1.0, 0.4, 0.8)
        e_contact = interaction_expectation(state, Contact())
        sweep = [interaction_expectation(state, ApproxContact(s)) for s in (1.0, 0.1, 0.01)]
        gaps = [abs(a - b) for a, b in zip(sweep, sweep[1:])]
        assert gaps[1] < gaps[0]
        assert gaps[1] < 1e-3
        assert sweep[-1] == pytest.approx(2 * e_contact, rel=1e-3)


class TestHartree:
    def test_contact_uniform_profile(self):
        assert hartree(uniform_profile(2.0), Contact()) == pytest.approx(2.0, rel=1e-8)

    def test_contact_gaussian_density(self):
        assert hartree(GAUSS_PAIR, Contact()) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-9)

    def test_zero_profile(self):
        grid = UniformGrid(-1.0, 0.01, 201)
        prof = DensityProfile(grid, np.zeros(201), 0.0)
        assert hartree(prof, Contact()) == 0.0
        assert hartree(prof, ConvexSoftCoulomb(1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_profile_route_matches_state_route(self):
        p = RegularizedCoulomb(0.8)
        via_state = hartree(GAUSS_PAIR, p)
        via_profile = hartree(density(GAUSS_PAIR), p)
        assert via_profile == pytest.approx(via_state, rel=1e-8)

    def test_positive_for_nonnegative_potentials(self):
        for _, state in random_state_suite(5, 21):
            assert hartree(state, ConvexSoftCoulomb(0.7)) > 0


class TestIndirectEnergy:
    def test_identity_and_error_estimate(self):
        for p in (ApproxContact(0.5), ConvexSoftCoulomb(1.0), Homogeneous(0.5)):
            b = indirect_energy(ANTI_PAIR, p)
            assert b.i_xc == b.expectation_v - b.hartree
            assert 0 <= b.quadrature_error_estimate < 1e-6 * max(1.0, abs(b.i_xc))

    def test_batch_matches_single(self):
        pots = [Contact(), ConvexSoftCoulomb(1.0), Homogeneous(0.3)]
        batch = interaction_energies(ANTI_PAIR, pots)
        for p, b in zip(pots, batch):
            single = indirect_energy(ANTI_PAIR, p)
            assert b.i_xc == pytest.approx(single.i_xc, rel=1e-10)

    def test_separation_route_matches_2d_quadrature(self):
        for p in (ConvexSoftCoulomb(1.0), RegularizedCoulomb(1.2)):
            fast = interaction_expectation(GAUSS_PAIR, p)
            slow = expectation_via_2d(GAUSS_PAIR, p)
            assert fast == pytest.approx(slow, rel=1e-7)

    def test_transpose_symmetry_of_2d_integrand(self):
        from lieboxford.numerics import QuadratureSpec, integrate_2d

        p = ConvexSoftCoulomb(1.0)
        state = GaussianProduct((-0.6, 0.9), 0.8, "symmetric")
        box = (-9.0, 9.0)
        spec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-9)
        base = integrate_2d(
            lambda x, y: 0.5 * state.rho2(x, y) * p.value(np.abs(x - y)), box, box, spec
        )
        swapped = integrate_2d(
            lambda x, y: 0.5 * state.rho2(y, x) * p.value(np.abs(x - y)), box, box, spec
        )
        assert abs(base - swapped) < 1e-10

    def test_translation_invariance(self):
        state = CorrelatedGaussianPair(0.9, 0.5, 0.6)
        moved = state.translated(3.1)
        for p in (Contact(), ConvexSoftCoulomb(1.0)):
            b0 = indirect_energy(state, p)
            b1 = indirect_energy(moved, p)
            assert b1.expectation_v == pytest.approx(b0.expectation_v, rel=1e-8)
            assert b1.hartree == pytest.approx(b0.hartree, rel=1e-8)

    def test_three_particle_slater(self):
        state = HermiteSlater(3, 1.0)
        b = indirect_energy(state, ConvexSoftCoulomb(1.0))
        assert b.expectation_v > 0
        assert b.hartree > 0
        # pair-separation mass equals the number of pairs
        from lieboxford.energies import pair_separation_density
        from lieboxford.numerics import Interval, QuadratureSpec, integrate_1d

        h = pair_separation_density(state, QuadratureSpec())
        mass = integrate_1d(lambda u: h(u), Interval(0.0, 2 * state.grid_halfwidth), QuadratureSpec())
        n = state.n_particles
        assert float(np.max(mass)) == pytest.approx(n * (n - 1) / 2, rel=1e-8)

    def test_shift_identity(self):
        # v -> v - c shifts I_xc by +c N/2; N = 2 here
        beta = 1.0
        reg = RegularizedCoulomb(beta)
        c = reg.value(0.0)
        assert c == pytest.approx(math.sqrt(math.pi) / (2 * beta))
        base = indirect_energy(GAUSS_PAIR, reg)
        lifted = indirect_energy(GAUSS_PAIR, ShiftedPotential(reg, c))
        assert lifted.i_xc - base.i_xc == pytest.approx(c, rel=1e-7)
        assert lifted.expectation_v - base.expectation_v == pytest.approx(-c, rel=1e-7)
        assert lifted.hartree - base.hartree == pytest.approx(-2 * c, rel=1e-7)


class TestWindowMass:
    def test_limits(self):
        state = GaussianProduct((0.1, -0.4), 1.1, "symmetric")
        prof = density(state)
        assert window_mass(state, 1e3, 0.0, prof) == pytest.approx(2.0, rel=1e-9)
        assert window_mass(state, 0.0, 0.3, prof) == 0.0

    def test_cauchy_schwarz_window_bound(self):
        # int alpha(r, z)^2 dz <= (2r)^2 int rho^2
        for _, state in random_state_suite(4, 13):
            prof = density(state)
            rho2 = density_power_integral(prof, 2.0)
            z = prof.x
            for r in (0.1, 1.0, 10.0):
                alpha = window_mass(state, r, z, prof)
                lhs = np.trapezoid(alpha**2, dx=prof.grid.dx)
                assert lhs <= 4 * r * r * rho2 * (1 + 1e-9)
