import math
import warnings

import numpy as np
import pytest

from specdesign.darboux import (
    ClosedFormDiscrepancyWarning,
    DarbouxStep,
    bargmann_reflectionless,
    box_shift_closed_form,
    bsec_potential_values,
    darboux_create,
    darboux_remove_ground,
    degeneration_family,
    embed_bsec,
    factorization_solution,
    remove_level_by_swf,
    scale_swf,
    shift_level,
)
from specdesign.errors import SingularityError, ValidationError
from specdesign.grid import SampledFn, default_points, integrate, make_grid
from specdesign.potentials import Potential, box, free_line, soliton_well
from specdesign.solver import bound_states, scattering_curve
from specdesign.verify import (
    delta_v_sign_pattern,
    interval_mass,
    isospectral_check,
    orthonormality_defect,
)


@pytest.fixture(scope="module")
def the_box():
    return box()


def interior_mask(grid, margin=10):
    return np.abs(grid.x - 0.5 * (grid.x_min + grid.x_max)) <= (
        0.5 * (grid.x_max - grid.x_min) - margin * grid.h
    )


class TestFactorizationSolution:
    def test_free_line_symmetric_mix_is_cosh(self):
        fl = free_line()
        u = factorization_solution(fl, -1.0, 0.5)
        expected = np.cosh(fl.grid.x)
        expected /= expected.max()
        assert np.max(np.abs(u.values - expected)) < 1e-9

    def test_free_line_one_sided(self):
        fl = free_line()
        u = factorization_solution(fl, -1.0, 0.0)
        expected = np.exp(-fl.grid.x)
        expected /= expected.max()
        assert np.max(np.abs(u.values - expected)) < 1e-9

    def test_box_at_eigenvalue_returns_ground(self, the_box):
        u = factorization_solution(the_box, 1.0, 0.5)
        assert np.max(np.abs(u.values - np.cos(the_box.grid.x))) < 1e-8

    def test_nodeless_below_ground(self, the_box):
        u = factorization_solution(the_box, 0.2, 0.5)
        assert np.all(u.values > 0)

    def test_rejects_non_eigenvalue_inside_spectrum(self, the_box):
        with pytest.raises(ValidationError):
            factorization_solution(the_box, 2.5, 0.5)

    def test_rejects_bad_sigma(self, the_box):
        with pytest.raises(ValidationError):
            factorization_solution(the_box, 0.5, 1.0)


class TestRemoveGround:
    def test_box_becomes_inverse_cos_squared(self, the_box):
        ground = bound_states(the_box, 1)[0]
        res = darboux_remove_ground(the_box, ground)
        g = the_box.grid
        mask = interior_mask(g)
        exact = 2.0 / np.cos(g.x[mask]) ** 2
        assert np.max(np.abs(res.potential.values[mask] - exact)) < 1e-6
        check = isospectral_check(res.potential, [4.0, 9.0, 16.0], tol=1e-5)
        assert check["pass"], check

    def test_soliton_returns_to_free_motion(self):
        sw = soliton_well()
        ground = bound_states(sw, 1)[0]
        res = darboux_remove_ground(sw, ground)
        assert np.max(np.abs(res.potential.values)) < 1e-8

    def test_sampled_harmonic_well(self):
        # V = x^2 has levels 2n + 1; after removal the old E_2 = 3 is the ground
        fl = free_line(8.0)
        v = fl.with_body(fl.grid.x**2)
        ground = bound_states(v, 1)[0]
        assert ground.energy == pytest.approx(1.0, abs=1e-6)
        res = darboux_remove_ground(v, ground)
        new_ground = bound_states(res.potential, 1)[0]
        assert new_ground.energy == pytest.approx(3.0, abs=1e-6)

    def test_rejects_excited_state(self, the_box):
        excited = bound_states(the_box, 2)[1]
        with pytest.raises(ValidationError):
            darboux_remove_ground(the_box, excited)

    def test_transformed_states_carry_old_energies(self, the_box):
        ground = bound_states(the_box, 1)[0]
        res = darboux_remove_ground(the_box, ground, n_track=2)
        assert [s.energy for s in res.states] == pytest.approx([4.0, 9.0], abs=1e-6)
        assert [s.nodes for s in res.states] == [0, 1]


class TestCreate:
    def test_one_soliton(self):
        fl = free_line()
        res = darboux_create(fl, -1.0, 0.5)
        exact = -2.0 / np.cosh(fl.grid.x) ** 2
        assert np.max(np.abs(res.potential.values - exact)) < 1e-6
        st = bound_states(res.potential, 1)
        assert st[0].energy == pytest.approx(-1.0, abs=1e-6)

    def test_reflectionless_preservation(self):
        fl = free_line()
        res = darboux_create(fl, -2.25, 0.5)  # kappa = 1.5, depth -2 kappa^2
        assert res.potential.values.min() == pytest.approx(-4.5, abs=1e-6)
        sweep = scattering_curve(res.potential, [0.25, 0.5, 1.0, 2.5, 5.0, 10.0])
        assert max(abs(r.R) for r in sweep) < 1e-6

    def test_sigma_moves_the_well_monotonically(self):
        fl = free_line()
        centers = []
        spectra = []
        for sigma in (0.3, 0.5, 0.7, 0.9):
            res = darboux_create(fl, -1.0, sigma)
            centers.append(fl.grid.x[int(np.argmin(res.potential.values))])
            spectra.append(bound_states(res.potential, 1)[0].energy)
        assert all(a > b for a, b in zip(centers, centers[1:]))
        assert spectra == pytest.approx([-1.0] * 4, abs=1e-6)

    def test_validations(self, the_box):
        fl = free_line()
        with pytest.raises(ValidationError):
            darboux_create(the_box, 0.5, 0.5)      # hard walls unsupported
        with pytest.raises(ValidationError):
            darboux_create(fl, -1.0, 0.0)          # degenerate mix adds no level
        with pytest.raises(ValidationError):
            darboux_create(fl, 0.5, 0.5)           # not below the edge
        sol = soliton_well()
        with pytest.raises(ValidationError):
            darboux_create(sol, -0.5, 0.5)         # not below the existing ground


class TestShiftLevel:
    def test_headline_ground_shift(self, the_box):
        res = shift_level(the_box, 1, -5.0)
        check = isospectral_check(res.potential, [-4.0, 4.0, 9.0, 16.0], tol=1e-6)
        assert check["pass"], check

    def test_zero_shift_is_identity(self, the_box):
        res = shift_level(the_box, 1, 0.0)
        assert np.max(np.abs(res.potential.values - the_box.values)) < 1e-10

    def test_excited_shift(self, the_box):
        res = shift_level(the_box, 2, 0.5)
        check = isospectral_check(res.potential, [1.0, 4.5, 9.0, 16.0], tol=1e-6)
        assert check["pass"], check

    def test_bump_knot_rule(self, the_box):
        psi2 = bound_states(the_box, 2)[1]
        up = shift_level(the_box, 2, 0.5)
        pattern = delta_v_sign_pattern(the_box, up.potential, psi2)
        assert pattern["bumps"] and all(s > 0 for s in pattern["bumps"])
        assert pattern["knots"] and all(s < 0 for s in pattern["knots"])
        down = shift_level(the_box, 2, -0.5)
        pattern = delta_v_sign_pattern(the_box, down.potential, psi2)
        assert all(s < 0 for s in pattern["bumps"])
        assert all(s > 0 for s in pattern["knots"])

    def test_crossing_rejected_with_window(self, the_box):
        with pytest.raises(ValidationError, match="cross"):
            shift_level(the_box, 1, 3.5)
        with pytest.raises(ValidationError):
            shift_level(the_box, 2, -3.5)

    @pytest.mark.parametrize("t", [-5.0, -1.0, 1.5])
    def test_matches_closed_form(self, the_box, t):
        res = shift_level(the_box, 1, t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ClosedFormDiscrepancyWarning)
            v_cf, _ = box_shift_closed_form(t, the_box.grid)
        mask = interior_mask(the_box.grid)
        assert np.max(np.abs(res.potential.values[mask] - v_cf.values[mask])) < 1e-6

    @pytest.mark.parametrize("n,d_e", [(1, -2.0), (2, 1.0), (3, -1.5)])
    def test_asymmetric_well(self, the_box, n, d_e):
        # no symmetry to lean on: the companion-seed fallback must cover this
        g = the_box.grid
        v = the_box.with_body(3.0 * np.sin(g.x) + 2.0 * np.cos(2 * g.x) + 1.5 * g.x)
        base = [s.energy for s in bound_states(v, 4)]
        res = shift_level(v, n, d_e)
        target = sorted(e + (d_e if i == n - 1 else 0.0) for i, e in enumerate(base))
        check = isospectral_check(res.potential, target, tol=1e-5)
        assert check["pass"], check

    def test_line_shift_slides_along_soliton_family(self):
        # the one-level reflectionless well stays in its family when its
        # level moves: V must be -2 kappa^2 sech^2(kappa (x - x0))
        sw = soliton_well()
        res = shift_level(sw, 1, -1.25)
        assert bound_states(res.potential, 1)[0].energy == pytest.approx(-2.25, abs=1e-8)
        x = sw.grid.x
        x0 = x[int(np.argmin(res.potential.values))]
        exact = -4.5 / np.cosh(1.5 * (x - x0)) ** 2
        assert np.max(np.abs(res.potential.values - exact)) < 1e-6
        sweep = scattering_curve(res.potential, [0.5, 1.0, 3.0, 7.0])
        assert max(abs(r.R) for r in sweep) < 1e-6


class TestClosedForm:
    def test_identity_at_zero(self, the_box):
        v, _psi = box_shift_closed_form(0.0, the_box.grid)
        assert np.max(np.abs(v.values)) == 0.0

    def test_oracle_confirms_spectrum(self, the_box):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ClosedFormDiscrepancyWarning)
            v, _ = box_shift_closed_form(1.5, the_box.grid)
        pot = Potential(v, "hard-walls")
        check = isospectral_check(pot, [2.5, 4.0, 9.0, 16.0], tol=1e-6)
        assert check["pass"], check

    def test_published_eigenfunction_reported_and_substituted(self, the_box):
        with pytest.warns(ClosedFormDiscrepancyWarning):
            v, psi = box_shift_closed_form(-5.0, the_box.grid)
        # the substituted state really solves the equation at E = 1 + t
        h = the_box.grid.h
        lap = (psi.values[2:] - 2 * psi.values[1:-1] + psi.values[:-2]) / h**2
        res = -lap + (v.values[1:-1] + 4.0) * psi.values[1:-1]
        assert np.max(np.abs(res[50:-50])) < 1e-4  # plain-FD residual floor
        assert integrate(SampledFn(the_box.grid, psi.values**2)) == pytest.approx(1.0, abs=1e-8)

    def test_requires_canonical_interval(self):
        g = make_grid(0.0, math.pi, 201)
        with pytest.raises(ValidationError):
            box_shift_closed_form(-1.0, g)

    def test_level_crossing_is_singular(self, the_box):
        with pytest.raises(SingularityError):
            box_shift_closed_form(3.0, the_box.grid)  # 1 + t = E_2


class TestScaleSwf:
    @pytest.mark.parametrize("n,lam", [(1, 3.0), (2, 3.0), (1, -0.75)])
    def test_swf_law(self, the_box, n, lam):
        before = bound_states(the_box, n)[n - 1].swf
        res = scale_swf(the_box, n, lam)
        after_states = bound_states(res.potential, 4)
        assert after_states[n - 1].swf / before == pytest.approx(math.sqrt(1 + lam), abs=1e-6)
        for k, s in enumerate(after_states, start=1):
            assert s.energy == pytest.approx(k**2, abs=1e-5)

    def test_other_weights_untouched(self, the_box):
        before = bound_states(the_box, 3)
        res = scale_swf(the_box, 1, 3.0)
        after = bound_states(res.potential, 3)
        for b, a in zip(before[1:], after[1:]):
            assert a.swf / b.swf == pytest.approx(1.0, abs=1e-5)

    def test_identity_at_zero(self, the_box):
        res = scale_swf(the_box, 1, 0.0)
        assert np.max(np.abs(res.potential.values - the_box.values)) == 0.0

    def test_ground_pressed_to_left_wall(self, the_box):
        before = bound_states(the_box, 1)[0]
        res = scale_swf(the_box, 1, 3.0)
        after = bound_states(res.potential, 1)[0]
        mid = 0.0
        assert interval_mass(after, -math.pi / 2, mid) > interval_mass(before, -math.pi / 2, mid)

    def test_central_knot_stays_put(self, the_box):
        res = scale_swf(the_box, 2, 3.0)
        psi2 = bound_states(res.potential, 2)[1].psi
        sign_flip = np.nonzero(np.signbit(psi2.values[1:-1][:-1]) != np.signbit(psi2.values[1:-1][1:]))[0]
        knot_x = psi2.grid.x[1 + sign_flip[0]]
        assert abs(knot_x) <= psi2.grid.h

    def test_involution(self, the_box):
        first = scale_swf(the_box, 1, 3.0)
        second = scale_swf(first.potential, 1, 0.25 - 1.0)
        assert np.max(np.abs(second.potential.values - the_box.values)) < 1e-6

    def test_lambda_floor(self, the_box):
        with pytest.raises(ValidationError):
            scale_swf(the_box, 1, -1.0)


class TestRemoveBySwf:
    def test_ground_route_matches_darboux(self, the_box):
        res_a = remove_level_by_swf(the_box, 1)
        res_b = darboux_remove_ground(the_box, bound_states(the_box, 1)[0])
        mask = interior_mask(the_box.grid)
        assert np.max(np.abs(res_a.potential.values[mask] - res_b.potential.values[mask])) < 1e-6

    def test_soliton_ground(self):
        sw = soliton_well()
        res = remove_level_by_swf(sw, 1)
        assert np.max(np.abs(res.potential.values)) < 1e-8

    def test_excited_removal(self, the_box):
        res = remove_level_by_swf(the_box, 2)
        check = isospectral_check(res.potential, [1.0, 9.0, 16.0], tol=1e-5)
        assert check["pass"], check
        assert [s.energy for s in res.states[:2]] == pytest.approx([1.0, 9.0], abs=1e-6)


class TestBargmann:
    def test_single_level_closed_form(self):
        res = bargmann_reflectionless([1.0], [math.sqrt(2.0)])
        x = res.potential.grid.x
        assert np.max(np.abs(res.potential.values + 2.0 / np.cosh(x) ** 2)) < 1e-6

    def test_center_offset(self):
        kappa, c = 1.0, 3.0
        res = bargmann_reflectionless([kappa], [c])
        expected = math.log(c * c / (2 * kappa)) / (2 * kappa)
        x_min = res.potential.grid.x[int(np.argmin(res.potential.values))]
        assert x_min == pytest.approx(expected, abs=2 * res.potential.grid.h)

    def test_two_levels(self):
        res = bargmann_reflectionless([2.0, 1.0], [2.0, 1.5])
        check = isospectral_check(res.potential, [-4.0, -1.0], tol=1e-6)
        assert check["pass"], check
        sweep = scattering_curve(res.potential, [0.5, 1.0, 2.0, 5.0, 9.0])
        assert max(abs(r.R) for r in sweep) < 1e-6
        assert orthonormality_defect(res.states) < 1e-6

    def test_validations(self):
        with pytest.raises(ValidationError):
            bargmann_reflectionless([1.0, 2.0], [1.0, 1.0])   # increasing
        with pytest.raises(ValidationError):
            bargmann_reflectionless([2.0, 2.0], [1.0, 1.0])   # duplicate
        with pytest.raises(ValidationError):
            bargmann_reflectionless([1.0], [-1.0])            # bad norm
        with pytest.raises(ValidationError):
            bargmann_reflectionless([1.0], [1.0, 2.0])        # length mismatch


class TestBsec:
    def test_small_lambda_limit(self):
        k = math.sqrt(10.0)
        grid = make_grid(0.0, 8 * math.pi, default_points(8 * math.pi))
        res = embed_bsec(k, 1e-8, grid)
        assert np.max(np.abs(res.potential.values)) < 1e-6
        psi = res.states[0].psi.values
        ref = np.sin(k * grid.x)
        ref /= math.sqrt(integrate(SampledFn(grid, ref**2)))
        assert np.max(np.abs(psi - ref)) < 1e-5

    def test_norm_identity(self):
        # exact identity: int_0^L psi^2 = (1/lam)(1 - 1/D(L))
        k, lam = math.sqrt(10.0), 1.0
        length = 20 * math.pi
        grid = make_grid(0.0, length, default_points(length))
        res = embed_bsec(k, lam, grid)
        log = res.step_log[0]
        d_l = 1.0 + lam * (length / 2 - math.sin(2 * k * length) / (4 * k))
        assert log["norm_on_grid"] == pytest.approx((1 / lam) * (1 - 1 / d_l), abs=1e-8)
        assert log["tail_fraction_analytic"] == pytest.approx(1 / d_l, rel=1e-12)

    def test_potential_vanishes_at_state_knots(self):
        k, lam = math.sqrt(10.0), 1.0
        knots = np.arange(1, 30) * math.pi / k
        assert np.max(np.abs(bsec_potential_values(k, lam, knots))) < 1e-12

    def test_well_barrier_sign_pattern(self):
        # between consecutive knots the potential swings well-then-barrier:
        # sign(V) = -sign(sin 2kx) away from the first few blocks
        k, lam = math.sqrt(10.0), 1.0
        m = np.arange(10, 40)
        quarter = math.pi / (4 * k)
        first_half = m * math.pi / k + quarter
        second_half = m * math.pi / k + 3 * quarter
        assert np.all(bsec_potential_values(k, lam, first_half) < 0)
        assert np.all(bsec_potential_values(k, lam, second_half) > 0)

    def test_validations(self):
        grid = make_grid(0.0, 10.0, 1001)
        with pytest.raises(ValidationError):
            embed_bsec(1.0, 0.0, grid)
        with pytest.raises(ValidationError):
            embed_bsec(1.0, -1.0, grid)
        off_grid = make_grid(1.0, 10.0, 1001)
        with pytest.raises(ValidationError):
            embed_bsec(1.0, 1.0, off_grid)


class TestDegeneration:
    def test_gaps_reproduced(self, the_box):
        deltas = [1.0, 0.3, 0.1]
        family = degeneration_family(the_box, 2, deltas)
        for delta, res in zip(deltas, family):
            st = bound_states(res.potential, 3)
            assert st[2].energy - st[1].energy == pytest.approx(delta, abs=1e-6)

    def test_central_mass_escapes(self, the_box):
        family = degeneration_family(the_box, 2, [1.0, 0.3, 0.1])
        masses = []
        for res in family:
            pair = [s for s in res.states if s.energy > 2.0][:2]
            masses.append(sum(interval_mass(s, -math.pi / 4, math.pi / 4) for s in pair))
        assert masses[0] > masses[1] > masses[2]

    def test_zero_gap_rejected(self, the_box):
        with pytest.raises(ValidationError):
            degeneration_family(the_box, 2, [0.5, 0.0])
        with pytest.raises(ValidationError):
            degeneration_family(the_box, 2, [0.3, 0.5])


class TestStepDescriptor:
    def test_known_kinds(self):
        step = DarbouxStep("shift", {"n": 1, "dE": -5.0})
        assert step.kind == "shift"
        with pytest.raises(ValidationError):
            DarbouxStep("teleport", {})
