import math

import numpy as np
import pytest

from specdesign.bands import (
    PeriodicSystem,
    Zone,
    auxiliary_box,
    gap_between,
    shift_zone,
    track_zone_shift,
    zones,
)
from specdesign.errors import ValidationError
from specdesign.grid import SampledFn, make_grid
from specdesign.potentials import Potential, comb_cell
from specdesign.solver import bound_states


@pytest.fixture(scope="module")
def comb():
    return PeriodicSystem(comb_cell(strength=2.0), math.pi)


def free_system(n_points=2001):
    g = make_grid(0.0, math.pi, n_points)
    return PeriodicSystem(Potential(SampledFn(g, np.zeros(n_points)), "hard-walls"), math.pi)


class TestZones:
    def test_free_cell_touching_zones(self):
        zs = zones(free_system(), 10.0)
        # gapless continuum: zones touch, edges at n^2
        edges = [z.e_hi for z in zs[:-1]]
        assert edges == pytest.approx([1.0, 4.0, 9.0], abs=1e-6)
        for a, b in zip(zs[:-1], zs[1:]):
            assert b.e_lo - a.e_hi == pytest.approx(0.0, abs=1e-6)

    def test_comb_pinned_edges(self, comb):
        zs = zones(comb, 10.0)
        assert len(zs) == 3
        # one edge of every zone sits exactly on the wall-pinned family n^2
        assert [z.e_hi for z in zs] == pytest.approx([1.0, 4.0, 9.0], abs=1e-8)
        for z in zs:
            assert z.e_lo < z.e_hi

    @pytest.mark.parametrize("g", [0.5, 2.0, 4.0, 7.0])
    def test_edge_invariance_in_strength(self, g):
        system = PeriodicSystem(comb_cell(strength=g), math.pi)
        zs = zones(system, 10.0)
        assert [z.e_hi for z in zs[:3]] == pytest.approx([1.0, 4.0, 9.0], abs=1e-8)

    def test_gap_widths_grow_with_strength(self):
        gaps = {}
        for g in (2.0, 4.0):
            zs = zones(PeriodicSystem(comb_cell(strength=g), math.pi), 10.0)
            gaps[g] = [gap_between(zs, 1), gap_between(zs, 2)]
        assert gaps[4.0][0] > gaps[2.0][0]
        assert gaps[4.0][1] > gaps[2.0][1]

    def test_dispersion_cross_check(self, comb):
        # independent oracle: band edges solve cos(ka) + (g/2k) sin(ka) = +/-1
        from scipy.optimize import brentq

        def disp(k):
            return math.cos(k * math.pi) + (2.0 / (2 * k)) * math.sin(k * math.pi)

        lower_zone3 = brentq(lambda k: disp(k) - 1.0, 2.05, 2.9, xtol=1e-12) ** 2
        zs = zones(comb, 10.0)
        assert zs[2].e_lo == pytest.approx(lower_zone3, abs=1e-7)

    def test_emax_validation(self, comb):
        with pytest.raises(ValidationError):
            zones(comb, -5.0)


class TestShiftZone:
    def test_zero_shift_keeps_zones(self, comb):
        shifted = shift_zone(comb, 2, 0.0)
        za = zones(comb, 10.0)
        zb = zones(shifted, 10.0)
        for a, b in zip(za, zb):
            assert b.e_lo == pytest.approx(a.e_lo, abs=1e-8)
            assert b.e_hi == pytest.approx(a.e_hi, abs=1e-8)

    def test_moving_edge_tracks_aux_level(self, comb):
        for d_e in (0.25, 0.5):
            zs = zones(shift_zone(comb, 2, d_e), 10.0)
            assert zs[1].e_hi == pytest.approx(4.0 + d_e, abs=1e-6)
            # wall-pinned edges of the other zones stay put
            assert zs[0].e_hi == pytest.approx(1.0, abs=1e-3)
            assert zs[2].e_hi == pytest.approx(9.0, abs=1e-3)

    def test_gap_closes_then_zone_squeezes(self, comb):
        # gap between zones 2 and 3 shrinks monotonically...
        widths = []
        for d_e in (0.0, 0.25, 0.5):
            zs = zones(shift_zone(comb, 2, d_e) if d_e else comb, 10.0)
            widths.append(zs[2].e_lo - zs[1].e_hi)
        assert widths[0] > widths[1] > widths[2] > 0

        # ...closes somewhere in (0, 3]: past closure the moving level becomes
        # the LOWER boundary of zone 3
        lo, hi = 0.5, 1.0
        for _ in range(9):
            mid = 0.5 * (lo + hi)
            zs = zones(shift_zone(comb, 2, mid), 11.0)
            merged = abs(zs[2].e_lo - (4.0 + mid)) < 1e-6
            if merged:
                hi = mid
            else:
                lo = mid
        d_star = hi
        assert 0.0 < d_star <= 3.0
        zs = zones(shift_zone(comb, 2, d_star), 11.0)
        assert zs[2].e_lo - zs[1].e_hi < 1e-3 or abs(zs[2].e_lo - (4.0 + d_star)) < 1e-3

        # continuing squeezes zone 3 between the moving level and fixed E=9
        squeezed = []
        for d_e in (1.5, 2.0, 2.5, 3.0):
            zs = zones(shift_zone(comb, 2, d_e), 11.0)
            zone3 = next(z for z in zs if abs(z.e_lo - (4.0 + d_e)) < 1e-3)
            assert zone3.e_hi == pytest.approx(9.0, abs=1e-3)
            squeezed.append(zone3.width)
        assert all(a > b for a, b in zip(squeezed, squeezed[1:]))

    def test_window_validation(self, comb):
        with pytest.raises(ValidationError):
            shift_zone(comb, 2, 6.0)   # would cross the next auxiliary level

    def test_auxiliary_box_levels(self, comb):
        aux = auxiliary_box(comb)
        states = bound_states(aux, 3)
        assert [s.energy for s in states] == pytest.approx([1.0, 4.0, 9.0], abs=1e-6)


class TestTracking:
    def test_track_rows(self, comb):
        rows = track_zone_shift(comb, 2, [0.0, 0.25], e_max=10.0)
        assert rows[0]["edge_energy"] == pytest.approx(4.0, abs=1e-6)
        assert rows[1]["edge_energy"] == pytest.approx(4.25, abs=1e-6)
        assert rows[1]["gaps"][1] < rows[0]["gaps"][1]

    def test_zone_dataclass(self):
        z = Zone(1, 0.5, 1.5)
        assert z.width == 1.0

    def test_cell_span_validation(self):
        g = make_grid(-1.0, 2.0, 301)
        cell = Potential(SampledFn(g, np.zeros(301)), "hard-walls")
        with pytest.raises(ValidationError):
            PeriodicSystem(cell, 3.0)
