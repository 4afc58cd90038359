"""Oracle-side verification helpers: isospectrality ledger, flux, widths.

These are the checks the chain runner executes after every transformation;
they only ever consult the direct solver, never the transformation's own
bookkeeping.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import SampledFn, integrate
from .potentials import Potential
from .solver import bound_states, scattering_curve


def isospectral_check(v: Potential, expected, tol: float = 1e-5) -> dict:
    """Compare the oracle spectrum of v against expected level positions.

    Returns a ledger entry: per-level (expected, measured, deviation) rows,
    the worst deviation, and the overall verdict.
    """
    expected = [float(e) for e in expected]
    found = bound_states(v, len(expected)) if expected else []
    rows = []
    worst = 0.0
    for i, e in enumerate(expected):
        if i < len(found):
            dev = abs(found[i].energy - e)
            rows.append({"n": i + 1, "expected": e, "measured": found[i].energy, "dev": dev})
            worst = max(worst, dev)
        else:
            rows.append({"n": i + 1, "expected": e, "measured": None, "dev": math.inf})
            worst = math.inf
    return {"levels": rows, "worst_dev": worst, "tol": tol, "pass": bool(worst < tol)}


def reflection_check(v: Potential, energies, tol: float = 1e-5) -> dict:
    """Assert |R(E)| stays below tol on an energy sweep (reflectionless claim)."""
    results = scattering_curve(v, energies)
    worst = max(abs(r.R) for r in results)
    return {
        "energies": [r.energy for r in results],
        "abs_R": [abs(r.R) for r in results],
        "worst_abs_R": worst,
        "tol": tol,
        "pass": bool(worst < tol),
    }


def orthonormality_defect(states) -> float:
    """Largest deviation of <psi_i | psi_j> from the identity matrix."""
    worst = 0.0
    for i, si in enumerate(states):
        for j, sj in enumerate(states):
            ip = integrate(SampledFn(si.psi.grid, si.psi.values * sj.psi.values))
            worst = max(worst, abs(ip - (1.0 if i == j else 0.0)))
    return worst


def interval_mass(state, x_lo: float, x_hi: float) -> float:
    """Probability mass of a state inside [x_lo, x_hi]."""
    g = state.psi.grid
    w = np.where((g.x >= x_lo) & (g.x <= x_hi), state.psi.values**2, 0.0)
    return integrate(SampledFn(g, w))


def central_mass(states, fraction: float = 0.5) -> float:
    """Combined probability mass of states inside the central `fraction` of the domain."""
    g = states[0].psi.grid
    half = 0.5 * fraction * (g.x_max - g.x_min)
    mid = 0.5 * (g.x_min + g.x_max)
    return sum(interval_mass(s, mid - half, mid + half) for s in states)


def peak_width(energies, values, *, level: float = 0.5) -> tuple[float, float, float]:
    """Peak position, height and width of a resonance curve.

    The width is measured where the curve crosses
    baseline + level * (peak - baseline), with the baseline taken as the
    curve minimum over the scan (prominence-based half width); crossings are
    linearly interpolated.
    """
    e = np.asarray(energies, dtype=float)
    y = np.asarray(values, dtype=float)
    i0 = int(np.argmax(y))
    peak_e, peak_y = float(e[i0]), float(y[i0])
    base = float(y.min())
    cut = base + level * (peak_y - base)

    def cross(idx_range, backward):
        prev = i0
        for j in idx_range:
            if y[j] < cut:
                a, b = (j, prev) if backward else (prev, j)
                frac = (cut - y[a]) / (y[b] - y[a])
                return float(e[a] + frac * (e[b] - e[a]))
            prev = j
        return float(e[idx_range[-1]] if len(idx_range) else peak_e)

    left = cross(range(i0 - 1, -1, -1), backward=True)
    right = cross(range(i0 + 1, len(e)), backward=False)
    return peak_e, peak_y, right - left


def delta_v_sign_pattern(v_before: Potential, v_after: Potential, state) -> dict:
    """Sign of the potential change at the state's bumps and interior knots.

    Implements the bump/knot rule for level shifts: a raised level needs
    repulsion at every bump of its state and compensating attraction at the
    knots (signs reversed for lowering).
    """
    dv = v_after.values - v_before.values
    psi = state.psi.values
    g = state.psi.grid
    margin = max(4, g.n_points // 100)
    inner = slice(margin, g.n_points - margin)
    p2 = psi**2

    bump_signs = []
    knot_signs = []
    idx = np.arange(g.n_points)[inner]
    for j in idx[1:-1]:
        if p2[j] > p2[j - 1] and p2[j] >= p2[j + 1] and p2[j] > 0.1 * p2.max():
            bump_signs.append(float(np.sign(dv[j])))
        if psi[j] == 0.0 or (psi[j - 1] > 0) != (psi[j] > 0):
            knot_signs.append(float(np.sign(dv[j])))
    return {"bumps": bump_signs, "knots": knot_signs}
