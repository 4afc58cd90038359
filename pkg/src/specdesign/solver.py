"""Direct-problem solver: bound states, scattering and band discriminants.

Everything downstream (the transformation engine, band tools, CLI checks)
treats this module as the independent oracle: it only ever sees a sampled
Potential and recomputes spectra from scratch.

Method summary
--------------
* Numerov integration (O(h^4)) of -psi'' + V psi = E psi, integrated from
  both ends and matched at the rightmost classical turning point, which keeps
  the scheme stable inside deep classically forbidden tails.
* Eigenvalues are bracketed by interior-node counts of the left-shot
  solution (node theorem), seeded by finite-difference tridiagonal estimates,
  then polished with Brent's method on the matching Wronskian.
* Delta spikes enter exactly through the derivative jump
  psi'(x+) = psi'(x-) + g psi(x); they are never smeared.
* Scattering and band discriminants reuse the same propagation, vectorized
  across energies for scans.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import NumericalFailure, ValidationError
from .grid import SampledFn, integrate
from .potentials import DECAYING_HALF_LINE, DECAYING_LINE, Potential

_RESCALE = 1e250


@dataclass(frozen=True)
class BoundState:
    """One bound level: 1-based label n, node count, energy, state, weight.

    swf is the spectral weight: psi'(x_min) for problems with a left wall,
    the right-tail norming constant (psi ~ swf * exp(-kappa x)) for
    decaying-line problems.
    """

    n: int
    nodes: int
    energy: float
    psi: SampledFn
    swf: float


@dataclass(frozen=True)
class ScatteringResult:
    energy: float
    R: complex
    T: complex
    k_left: float
    k_right: float

    @property
    def flux_defect(self) -> float:
        """|R|^2 + (k_R/k_L)|T|^2 - 1; zero for an exact solution."""
        return abs(self.R) ** 2 + (self.k_right / self.k_left) * abs(self.T) ** 2 - 1.0


# ---------------------------------------------------------------------------
# low-level propagation


def _taylor_step(y, dy, hs, f0, df0, ddf0):
    """y(x + hs) from (y, y') at x, using y'' = f y (4th order)."""
    return (
        y
        + hs * dy
        + 0.5 * hs * hs * f0 * y
        + hs**3 / 6.0 * (df0 * y + f0 * dy)
        + hs**4 / 24.0 * (ddf0 * y + 2.0 * df0 * dy + f0 * f0 * y)
    )


def _fd_derivs(v, j, h):
    """Local dV/dx and d2V/dx2 at node j by finite differences."""
    n = len(v)
    if 1 <= j <= n - 2:
        dv = (v[j + 1] - v[j - 1]) / (2.0 * h)
        ddv = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h)
    elif j == 0:
        dv = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        ddv = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
    else:
        dv = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
        ddv = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)
    return dv, ddv


def _onesided_slope(y, h, at_start):
    """O(h^5) six-point one-sided derivative at an array end."""
    if at_start:
        return (-137.0 * y[0] + 300.0 * y[1] - 300.0 * y[2] + 200.0 * y[3]
                - 75.0 * y[4] + 12.0 * y[5]) / (60.0 * h)
    return (137.0 * y[-1] - 300.0 * y[-2] + 300.0 * y[-3] - 200.0 * y[-4]
            + 75.0 * y[-5] - 12.0 * y[-6]) / (60.0 * h)


def derivative_samples(y: np.ndarray, f: np.ndarray, h: float) -> np.ndarray:
    """dy/dx at every node for a solution of y'' = f y, O(h^4).

    Interior nodes use the centered difference corrected with the known
    second derivative; ends fall back to one-sided five-point stencils.
    """
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * h) - (h / 12.0) * (f[2:] * y[2:] - f[:-2] * y[:-2])
    d[0] = _onesided_slope(y, h, True)
    d[-1] = _onesided_slope(y, h, False)
    return d


def _shoot(vvals, h, energy, start, delta_nodes=()):
    """Numerov sweep left-to-right over the whole sample array.

    start is ('wall',) for y(0)=0, or ('decay', kappa) for an exponential
    tail start, or ('value-slope', y0, dy0).  delta_nodes is a sorted list of
    (node index, strength) applied as exact derivative jumps.  Returns the
    solution as a python list with an arbitrary overall positive scale
    (rescaled wholesale when it threatens overflow).
    """
    n = len(vvals)
    f = [v - energy for v in vvals]
    c = [1.0 - h * h * fj / 12.0 for fj in f]

    y = [0.0] * n
    if start[0] == "wall":
        y[0] = 0.0
        y[1] = h
    elif start[0] == "decay":
        kappa = start[1]
        y[0] = 1.0
        y[1] = math.exp(kappa * h)
    else:
        y0, dy0 = start[1], start[2]
        dv, ddv = _fd_derivs(vvals, 0, h)
        y[0] = y0
        y[1] = _taylor_step(y0, dy0, h, f[0], dv, ddv)

    jumps = {j: g for j, g in delta_nodes}
    ym, yc = y[0], y[1]
    j = 1
    while j < n - 1:
        if j in jumps and j >= 5:
            # cross the delta: one-sided slope from the computed side,
            # jump it, restart the recurrence by a Taylor step
            dy = _onesided_slope(y[j - 5 : j + 1], h, False)
            dy += jumps[j] * yc
            dv, ddv = _fd_derivs(vvals, j, h)
            yp = _taylor_step(yc, dy, h, f[j], dv, ddv)
        else:
            yp = ((12.0 - 10.0 * c[j]) * yc - c[j - 1] * ym) / c[j + 1]
        y[j + 1] = yp
        ym, yc = yc, yp
        if abs(yp) > _RESCALE:
            s = 1.0 / abs(yp)
            for i in range(j + 2):
                y[i] *= s
            ym *= s
            yc *= s
        j += 1
    return y


def _count_sign_changes(y, lo, hi):
    """Sign changes of y over indices [lo, hi], zeros carried through."""
    count = 0
    prev = 0.0
    for j in range(lo, hi + 1):
        v = y[j]
        if v == 0.0:
            continue
        if prev != 0.0 and (v > 0.0) != (prev > 0.0):
            count += 1
        prev = v
    return count


def _left_start(v: Potential, energy):
    if v.bc_kind == DECAYING_LINE:
        kap2 = v.values[0] - energy
        if kap2 <= 0.0:
            raise ValidationError(f"energy {energy} not below the left continuum edge")
        return ("decay", math.sqrt(kap2))
    return ("wall",)


def _right_start(v: Potential, energy):
    if v.bc_kind in (DECAYING_LINE, DECAYING_HALF_LINE):
        kap2 = v.values[-1] - energy
        if kap2 <= 0.0:
            raise ValidationError(f"energy {energy} not below the right continuum edge")
        return ("decay", math.sqrt(kap2))
    return ("wall",)


def _node_count(v: Potential, energy, deltas) -> int:
    # the full range matters: near-degenerate pairs press nodes into the
    # final grid interval, and the terminal sample still carries their sign
    y = _shoot(v.values.tolist(), v.grid.h, energy, _left_start(v, energy), deltas)
    return _count_sign_changes(y, 0, v.grid.n_points - 1)


def _fd_estimates(v: Potential, count: int) -> np.ndarray:
    """O(h^2) eigenvalue estimates from the finite-difference tridiagonal."""
    g = v.grid
    h = g.h
    vals = v.values[1:-1].copy()
    for j, strength in v.delta_nodes(interior_only=False):
        if 1 <= j <= g.n_points - 2:
            vals[j - 1] += strength / h
    diag = 2.0 / h**2 + vals
    off = np.full(g.n_points - 3, -1.0 / h**2)
    hi = min(count - 1, diag.size - 1)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, hi), eigvals_only=True)


def _match_index(v: Potential, energy) -> int:
    """Rightmost classical turning point, clipped away from the edges."""
    allowed = np.nonzero(v.values <= energy)[0]
    n = v.grid.n_points
    m = int(allowed[-1]) if allowed.size else n // 2
    return min(max(m, 4), n - 5)


class _Matcher:
    """Bidirectional shoot-and-match at a fixed interior node."""

    def __init__(self, v: Potential, m: int, deltas):
        self.v = v
        self.vlist = v.values.tolist()
        self.h = v.grid.h
        self.m = m
        self.deltas = deltas
        self.deltas_rev = [(v.grid.n_points - 1 - j, g) for j, g in reversed(deltas)]

    def sweeps(self, energy):
        yl = _shoot(self.vlist, self.h, energy, _left_start(self.v, energy), self.deltas)
        yr = _shoot(self.vlist[::-1], self.h, energy, _right_start(self.v, energy), self.deltas_rev)[::-1]
        return yl, yr

    def mismatch(self, energy):
        yl, yr = self.sweeps(energy)
        m, h = self.m, self.h
        fl = self.vlist[m - 1] - energy, self.vlist[m + 1] - energy
        dl = (yl[m + 1] - yl[m - 1]) / (2 * h) - (h / 12.0) * (fl[1] * yl[m + 1] - fl[0] * yl[m - 1])
        dr = (yr[m + 1] - yr[m - 1]) / (2 * h) - (h / 12.0) * (fl[1] * yr[m + 1] - fl[0] * yr[m - 1])
        raw = dl * yr[m] - dr * yl[m]
        scale = abs(dl * yr[m]) + abs(dr * yl[m]) + 1e-300
        return raw / scale

    def good_match_point(self, energy) -> bool:
        yl, yr = self.sweeps(energy)
        m = self.m
        peak_l = max(abs(t) for t in yl[: m + 1])
        peak_r = max(abs(t) for t in yr[m:])
        return abs(yl[m]) > 1e-3 * peak_l and abs(yr[m]) > 1e-3 * peak_r


def _assemble_state(v: Potential, energy, m, deltas) -> tuple[np.ndarray, int]:
    matcher = _Matcher(v, m, deltas)
    yl, yr = matcher.sweeps(energy)
    # splice at the dominant lobe left of the turning point, not at the
    # turning point itself: the tiny branch mismatch then lands where
    # relative errors (and u'/u) are smallest
    peak = max(range(4, m + 1), key=lambda j: abs(yl[j]))
    if abs(yr[peak]) > 1e-6 * max(abs(t) for t in yr[peak:]):
        m = peak
    scale = yl[m] / yr[m]
    y = np.array(yl[: m] + [scale * t for t in yr[m:]])
    nodes = _count_sign_changes(y.tolist(), 1, len(y) - 2)
    norm = integrate(SampledFn(v.grid, y * y))
    y = y / math.sqrt(norm)
    # deterministic sign: first significant lobe positive
    peak = np.max(np.abs(y))
    first = np.nonzero(np.abs(y) > 0.05 * peak)[0][0]
    if y[first] < 0:
        y = -y
    return y, nodes


def _state_swf(v: Potential, energy, psi: np.ndarray) -> float:
    h = v.grid.h
    if v.bc_kind == DECAYING_LINE:
        kappa = math.sqrt(v.values[-1] - energy)
        j = v.grid.n_points - 6
        return float(psi[j] * math.exp(kappa * v.grid.x[j]))
    return float(_onesided_slope(psi, h, True))


def bound_states(v: Potential, count: int, *, rel_tol: float = 1e-11) -> list[BoundState]:
    """The lowest `count` bound states of a potential, ordered by energy.

    Energies are refined to |dE| < rel_tol * max(1, |E|).  For decaying
    boundary kinds only the levels genuinely below the continuum edge are
    returned, so the list may be shorter than requested.

    Raises
    ------
    ValidationError
        for bad arguments or deltas too close to the domain edge.
    NumericalFailure
        if bracketing or refinement fails to converge.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if v.grid.n_points < 11:
        raise ValidationError("grid too coarse for the shooting solver (need >= 11 points)")
    deltas = v.delta_nodes(interior_only=True)

    n_want = count
    e_top = None
    if v.bc_kind in (DECAYING_LINE, DECAYING_HALF_LINE):
        edge = v.continuum_edge()
        e_top = edge - 1e-9 * max(1.0, abs(edge))
        n_exist = _node_count(v, e_top, deltas)
        n_want = min(count, n_exist)
        if n_want == 0:
            return []

    est = _fd_estimates(v, n_want)
    states = []
    for k in range(1, n_want + 1):
        e0 = float(est[k - 1]) if k - 1 < est.size else float(est[-1]) + k - est.size
        lo, hi, width = e0, e0, max(1e-6, 1e-4 * max(1.0, abs(e0)))
        for attempt in range(80):
            lo, hi = e0 - width, e0 + width
            if e_top is not None:
                hi = min(hi, e_top)
            if _node_count(v, lo, deltas) <= k - 1 and _node_count(v, hi, deltas) >= k:
                break
            width *= 3.0
        else:
            raise NumericalFailure(f"could not bracket level {k} near E={e0}")
        # shrink to a bracket holding exactly this level
        while _node_count(v, lo, deltas) < k - 1 or _node_count(v, hi, deltas) > k or hi - lo > max(0.5, 0.05 * abs(e0)):
            mid = 0.5 * (lo + hi)
            if _node_count(v, mid, deltas) <= k - 1:
                lo = mid
            else:
                hi = mid
            if hi - lo < 4e-16 * max(1.0, abs(hi)):
                break

        m = _match_index(v, 0.5 * (lo + hi))
        matcher = _Matcher(v, m, deltas)
        for _ in range(12):
            if matcher.good_match_point(0.5 * (lo + hi)):
                break
            matcher.m = max(4, matcher.m - max(1, v.grid.n_points // 40))
        xtol = rel_tol * max(1.0, abs(hi))
        flo, fhi = matcher.mismatch(lo), matcher.mismatch(hi)
        if flo == 0.0:
            energy = lo
        elif fhi == 0.0:
            energy = hi
        elif (flo > 0) != (fhi > 0):
            energy = brentq(matcher.mismatch, lo, hi, xtol=xtol, rtol=8.9e-16, maxiter=200)
        else:
            # fall back to bisection on the node count
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if _node_count(v, mid, deltas) <= k - 1:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < xtol:
                    break
            else:
                raise NumericalFailure(f"node bisection did not converge for level {k}")
            energy = 0.5 * (lo + hi)

        psi, nodes = _assemble_state(v, energy, matcher.m, deltas)
        if nodes != k - 1:
            raise NumericalFailure(
                f"level {k}: assembled state has {nodes} nodes (expected {k - 1})"
            )
        states.append(
            BoundState(n=k, nodes=nodes, energy=float(energy), psi=SampledFn(v.grid, psi),
                       swf=_state_swf(v, energy, psi))
        )
    return states


# ---------------------------------------------------------------------------
# scattering (vectorized across energies)


def _sweep_multi(vvals, h, energies, delta_nodes, y0, y1, keep=6):
    """Right-to-left Numerov sweep carried simultaneously for many energies.

    y0, y1 are vectors for the two RIGHTMOST nodes; returns the final `keep`
    columns [psi(x0), psi(x1), ...] as an array of shape (keep, n_energies).
    Works on the reversed axis internally.
    """
    v = np.asarray(vvals)[::-1]
    n = v.size
    e = np.asarray(energies)
    jumps = {n - 1 - j: g for j, g in delta_nodes}

    cm = 1.0 - h * h * (v[0] - e) / 12.0
    cc = 1.0 - h * h * (v[1] - e) / 12.0
    ym = np.array(y0, dtype=complex)
    yc = np.array(y1, dtype=complex)
    buf = [ym, yc]
    for j in range(1, n - 1):
        cp = 1.0 - h * h * (v[j + 1] - e) / 12.0
        if j in jumps and j >= 5:
            # slope w.r.t. the reversed axis; jump sign is invariant under x -> -x
            dy = _onesided_slope(buf[-6:], h, False)
            dy = dy + jumps[j] * yc
            dv, ddv = _fd_derivs(v, j, h)
            yp = _taylor_step(yc, dy, h, v[j] - e, dv, ddv)
        else:
            yp = ((12.0 - 10.0 * cc) * yc - cm * ym) / cp
        ym, yc = yc, yp
        cm, cc = cc, cp
        buf.append(yp)
        if len(buf) > keep:
            buf.pop(0)
    return np.array(buf[::-1])


def scattering_curve(v: Potential, energies) -> list[ScatteringResult]:
    """Reflection/transmission amplitudes at several energies in one sweep."""
    if v.bc_kind != DECAYING_LINE:
        raise ValidationError("scattering requires a decaying-line potential")
    e = np.asarray(list(energies), dtype=float)
    v_l, v_r = float(v.values[0]), float(v.values[-1])
    if np.any(e <= max(v_l, v_r)):
        raise ValidationError("every energy must lie above both asymptotic levels")
    deltas = v.delta_nodes(interior_only=True)
    g = v.grid
    k_l = np.sqrt(e - v_l)
    k_r = np.sqrt(e - v_r)

    # transmitted wave exp(i k_r x) seeds the two rightmost nodes
    y_last = np.exp(1j * k_r * g.x[-1])
    y_prev = np.exp(1j * k_r * g.x[-2])
    cols = _sweep_multi(v.values.tolist(), g.h, e, deltas, y_last, y_prev)
    psi0, psi1 = cols[0], cols[1]

    ph0 = np.exp(1j * k_l * g.x[0])
    ph1 = np.exp(1j * k_l * g.x[1])
    det = ph0 / ph1 - ph1 / ph0
    a = (psi0 / ph1 - psi1 / ph0) / det
    b = (psi1 * ph0 - psi0 * ph1) / det

    out = []
    for i in range(e.size):
        out.append(
            ScatteringResult(
                energy=float(e[i]),
                R=complex(b[i] / a[i]),
                T=complex(1.0 / a[i]),
                k_left=float(k_l[i]),
                k_right=float(k_r[i]),
            )
        )
    return out


def scattering(v: Potential, energy: float) -> ScatteringResult:
    """R and T for a wave incident from the left at one energy."""
    return scattering_curve(v, [energy])[0]


# ---------------------------------------------------------------------------
# transfer matrix over one period


def _propagate_columns(vvals, h, energies, delta_nodes):
    """One-period transfer matrix entries for each energy.

    Returns (u_a, du_a, w_a, dw_a): the end values and slopes of the two
    solutions with (value, slope) = (1, 0) and (0, 1) at the left cell edge.
    A delta on the left edge is applied once before propagation.
    """
    v = np.asarray(vvals)
    n = v.size
    e = np.asarray(energies, dtype=float)
    edge = [g for j, g in delta_nodes if j == 0]
    interior = [(j, g) for j, g in delta_nodes if j > 0]
    for j, _ in interior:
        if j < 5 or j > n - 6:
            raise ValidationError("interior delta too close to the cell edge")

    results = []
    for y0val, dy0val in ((1.0, 0.0), (0.0, 1.0)):
        y0 = np.full(e.shape, y0val, dtype=float)
        dy0 = np.full(e.shape, dy0val, dtype=float)
        for g_ in edge:
            dy0 = dy0 + g_ * y0
        dv, ddv = _fd_derivs(v, 0, h)
        y1 = _taylor_step(y0, dy0, h, v[0] - e, dv, ddv)

        jumps = dict(interior)
        cm = 1.0 - h * h * (v[0] - e) / 12.0
        cc = 1.0 - h * h * (v[1] - e) / 12.0
        ym, yc = y0, y1
        buf = [ym, yc]
        for j in range(1, n - 1):
            cp = 1.0 - h * h * (v[j + 1] - e) / 12.0
            if j in jumps:
                dy = _onesided_slope(buf[-6:], h, False)
                dy = dy + jumps[j] * yc
                dvj, ddvj = _fd_derivs(v, j, h)
                yp = _taylor_step(yc, dy, h, v[j] - e, dvj, ddvj)
            else:
                yp = ((12.0 - 10.0 * cc) * yc - cm * ym) / cp
            ym, yc = yc, yp
            cm, cc = cc, cp
            buf.append(yp)
            if len(buf) > 6:
                buf.pop(0)
        y_end = buf[-1]
        dy_end = _onesided_slope(buf, h, False)
        results.append((y_end, dy_end))
    (u_a, du_a), (w_a, dw_a) = results
    return u_a, du_a, w_a, dw_a


def band_discriminant_curve(cell: Potential, energies) -> np.ndarray:
    """Discriminant Delta(E) = trace of the one-period transfer matrix."""
    deltas = cell.delta_nodes(interior_only=False)
    u_a, _, _, dw_a = _propagate_columns(cell.values, cell.grid.h, energies, deltas)
    return u_a + dw_a


def transfer_matrix(cell: Potential, energy: float) -> np.ndarray:
    """Full one-period transfer matrix (det = 1 up to discretization)."""
    deltas = cell.delta_nodes(interior_only=False)
    vlist = cell.values.tolist()
    h = cell.grid.h
    edge = sum(g for j, g in deltas if j == 0)
    interior = [(j, g) for j, g in deltas if j > 0]
    cols = []
    for y0, dy0 in ((1.0, 0.0), (0.0, 1.0)):
        y = _shoot(vlist, h, energy, ("value-slope", y0, dy0 + edge * y0), interior)
        cols.append((y[-1], _onesided_slope(y, h, False)))
    return np.array([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]])


def band_discriminant(cell: Potential, energy: float) -> float:
    """Delta(E); |Delta| <= 2 exactly when E lies in an allowed zone."""
    m = transfer_matrix(cell, energy)
    return float(m[0, 0] + m[1, 1])
