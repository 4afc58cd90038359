"""Discrete-coordinate wave mechanics: one allowed band, ladders, tunneling.

Convention (pinned, since band pictures alone fix neither sign nor offset):

    H psi(n) = -psi(n+1) - psi(n-1) + 2 psi(n) + V(n) psi(n),

so the free band is E in [0, 4] with band center 2, and the map
psi(n) -> (-1)^n psi(n) carries the spectrum of V onto 4 - spectrum(-V)
(which is how bound states live above an upside-down well).
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ValidationError

HARD_WALLS = "hard-walls"
DECAYING = "decaying"

#: the free lattice band [BAND_LO, BAND_HI]; center is BAND_CENTER
BAND_LO, BAND_HI = 0.0, 4.0
BAND_CENTER = 2.0


@dataclass(frozen=True)
class LatticeSystem:
    """Site potential on the integer range [n_min, n_max]."""

    n_min: int
    n_max: int
    v: np.ndarray
    bc: str = HARD_WALLS

    def __post_init__(self):
        if self.bc not in (HARD_WALLS, DECAYING):
            raise ValidationError(f"unknown lattice bc {self.bc!r}")
        if self.n_min >= self.n_max:
            raise ValidationError("need n_min < n_max")
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.n_max - self.n_min + 1,):
            raise ValidationError(
                f"site-potential length {v.shape} does not match range "
                f"[{self.n_min}, {self.n_max}]"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("site potentials must be finite")
        object.__setattr__(self, "v", v)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1


@dataclass(frozen=True)
class LatticeState:
    energy: float
    psi: np.ndarray
    nodes: int


def single_site(v0: float, half_width: int = 25) -> LatticeSystem:
    """One perturbed site V(0) = v0 on an otherwise flat decaying lattice."""
    v = np.zeros(2 * half_width + 1)
    v[half_width] = v0
    return LatticeSystem(-half_width, half_width, v, DECAYING)


def _count_sign_changes(psi: np.ndarray) -> int:
    count = 0
    prev = 0.0
    for t in psi:
        if t == 0.0:
            continue
        if prev != 0.0 and (t > 0) != (prev > 0):
            count += 1
        prev = t
    return count


def _make_states(energies, vectors) -> list[LatticeState]:
    out = []
    for i, energy in enumerate(energies):
        psi = vectors[:, i]
        peak = np.max(np.abs(psi))
        first = np.nonzero(np.abs(psi) > 0.05 * peak)[0][0]
        if psi[first] < 0:
            psi = -psi
        out.append(LatticeState(float(energy), psi, _count_sign_changes(psi)))
    return out


def _diagonalize(sys: LatticeSystem, lo: int, hi: int):
    diag = 2.0 + sys.v
    off = np.full(sys.size - 1, -1.0)
    return eigh_tridiagonal(diag, off, select="i", select_range=(lo, hi))


def lattice_bound_states(sys: LatticeSystem, count: int, which: str = "lowest") -> list[LatticeState]:
    """The `count` extremal eigenstates, from the bottom or the top.

    For decaying boundary conditions only genuine bound states are returned:
    levels strictly outside the free band [0, 4] whose amplitude has decayed
    at the window edges, so the list may be shorter than requested (states
    above the band are legal outputs of `which='highest'`).
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if count > sys.size:
        raise ValidationError(f"count {count} exceeds the {sys.size}-site system")
    if which not in ("lowest", "highest"):
        raise ValidationError("which must be 'lowest' or 'highest'")

    if which == "lowest":
        energies, vectors = _diagonalize(sys, 0, count - 1)
    else:
        energies, vectors = _diagonalize(sys, sys.size - count, sys.size - 1)
        energies = energies[::-1]
        vectors = vectors[:, ::-1]
    states = _make_states(energies, vectors)

    if sys.bc == DECAYING:
        kept = []
        for s in states:
            outside = s.energy < BAND_LO - 1e-12 if which == "lowest" else s.energy > BAND_HI + 1e-12
            if not outside:
                continue
            edge = max(abs(s.psi[0]), abs(s.psi[-1]))
            if edge > 1e-6:
                raise ValidationError(
                    f"window too small: state at E={s.energy:.6g} still has edge "
                    f"amplitude {edge:.2e}; enlarge the site range"
                )
            kept.append(s)
        states = kept
    return states


def stark_ladder(c: float, window: tuple[int, int], *, edge_tol: float = 1e-8) -> list[LatticeState]:
    """Equidistant ladder on the linear slope V(n) = c n.

    Returns the window-interior eigenstates whose amplitude is below edge_tol
    at both window ends; those form the ladder E_m = 2 + c m with one state
    per site offset, all sharing one shape shifted site by site.
    """
    if c <= 0:
        raise ValidationError(f"slope must be positive, got {c}")
    n_min, n_max = int(window[0]), int(window[1])
    sys = LatticeSystem(n_min, n_max, c * np.arange(n_min, n_max + 1), DECAYING)
    energies, vectors = _diagonalize(sys, 0, sys.size - 1)
    states = _make_states(energies, vectors)
    ladder = [s for s in states if max(abs(s.psi[0]), abs(s.psi[-1])) < edge_tol]
    if not ladder:
        raise ValidationError(
            "window too small: no eigenstate satisfies the edge-amplitude guard; "
            "enlarge the site range"
        )
    return ladder


def ladder_index(state: LatticeState, c: float) -> int:
    """Rung number m of a ladder state: E = 2 + c m."""
    return int(round((state.energy - BAND_CENTER) / c))


def bessel_recurrence_residual(state: LatticeState, c: float, sys_or_window) -> float:
    """Max residual of J_{nu-1} + J_{nu+1} - (2 nu / z) J_nu on the samples.

    The ladder eigenfunctions sample integer-order Bessel functions of fixed
    argument z = 2/c; the three-term recurrence is their defining identity
    and serves as a library-free oracle.
    """
    if isinstance(sys_or_window, LatticeSystem):
        sites = sys_or_window.sites
    else:
        sites = np.arange(int(sys_or_window[0]), int(sys_or_window[1]) + 1)
    m = ladder_index(state, c)
    nu = sites - m
    psi = state.psi
    res = psi[:-2] + psi[2:] - c * nu[1:-1] * psi[1:-1]
    return float(np.max(np.abs(res)))


def lattice_scattering(sys: LatticeSystem, energy: float) -> tuple[complex, complex]:
    """R and T amplitudes for a wave incident from the left at E in (0, 4).

    The site potential must vanish near the window edges (compact support);
    plane lattice waves e^{+-ikn} with E = 2 - 2 cos k are matched exactly,
    so |R|^2 + |T|^2 = 1 to rounding.
    """
    if not BAND_LO < energy < BAND_HI:
        raise ValidationError(f"energy must lie strictly inside the band (0, 4), got {energy}")
    margin = 3
    if sys.size < 2 * margin + 3:
        raise ValidationError("lattice window too small for scattering")
    if np.any(sys.v[:margin] != 0.0) or np.any(sys.v[-margin:] != 0.0):
        raise ValidationError("site potential must vanish near the window edges")

    k = math.acos((2.0 - energy) / 2.0)
    sites = sys.sites
    # transmitted wave T e^{ikn}, normalized to T = 1, recursed leftward
    psi_right = cmath.exp(1j * k * sites[-1])
    psi_next = cmath.exp(1j * k * (sites[-1] - 1))
    psi = np.zeros(sys.size, dtype=complex)
    psi[-1], psi[-2] = psi_right, psi_next
    for j in range(sys.size - 2, 0, -1):
        psi[j - 1] = (2.0 + sys.v[j] - energy) * psi[j] - psi[j + 1]

    # decompose on the flat left edge: psi(n) = A e^{ikn} + B e^{-ikn}
    e0 = cmath.exp(1j * k * sites[0])
    e1 = cmath.exp(1j * k * sites[1])
    det = e0 / e1 - e1 / e0
    a = (psi[0] / e1 - psi[1] / e0) / det
    b = (psi[1] * e0 - psi[0] * e1) / det
    return b / a, 1.0 / a
