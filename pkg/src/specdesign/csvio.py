"""CSV serialization for every artifact the tools emit.

All files are comma-separated with a single header row and 17 significant
digits (lossless double round-trip); writers return the encoded bytes so
callers can buffer output and only touch the filesystem once.
"""

from __future__ import annotations

import io

import numpy as np

from .errors import ValidationError
from .grid import Grid, SampledFn, make_grid


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _table(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(c) if not isinstance(c, str) else c for c in row) + "\n")
    return buf.getvalue().encode()


def sampled_fn_bytes(f: SampledFn, value_name: str = "value") -> bytes:
    return _table(["x", value_name], zip(f.grid.x, f.values))


def read_sampled_fn(text: str | bytes) -> SampledFn:
    """Parse the two-column x,value format back into a SampledFn."""
    if isinstance(text, bytes):
        text = text.decode()
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValidationError("sampled-function CSV needs a header and data rows")
    xs, vs = [], []
    for ln in lines[1:]:
        a, b = ln.split(",")
        xs.append(float(a))
        vs.append(float(b))
    x = np.asarray(xs)
    n = x.size
    if n < 3 or n % 2 == 0:
        raise ValidationError(f"CSV grid must have an odd node count >= 3, got {n}")
    h = np.diff(x)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(1.0, abs(h[0])):
        raise ValidationError("CSV grid is not uniform")
    grid = make_grid(float(x[0]), float(x[-1]), n)
    return SampledFn(grid, np.asarray(vs))


def spectrum_bytes(states) -> bytes:
    return _table(["n", "energy", "swf"], ((s.n, s.energy, s.swf) for s in states))


def states_bytes(grid: Grid, states) -> bytes:
    header = ["x"] + [f"psi_{s.n}" for s in states]
    cols = [grid.x] + [s.psi.values for s in states]
    return _table(header, zip(*cols))


def scattering_bytes(results) -> bytes:
    return _table(
        ["energy", "abs_R", "abs_T", "arg_R"],
        ((r.energy, abs(r.R), abs(r.T), np.angle(r.R)) for r in results),
    )


def discriminant_bytes(energies, disc) -> bytes:
    return _table(["energy", "delta"], zip(energies, disc))


def zones_bytes(zone_list) -> bytes:
    return _table(["index", "E_lo", "E_hi"], ((z.index, z.e_lo, z.e_hi) for z in zone_list))


def zone_track_bytes(rows) -> bytes:
    return _table(
        ["dE", "edge_energy", "gap_width"],
        ((r["dE"], r["edge_energy"], r.get("tracked_gap", 0.0)) for r in rows),
    )


def lattice_spectrum_bytes(states) -> bytes:
    return _table(["m", "energy"], ((i, s.energy) for i, s in enumerate(states, start=1)))


def lattice_states_bytes(sites, states) -> bytes:
    header = ["n"] + [f"psi_{i}" for i in range(1, len(states) + 1)]
    cols = [sites] + [s.psi for s in states]
    return _table(header, zip(*cols))


def steplog_bytes(step_log) -> bytes:
    rows = []
    for i, entry in enumerate(step_log, start=1):
        kind = entry.get("kind", "?")
        params = ";".join(
            f"{k}={entry[k]}" for k in sorted(entry)
            if k not in ("kind", "denominator_min") and not isinstance(entry[k], (list, dict, tuple))
        )
        rows.append((str(i), kind, params, entry.get("denominator_min", float("nan"))))
    return _table(["step", "kind", "params", "denominator_min"], rows)
