"""Zeros of one realization along the boundary.

Roots are bracketed by sign changes on a periodic grid (``V >= 0`` counts as
positive), refined by bisection, and the count is confirmed on a grid twice
as fine. A count that cannot be stabilized raises :class:`UnresolvedZeros`
so the caller can record the trial as excluded.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from .domain import Disk, Rectangle, offset_point, theta_grid
from .ensemble import RandomWave

SUSPICIOUS_LEVEL = 1e-10
LOCAL_REFINEMENT = 16
DEFAULT_REFINE_TOL = 1e-12
# default grid relative to the sampling floor; near-tangent root pairs need
# roughly 64 nodes per oscillation before grid doubling stops changing counts
DEFAULT_OVERSAMPLING = 8


class UnresolvedZeros(RuntimeError):
    """Sign-change counts kept changing under grid refinement."""

    def __init__(self, counts):
        self.counts = tuple(counts)
        super().__init__(f"zero count not stable under refinement: {self.counts}")


@dataclass(frozen=True)
class PeriodicFunction:
    """A real function on a circle of circumference ``length``.

    ``grid(n)`` returns nodes and values on an ``n``-cell grid that avoids
    any points where the function is not smooth. ``frequency`` bounds the
    oscillation rate and sets the scale for derivative thresholds.
    """

    length: float
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    grid: Optional[Callable[[int], Tuple[np.ndarray, np.ndarray]]] = None
    frequency: float = 1.0
    min_grid: int = 8

    def on_grid(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        if self.grid is not None:
            return self.grid(n)
        t = (np.arange(n) + 0.5) * (self.length / n)
        return t, np.asarray(self.value(t), dtype=float)

    def slope(self, theta: np.ndarray) -> np.ndarray:
        if self.derivative is not None:
            return np.asarray(self.derivative(theta), dtype=float)
        h = 1e-6 * self.length
        return (np.asarray(self.value(theta + h)) - np.asarray(self.value(theta - h))) / (2 * h)


def as_periodic(wave: RandomWave) -> PeriodicFunction:
    return PeriodicFunction(
        length=wave.boundary_length,
        value=wave.trace_at,
        derivative=wave.trace_derivative_at,
        grid=wave.trace_on_grid,
        frequency=max(wave.model.top_frequency, 2 * math.pi / wave.boundary_length),
        min_grid=wave.model.min_grid(),
    )


def _periodic(f) -> PeriodicFunction:
    return f if isinstance(f, PeriodicFunction) else as_periodic(f)


@dataclass(frozen=True)
class ZeroSet:
    count: int
    locations: np.ndarray
    derivatives: np.ndarray
    condition: np.ndarray
    suspicious: bool
    grid_n: int
    sup_norm: float


def _brackets(nodes: np.ndarray, values: np.ndarray, length: float):
    pos = values >= 0
    nxt = np.roll(pos, -1)
    idx = np.nonzero(pos != nxt)[0]
    lo = nodes[idx]
    hi = np.where(idx == nodes.size - 1, nodes[0] + length, nodes[(idx + 1) % nodes.size])
    return idx, lo, hi, pos[idx]


def _sign_changes(values: np.ndarray) -> int:
    pos = values >= 0
    return int(np.count_nonzero(pos != np.roll(pos, -1)))


def _bisect(fn, lo: np.ndarray, hi: np.ndarray, lo_positive: np.ndarray, tol: float) -> np.ndarray:
    lo, hi = lo.copy(), hi.copy()
    if lo.size == 0:
        return lo
    steps = int(math.ceil(math.log2(max(float(np.max(hi - lo)), tol) / tol))) + 1
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        same = (np.asarray(fn(mid)) >= 0) == lo_positive
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    # one secant step inside the final bracket; kept only if it stays there
    flo = np.asarray(fn(lo), dtype=float)
    fhi = np.asarray(fn(hi), dtype=float)
    den = fhi - flo
    with np.errstate(divide="ignore", invalid="ignore"):
        sec = lo - flo * (hi - lo) / den
    ok = np.isfinite(sec) & (sec >= lo) & (sec <= hi)
    return np.where(ok, sec, 0.5 * (lo + hi))


def _locate(f: PeriodicFunction, n: int, tol: float):
    nodes, values = f.on_grid(n)
    idx, lo, hi, lo_pos = _brackets(nodes, values, f.length)
    roots = _bisect(f.value, lo, hi, lo_pos, tol)
    return nodes, values, idx, roots


def _local_rescan(f: PeriodicFunction, nodes: np.ndarray, cell: int, tol: float) -> np.ndarray:
    """Roots in the cells around ``cell`` found on a grid ``LOCAL_REFINEMENT`` times finer."""
    ext = np.concatenate([nodes[-1:] - f.length, nodes, nodes[:2] + f.length])
    start, stop = ext[cell], ext[cell + 3]
    t = np.linspace(start, stop, 3 * LOCAL_REFINEMENT + 1)
    v = np.asarray(f.value(t), dtype=float)
    pos = v >= 0
    k = np.nonzero(pos[:-1] != pos[1:])[0]
    return _bisect(f.value, t[k], t[k + 1], pos[k], tol)


def count_zeros(wave, grid_n: Optional[int] = None, refine_tol: Optional[float] = None) -> ZeroSet:
    """Count and locate the sign changes of a boundary trace.

    ``wave`` is a :class:`RandomWave` or a :class:`PeriodicFunction`.
    ``grid_n`` defaults to ``DEFAULT_OVERSAMPLING`` times the sampling
    floor and ``refine_tol`` to ``1e-12`` times the boundary length.
    """
    f = _periodic(wave)
    n = DEFAULT_OVERSAMPLING * f.min_grid if grid_n is None else int(grid_n)
    if n < f.min_grid:
        raise ValueError(f"grid_n={n} is below the sampling floor {f.min_grid}")
    tol = DEFAULT_REFINE_TOL * f.length if refine_tol is None else float(refine_tol)

    _, values = f.on_grid(n)
    c1 = _sign_changes(values)
    _, v2 = f.on_grid(2 * n)
    c2 = _sign_changes(v2)
    if c1 != c2:
        _, v4 = f.on_grid(4 * n)
        c4 = _sign_changes(v4)
        if c4 != c2:
            raise UnresolvedZeros((c1, c2, c4))
        n = 4 * n

    nodes, values, idx, roots = _locate(f, n, tol)
    sup = float(np.max(np.abs(values))) if values.size else 0.0
    suspicious = False
    if roots.size:
        v_at = np.abs(np.asarray(f.value(roots), dtype=float))
        d_at = np.abs(f.slope(roots))
        flat = (v_at <= SUSPICIOUS_LEVEL * sup) & (d_at <= SUSPICIOUS_LEVEL * sup * f.frequency)
        if flat.any():
            suspicious = True
            keep = np.ones(roots.size, dtype=bool)
            extra = []
            for cell in np.unique(idx[flat]):
                near = np.isin(idx, [(cell - 1) % nodes.size, cell, (cell + 1) % nodes.size])
                keep &= ~near
                extra.append(_local_rescan(f, nodes, int(cell), tol))
            roots = np.concatenate([roots[keep]] + extra)

    roots = np.mod(roots, f.length)
    roots[f.length - roots <= tol] = 0.0
    roots = np.unique(roots)
    deriv = f.slope(roots) if roots.size else np.zeros(0)
    cond = np.abs(deriv) / sup if sup > 0 else np.zeros_like(deriv)
    return ZeroSet(int(roots.size), roots, deriv, cond, suspicious, n, sup)


# --------------------------------------------------------------------------
# smoothed counter
# --------------------------------------------------------------------------

def _critical_points(f: PeriodicFunction, nodes: np.ndarray, tol: float) -> np.ndarray:
    d = f.slope(nodes)
    idx, lo, hi, lo_pos = _brackets(nodes, d, f.length)
    return _bisect(f.slope, lo, hi, lo_pos, tol)


def regularized_count(wave, eps: float, quad_n: Optional[int] = None) -> float:
    """``(1/2 eps) * integral of 1{|V| <= eps} |V'|`` over the boundary.

    Between consecutive grid nodes and critical points ``V`` is monotone, and
    on such a panel the integral equals the change of ``clip(V, -eps, eps)``.
    Summing those changes evaluates the integral exactly, including the
    panels cut by the indicator's jumps at ``|V| = eps``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    f = _periodic(wave)
    n = 2 * f.min_grid if quad_n is None else int(quad_n)
    nodes, _ = f.on_grid(n)
    crit = _critical_points(f, nodes, DEFAULT_REFINE_TOL * f.length)
    t = np.sort(np.concatenate([nodes, np.mod(crit, f.length)]))
    t = np.append(t, t[0] + f.length)
    clipped = np.clip(np.asarray(f.value(t), dtype=float), -eps, eps)
    return float(np.sum(np.abs(np.diff(clipped))) / (2.0 * eps))


# --------------------------------------------------------------------------
# boundary zeros versus nodal lines just inside
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HopfResult:
    boundary_count: int
    interior_count: int
    match: bool


def offset_function(wave: RandomWave, delta: float) -> PeriodicFunction:
    """Interior values of the wave along the curve at depth ``delta``, by boundary arclength."""
    domain = wave.domain
    if isinstance(domain, Disk):
        series = wave.offset_series(delta)
        return PeriodicFunction(wave.boundary_length, series.value, series.derivative,
                                series.on_grid, wave.model.top_frequency, wave.model.min_grid())

    def value(theta):
        return wave.interior_value(offset_point(domain, np.atleast_1d(theta), delta))

    def grid(n):
        t, _ = theta_grid(domain, n)
        return t, value(t)

    return PeriodicFunction(wave.boundary_length, value, None, grid,
                            wave.model.top_frequency, wave.model.min_grid())


def hopf_check(wave: RandomWave, delta: float, grid_n: Optional[int] = None) -> HopfResult:
    """Compare boundary zeros of the trace with sign changes just inside the boundary."""
    domain = wave.domain
    if not isinstance(domain, (Disk, Rectangle)):
        raise TypeError("hopf_check needs a planar domain")
    if not 0 < delta <= 0.01 * domain.inradius:
        raise ValueError(f"offset {delta} must lie in (0, {0.01 * domain.inradius}]")
    boundary = count_zeros(wave, grid_n).count
    interior = count_zeros(offset_function(wave, delta), grid_n).count
    return HopfResult(boundary, interior, boundary == interior)


def write_zero_dump(path, records: Iterable[Tuple[int, ZeroSet]]) -> None:
    """Write ``trial,root_index,theta,deriv_at_root`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "root_index", "theta", "deriv_at_root"])
        for trial, zs in records:
            for i, (t, d) in enumerate(zip(zs.locations, zs.derivatives)):
                w.writerow([trial, i, f"{t:.12g}", f"{d:.12g}"])
