"""Dirichlet spectra and boundary traces for explicit planar domains.

Two domains are supported: the disk (the main object of study) and the
rectangle (a diagnostic with corners). A third, synthetic basis
``TrigPolynomial`` provides the unit-amplitude traces ``cos(m t)``,
``sin(m t)`` on a circle of length ``2*pi`` and is used for exactness checks.

Boundary points are addressed by arclength ``theta`` in ``[0, ell)``, traced
counterclockwise. Traces are outward normal derivatives of the L2-normalized
eigenfunctions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import specfun

LAMBDA_MAX = 200.0


# --------------------------------------------------------------------------
# domains, windows, modes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def boundary_length(self) -> float:
        return 2.0 * math.pi * self.radius

    @property
    def inradius(self) -> float:
        return self.radius

    def describe(self) -> dict:
        return {"kind": "disk", "radius": self.radius}


@dataclass(frozen=True)
class Rectangle:
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("side lengths must be positive")

    @property
    def boundary_length(self) -> float:
        return 2.0 * (self.a + self.b)

    @property
    def inradius(self) -> float:
        return 0.5 * min(self.a, self.b)

    @property
    def corners(self) -> np.ndarray:
        """Arclength positions of the four corners, starting with (0, 0)."""
        a, b = self.a, self.b
        return np.array([0.0, a, a + b, 2 * a + b])

    def describe(self) -> dict:
        return {"kind": "rectangle", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class TrigPolynomial:
    """Synthetic basis ``{cos(m t), sin(m t)}`` with unit amplitudes on ``[0, 2*pi)``.

    Order 0 contributes the constant only. Not a Dirichlet domain: it has no
    interior and ignores spectral windows.
    """

    orders: Tuple[int, ...] = (1,)

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        if not self.orders or min(self.orders) < 0:
            raise ValueError("orders must be a nonempty sequence of integers >= 0")

    @property
    def boundary_length(self) -> float:
        return 2.0 * math.pi

    def describe(self) -> dict:
        return {"kind": "trig", "orders": list(self.orders)}


DomainLike = Union[Disk, Rectangle, TrigPolynomial]


@dataclass(frozen=True)
class SpectralWindow:
    """``long`` selects eigenvalues in ``[0, lam]``, ``short`` those in ``[lam, lam+1]``.

    Both ends are closed.
    """

    kind: str
    lam: float

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("long", "short"):
            raise ValueError(f"window kind must be 'long' or 'short', got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not self.lam > 0:
            raise ValueError("window lambda must be positive")

    @property
    def bounds(self) -> Tuple[float, float]:
        if self.kind == "long":
            return 0.0, self.lam
        return self.lam, self.lam + 1.0

    def contains(self, eigenvalue: float) -> bool:
        lo, hi = self.bounds
        return lo <= eigenvalue <= hi

    def describe(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam}


@dataclass(frozen=True)
class EigenMode:
    """One Dirichlet eigenpair.

    ``m, k`` are the disk quantum numbers (angular order, radial index) or the
    rectangle's ``p, q``. ``parity`` is ``"cos"``/``"sin"`` on the disk and
    ``None`` on the rectangle. ``eigenvalue`` is the frequency, i.e. the square
    root of the Laplace eigenvalue.
    """

    id: int
    eigenvalue: float
    m: int
    k: int
    parity: Optional[str]
    normalization: float


# --------------------------------------------------------------------------
# enumeration
# --------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _disk_spectrum(domain: Disk, hi: float) -> Tuple[EigenMode, ...]:
    R = domain.radius
    zeros = specfun.default_table().all_upto(hi * R)
    if not zeros:
        return ()
    orders = np.concatenate([np.full(len(js), m, dtype=np.int64) for m, js in zeros.items()])
    ks = np.concatenate([np.arange(1, len(js) + 1) for js in zeros.values()])
    js = np.concatenate(list(zeros.values()))
    tail = np.abs(specfun.bessel_j_each(orders + 1, js))
    norms = np.where(orders == 0, 1.0 / math.sqrt(math.pi), math.sqrt(2.0 / math.pi)) / (R * tail)
    raw = []
    for m, k, j, n in zip(orders.tolist(), ks.tolist(), js.tolist(), norms.tolist()):
        raw.append((j / R, m, k, "cos", n))
        if m > 0:
            raw.append((j / R, m, k, "sin", n))
    raw.sort(key=lambda r: r[:4])
    return tuple(EigenMode(i, lam, m, k, par, n) for i, (lam, m, k, par, n) in enumerate(raw))


@lru_cache(maxsize=32)
def _rectangle_spectrum(domain: Rectangle, hi: float) -> Tuple[EigenMode, ...]:
    a, b = domain.a, domain.b
    norm = 2.0 / math.sqrt(a * b)
    raw = []
    pmax = int(math.floor(hi * a / math.pi)) + 1
    for p in range(1, pmax + 1):
        for q in range(1, int(math.floor(hi * b / math.pi)) + 2):
            lam = math.pi * math.sqrt((p / a) ** 2 + (q / b) ** 2)
            if lam <= hi:
                raw.append((lam, p, q))
    raw.sort()
    return tuple(EigenMode(i, lam, p, q, None, norm) for i, (lam, p, q) in enumerate(raw))


def _trig_modes(domain: TrigPolynomial) -> List[EigenMode]:
    out = []
    for m in domain.orders:
        out.append(EigenMode(len(out), float(m), m, 1, "cos", 1.0))
        if m > 0:
            out.append(EigenMode(len(out), float(m), m, 1, "sin", 1.0))
    return out


def enumerate_modes(domain: DomainLike, window: Optional[SpectralWindow],
                    lambda_max: float = LAMBDA_MAX) -> List[EigenMode]:
    """All modes with eigenvalue inside ``window``, sorted by ``(lambda, m, k, parity)``.

    Ids are ranks in the full spectrum, so a mode keeps its id in every window.
    The synthetic trigonometric basis ignores the window.
    """
    if isinstance(domain, TrigPolynomial):
        return _trig_modes(domain)
    if window is None:
        raise ValueError("a spectral window is required for Dirichlet domains")
    if window.lam > lambda_max:
        raise ValueError(f"window lambda {window.lam} exceeds lambda_max {lambda_max}")
    lo, hi = window.bounds
    if isinstance(domain, Disk):
        spectrum = _disk_spectrum(domain, float(hi))
    elif isinstance(domain, Rectangle):
        spectrum = _rectangle_spectrum(domain, float(hi))
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    return [md for md in spectrum if lo <= md.eigenvalue <= hi]


def mode_count(domain: DomainLike, window: Optional[SpectralWindow]) -> int:
    return len(enumerate_modes(domain, window))


def export_modes_csv(path, modes: Sequence[EigenMode]) -> None:
    """Write the mode table as ``id,lambda,m_or_p,k_or_q,parity,normalization``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "lambda", "m_or_p", "k_or_q", "parity", "normalization"])
        for md in modes:
            w.writerow([md.id, f"{md.eigenvalue:.12g}", md.m, md.k, md.parity or "",
                        f"{md.normalization:.12g}"])


# --------------------------------------------------------------------------
# boundary geometry
# --------------------------------------------------------------------------

def _reduce(domain: DomainLike, theta):
    return np.mod(np.asarray(theta, dtype=float), domain.boundary_length)


def _rect_sides(domain: Rectangle, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Side index (0 bottom, 1 right, 2 top, 3 left) and arclength into that side."""
    c = domain.corners
    side = np.clip(np.searchsorted(c, theta, side="right") - 1, 0, 3)
    return side, theta - c[side]


def boundary_point(domain: DomainLike, theta):
    """Boundary point at arclength ``theta``; returns an array of shape ``theta.shape + (2,)``."""
    t = _reduce(domain, theta)
    if isinstance(domain, Disk):
        R = domain.radius
        return np.stack([R * np.cos(t / R), R * np.sin(t / R)], axis=-1)
    if isinstance(domain, Rectangle):
        a, b = domain.a, domain.b
        side, u = _rect_sides(domain, t)
        x = np.choose(side, [u, np.full_like(u, a), a - u, np.zeros_like(u)])
        y = np.choose(side, [np.zeros_like(u), u, np.full_like(u, b), b - u])
        return np.stack([x, y], axis=-1)
    raise TypeError("the synthetic trigonometric basis has no planar boundary")


def outward_normal(domain: DomainLike, theta):
    t = _reduce(domain, theta)
    if isinstance(domain, Disk):
        R = domain.radius
        return np.stack([np.cos(t / R), np.sin(t / R)], axis=-1)
    if isinstance(domain, Rectangle):
        side, _ = _rect_sides(domain, t)
        nx = np.array([0.0, 1.0, 0.0, -1.0])[side]
        ny = np.array([-1.0, 0.0, 1.0, 0.0])[side]
        return np.stack([nx, ny], axis=-1)
    raise TypeError("the synthetic trigonometric basis has no planar boundary")


def offset_point(domain: DomainLike, theta, delta: float):
    """Point at distance ``delta`` inside the boundary, along the inward normal."""
    return boundary_point(domain, theta) - delta * outward_normal(domain, theta)


def theta_grid(domain: DomainLike, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights offset by half a cell.

    On the rectangle each side gets its own midpoint rule, so no node falls on
    a corner.
    """
    if n < 1:
        raise ValueError("grid size must be positive")
    ell = domain.boundary_length
    if not isinstance(domain, Rectangle):
        h = ell / n
        return (np.arange(n) + 0.5) * h, np.full(n, h)
    lengths = [domain.a, domain.b, domain.a, domain.b]
    counts = [max(1, int(round(n * L / ell))) for L in lengths]
    nodes, weights = [], []
    for c0, L, cnt in zip(domain.corners, lengths, counts):
        h = L / cnt
        nodes.append(c0 + (np.arange(cnt) + 0.5) * h)
        weights.append(np.full(cnt, h))
    return np.concatenate(nodes), np.concatenate(weights)


# --------------------------------------------------------------------------
# per-mode closed forms, vectorized over modes
# --------------------------------------------------------------------------

class FourierBasis:
    """Traces of the form ``amp * cos(m t / R)`` / ``amp * sin(m t / R)``.

    Covers the disk and the synthetic trigonometric basis.
    """

    def __init__(self, domain: Union[Disk, TrigPolynomial], modes: Sequence[EigenMode]):
        self.domain = domain
        self.modes = tuple(modes)
        self.length = domain.boundary_length
        self.scale = 1.0 / domain.radius if isinstance(domain, Disk) else 1.0
        self.orders = np.array([md.m for md in self.modes], dtype=np.int64)
        self.is_sin = np.array([md.parity == "sin" for md in self.modes], dtype=bool)
        self.max_order = int(self.orders.max()) if self.modes else 0
        if isinstance(domain, Disk):
            R = domain.radius
            j = np.array([md.eigenvalue * R for md in self.modes])
            jp = np.array([specfun.bessel_j_prime(md.m, md.eigenvalue * R) for md in self.modes])
            norm = np.array([md.normalization for md in self.modes])
            self.amplitude = norm * jp * j / R
            self.zeros = j
        else:
            self.amplitude = np.ones(len(self.modes))
            self.zeros = None

    def trace_matrix(self, theta) -> Tuple[np.ndarray, np.ndarray]:
        """Per-mode traces and their theta-derivatives, each of shape ``(N, len(theta))``."""
        t = np.mod(np.atleast_1d(np.asarray(theta, dtype=float)), self.length)
        w = (self.orders * self.scale)[:, None]
        arg = w * t[None, :]
        c, s = np.cos(arg), np.sin(arg)
        amp = self.amplitude[:, None]
        sin_rows = self.is_sin[:, None]
        v = amp * np.where(sin_rows, s, c)
        dv = amp * w * np.where(sin_rows, c, -s)
        return v, dv

    def _fold(self, weights: np.ndarray) -> "FourierSeries":
        n = self.max_order + 1
        cos_c = np.bincount(self.orders[~self.is_sin], weights=weights[~self.is_sin], minlength=n)
        sin_c = np.bincount(self.orders[self.is_sin], weights=weights[self.is_sin], minlength=n)
        return FourierSeries(cos_c, sin_c, self.scale, self.length)

    def reduce(self, coefficients: np.ndarray) -> "FourierSeries":
        """Collapse ``sum a_j v_j`` into one trigonometric polynomial."""
        return self._fold(np.asarray(coefficients, dtype=float) * self.amplitude)

    def eigen_matrix(self, points) -> np.ndarray:
        """Per-mode eigenfunction values at ``points`` (shape ``(P, 2)``), shape ``(N, P)``."""
        if not isinstance(self.domain, Disk):
            raise TypeError("the synthetic trigonometric basis has no interior")
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        R = self.domain.radius
        r = np.hypot(pts[:, 0], pts[:, 1])
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        radial = specfun.bessel_j_each(self.orders[:, None], np.outer(self.zeros, r / R))
        arg = self.orders[:, None] * ang[None, :]
        angular = np.where(self.is_sin[:, None], np.sin(arg), np.cos(arg))
        norm = np.array([md.normalization for md in self.modes])[:, None]
        return norm * radial * angular

    def offset_reduce(self, coefficients: np.ndarray, delta: float) -> "FourierSeries":
        """Interior values on the circle of radius ``R - delta``, as a function of boundary arclength."""
        if not isinstance(self.domain, Disk):
            raise TypeError("the synthetic trigonometric basis has no interior")
        R = self.domain.radius
        radial = specfun.bessel_j_each(self.orders, self.zeros * (R - delta) / R)
        norm = np.array([md.normalization for md in self.modes])
        return self._fold(np.asarray(coefficients, dtype=float) * norm * radial)


class RectangleBasis:
    """Closed-form traces on the four sides of ``[0, a] x [0, b]``.

    On each side a trace is ``factor * sin(freq * x)`` with ``x`` the running
    coordinate along that side (``x`` decreases with arclength on the top and
    left sides).
    """

    def __init__(self, domain: Rectangle, modes: Sequence[EigenMode]):
        self.domain = domain
        self.modes = tuple(modes)
        self.length = domain.boundary_length
        a, b = domain.a, domain.b
        p = np.array([md.m for md in self.modes], dtype=float)
        q = np.array([md.k for md in self.modes], dtype=float)
        norm = np.array([md.normalization for md in self.modes])
        self.p, self.q, self.norm = p, q, norm
        fp, fq = p * math.pi / a, q * math.pi / b
        self.freq = [fp, fq, fp, fq]
        self.factor = [-norm * fq, norm * fp * (-1.0) ** p, norm * fq * (-1.0) ** q, -norm * fp]
        self.sign = np.array([1.0, 1.0, -1.0, -1.0])
        self.span = np.array([0.0, 0.0, a, b])
        self.max_p = int(p.max()) if p.size else 0
        self.max_q = int(q.max()) if q.size else 0

    def _coords(self, theta):
        t = np.mod(np.atleast_1d(np.asarray(theta, dtype=float)), self.length)
        side, u = _rect_sides(self.domain, t)
        x = self.span[side] + self.sign[side] * u
        return side, x

    def trace_matrix(self, theta) -> Tuple[np.ndarray, np.ndarray]:
        side, x = self._coords(theta)
        n = len(self.modes)
        v = np.empty((n, x.size))
        dv = np.empty((n, x.size))
        for s in range(4):
            sel = side == s
            if not sel.any():
                continue
            arg = self.freq[s][:, None] * x[sel][None, :]
            f = self.factor[s][:, None]
            v[:, sel] = f * np.sin(arg)
            dv[:, sel] = self.sign[s] * f * self.freq[s][:, None] * np.cos(arg)
        return v, dv

    def reduce(self, coefficients: np.ndarray) -> "SideSineSeries":
        a = np.asarray(coefficients, dtype=float)
        pi_, qi_ = self.p.astype(np.int64), self.q.astype(np.int64)
        sides = []
        for s, (idx, nmax, L) in enumerate([(pi_, self.max_p, self.domain.a),
                                            (qi_, self.max_q, self.domain.b),
                                            (pi_, self.max_p, self.domain.a),
                                            (qi_, self.max_q, self.domain.b)]):
            c = np.bincount(idx, weights=a * self.factor[s], minlength=nmax + 1)
            sides.append((c, math.pi / L))
        return SideSineSeries(self.domain, sides, self.sign, self.span)

    def eigen_matrix(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a, b = self.domain.a, self.domain.b
        sx = np.sin(np.outer(self.p * math.pi / a, pts[:, 0]))
        sy = np.sin(np.outer(self.q * math.pi / b, pts[:, 1]))
        return self.norm[:, None] * sx * sy


def mode_basis(domain: DomainLike, modes: Sequence[EigenMode]):
    if isinstance(domain, Rectangle):
        return RectangleBasis(domain, modes)
    return FourierBasis(domain, modes)


# --------------------------------------------------------------------------
# reduced series: one realization as a cheap periodic function
# --------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _fourier_grid_table(n: int, length: float, nfreq: int, scale: float):
    t = (np.arange(n) + 0.5) * (length / n)
    arg = np.multiply.outer(t, np.arange(nfreq) * scale)
    c, s = np.cos(arg), np.sin(arg)
    c.flags.writeable = False
    s.flags.writeable = False
    return t, c, s


class FourierSeries:
    """``sum_m c_m cos(m w t) + s_m sin(m w t)`` on a circle of length ``length``."""

    def __init__(self, cos_c, sin_c, scale: float, length: float):
        self.cos_c = np.asarray(cos_c, dtype=float)
        self.sin_c = np.asarray(sin_c, dtype=float)
        self.scale = scale
        self.length = length
        self.freqs = np.arange(self.cos_c.size) * scale

    def _args(self, theta):
        t = np.mod(np.asarray(theta, dtype=float), self.length)
        return np.multiply.outer(t, self.freqs)

    def value(self, theta):
        arg = self._args(theta)
        return np.cos(arg) @ self.cos_c + np.sin(arg) @ self.sin_c

    def on_grid(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes of the half-offset grid with ``n`` cells and the values there."""
        t, c, s = _fourier_grid_table(n, self.length, self.cos_c.size, self.scale)
        return t, c @ self.cos_c + s @ self.sin_c

    def derivative(self, theta):
        arg = self._args(theta)
        return (np.cos(arg) @ (self.freqs * self.sin_c)) - (np.sin(arg) @ (self.freqs * self.cos_c))

    def second_derivative(self, theta):
        arg = self._args(theta)
        f2 = self.freqs ** 2
        return -(np.cos(arg) @ (f2 * self.cos_c)) - (np.sin(arg) @ (f2 * self.sin_c))


class SideSineSeries:
    """Piecewise sine series along the four sides of a rectangle."""

    def __init__(self, domain: Rectangle, sides, sign, span):
        self.domain = domain
        self.length = domain.boundary_length
        self.sides = sides
        self.sign = sign
        self.span = span

    def _eval(self, theta, order: int):
        t = np.mod(np.asarray(theta, dtype=float), self.length)
        flat = np.atleast_1d(t).ravel()
        side, u = _rect_sides(self.domain, flat)
        x = self.span[side] + self.sign[side] * u
        out = np.empty(flat.size)
        for s, (c, base) in enumerate(self.sides):
            sel = side == s
            if not sel.any():
                continue
            f = np.arange(c.size) * base
            arg = np.multiply.outer(x[sel], f)
            if order == 0:
                out[sel] = np.sin(arg) @ c
            elif order == 1:
                out[sel] = self.sign[s] * (np.cos(arg) @ (f * c))
            else:
                out[sel] = -(np.sin(arg) @ (f * f * c))
        return out.reshape(np.shape(t))

    def value(self, theta):
        return self._eval(theta, 0)

    def on_grid(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        t, _ = theta_grid(self.domain, n)
        return t, self._eval(t, 0)

    def derivative(self, theta):
        return self._eval(theta, 1)

    def second_derivative(self, theta):
        return self._eval(theta, 2)


# --------------------------------------------------------------------------
# single-mode convenience API
# --------------------------------------------------------------------------

def _single(domain, mode):
    return mode_basis(domain, [mode])


def trace_value(mode: EigenMode, domain: DomainLike, theta):
    """Outward normal derivative of the eigenfunction at boundary arclength ``theta``."""
    v, _ = _single(domain, mode).trace_matrix(theta)
    return float(v[0, 0]) if np.ndim(theta) == 0 else v[0]


def trace_derivative(mode: EigenMode, domain: DomainLike, theta):
    """Arclength derivative of :func:`trace_value` (one-sided at rectangle corners)."""
    _, dv = _single(domain, mode).trace_matrix(theta)
    return float(dv[0, 0]) if np.ndim(theta) == 0 else dv[0]


def eigenfunction_value(mode: EigenMode, domain: DomainLike, point):
    """Eigenfunction value at ``point`` (shape ``(2,)`` or ``(P, 2)``) in the closed domain."""
    pts = np.asarray(point, dtype=float)
    vals = _single(domain, mode).eigen_matrix(pts.reshape(-1, 2))[0]
    return float(vals[0]) if pts.ndim == 1 else vals
