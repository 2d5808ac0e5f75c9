"""Spectral sums, the Kac-Rice density, and the expected number of boundary zeros.

For a Gaussian wave ``V = sum a_j v_j`` the pair ``(V(t), V'(t))`` is a
centred Gaussian vector with covariance

    c11 = sum v_j^2,  c12 = sum v_j v_j',  c22 = sum v_j'^2,

and the expected number of zeros per unit arclength is

    K = sqrt(c11 c22 - c12^2) / (pi c11).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .domain import (DomainLike, Disk, Rectangle, SpectralWindow, TrigPolynomial, theta_grid)
from .ensemble import WaveModel

DEGENERATE_C11 = 1e-14
GRAM_TOLERANCE = 1e-9
_CHUNK = 256
_TRUNCATION_SIGMAS = 12.0


class EmptyWindow(ValueError):
    """The spectral window contains no eigenvalues."""


class DegenerateC11(ArithmeticError):
    """Every trace vanishes at the requested boundary point."""


class GramInconsistency(ArithmeticError):
    """``c11 c22 - c12^2`` is negative beyond floating-point noise."""


@dataclass(frozen=True)
class CijProfile:
    theta: np.ndarray
    weights: np.ndarray
    c11: np.ndarray
    c12: np.ndarray
    c22: np.ndarray
    n_modes: int
    boundary_length: float
    rule: str

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def gram_det(self) -> np.ndarray:
        return self.c11 * self.c22 - self.c12 ** 2

    @property
    def scale(self) -> float:
        """Largest ``c11`` on the grid; degeneracy is judged against it."""
        return float(self.c11.max()) if self.c11.size else 0.0

    def normalized_gram(self) -> np.ndarray:
        """``gram_det / (c11 c22)``, with 0 where either factor vanishes."""
        den = self.c11 * self.c22
        out = np.zeros_like(den)
        np.divide(self.gram_det, den, out=out, where=den > 0)
        return out

    def mean(self, values: np.ndarray) -> float:
        """Arclength average of ``values`` over the boundary."""
        return float(np.dot(self.weights, values) / self.boundary_length)

    def c12_noise_floor(self) -> np.ndarray:
        """Roundoff level of the computed ``c12`` at each node."""
        return self.n_modes * np.finfo(float).eps * np.sqrt(self.c11 * self.c22)


@dataclass(frozen=True)
class KacRiceResult:
    z: float
    density: np.ndarray
    theta: np.ndarray
    rule: str
    n: int


def _model(domain_or_model, window) -> WaveModel:
    if isinstance(domain_or_model, WaveModel):
        return domain_or_model
    return WaveModel(domain_or_model, window)


def compute_cij(domain: Union[DomainLike, WaveModel], window: Optional[SpectralWindow] = None,
                grid_n: int = 2048) -> CijProfile:
    """Sample ``c11, c12, c22`` on the half-offset grid with ``grid_n`` cells.

    The sums are accumulated mode by mode for each node, so the result does
    not depend on how the grid is split into chunks.
    """
    model = _model(domain, window)
    if model.size == 0:
        raise EmptyWindow(f"no eigenvalues in window {model.window!r}")
    theta, weights = theta_grid(model.domain, grid_n)
    c11 = np.empty(theta.size)
    c12 = np.empty(theta.size)
    c22 = np.empty(theta.size)
    for lo in range(0, theta.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        v, dv = model.basis.trace_matrix(theta[sl])
        c11[sl] = np.einsum("ij,ij->j", v, v)
        c12[sl] = np.einsum("ij,ij->j", v, dv)
        c22[sl] = np.einsum("ij,ij->j", dv, dv)
    rule = "per-side-midpoint" if isinstance(model.domain, Rectangle) else "periodic-midpoint"
    profile = CijProfile(theta, weights, c11, c12, c22, model.size,
                         model.boundary_length, rule)
    det = profile.gram_det
    bad = det < -GRAM_TOLERANCE * c11 * c22
    if bad.any():
        i = int(np.argmax(bad))
        raise GramInconsistency(f"gram determinant {det[i]:.3e} at theta={theta[i]:.6g}")
    return profile


def _check_c11(profile: CijProfile, index: int) -> float:
    c11 = float(profile.c11[index])
    if not c11 > DEGENERATE_C11 * profile.scale:
        raise DegenerateC11(f"c11={c11:.3e} at theta={profile.theta[index]:.6g}")
    return c11


def density(profile: CijProfile, index: int) -> float:
    """Kac-Rice density at grid node ``index``."""
    c11 = _check_c11(profile, index)
    det = max(0.0, float(profile.gram_det[index]))
    return math.sqrt(det) / (math.pi * c11)


def density_samples(profile: CijProfile) -> np.ndarray:
    """Kac-Rice density at every grid node."""
    if not (profile.c11 > DEGENERATE_C11 * profile.scale).all():
        i = int(np.argmin(profile.c11))
        raise DegenerateC11(f"c11={profile.c11[i]:.3e} at theta={profile.theta[i]:.6g}")
    return np.sqrt(np.maximum(profile.gram_det, 0.0)) / (math.pi * profile.c11)


def expected_zero_count(domain: Union[DomainLike, WaveModel],
                        window: Optional[SpectralWindow] = None,
                        grid_n: int = 2048) -> KacRiceResult:
    profile = compute_cij(domain, window, grid_n)
    k = density_samples(profile)
    return KacRiceResult(float(np.dot(profile.weights, k)), k, profile.theta,
                         profile.rule, profile.n)


def density_regularized(profile: CijProfile, index: int, eps: float) -> float:
    """Density of the smoothed counter with window half-width ``eps``.

    Computes ``E[1{|V| <= eps} |V'|] / (2 eps)`` as a two-dimensional
    Gaussian integral: adaptive quadrature over ``V`` in ``[-eps, eps]`` and,
    for each ``V``, over ``V'`` truncated at 12 conditional standard
    deviations.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    c11 = _check_c11(profile, index)
    c12 = float(profile.c12[index])
    det = max(0.0, float(profile.gram_det[index]))
    slope = c12 / c11
    sd = math.sqrt(det / c11)
    norm1 = 1.0 / math.sqrt(2.0 * math.pi * c11)

    def inner(v1: float) -> float:
        centre = slope * v1
        if sd == 0.0:
            return abs(centre)
        lo = centre - _TRUNCATION_SIGMAS * sd
        hi = centre + _TRUNCATION_SIGMAS * sd
        pdf = lambda v2: abs(v2) * math.exp(-0.5 * ((v2 - centre) / sd) ** 2)
        pts = [0.0] if lo < 0.0 < hi else None
        val, _ = integrate.quad(pdf, lo, hi, points=pts, epsabs=0.0, epsrel=1e-12, limit=200)
        return val / (sd * math.sqrt(2.0 * math.pi))

    def outer(v1: float) -> float:
        return norm1 * math.exp(-0.5 * v1 * v1 / c11) * inner(v1)

    val, _ = integrate.quad(outer, -eps, eps, epsabs=0.0, epsrel=1e-12, limit=200)
    return val / (2.0 * eps)


def asymptotic_prediction(domain: DomainLike, window: Optional[SpectralWindow]) -> float:
    """Leading-order expected zero count.

    ``ell * lam / (sqrt(6) pi)`` for long windows and ``ell * lam / (2 pi)``
    for short ones. For the synthetic trigonometric basis the exact value
    ``2 sqrt(sum m^2 / N)`` is returned, ``N`` counting the basis functions.
    """
    if isinstance(domain, TrigPolynomial):
        nfun = sum(2 if m > 0 else 1 for m in domain.orders)
        return 2.0 * math.sqrt(sum(2 * m * m for m in domain.orders) / nfun)
    ell = domain.boundary_length
    if window.kind == "long":
        return ell / (math.sqrt(6.0) * math.pi) * window.lam
    return ell / (2.0 * math.pi) * window.lam


# --------------------------------------------------------------------------
# convergence of the spectral sums
# --------------------------------------------------------------------------

WEYL_TARGETS = {
    "long": (("c11/lambda^4", 4, 1.0 / (8 * math.pi)),
             ("c22/lambda^6", 6, 1.0 / (48 * math.pi)),
             ("|c12|/lambda^5", 5, 0.0)),
    "short": (("c11/lambda^3", 3, 1.0 / (2 * math.pi)),
              ("c22/lambda^5", 5, 1.0 / (8 * math.pi)),
              ("|c12|/lambda^4", 4, 0.0)),
}


@dataclass(frozen=True)
class WeylRow:
    lam: float
    window: str
    ratio_name: str
    value: float
    target: float


def _abs_c12(profile: CijProfile) -> np.ndarray:
    a = np.abs(profile.c12)
    return np.where(a <= profile.c12_noise_floor(), 0.0, a)


def _window_ratios(domain: DomainLike, window: SpectralWindow, grid_n: int) -> List[float]:
    p = compute_cij(domain, window, grid_n)
    lam = window.lam
    out = []
    for (_, power, _), vals in zip(WEYL_TARGETS[window.kind], (p.c11, p.c22, _abs_c12(p))):
        out.append(p.mean(vals) / lam ** power)
    return out


def weyl_diagnostics(domain: DomainLike, lambdas: Iterable[float], grid_n: int = 256,
                     placements: int = 8, kinds: Sequence[str] = ("long", "short")) -> List[WeylRow]:
    """Boundary-averaged ``c_ij`` ratios against their limiting constants.

    Short-window ratios are averaged over ``placements`` windows
    ``[mu, mu+1]`` with ``mu = lam + i/placements``, each normalized by its
    own ``mu``. ``|c12|`` values at the roundoff floor are reported as 0.
    """
    rows = []
    for lam in lambdas:
        lam = float(lam)
        for kind in kinds:
            if kind == "long":
                ratios = _window_ratios(domain, SpectralWindow("long", lam), grid_n)
            else:
                acc = np.zeros(3)
                for i in range(placements):
                    acc += _window_ratios(domain, SpectralWindow("short", lam + i / placements), grid_n)
                ratios = list(acc / placements)
            for (name, _, target), value in zip(WEYL_TARGETS[kind], ratios):
                rows.append(WeylRow(lam, kind, name, float(value), target))
    return rows


def write_weyl_csv(path, rows: Sequence[WeylRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "window", "ratio_name", "value", "target"])
        for r in rows:
            w.writerow([f"{r.lam:.12g}", r.window, r.ratio_name, f"{r.value:.12g}", f"{r.target:.12g}"])

