"""Bessel functions of the first kind of integer order and their positive zeros.

Evaluation uses three representations:

* power series for ``x <= 1``,
* Miller's backward recurrence, normalized with ``J_0 + 2 sum J_2k = 1``,
  for moderate arguments,
* the Hankel asymptotic expansion for ``x >= max(1000, m**2)``.

All routines accept numpy arrays for ``x`` and are pure functions of their
arguments, so results are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Tuple

import numpy as np

MAX_ORDER = 1000
MAX_ARG = 1.0e5

_SERIES_X = 1.0
_ASYMPTOTIC_X = 1000.0
_RESCALE = 1.0e250
_START_BUCKET = 16


class RangeError(ValueError):
    """Order or argument outside the supported range."""


class ConvergenceError(RuntimeError):
    """Zero refinement failed to converge."""


def _check_order(m: int) -> int:
    if isinstance(m, (bool, np.bool_)) or int(m) != m:
        raise RangeError(f"order must be an integer, got {m!r}")
    m = int(m)
    if m < 0 or m > MAX_ORDER:
        raise RangeError(f"order {m} outside [0, {MAX_ORDER}]")
    return m


def _check_args(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise RangeError("argument must be finite")
    if np.any(x < 0) or np.any(x > MAX_ARG):
        raise RangeError(f"argument outside [0, {MAX_ARG:g}]")
    return x


def _series(n: int, x: np.ndarray) -> np.ndarray:
    # x <= 1: terms shrink by at least x^2/4 per step, no cancellation
    half = 0.5 * x
    with np.errstate(divide="ignore", under="ignore"):
        log_lead = n * np.log(np.where(half > 0, half, 1.0)) - math.lgamma(n + 1)
        term = np.where(half > 0, np.exp(log_lead), 1.0 if n == 0 else 0.0)
    total = term.copy()
    q = -half * half
    for k in range(1, 40):
        term = term * q / (k * (n + k))
        total += term
        if not np.any(np.abs(term) > 1e-18 * np.abs(total)):
            break
    return total


def _miller_start(nmax: int, x: float) -> int:
    k = max(nmax, _START_BUCKET * math.ceil(x / _START_BUCKET))
    start = k + int(math.sqrt(160.0 * k)) + 16
    return start + (start % 2)


def _miller(nmax: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_nmax at every entry of the 1-D array ``x`` (all ``x > 0``).

    Each entry starts its recurrence at its own index; entries that have not
    started yet stay exactly zero, so a value never depends on its batch.
    """
    starts = np.array([_miller_start(nmax, float(v)) for v in x], dtype=np.int64)
    begin = {int(n): np.flatnonzero(starts == n) for n in np.unique(starts)}
    out = np.zeros((nmax + 1, x.size))
    two_over_x = 2.0 / x
    jp1 = np.zeros_like(x)
    j = np.zeros_like(x)
    norm = np.zeros_like(x)
    for n in range(int(starts.max()) if x.size else 0, 0, -1):
        idx = begin.get(n)
        if idx is not None:
            j[idx] = 1.0
        jm1 = (n * two_over_x) * j - jp1
        jp1 = j
        j = jm1
        order = n - 1
        if order <= nmax:
            out[order] = j
        if order > 0 and order % 2 == 0:
            norm += 2.0 * j
        big = np.abs(j) > _RESCALE
        if big.any():
            j[big] /= _RESCALE
            jp1[big] /= _RESCALE
            norm[big] /= _RESCALE
            out[:, big] /= _RESCALE
    norm += j
    return out / norm


def _hankel(m: int, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * m * m
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k % 4 == 1:
            q += term
        elif k % 4 == 2:
            p -= term
        elif k % 4 == 3:
            q -= term
        else:
            p += term
        if np.all(np.abs(term) < 1e-17):
            break
    chi = x - (0.5 * m + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j_orders(nmax: int, x) -> np.ndarray:
    """Return ``J_0(x), ..., J_nmax(x)`` stacked along a new leading axis."""
    nmax = _check_order(nmax)
    x = _check_args(x)
    flat = x.ravel()
    out = np.empty((nmax + 1, flat.size))
    small = flat <= _SERIES_X
    if small.any():
        for n in range(nmax + 1):
            out[n, small] = _series(n, flat[small])
    if (~small).any():
        out[:, ~small] = _miller(nmax, flat[~small])
    return out.reshape((nmax + 1,) + x.shape)


def _bessel_j(m: int, x: np.ndarray) -> np.ndarray:
    flat = x.ravel()
    out = np.empty(flat.size)
    small = flat <= _SERIES_X
    asym = flat >= max(_ASYMPTOTIC_X, float(m * m))
    mid = ~(small | asym)
    if small.any():
        out[small] = _series(m, flat[small])
    if asym.any():
        out[asym] = _hankel(m, flat[asym])
    if mid.any():
        out[mid] = _miller(m, flat[mid])[m]
    return out.reshape(x.shape)


def bessel_j(m: int, x):
    """Bessel function ``J_m(x)`` for integer ``m >= 0`` and ``x >= 0``.

    Absolute error is below 1e-12 for ``m <= 200`` and ``x <= 200``.
    Scalars in give a float back; arrays give an array of the same shape.
    """
    m = _check_order(m)
    arr = _check_args(x)
    out = _bessel_j(m, arr)
    return float(out) if np.ndim(x) == 0 else out


def bessel_j_prime(m: int, x):
    """Derivative ``J_m'(x)``, from ``J_0' = -J_1`` and the half-difference rule."""
    m = _check_order(m)
    if m + 1 > MAX_ORDER:
        raise RangeError(f"order {m} has no derivative within supported range")
    arr = _check_args(x)
    if m == 0:
        out = -_bessel_j(1, arr)
    else:
        out = 0.5 * (_bessel_j(m - 1, arr) - _bessel_j(m + 1, arr))
    return float(out) if np.ndim(x) == 0 else out


# --------------------------------------------------------------------------
# zeros
# --------------------------------------------------------------------------

_SCAN_STEP = 1.0   # zeros of J_m are more than 2.4 apart, so one per cell at most
_SCAN_CHUNK = 64
_MAX_NEWTON = 200


def mcmahon_guess(m: int, k: int) -> float:
    """McMahon's large-k expansion for ``j_{m,k}``."""
    beta = (k + 0.5 * m - 0.25) * math.pi
    mu = 4.0 * m * m
    b8 = 8.0 * beta
    return (beta - (mu - 1) / b8 - 4 * (mu - 1) * (7 * mu - 31) / (3 * b8**3)
            - 32 * (mu - 1) * (83 * mu**2 - 982 * mu + 3779) / (15 * b8**5))


def _miller_triplet(ms: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``J_{m-1}, J_m, J_{m+1}`` with a separate order ``m`` for every entry.

    The recurrence for an entry depends only on its own ``(m, x)``.
    ``J_{-1}`` is returned as ``-J_1``.
    """
    starts = np.array([_miller_start(int(m) + 1, float(v)) for m, v in zip(ms, x)],
                      dtype=np.int64)
    begin = {int(n): np.flatnonzero(starts == n) for n in np.unique(starts)}
    grab = {}
    for shift, slot in ((-1, 0), (0, 1), (1, 2)):
        for order in np.unique(ms + shift):
            grab.setdefault(int(order), []).append((slot, np.flatnonzero(ms + shift == order)))
    got = np.zeros((3, x.size))
    two_over_x = 2.0 / x
    jp1 = np.zeros_like(x)
    j = np.zeros_like(x)
    norm = np.zeros_like(x)
    for n in range(int(starts.max()) if x.size else 0, 0, -1):
        idx = begin.get(n)
        if idx is not None:
            j[idx] = 1.0
        jm1 = (n * two_over_x) * j - jp1
        jp1 = j
        j = jm1
        order = n - 1
        for slot, sel in grab.get(order, ()):
            got[slot, sel] = j[sel]
        if order == 1:
            # J_{-1} = -J_1
            for slot, sel in grab.get(-1, ()):
                got[slot, sel] = -j[sel]
        if order > 0 and order % 2 == 0:
            norm += 2.0 * j
        big = np.abs(j) > _RESCALE
        if big.any():
            j[big] /= _RESCALE
            jp1[big] /= _RESCALE
            norm[big] /= _RESCALE
            got[:, big] /= _RESCALE
    norm += j
    got /= norm
    return got[0], got[1], got[2]


def _value_and_slope(ms: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    jm, j0, jp = _miller_triplet(ms, x)
    return j0, 0.5 * (jm - jp)


def _refine(ms: np.ndarray, lo: np.ndarray, hi: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Safeguarded Newton inside sign-change brackets ``[lo, hi]``."""
    flo, _ = _value_and_slope(ms, lo)
    guess = np.array([mcmahon_guess(int(m), int(k)) for m, k in zip(ms, ks)])
    x = np.where((guess > lo) & (guess < hi), guess, 0.5 * (lo + hi))
    lo = lo.copy()
    hi = hi.copy()
    done = np.zeros(x.size, dtype=bool)
    for _ in range(_MAX_NEWTON):
        act = np.flatnonzero(~done)
        if act.size == 0:
            return x
        f, df = _value_and_slope(ms[act], x[act])
        xa, la, ha, fla = x[act], lo[act], hi[act], flo[act]
        same = np.signbit(f) == np.signbit(fla)
        la = np.where(same, xa, la)
        ha = np.where(same, ha, xa)
        fla = np.where(same, f, fla)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - f / df
        bad = ~np.isfinite(xn) | (xn < la) | (xn > ha)
        xn = np.where(bad, 0.5 * (la + ha), xn)
        hit = f == 0.0
        xn = np.where(hit, xa, xn)
        tol = 1e-13 * np.maximum(1.0, xa)
        conv = hit | (~bad & (np.abs(xn - xa) <= tol)) | (ha - la <= tol)
        x[act], lo[act], hi[act], flo[act] = xn, la, ha, fla
        done[act[conv]] = True
    if done.all():
        return x
    raise ConvergenceError(
        f"Bessel zero refinement did not converge in {_MAX_NEWTON} iterations "
        f"(orders {sorted(set(ms[~done].tolist()))})")


def _scan_origin(m: int) -> float:
    # j_{m,1} > m for every m, and j_{0,1} > 2
    return float(m) if m > 0 else 0.5


@dataclass
class BesselZeroTable:
    """Positive zeros ``j_{m,k}`` of ``J_m`` for ``m <= max_order``.

    Zeros are found by scanning ``J_m`` on unit cells starting at ``m`` (no
    zero lies below), refining each sign change from a McMahon guess with
    bracketed Newton steps. The table grows on demand and every stored value
    depends only on ``(m, k)``.
    """

    max_order: int = 200
    zeros: Dict[Tuple[int, int], float] = field(default_factory=dict)
    _scanned: Dict[int, int] = field(default_factory=dict, repr=False)
    _counts: Dict[int, int] = field(default_factory=dict, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    def _scan_chunk(self, orders) -> None:
        ms, edges, owners = [], [], []
        for m in orders:
            first = self._scanned.get(m, 0)
            e = _scan_origin(m) + _SCAN_STEP * np.arange(first, first + _SCAN_CHUNK + 1)
            edges.append(e)
            ms.append(np.full(e.size, m))
            self._scanned[m] = first + _SCAN_CHUNK
        ms_all = np.concatenate(ms)
        _, vals, _ = _miller_triplet(ms_all, np.concatenate(edges))
        lo, hi, bm, bk = [], [], [], []
        pos = 0
        for m, e in zip(orders, edges):
            v = vals[pos:pos + e.size]
            pos += e.size
            s = np.signbit(v)
            idx = np.flatnonzero(s[:-1] != s[1:])
            have = self._counts.get(m, 0)
            lo.append(e[idx])
            hi.append(e[idx + 1])
            bm.append(np.full(idx.size, m))
            bk.append(have + 1 + np.arange(idx.size))
            self._counts[m] = have + idx.size
        bm = np.concatenate(bm)
        if bm.size == 0:
            return
        bk = np.concatenate(bk)
        roots = _refine(bm, np.concatenate(lo), np.concatenate(hi), bk)
        for m, k, z in zip(bm, bk, roots):
            self.zeros[(int(m), int(k))] = float(z)

    def _reached(self, m: int) -> float:
        return _scan_origin(m) + _SCAN_STEP * self._scanned.get(m, 0)

    def ensure(self, orders, *, upto_x: float | None = None, upto_k: int | None = None) -> None:
        """Make sure zeros up to ``upto_x`` (or the first ``upto_k``) are stored."""
        orders = [_check_order(m) for m in orders]
        for m in orders:
            if m > self.max_order:
                raise RangeError(f"order {m} exceeds table max_order {self.max_order}")
        with self._lock:
            while True:
                pending = [m for m in orders
                           if (upto_x is not None and self._reached(m) <= upto_x)
                           or (upto_k is not None and self._counts.get(m, 0) < upto_k)]
                if not pending:
                    return
                self._scan_chunk(pending)

    def zero(self, m: int, k: int) -> float:
        m = _check_order(m)
        if int(k) != k or k < 1:
            raise RangeError(f"zero index must be a positive integer, got {k!r}")
        k = int(k)
        with self._lock:
            if (m, k) not in self.zeros:
                self.ensure([m], upto_k=k)
            return self.zeros[(m, k)]

    def zeros_upto(self, m: int, xmax: float) -> np.ndarray:
        """All zeros of ``J_m`` not exceeding ``xmax``, ascending."""
        m = _check_order(m)
        with self._lock:
            self.ensure([m], upto_x=xmax)
            n = self._counts.get(m, 0)
            vals = [self.zeros[(m, k)] for k in range(1, n + 1)]
        return np.array([z for z in vals if z <= xmax])

    def all_upto(self, xmax: float) -> Dict[int, np.ndarray]:
        """Zeros not exceeding ``xmax`` for every order that has one."""
        # j_{m,1} > m, so orders beyond xmax contribute nothing
        orders = list(range(0, min(int(math.floor(xmax)), self.max_order) + 1))
        with self._lock:
            self.ensure(orders, upto_x=xmax)
            out = {}
            for m in orders:
                n = self._counts.get(m, 0)
                z = np.array([self.zeros[(m, k)] for k in range(1, n + 1)])
                z = z[z <= xmax]
                if z.size:
                    out[m] = z
        return out

    def items(self) -> Iterator[Tuple[Tuple[int, int], float]]:
        return iter(sorted(self.zeros.items()))

    def write_csv(self, path) -> None:
        write_zero_fixture(path, dict(self.items()))


_TABLE = BesselZeroTable(max_order=MAX_ORDER)


def default_table() -> BesselZeroTable:
    return _TABLE


def bessel_zero(m: int, k: int) -> float:
    """The ``k``-th positive zero of ``J_m``."""
    return _TABLE.zero(m, k)


def write_zero_fixture(path, zeros: Dict[Tuple[int, int], float]) -> None:
    """Write zeros as CSV ``m,k,j_mk`` with 15 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "k", "j_mk"])
        for (m, k), z in sorted(zeros.items()):
            w.writerow([m, k, f"{z:.15g}"])


def read_zero_fixture(path) -> Dict[Tuple[int, int], float]:
    with open(Path(path), newline="") as fh:
        return {(int(r["m"]), int(r["k"])): float(r["j_mk"]) for r in csv.DictReader(fh)}


def bessel_j_each(ms, x) -> np.ndarray:
    """Elementwise ``J_{m_i}(x_i)`` for equally shaped integer orders and arguments."""
    ms = np.asarray(ms, dtype=np.int64)
    x = _check_args(x)
    ms, x = np.broadcast_arrays(ms, x)
    if ms.size and (ms.min() < 0 or ms.max() > MAX_ORDER):
        raise RangeError(f"orders outside [0, {MAX_ORDER}]")
    flat_m = ms.ravel()
    flat_x = x.ravel()
    out = np.empty(flat_x.size)
    small = flat_x <= _SERIES_X
    for m in np.unique(flat_m[small]):
        sel = small & (flat_m == m)
        out[sel] = _series(int(m), flat_x[sel])
    if (~small).any():
        _, j0, _ = _miller_triplet(flat_m[~small], flat_x[~small])
        out[~small] = j0
    return out.reshape(x.shape)
