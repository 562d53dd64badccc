"""Counting function, separators, and bracketed root finding.

The average of the spectral staircase grows linearly, N_bar(k) =
S0*k/pi + N_bar(0), and for a regular chain it pierces every stair.  The
piercing points (separators) are equally spaced by pi/S0 and bracket
exactly one eigenvalue each, which reduces root finding to bisection of
the real spectral function

    f(k) = cos(S0*k - pi*g0) - Phi(k)

on guaranteed sign-change intervals.  Chains that are not certified
regular fall back to a fixed panel subdivision per interval so that empty
and multi-root intervals are diagnosed rather than mis-bracketed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .expansion import SpectralForm

#: absolute root tolerance, in units of the separator spacing pi/S0.
XTOL_FACTOR = 1e-12

#: bisection iteration cap; unreachable for sane brackets.
MAX_BISECT = 200

#: roots closer than this (in k units) merge into one multiple root.
MULTIPLICITY_TOL = 1e-9


@dataclass(frozen=True)
class SeparatorGrid:
    """Equally spaced crossing points of the staircase and its average."""

    offset: float   # N_bar(0)
    spacing: float  # pi / S0

    def k(self, n: int) -> float:
        return self.spacing * (n - self.offset)

    def __getitem__(self, n: int) -> float:
        return self.k(n)


@dataclass(frozen=True)
class RootRecord:
    """One converged eigenvalue with its bracket and solve diagnostics."""

    n: int
    bracket: tuple[float, float]
    root: float
    residual: float
    iterations: int
    interval_count: int = 1
    multiplicity: int = 1


def weyl_average(form: SpectralForm, k):
    """Average spectral staircase S0*k/pi + N_bar(0).

    The offset N_bar(0) = g0 - 1 is calibrated so the zero-potential chain
    comes out at -1/2 and the average pierces each stair at its midpoint.
    """
    return form.s0 * np.asarray(k, dtype=float) / math.pi + (form.gamma0 - 1.0)


def separator_grid(form: SpectralForm) -> SeparatorGrid:
    return SeparatorGrid(offset=form.gamma0 - 1.0, spacing=math.pi / form.s0)


def separators(form: SpectralForm, n: int) -> float:
    """The n-th crossing point of the staircase with its average."""
    return separator_grid(form).k(n)


def spectral_function(form: SpectralForm, k):
    """Real spectral function f(k); its zeros are the eigenvalues."""
    if np.ndim(k) == 0:
        return math.cos(form.s0 * k - math.pi * form.gamma0) - form.phi_scalar(k)
    k = np.asarray(k, dtype=float)
    return np.cos(form.s0 * k - math.pi * form.gamma0) - form.phi(k)


def _f_prime(form: SpectralForm, k: float) -> float:
    return -form.s0 * math.sin(form.s0 * k - math.pi * form.gamma0) - form.phi_prime_scalar(k)


def _bisect(form, lo, hi, f_lo, f_hi, xtol):
    """Bisection to xtol followed by a few guarded Newton polish steps."""
    a, b, fa, fb = lo, hi, f_lo, f_hi
    iterations = 0
    while (b - a) > xtol and iterations < MAX_BISECT:
        mid = 0.5 * (a + b)
        fm = spectral_function(form, mid)
        iterations += 1
        if fm == 0.0:
            a = b = mid
            fa = fb = fm
            break
        if (fa < 0.0) == (fm < 0.0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    if iterations >= MAX_BISECT and (b - a) > xtol:
        raise RuntimeError(f"bisection failed to converge in {MAX_BISECT} steps")
    x = 0.5 * (a + b)
    fx = spectral_function(form, x)
    for _ in range(4):
        d = _f_prime(form, x)
        if d == 0.0 or fx == 0.0:
            break
        y = x - fx / d
        if not lo <= y <= hi:
            break
        fy = spectral_function(form, y)
        iterations += 1
        if abs(fy) >= abs(fx):
            break
        x, fx = y, fy
    return x, abs(fx), iterations


def _scan_interval(form, lo, hi, xtol, panels):
    """Panel scan for the zero/multi-root case; returns (root, residual, its)."""
    xs = np.linspace(lo, hi, panels + 1)
    fs = spectral_function(form, xs)
    found = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], fs[:-1], fs[1:]):
        if fa == 0.0:
            found.append((float(a), 0.0, 0))
            continue
        if (fa < 0.0) != (fb < 0.0):
            found.append(_bisect(form, float(a), float(b), float(fa), float(fb), xtol))
    if fs[-1] == 0.0:
        found.append((float(xs[-1]), 0.0, 0))
    return found


def _merge_multiplicities(found):
    merged = []
    for root, res, its in sorted(found):
        if merged and abs(root - merged[-1][0]) < MULTIPLICITY_TOL:
            prev = merged[-1]
            merged[-1] = (prev[0], min(prev[1], res), prev[2] + its, prev[3] + 1)
        else:
            merged.append((root, res, its, 1))
    return merged


def _solve_interval(form, n, grid, xtol, panels):
    lo, hi = grid.k(n - 1), grid.k(n)
    if form.margin > 0.0:
        # Certified regular: the interval endpoints alternate in sign, so
        # a single bracket is guaranteed and the scan is unnecessary.
        f_lo = spectral_function(form, lo)
        f_hi = spectral_function(form, hi)
        root, res, its = _bisect(form, lo, hi, f_lo, f_hi, xtol)
        return [RootRecord(n=n, bracket=(lo, hi), root=root, residual=res,
                           iterations=its)]
    found = _merge_multiplicities(_scan_interval(form, lo, hi, xtol, panels))
    count = sum(m for _, _, _, m in found)
    return [
        RootRecord(n=n, bracket=(lo, hi), root=root, residual=res,
                   iterations=its, interval_count=count, multiplicity=m)
        for root, res, its, m in found
    ]


def find_roots(form: SpectralForm, n_range, *, panels: int = 64,
               threads: int | None = None) -> list[RootRecord]:
    """Locate the eigenvalues indexed by ``n_range`` (iterable of n >= 1).

    Each index n is solved on its separator interval.  Results are ordered
    by n regardless of the worker count.
    """
    indices = sorted(set(int(n) for n in n_range))
    if not indices:
        return []
    if indices[0] < 1:
        raise ValueError("eigenvalue indices start at 1 (k = 0 is the trivial root)")
    if indices[-1] > 10**6:
        raise ValueError("indices beyond 1e6 are not supported")
    grid = separator_grid(form)
    xtol = XTOL_FACTOR * grid.spacing

    def solve_block(block):
        out = []
        for n in block:
            out.extend(_solve_interval(form, n, grid, xtol, panels))
        return out

    if threads is None or threads <= 1 or len(indices) < 4:
        return solve_block(indices)
    n_blocks = min(threads, len(indices))
    blocks = [indices[i::n_blocks] for i in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=n_blocks) as pool:
        results = list(pool.map(solve_block, blocks))
    merged = [rec for block in results for rec in block]
    merged.sort(key=lambda r: (r.n, r.root))
    return merged


def staircase(roots, k):
    """Number of located eigenvalues not exceeding k.

    ``roots`` may be RootRecord instances or bare momenta.
    """
    values = np.sort(np.array(
        [r.root if isinstance(r, RootRecord) else float(r) for r in roots]
    ))
    counts = np.searchsorted(values, np.asarray(k, dtype=float), side="right")
    if counts.ndim == 0:
        return int(counts)
    return counts


@dataclass(frozen=True)
class IntervalClassification:
    """Roots-per-interval diagnostics over a separator index range."""

    n_first: int
    n_last: int
    counts: tuple[int, ...]
    records: tuple[RootRecord, ...]

    def histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for c in self.counts:
            hist[c] = hist.get(c, 0) + 1
        return dict(sorted(hist.items()))

    @property
    def total_roots(self) -> int:
        return sum(self.counts)

    @property
    def all_ones(self) -> bool:
        return all(c == 1 for c in self.counts)


def classify_intervals(form: SpectralForm, n_range, *, panels: int = 64) -> IntervalClassification:
    """Count roots per separator interval (regular chains give all ones)."""
    indices = sorted(set(int(n) for n in n_range))
    if not indices:
        raise ValueError("empty index range")
    grid = separator_grid(form)
    xtol = XTOL_FACTOR * grid.spacing
    counts = []
    records = []
    for n in indices:
        lo, hi = grid.k(n - 1), grid.k(n)
        found = _merge_multiplicities(_scan_interval(form, lo, hi, xtol, panels))
        count = sum(m for _, _, _, m in found)
        counts.append(count)
        records.extend(
            RootRecord(n=n, bracket=(lo, hi), root=root, residual=res,
                       iterations=its, interval_count=count, multiplicity=m)
            for root, res, its, m in found
        )
    return IntervalClassification(
        n_first=indices[0],
        n_last=indices[-1],
        counts=tuple(counts),
        records=tuple(records),
    )
