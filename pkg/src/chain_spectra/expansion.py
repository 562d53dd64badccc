"""Exponential-sum algebra and symbolic expansion of the spectral determinant.

The determinant of a dressed chain with hard walls is a finite sum of terms
c * exp(i*k*w) whose frequencies w are signed combinations of the bond
actions.  After normalization it takes the canonical shape

    D(k) = 1 + exp(2i*(S0*k - pi*g0)) - sum_j a_j * exp(2i*(S_j*k - pi*g_j))

with every S_j strictly inside (0, S0).  Reality of the spectral condition
forces the interior terms into frequency-mirrored pairs S_j <-> S0 - S_j
with coefficients c_mirror = -conj(c); each pair collapses into one real
sinusoid of the characteristic function Phi, giving the real spectral
equation

    cos(S0*k - pi*g0) = Phi(k),      |Phi| <= sum_j a_j.

A positive regularity margin 1 - sum_j a_j therefore guarantees that the
average counting line pierces every stair of the counting function and
that each separator interval holds exactly one eigenvalue.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec, vertex_coefficients

#: hard cap on the number of exponential terms tracked during expansion;
#: the count can double at every interior vertex.
TERM_CAP = 2**20

#: coefficients smaller than this are treated as exact cancellations.
DROP_TOL = 1e-15


class PairingError(RuntimeError):
    """Determinant terms violate the mirrored-pair structure.

    This cannot happen for a valid Dirichlet chain; seeing it means a phase
    convention in the expansion or normalization is broken.
    """


@dataclass(frozen=True, eq=False)
class ExponentialSum:
    """Finite sum of terms coefficient * exp(i * k * frequency).

    Terms are kept sorted by frequency with no duplicates (frequencies
    closer than the merge tolerance are summed into one term).
    """

    frequencies: np.ndarray
    coefficients: np.ndarray

    @classmethod
    def from_terms(cls, terms, freq_tol: float = 1e-12, drop_tol: float = DROP_TOL):
        """Build from an iterable of (coefficient, frequency) pairs."""
        terms = list(terms)
        if not terms:
            return cls(np.empty(0, dtype=float), np.empty(0, dtype=complex))
        coeffs = np.array([c for c, _ in terms], dtype=complex)
        freqs = np.array([w for _, w in terms], dtype=float)
        return cls(*_merge(freqs, coeffs, freq_tol, drop_tol))

    @classmethod
    def zero(cls):
        return cls(np.empty(0, dtype=float), np.empty(0, dtype=complex))

    @classmethod
    def term(cls, coefficient, frequency):
        return cls(
            np.array([frequency], dtype=float),
            np.array([coefficient], dtype=complex),
        )

    def __len__(self) -> int:
        return self.frequencies.size

    def evaluate(self, k):
        """Pointwise value at real momentum k (scalar or array)."""
        k = np.asarray(k, dtype=float)
        if len(self) == 0:
            return np.zeros(k.shape, dtype=complex) if k.ndim else 0j
        val = np.exp(1j * np.multiply.outer(k, self.frequencies)) @ self.coefficients
        if val.ndim == 0:
            return complex(val)
        return val

    def shifted(self, delta: float) -> "ExponentialSum":
        """Multiply by exp(i*k*delta), i.e. shift every frequency."""
        return ExponentialSum(self.frequencies + delta, self.coefficients)

    def scaled(self, factor) -> "ExponentialSum":
        return ExponentialSum(self.frequencies, self.coefficients * factor)


def _merge(freqs, coeffs, freq_tol, drop_tol):
    order = np.argsort(freqs, kind="stable")
    f = freqs[order]
    c = coeffs[order]
    if f.size:
        new_group = np.concatenate(([True], np.diff(f) > freq_tol))
        starts = np.flatnonzero(new_group)
        csum = np.add.reduceat(c, starts)
        counts = np.diff(np.append(starts, f.size))
        fmean = np.add.reduceat(f, starts) / counts
        keep = np.abs(csum) > drop_tol
        f, c = fmean[keep], csum[keep]
    f.setflags(write=False)
    c.setflags(write=False)
    return f, c


def add_expsum(a: ExponentialSum, b: ExponentialSum, *, freq_tol=1e-12,
               drop_tol=DROP_TOL) -> ExponentialSum:
    freqs = np.concatenate([a.frequencies, b.frequencies])
    coeffs = np.concatenate([a.coefficients, b.coefficients])
    return ExponentialSum(*_merge(freqs, coeffs, freq_tol, drop_tol))


def multiply_expsum(a: ExponentialSum, b: ExponentialSum, *, freq_tol=1e-12,
                    drop_tol=DROP_TOL) -> ExponentialSum:
    """Product of two exponential sums (frequency convolution).

    Colliding frequencies are summed; coefficients below ``drop_tol`` are
    removed so exact cancellations do not inflate the term count.
    """
    if len(a) == 0 or len(b) == 0:
        return ExponentialSum.zero()
    freqs = np.add.outer(a.frequencies, b.frequencies).ravel()
    coeffs = np.multiply.outer(a.coefficients, b.coefficients).ravel()
    if freqs.size > TERM_CAP:
        raise ValueError(f"exponential sum exceeds the {TERM_CAP} term cap")
    return ExponentialSum(*_merge(freqs, coeffs, freq_tol, drop_tol))


@dataclass(frozen=True)
class SpectralPair:
    """One mirrored coefficient pair of the normalized determinant.

    ``amplitude``, ``action`` and ``gamma`` describe the upper partner
    (the one with action in (S0/2, S0]); the lower partner at S0 - action
    is implied.  ``nu`` is the frequency of the pair's sinusoid in the
    characteristic function and ``theta`` its phase; the sinusoid weight is
    ``phi_amplitude`` (equal to ``amplitude`` except for the rare
    self-mirrored term sitting exactly at S0/2, which enters with half
    weight and is flagged).
    """

    amplitude: float
    action: float
    gamma: float
    nu: float
    theta: float
    phi_amplitude: float
    self_paired: bool = False


@dataclass(frozen=True, eq=False)
class SpectralForm:
    """Normalized spectral determinant in canonical exponential-sum shape.

    ``margin`` is 1 minus the summed sinusoid weights of Phi; a positive
    value certifies the regular regime (the converse is inconclusive,
    since the bound max|Phi| <= sum of weights is only sufficient).
    """

    s0: float
    gamma0: float
    pairs: tuple[SpectralPair, ...]
    margin: float
    _det_freqs: np.ndarray = field(repr=False)
    _det_coeffs: np.ndarray = field(repr=False)
    _phi_terms: tuple[tuple[float, float, float], ...] = field(repr=False)

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def evaluate(self, k):
        """Determinant value at real k, from the unpaired term list."""
        k = np.asarray(k, dtype=float)
        val = np.exp(1j * np.multiply.outer(k, self._det_freqs)) @ self._det_coeffs
        if val.ndim == 0:
            return complex(val)
        return val

    def phi(self, k):
        """Characteristic function Phi (real for real k by construction)."""
        k = np.asarray(k, dtype=float)
        if not self._phi_terms:
            return np.zeros(k.shape) if k.ndim else 0.0
        amp = np.array([t[0] for t in self._phi_terms])
        nu = np.array([t[1] for t in self._phi_terms])
        theta = np.array([t[2] for t in self._phi_terms])
        scale = math.sin(math.pi * self.gamma0)
        val = scale * (np.sin(np.multiply.outer(k, nu) + theta) @ amp)
        if val.ndim == 0:
            return float(val)
        return val

    def phi_scalar(self, k: float) -> float:
        scale = math.sin(math.pi * self.gamma0)
        return scale * math.fsum(
            a * math.sin(nu * k + th) for a, nu, th in self._phi_terms
        )

    def phi_prime_scalar(self, k: float) -> float:
        scale = math.sin(math.pi * self.gamma0)
        return scale * math.fsum(
            a * nu * math.cos(nu * k + th) for a, nu, th in self._phi_terms
        )


def _pairs_from_terms(freqs, coeffs, s0, gamma0, freq_tol):
    """Group interior determinant terms into mirrored pairs.

    ``freqs``/``coeffs`` must exclude the constant and top terms.  Raises
    PairingError when a term lacks its mirror partner or the partner
    coefficient is not -conj(coefficient) within tolerance.
    """
    order = np.argsort(freqs)
    freqs = freqs[order]
    coeffs = coeffs[order]
    pairs = []
    i, j = 0, len(freqs) - 1
    while i <= j:
        c_hi = coeffs[j]
        w_hi = freqs[j]
        if i == j:
            # Self-mirrored term at S0: its Phi contribution is a constant
            # and must already be real.
            if abs(w_hi - s0) > 10 * freq_tol:
                raise PairingError(
                    f"unpaired determinant term at frequency {w_hi!r}"
                )
            residue = abs((c_hi + np.conj(c_hi)) / 2.0)
            if residue > 1e-9 * max(1.0, abs(c_hi)):
                raise PairingError(
                    f"self-mirrored term at frequency {w_hi!r} is not "
                    f"anti-Hermitian (residue {residue:.3e})"
                )
            pairs.append(_make_pair(c_hi, w_hi, s0, gamma0, self_paired=True))
            break
        w_lo = freqs[i]
        if abs((w_lo + w_hi) - 2.0 * s0) > 10 * freq_tol:
            raise PairingError(
                f"frequencies {w_lo!r} and {w_hi!r} do not mirror around the "
                f"total action {s0!r}"
            )
        residue = abs(coeffs[i] + np.conj(c_hi))
        if residue > 1e-9 * max(1.0, abs(c_hi)):
            raise PairingError(
                f"mirror coefficients at frequencies {w_lo!r}/{w_hi!r} "
                f"violate conjugate symmetry (residue {residue:.3e})"
            )
        pairs.append(_make_pair(c_hi, w_hi, s0, gamma0, self_paired=False))
        i += 1
        j -= 1
    return tuple(pairs)


def _make_pair(c_hi, w_hi, s0, gamma0, self_paired):
    amplitude = abs(c_hi)
    gamma = (-cmath.phase(-c_hi) / (2.0 * math.pi)) % 1.0
    nu = w_hi - s0
    theta = cmath.phase(c_hi)
    phi_amp = 0.5 * amplitude if self_paired else amplitude
    return SpectralPair(
        amplitude=amplitude,
        action=0.5 * w_hi,
        gamma=gamma,
        nu=nu,
        theta=theta,
        phi_amplitude=phi_amp,
        self_paired=self_paired,
    )


def spectral_form_from_sum(det: ExponentialSum, s0: float,
                           freq_tol: float) -> SpectralForm:
    """Classify the terms of a normalized determinant sum."""
    freqs = det.frequencies
    coeffs = det.coefficients
    if freqs.size < 2:
        raise PairingError("determinant has fewer than two exponential terms")
    if abs(freqs[0]) > freq_tol or abs(coeffs[0] - 1.0) > 1e-9:
        raise PairingError(
            f"lowest term is not the constant +1 (freq {freqs[0]!r}, "
            f"coeff {coeffs[0]!r}); normalization is broken"
        )
    if abs(freqs[-1] - 2.0 * s0) > 10 * freq_tol or abs(abs(coeffs[-1]) - 1.0) > 1e-9:
        raise PairingError(
            f"highest term is not unimodular at twice the total action "
            f"(freq {freqs[-1]!r}, coeff {coeffs[-1]!r})"
        )
    gamma0 = (-cmath.phase(coeffs[-1]) / (2.0 * math.pi)) % 1.0
    if abs(gamma0 - 0.5) > 1e-9:
        # Hard walls at both ends force a pure sine principal term.
        raise PairingError(
            f"expected the Dirichlet phase constant 1/2, got {gamma0!r}"
        )
    pairs = _pairs_from_terms(freqs[1:-1], coeffs[1:-1], s0, gamma0, freq_tol)
    margin = 1.0 - math.fsum(p.phi_amplitude for p in pairs)
    phi_terms = tuple((p.phi_amplitude, p.nu, p.theta) for p in pairs)
    return SpectralForm(
        s0=s0,
        gamma0=gamma0,
        pairs=pairs,
        margin=margin,
        _det_freqs=freqs,
        _det_coeffs=coeffs,
        _phi_terms=phi_terms,
    )


def _symbolic_vertex_matrix(chain: ChainSpec, i: int, freq_tol):
    """Prefactor-stripped transfer matrix of vertex i as exponential sums."""
    vc = vertex_coefficients(chain, i)
    b = chain.vertices[i]
    bl = chain.betas[i - 1]
    br = chain.betas[i]
    return (
        (ExponentialSum.term(1.0, (bl - br) * b),
         ExponentialSum.term(vc.r, -(br + bl) * b)),
        (ExponentialSum.term(vc.r, (br + bl) * b),
         ExponentialSum.term(1.0, (br - bl) * b)),
    )


def _matmul(a, b, freq_tol):
    out = []
    for row in range(2):
        out_row = []
        for col in range(2):
            s = add_expsum(
                multiply_expsum(a[row][0], b[0][col], freq_tol=freq_tol),
                multiply_expsum(a[row][1], b[1][col], freq_tol=freq_tol),
                freq_tol=freq_tol,
            )
            out_row.append(s)
        out.append(tuple(out_row))
    return tuple(out)


def expand_determinant(chain: ChainSpec) -> SpectralForm:
    """Expand the spectral determinant of ``chain`` into canonical form.

    The prefactor-stripped vertex matrices are multiplied symbolically,
    the wall condition is applied, and the overall phase is fixed so the
    constant term is exactly +1.  The resulting term list is classified
    into the canonical shape described in the module docstring.
    """
    s0 = chain.total_action
    freq_tol = 1e-9 * s0
    total = (
        (ExponentialSum.term(1.0, 0.0), ExponentialSum.zero()),
        (ExponentialSum.zero(), ExponentialSum.term(1.0, 0.0)),
    )
    for i in range(1, chain.n_bonds):
        total = _matmul(_symbolic_vertex_matrix(chain, i, freq_tol), total, freq_tol)

    exit_phase = chain.betas[-1] * chain.vertices[-1]
    top = add_expsum(total[0][0], total[0][1].scaled(-1.0), freq_tol=freq_tol)
    bottom = add_expsum(total[1][0], total[1][1].scaled(-1.0), freq_tol=freq_tol)
    raw = add_expsum(top.shifted(2.0 * exit_phase), bottom, freq_tol=freq_tol)
    det = raw.shifted(s0 - exit_phase).scaled(-1.0)
    return spectral_form_from_sum(det, s0, freq_tol)


def regularity_margin(form: SpectralForm) -> float:
    """1 minus the summed sinusoid weights of the characteristic function.

    Positive means the chain is certified regular; zero or negative is
    inconclusive because the criterion is sufficient, not necessary.
    """
    return form.margin
