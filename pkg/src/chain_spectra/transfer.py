"""Numeric transfer-matrix evaluation of the chain spectral determinant.

Matching the wave function across interior vertex i gives a unimodular
2x2 transfer matrix; the full chain is the ordered product of those.  The
Dirichlet walls turn the matrix elements into a single scalar condition,
the spectral determinant, whose real zeros are the momentum eigenvalues.

Two normalization steps are applied to the determinant before it is
returned:

* the common 1/t_i prefactors are stripped (they cancel in the spectral
  condition and would overflow for long high-contrast chains), and
* the result is multiplied by the unique unit phase that turns its
  lowest-frequency exponential term into the constant +1, so the value
  agrees pointwise with the symbolic expansion produced by
  :mod:`chain_spectra.expansion`.
"""

from __future__ import annotations

import numpy as np

from .chain import ChainSpec, vertex_coefficients


def _phase(k, omega):
    return np.exp(1j * np.asarray(k, dtype=float) * omega)


def transfer_matrix(chain: ChainSpec, i: int, k):
    """Transfer matrix across interior vertex i at real momentum k.

    Returns a (2, 2) complex array for scalar k, or (..., 2, 2) for array
    k.  det = 1 up to rounding.
    """
    vc = vertex_coefficients(chain, i)
    m = _stripped_matrix(chain, i, k)
    return m / vc.t


def _stripped_matrix(chain: ChainSpec, i: int, k):
    """Vertex-i transfer matrix without the 1/t_i prefactor."""
    vc = vertex_coefficients(chain, i)
    b = chain.vertices[i]
    bl = chain.betas[i - 1]
    br = chain.betas[i]
    k = np.asarray(k, dtype=float)
    m = np.empty(k.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = _phase(k, (bl - br) * b)
    m[..., 0, 1] = vc.r * _phase(k, -(br + bl) * b)
    m[..., 1, 0] = vc.r * _phase(k, (br + bl) * b)
    m[..., 1, 1] = _phase(k, (br - bl) * b)
    return m


def _stripped_total(chain: ChainSpec, k):
    """Ordered product of the prefactor-stripped vertex matrices."""
    k = np.asarray(k, dtype=float)
    total = np.zeros(k.shape + (2, 2), dtype=complex)
    total[..., 0, 0] = 1.0
    total[..., 1, 1] = 1.0
    # Matrices are applied left to right along the chain: vertex i acts on
    # the accumulated product of vertices 1..i-1.
    for i in range(1, chain.n_bonds):
        total = _stripped_matrix(chain, i, k) @ total
    return total


def total_transfer(chain: ChainSpec, k):
    """Full transfer matrix of the chain (product over interior vertices).

    A single-bond chain has no interior vertices and returns the identity.
    """
    total = _stripped_total(chain, k)
    scale = 1.0
    for i in range(1, chain.n_bonds):
        scale *= vertex_coefficients(chain, i).t
    return total / scale


def delta_numeric(chain: ChainSpec, k):
    """Normalized spectral determinant evaluated numerically at real k.

    The zeros on the real axis are the momentum eigenvalues of the chain
    with hard walls at both ends.  Normalization fixes the constant term
    to +1, so the value matches SpectralForm.evaluate to rounding.
    """
    k = np.asarray(k, dtype=float)
    m = _stripped_total(chain, k)
    exit_phase = chain.betas[-1] * chain.vertices[-1]
    raw = (
        _phase(k, 2.0 * exit_phase) * (m[..., 0, 0] - m[..., 0, 1])
        + m[..., 1, 0]
        - m[..., 1, 1]
    )
    out = -_phase(k, chain.total_action - exit_phase) * raw
    if out.ndim == 0:
        return complex(out)
    return out
