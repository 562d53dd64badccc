"""Geometry and vertex scattering data for dressed linear chain graphs.

A chain is a sequence of bonds on the half line, with hard walls at both
ends and an energy-scaled step potential on every bond.  Because each bond
potential is proportional to the energy, the local wavenumber on bond i is
beta_i * k for a fixed factor beta_i = sqrt(1 - lambda_i), and the entire
spectral problem is controlled by the bond action lengths
s_i = beta_i * (b_i - b_{i-1}) rather than by the momentum itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """Malformed chain configuration document."""


@dataclass(frozen=True)
class ChainSpec:
    """Immutable description of one dressed chain.

    Vertices sit at 0 = b_0 < b_1 < ... < b_N; bond i (1-based) spans
    [b_{i-1}, b_i].  ``total_action`` is the sum of the bond actions and is
    the largest frequency that can appear in the spectral determinant.
    Instances are safe to share across threads.
    """

    vertices: tuple[float, ...]
    lambdas: tuple[float, ...]
    betas: tuple[float, ...]
    bond_actions: tuple[float, ...]
    total_action: float

    @property
    def n_bonds(self) -> int:
        return len(self.bond_actions)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def bond_action(self, i: int) -> float:
        """Action length of bond i (1-based)."""
        return self.bond_actions[i - 1]

    def beta(self, i: int) -> float:
        """Wavenumber factor of bond i (1-based)."""
        return self.betas[i - 1]


@dataclass(frozen=True)
class VertexCoefficients:
    """Reflection and transmission coefficients of one interior vertex.

    ``r`` is signed with the convention r = (beta_right - beta_left) /
    (beta_right + beta_left); ``t`` is positive.  r**2 + t**2 = 1.
    """

    r: float
    t: float


def build_chain(vertices, lambdas) -> ChainSpec:
    """Validate raw vertex positions and scaling constants, derive the rest.

    Raises ValueError on: fewer than two vertices, first vertex not at 0,
    non-increasing positions, length mismatch, or any lambda outside [0, 1).
    """
    verts = tuple(float(v) for v in vertices)
    lams = tuple(float(x) for x in lambdas)
    if len(verts) < 2:
        raise ValueError("a chain needs at least 2 vertices (1 bond)")
    if len(lams) != len(verts) - 1:
        raise ValueError(
            f"expected {len(verts) - 1} scaling constants for "
            f"{len(verts)} vertices, got {len(lams)}"
        )
    if verts[0] != 0.0:
        raise ValueError("the first vertex must sit at 0")
    for a, b in zip(verts, verts[1:]):
        if not b > a:
            raise ValueError(f"vertices must be strictly increasing, got {a} before {b}")
    for x in lams:
        if not 0.0 <= x < 1.0:
            raise ValueError(f"scaling constants must lie in [0, 1), got {x}")

    betas = tuple(math.sqrt(1.0 - x) for x in lams)
    actions = tuple(
        beta * (b - a) for beta, a, b in zip(betas, verts, verts[1:])
    )
    return ChainSpec(
        vertices=verts,
        lambdas=lams,
        betas=betas,
        bond_actions=actions,
        total_action=math.fsum(actions),
    )


def vertex_coefficients(chain: ChainSpec, i: int) -> VertexCoefficients:
    """Scattering coefficients of interior vertex i (1 <= i <= N-1).

    The end vertices are hard walls, not scatterers, so they are rejected.
    """
    if not 1 <= i <= chain.n_bonds - 1:
        raise ValueError(
            f"vertex {i} is not interior (interior range is 1..{chain.n_bonds - 1})"
        )
    bl = chain.betas[i - 1]
    br = chain.betas[i]
    r = (br - bl) / (br + bl)
    t = 2.0 * math.sqrt(bl * br) / (bl + br)
    return VertexCoefficients(r=r, t=t)


def compress_contrast(chain: ChainSpec, factor: float = 0.5) -> ChainSpec:
    """Pull every beta toward the mean by ``factor``, keeping the geometry.

    Shrinking the beta contrast shrinks every reflection coefficient, which
    drives any chain into the provably regular regime; repeated halving is
    the constructive form of that statement.
    """
    if not 0.0 <= factor <= 1.0:
        raise ValueError("contrast factor must lie in [0, 1]")
    mean = math.fsum(chain.betas) / chain.n_bonds
    new_betas = [mean + (b - mean) * factor for b in chain.betas]
    return build_chain(chain.vertices, [1.0 - b * b for b in new_betas])


_CONFIG_KEYS = {"vertices", "lambdas"}


def chain_from_config(doc) -> ChainSpec:
    """Build a chain from a parsed configuration mapping.

    The document must contain exactly the keys ``vertices`` and ``lambdas``
    with numeric array values; anything else is rejected.
    """
    if not isinstance(doc, dict):
        raise ConfigError("chain config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _CONFIG_KEYS - set(doc)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    for key in ("vertices", "lambdas"):
        value = doc[key]
        if not isinstance(value, list) or not value:
            raise ConfigError(f"'{key}' must be a non-empty array")
        for x in value:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(f"'{key}' must contain numbers only")
    try:
        return build_chain(doc["vertices"], doc["lambdas"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_chain_config(path) -> ChainSpec:
    """Read and validate a chain configuration JSON file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return chain_from_config(doc)
