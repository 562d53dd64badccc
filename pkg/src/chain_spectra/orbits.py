"""Periodic orbits of the chain: enumeration, trace formula, eigenvalue series.

A classical trajectory lives on directed bonds.  At an interior vertex it
either transmits or reflects; at a wall it reflects.  Closed itineraries
modulo cyclic rotation are the periodic orbits; an orbit is primitive when
its code is not a power of a shorter one.

Amplitude conventions (fixed by matching the cycle expansion of the bond
scattering determinant det(1 - U(k)) against the normalized spectral
determinant, a check shipped in the test suite):

* transmission through interior vertex i contributes t_i,
* reflection off interior vertex i contributes -r_i when arriving from the
  left bond and +r_i from the right bond, with r_i signed as in
  :func:`chain_spectra.chain.vertex_coefficients`,
* reflection off either wall contributes -1.

With these weights the density of states has the exact expansion

    rho(k) = S0/pi + (1/pi) * Re sum_p S_p sum_v A_p**v * exp(i*v*S_p*k)

over primitive orbits p with action S_p and repetition index v, and for a
chain with positive regularity margin the eigenvalues themselves expand as

    k_n = pi*n/S0 - (2/pi) sum_p (1/S_p) sum_v (A_p**v / v**2)
          * sin(v*w_p/2) * sin(v*w_p*n),        w_p = pi*S_p/S0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, vertex_coefficients
from .expansion import SpectralForm, expand_determinant

#: enumeration guard: the orbit count grows exponentially with code length.
MAX_BONDS_CAP = 24


class RegularityError(ValueError):
    """Eigenvalue expansion requested for a chain not certified regular."""


@dataclass(frozen=True, order=True)
class DirectedBond:
    """Bond index (1-based) plus travel direction."""

    bond: int
    to_right: bool

    @property
    def index(self) -> int:
        return 2 * (self.bond - 1) + (0 if self.to_right else 1)

    @classmethod
    def from_index(cls, idx: int) -> "DirectedBond":
        return cls(bond=idx // 2 + 1, to_right=(idx % 2 == 0))

    def __str__(self) -> str:
        return f"{self.bond}{'R' if self.to_right else 'L'}"


@dataclass(frozen=True)
class PeriodicOrbit:
    """A periodic orbit in canonical (lexicographically minimal) rotation."""

    code: tuple[int, ...]
    action: float
    amplitude: float
    primitive: bool = True

    @property
    def length(self) -> int:
        return len(self.code)

    @property
    def directed_bonds(self) -> tuple[DirectedBond, ...]:
        return tuple(DirectedBond.from_index(i) for i in self.code)

    @property
    def label(self) -> str:
        return "-".join(str(db) for db in self.directed_bonds)


def directed_transitions(chain: ChainSpec) -> dict[int, tuple[tuple[int, float], ...]]:
    """Legal moves and their amplitudes, keyed by directed-bond index."""
    n = chain.n_bonds
    table: dict[int, tuple[tuple[int, float], ...]] = {}
    for idx in range(2 * n):
        bond = idx // 2 + 1
        to_right = idx % 2 == 0
        moves: list[tuple[int, float]] = []
        if to_right:
            if bond == n:
                moves.append((idx ^ 1, -1.0))
            else:
                vc = vertex_coefficients(chain, bond)
                moves.append((2 * bond, vc.t))       # transmit to bond+1, right
                moves.append((idx ^ 1, -vc.r))       # reflect, from the left
        else:
            if bond == 1:
                moves.append((idx ^ 1, -1.0))
            else:
                vc = vertex_coefficients(chain, bond - 1)
                moves.append((2 * (bond - 2) + 1, vc.t))  # transmit to bond-1, left
                moves.append((idx ^ 1, vc.r))             # reflect, from the right
        table[idx] = tuple(moves)
    return table


def adjacency_matrix(chain: ChainSpec) -> np.ndarray:
    """0/1 matrix of legal directed-bond moves (column = from, row = to)."""
    n = 2 * chain.n_bonds
    m = np.zeros((n, n), dtype=np.int64)
    for src, moves in directed_transitions(chain).items():
        for dst, _ in moves:
            m[dst, src] = 1
    return m


def bond_scattering_matrix(chain: ChainSpec, k: float) -> np.ndarray:
    """Momentum-dependent step matrix U(k): amplitude times bond phase.

    det(1 - U(k)) reproduces the normalized spectral determinant; this is
    the single source of truth for orbit amplitudes.
    """
    n = 2 * chain.n_bonds
    u = np.zeros((n, n), dtype=complex)
    for src, moves in directed_transitions(chain).items():
        phase = np.exp(1j * k * chain.bond_actions[src // 2])
        for dst, amp in moves:
            u[dst, src] = amp * phase
    return u


def _min_rotation(code: tuple[int, ...]) -> tuple[int, ...]:
    doubled = code + code
    n = len(code)
    return min(doubled[i:i + n] for i in range(n))


def _is_primitive_code(code: tuple[int, ...]) -> bool:
    n = len(code)
    for d in range(1, n):
        if n % d == 0 and code == code[:d] * (n // d):
            return False
    return True


def orbit_action(chain: ChainSpec, code) -> float:
    return math.fsum(chain.bond_actions[idx // 2] for idx in code)


def orbit_amplitude(chain: ChainSpec, orbit) -> float:
    """Signed amplitude of an orbit (PeriodicOrbit or raw code).

    Raises ValueError when the code contains an illegal move.
    """
    code = orbit.code if isinstance(orbit, PeriodicOrbit) else tuple(orbit)
    table = directed_transitions(chain)
    amp = 1.0
    for src, dst in zip(code, code[1:] + code[:1]):
        if src not in table:
            raise ValueError(f"directed bond index {src} does not exist on this chain")
        for candidate, a in table[src]:
            if candidate == dst:
                amp *= a
                break
        else:
            raise ValueError(f"illegal move {src} -> {dst} in orbit code")
    return amp


def enumerate_orbits(chain: ChainSpec, max_bonds: int) -> list[PeriodicOrbit]:
    """All primitive periodic orbits with code length <= ``max_bonds``.

    Codes are canonical rotations; time-reversed partners are distinct
    orbits unless self-retracing.  Enumeration walks every closed
    itinerary whose states stay >= its starting state, so each orbit is
    produced exactly once (as the rotation starting at its minimal state).
    """
    if max_bonds > MAX_BONDS_CAP:
        raise ValueError(f"max_bonds is capped at {MAX_BONDS_CAP}, got {max_bonds}")
    if max_bonds < 1:
        raise ValueError("max_bonds must be positive")
    table = directed_transitions(chain)
    successors = {s: tuple(d for d, _ in moves) for s, moves in table.items()}
    orbits = []
    for start in range(2 * chain.n_bonds):
        # Iterative DFS over walks [start, ...] on states >= start.
        path = [start]
        iters = [iter(successors[start])]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                iters.pop()
                path.pop()
                continue
            if nxt == start:
                code = tuple(path)
                if _is_primitive_code(code) and code == _min_rotation(code):
                    orbits.append(code)
            if nxt >= start and len(path) < max_bonds:
                path.append(nxt)
                iters.append(iter(successors[nxt]))
        assert not path
    orbits.sort(key=lambda c: (len(c), c))
    return [
        PeriodicOrbit(
            code=code,
            action=orbit_action(chain, code),
            amplitude=orbit_amplitude(chain, code),
        )
        for code in orbits
    ]


def repeat_orbit(orbit: PeriodicOrbit, repetitions: int) -> PeriodicOrbit:
    """The v-fold traversal: action and amplitude compose multiplicatively."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if repetitions == 1:
        return orbit
    return PeriodicOrbit(
        code=orbit.code * repetitions,
        action=orbit.action * repetitions,
        amplitude=orbit.amplitude ** repetitions,
        primitive=False,
    )


def _mobius(n: int) -> int:
    result = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            result = -result
        d += 1
    if n > 1:
        result = -result
    return result


def primitive_count_oracle(chain: ChainSpec, length: int) -> int:
    """Primitive orbit count of one code length from adjacency traces.

    Counting closed walks gives trace(M**L) = sum over divisors d of L of
    d times the number of primitive cycles of length d; inverting with the
    Mobius function yields the count directly, in exact integers.
    """
    m = adjacency_matrix(chain)
    total = 0
    for d in range(1, length + 1):
        if length % d == 0:
            total += _mobius(length // d) * int(
                np.trace(np.linalg.matrix_power(m, d))
            )
    assert total % length == 0
    return total // length


def proliferation_rate(chain: ChainSpec) -> float:
    """Log of the adjacency spectral radius (orbit growth exponent)."""
    eigs = np.linalg.eigvals(adjacency_matrix(chain).astype(float))
    return math.log(float(np.max(np.abs(eigs))))


def _truncated_terms(orbits, amp_threshold: float, rep_max: int):
    """Flatten (orbit, repetition) pairs passing the amplitude cut.

    Repetitions stop as soon as |A|**v / v**2 falls below the threshold
    (the summand bound), or at ``rep_max`` for amplitudes at the unit
    circle where the bound decays only algebraically.
    """
    actions, amps, reps = [], [], []
    for orbit in orbits:
        a = orbit.amplitude
        mag = abs(a)
        if mag == 0.0:
            continue
        for v in range(1, rep_max + 1):
            bound = mag ** v / (v * v)
            if bound < amp_threshold or bound < 1e-300:
                break
            actions.append(orbit.action)
            amps.append(a ** v)
            reps.append(v)
    return (
        np.array(actions, dtype=float),
        np.array(amps, dtype=float),
        np.array(reps, dtype=float),
    )


@dataclass(frozen=True)
class DensityResult:
    """Truncated trace-formula density with its truncation metadata."""

    values: np.ndarray
    term_count: int
    rep_max: int
    amp_threshold: float
    tail_bound: float


def density_of_states(chain: ChainSpec, orbits, k, *, rep_max: int = 64,
                      amp_threshold: float = 0.0) -> DensityResult:
    """Truncated periodic-orbit density of states at momenta ``k``."""
    actions, amps, reps = _truncated_terms(orbits, amp_threshold, rep_max)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    rho = np.full(k.shape, chain.total_action / math.pi)
    if actions.size:
        freqs = reps * actions
        weights = actions * amps / math.pi
        rho = rho + np.cos(np.multiply.outer(k, freqs)) @ weights
    tail = 0.0
    for orbit in orbits:
        mag = abs(orbit.amplitude)
        if mag >= 1.0:
            tail = math.inf
            break
        tail += orbit.action * mag ** (rep_max + 1) / (1.0 - mag) / math.pi
    return DensityResult(
        values=rho,
        term_count=int(actions.size),
        rep_max=rep_max,
        amp_threshold=amp_threshold,
        tail_bound=tail,
    )


def series_term(action: float, amplitude_pow: float, rep: int, n, s0: float):
    """One (orbit, repetition) term of the explicit eigenvalue series."""
    omega = math.pi * action / s0
    n = np.asarray(n, dtype=float)
    val = (
        -(2.0 / math.pi)
        * amplitude_pow
        / (rep * rep * action)
        * math.sin(0.5 * rep * omega)
        * np.sin(rep * omega * n)
    )
    if val.ndim == 0:
        return float(val)
    return val


def _require_regular(chain, form):
    if form is None:
        form = expand_determinant(chain)
    if form.margin <= 0.0:
        raise RegularityError(
            f"regularity margin {form.margin:.6g} is not positive; the "
            "eigenvalue expansion is only established for certified regular chains"
        )
    return form


def eigenvalue_series(chain: ChainSpec, orbits, n, amp_threshold: float = 1e-8,
                      *, rep_max: int = 64, form: SpectralForm | None = None):
    """Explicit periodic-orbit value of the n-th eigenvalue.

    ``n`` may be a scalar index or an array of indices.  Refuses chains
    whose regularity margin is not positive.  With every orbit term
    dropped the series returns the average eigenvalue pi*n/S0 exactly.
    """
    _require_regular(chain, form)
    s0 = chain.total_action
    actions, amps, reps = _truncated_terms(orbits, amp_threshold, rep_max)
    n_arr = np.atleast_1d(np.asarray(n, dtype=float))
    k = math.pi * n_arr / s0
    if actions.size:
        omega = math.pi * actions / s0
        weights = (2.0 / math.pi) * amps / (reps * reps * actions) * np.sin(
            0.5 * reps * omega
        )
        k = k - np.sin(np.multiply.outer(n_arr, reps * omega)) @ weights
    if np.ndim(n) == 0:
        return float(k[0])
    return k


def eigenvalue_integral(chain: ChainSpec, orbits, n: int,
                        amp_threshold: float = 1e-8, *, rep_max: int = 64,
                        form: SpectralForm | None = None,
                        nodes: int | None = None) -> float:
    """First-moment quadrature of the truncated density over interval n.

    Independent cross-check of :func:`eigenvalue_series`: the separator
    interval around the n-th eigenvalue holds exactly one unit of spectral
    weight, so the first moment of the density over it converges to k_n.
    Uses Gauss-Legendre quadrature sized to the highest retained frequency.
    """
    form = _require_regular(chain, form)
    s0 = chain.total_action
    spacing = math.pi / s0
    lo = spacing * (n - 1 - (form.gamma0 - 1.0))
    hi = lo + spacing
    actions, amps, reps = _truncated_terms(orbits, amp_threshold, rep_max)
    freqs = reps * actions
    weights = actions * amps / math.pi
    if nodes is None:
        oscillations = (freqs.max() if freqs.size else 0.0) * spacing / (2.0 * math.pi)
        nodes = int(64 + 12 * math.ceil(oscillations))
    x, w = np.polynomial.legendre.leggauss(nodes)
    k = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    rho = np.full(k.shape, s0 / math.pi)
    if freqs.size:
        rho = rho + np.cos(np.multiply.outer(k, freqs)) @ weights
    return float(0.5 * (hi - lo) * np.sum(w * k * rho))
