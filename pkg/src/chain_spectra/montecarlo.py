"""Classical stochastic scattering on the chain.

In the classical limit the quantum vertex amplitudes become transition
probabilities: a walker arriving at an interior vertex reflects with
probability r**2 and transmits with t**2, forgets everything after each
event, and always reflects at the walls.  The walk is a Markov chain on
directed bonds whose transition matrix is doubly stochastic, so the
stationary occupation is uniform; the simulation statistics are checked
against that exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec
from .orbits import directed_transitions


@dataclass(frozen=True)
class WalkStatistics:
    """Counts gathered from one seeded walk.

    ``vertex_encounters``/``vertex_reflections`` are indexed by vertex
    (0..N, walls included).  ``outcome_pairs`` holds, per interior vertex,
    the 2x2 table of (previous outcome, current outcome) over consecutive
    encounters at that vertex, with index 0 = reflected, 1 = transmitted.
    ``periodic_returns[L]`` counts steps on the same directed bond as L
    steps earlier.
    """

    steps: int
    seed: int
    start_state: int
    vertex_encounters: tuple[int, ...]
    vertex_reflections: tuple[int, ...]
    bond_occupation: tuple[int, ...]
    outcome_pairs: dict[int, tuple[tuple[int, int], tuple[int, int]]]
    periodic_returns: dict[int, int]

    def reflection_frequency(self, vertex: int) -> float:
        enc = self.vertex_encounters[vertex]
        if enc == 0:
            return float("nan")
        return self.vertex_reflections[vertex] / enc

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "seed": self.seed,
            "start_state": self.start_state,
            "vertex_encounters": list(self.vertex_encounters),
            "vertex_reflections": list(self.vertex_reflections),
            "vertex_reflection_frequency": [
                (self.vertex_reflections[v] / e if e else None)
                for v, e in enumerate(self.vertex_encounters)
            ],
            "bond_occupation": list(self.bond_occupation),
            "outcome_pairs": {
                str(v): [list(row) for row in table]
                for v, table in sorted(self.outcome_pairs.items())
            },
            "periodic_returns": {
                str(length): count
                for length, count in sorted(self.periodic_returns.items())
            },
        }


def transition_matrix(chain: ChainSpec) -> np.ndarray:
    """Classical transition probabilities over directed bonds (column = from)."""
    n = 2 * chain.n_bonds
    p = np.zeros((n, n))
    for src, moves in directed_transitions(chain).items():
        for dst, amp in moves:
            p[dst, src] = amp * amp
    return p


def stationary_distribution(chain: ChainSpec) -> np.ndarray:
    """Stationary occupation of the walk, by eigen-solving the transition matrix."""
    p = transition_matrix(chain)
    eigvals, eigvecs = np.linalg.eig(p)
    idx = int(np.argmin(np.abs(eigvals - 1.0)))
    v = np.real(eigvecs[:, idx])
    v = np.abs(v)
    return v / v.sum()


def simulate(chain: ChainSpec, steps: int, seed: int, *,
             max_return_length: int = 0, start_state: int = 0) -> WalkStatistics:
    """Run one seeded walk of ``steps`` scattering events.

    Fully reproducible: the same seed gives bitwise-identical statistics.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n_bonds = chain.n_bonds
    n_states = 2 * n_bonds
    if not 0 <= start_state < n_states:
        raise ValueError(f"start_state must lie in [0, {n_states})")

    # Per-state tables: vertex hit, reflection probability, transmit target.
    vertex_of = np.empty(n_states, dtype=np.int64)
    p_reflect = np.empty(n_states)
    transmit_to = np.full(n_states, -1, dtype=np.int64)
    for idx in range(n_states):
        bond = idx // 2 + 1
        to_right = idx % 2 == 0
        vertex = bond if to_right else bond - 1
        vertex_of[idx] = vertex
        if vertex == 0 or vertex == n_bonds:
            p_reflect[idx] = 1.0
        else:
            from .chain import vertex_coefficients

            r = vertex_coefficients(chain, vertex).r
            p_reflect[idx] = r * r
            transmit_to[idx] = 2 * bond if to_right else 2 * (bond - 2) + 1

    rng = np.random.default_rng(seed)
    draws = rng.random(steps)

    encounters = [0] * (n_bonds + 1)
    reflections = [0] * (n_bonds + 1)
    occupation = [0] * n_states
    pair_tables = {v: [[0, 0], [0, 0]] for v in range(1, n_bonds)}
    last_outcome: dict[int, int | None] = {v: None for v in range(1, n_bonds)}
    sequence = np.empty(steps + 1, dtype=np.int64)
    sequence[0] = start_state

    state = start_state
    for j in range(steps):
        occupation[state] += 1
        vertex = int(vertex_of[state])
        encounters[vertex] += 1
        pr = p_reflect[state]
        reflected = True if pr >= 1.0 else draws[j] < pr
        if reflected:
            reflections[vertex] += 1
        if 0 < vertex < n_bonds:
            outcome = 0 if reflected else 1
            prev = last_outcome[vertex]
            if prev is not None:
                pair_tables[vertex][prev][outcome] += 1
            last_outcome[vertex] = outcome
        state = state ^ 1 if reflected else int(transmit_to[state])
        sequence[j + 1] = state

    returns = {}
    for length in range(1, max_return_length + 1):
        returns[length] = int(np.sum(sequence[length:] == sequence[:-length]))

    return WalkStatistics(
        steps=steps,
        seed=seed,
        start_state=start_state,
        vertex_encounters=tuple(encounters),
        vertex_reflections=tuple(reflections),
        bond_occupation=tuple(occupation),
        outcome_pairs={
            v: (tuple(t[0]), tuple(t[1])) for v, t in pair_tables.items()
        },
        periodic_returns=returns,
    )
