"""Command-line entry point.

One subcommand per pipeline stage; CSV for per-row tables, JSON for
structured single objects.  Output is byte-stable given identical config,
flags, and seed.  Exit codes: 0 success, 1 validation error, 2
computational refusal (for example an eigenvalue expansion requested on a
chain that is not certified regular).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from . import __version__
from .chain import ChainSpec, ConfigError, load_chain_config, vertex_coefficients
from .expansion import expand_determinant
from .montecarlo import simulate
from .orbits import (
    RegularityError,
    density_of_states,
    eigenvalue_series,
    enumerate_orbits,
)
from .spectrum import classify_intervals, find_roots, separator_grid


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _default_threads() -> int:
    env = os.environ.get("CHAIN_SPECTRA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"CHAIN_SPECTRA_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_chain(args) -> ChainSpec:
    if not args.config:
        raise UsageError("--config is required for this command")
    return load_chain_config(args.config)


def _pairs_payload(form):
    return [
        {
            "amplitude": pair.amplitude,
            "action": pair.action,
            "gamma": pair.gamma,
            "self_paired": pair.self_paired,
        }
        for pair in form.pairs
    ]


def _cmd_validate(args) -> str:
    chain = _load_chain(args)
    return _json_dump(
        {
            "vertices": list(chain.vertices),
            "lambdas": list(chain.lambdas),
            "betas": list(chain.betas),
            "bond_actions": list(chain.bond_actions),
            "total_action": chain.total_action,
            "n_bonds": chain.n_bonds,
            "interior_reflection": [
                vertex_coefficients(chain, i).r for i in range(1, chain.n_bonds)
            ],
        }
    )


def _cmd_expand(args) -> str:
    chain = _load_chain(args)
    form = expand_determinant(chain)
    return _json_dump(
        {
            "s0": form.s0,
            "gamma0": form.gamma0,
            "margin": form.margin,
            "n_pairs": form.n_pairs,
            "pairs": _pairs_payload(form),
        }
    )


def _cmd_regularity(args) -> str:
    chain = _load_chain(args)
    form = expand_determinant(chain)
    verdict = "regular-guaranteed" if form.margin > 0 else "inconclusive"
    return _json_dump({"margin": form.margin, "verdict": verdict})


def _cmd_roots(args) -> str:
    chain = _load_chain(args)
    form = expand_determinant(chain)
    records = find_roots(form, range(1, args.nmax + 1), threads=args.threads)
    buf = io.StringIO()
    buf.write("n,separator_lo,separator_hi,k_n,residual\n")
    for rec in records:
        buf.write(
            f"{rec.n},{_fmt(rec.bracket[0])},{_fmt(rec.bracket[1])},"
            f"{_fmt(rec.root)},{_fmt(rec.residual)}\n"
        )
    return buf.getvalue()


def _cmd_intervals(args) -> str:
    chain = _load_chain(args)
    form = expand_determinant(chain)
    result = classify_intervals(form, range(1, args.nmax + 1))
    return _json_dump(
        {
            "n_first": result.n_first,
            "n_last": result.n_last,
            "histogram": {str(k): v for k, v in result.histogram().items()},
            "total_roots": result.total_roots,
            "expected_roots": result.n_last - result.n_first + 1,
            "all_ones": result.all_ones,
        }
    )


def _cmd_orbits(args) -> str:
    chain = _load_chain(args)
    orbits = enumerate_orbits(chain, args.max_bonds)
    buf = io.StringIO()
    buf.write("code,length,action,amplitude,primitive\n")
    for orbit in orbits:
        buf.write(
            f"{orbit.label},{orbit.length},{_fmt(orbit.action)},"
            f"{_fmt(orbit.amplitude)},{str(orbit.primitive).lower()}\n"
        )
    return buf.getvalue()


def _cmd_eigen(args) -> str:
    chain = _load_chain(args)
    form = expand_determinant(chain)
    orbits = enumerate_orbits(chain, args.max_bonds)
    indices = range(1, args.nmax + 1)
    series = eigenvalue_series(
        chain,
        orbits,
        list(indices),
        args.amp_threshold,
        rep_max=args.rep_max,
        form=form,
    )
    records = find_roots(form, indices, threads=args.threads)
    roots = {rec.n: rec.root for rec in records}
    buf = io.StringIO()
    buf.write("n,k_series,k_root,abs_error\n")
    for n, k_s in zip(indices, series):
        k_r = roots[n]
        buf.write(f"{n},{_fmt(k_s)},{_fmt(k_r)},{_fmt(abs(k_s - k_r))}\n")
    return buf.getvalue()


def _cmd_dos(args) -> str:
    import numpy as np

    chain = _load_chain(args)
    orbits = enumerate_orbits(chain, args.max_bonds)
    ks = np.linspace(args.kmin, args.kmax, args.samples)
    result = density_of_states(chain, orbits, ks, rep_max=args.rep_max)
    buf = io.StringIO()
    buf.write("k,rho\n")
    for k, rho in zip(ks, result.values):
        buf.write(f"{_fmt(k)},{_fmt(rho)}\n")
    return buf.getvalue()


def _cmd_simulate(args) -> str:
    chain = _load_chain(args)
    stats = simulate(
        chain, args.steps, args.seed, max_return_length=args.max_return_length
    )
    return _json_dump(stats.to_dict())


_COMMANDS = {
    "validate": _cmd_validate,
    "expand": _cmd_expand,
    "regularity": _cmd_regularity,
    "roots": _cmd_roots,
    "intervals": _cmd_intervals,
    "orbits": _cmd_orbits,
    "eigen": _cmd_eigen,
    "dos": _cmd_dos,
    "simulate": _cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="chain-spectra",
        description="Exact spectra of dressed linear chain graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads=False):
        p.add_argument("--config", help="chain configuration JSON file")
        p.add_argument("--output", help="write the artifact here instead of stdout")
        if threads:
            p.add_argument(
                "--threads",
                type=int,
                default=None,
                help="worker threads (default: CHAIN_SPECTRA_THREADS or CPU count)",
            )

    common(sub.add_parser("validate", help="echo the derived chain quantities"))
    common(sub.add_parser("expand", help="canonical determinant expansion as JSON"))
    common(sub.add_parser("regularity", help="regularity margin and verdict"))

    p = sub.add_parser("roots", help="eigenvalues per separator interval, CSV")
    common(p, threads=True)
    p.add_argument("--nmax", type=int, default=100)

    p = sub.add_parser("intervals", help="roots-per-interval histogram, JSON")
    common(p)
    p.add_argument("--nmax", type=int, default=100)

    p = sub.add_parser("orbits", help="primitive periodic orbits, CSV")
    common(p)
    p.add_argument("--max-bonds", type=int, default=12)

    p = sub.add_parser("eigen", help="eigenvalue series vs root finder, CSV")
    common(p, threads=True)
    p.add_argument("--nmax", type=int, default=50)
    p.add_argument("--amp-threshold", type=float, default=1e-8)
    p.add_argument("--max-bonds", type=int, default=16)
    p.add_argument("--rep-max", type=int, default=64)

    p = sub.add_parser("dos", help="truncated density of states on a grid, CSV")
    common(p)
    p.add_argument("--kmin", type=float, default=0.0)
    p.add_argument("--kmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--max-bonds", type=int, default=12)
    p.add_argument("--rep-max", type=int, default=32)

    p = sub.add_parser("simulate", help="stochastic scattering statistics, JSON")
    common(p)
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-return-length", type=int, default=16)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", "absent") is None:
            args.threads = _default_threads()
        text = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RegularityError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
