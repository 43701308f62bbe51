"""Command-line interface.

Subcommands:

* ``codegen``  — construct a code and write it to a JSON file.
* ``evaluate`` — load a code file, evaluate the optimal recovery at one noise
  point, and print a JSON result.
* ``sweep``    — run a noise-grid sweep and write CSV/manifest outputs.
* ``wigner``   — quasiprobability map of a code word on a square grid, as CSV.

Exit codes: 0 success; 2 validation/usage errors (bad arguments or malformed
input files); 3 solver failure; 4 I/O errors (missing files, unwritable
outputs).  The master seed for random families comes from ``--seed``, else the
``ROTCODE_SEED`` environment variable, else 2024.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from rotcode import __version__
from rotcode.haar_sampling import SeededRng
from rotcode.noise_channel import NoisePoint, loss_dephasing_channel
from rotcode.optimal_recovery import (
    SolverFailure,
    build_recovery_problem,
    solve_optimal_recovery,
)
from rotcode.rotation_codes import (
    Code,
    avg_photon,
    binomial_code,
    cat_code,
    one_rand_code,
    trivial_code,
    two_rand_code,
)
from rotcode.sweep import (
    DEFAULT_SEED,
    SCHEMA_VERSION,
    SweepConfig,
    phase_diagram,
    write_compare_csv,
    write_manifest,
    write_records_csv,
    write_summary_csv,
)
from rotcode.wigner import PhaseGrid, wigner

__all__ = ["main", "code_to_json", "code_from_json"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _word_to_sparse(word: np.ndarray) -> dict:
    """Sparse {fock_index: [re, im]} map; json round-trips floats bit-exactly."""
    out = {}
    for index in np.nonzero(word)[0]:
        amp = word[index]
        out[str(int(index))] = [float(amp.real), float(amp.imag)]
    return out


def _word_from_sparse(payload: dict, dim: int) -> np.ndarray:
    word = np.zeros(dim, dtype=complex)
    for key, (re, im) in payload.items():
        index = int(key)
        if not 0 <= index < dim:
            raise ValueError(f"fock index {index} outside cutoff {dim}")
        word[index] = complex(re, im)
    return word


def code_to_json(code: Code) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "family": code.family,
        "N": code.N,
        "params": dict(code.params),
        "seeds": list(code.seeds),
        "cutoff_D": code.dim,
        "nbar_code": avg_photon(code),
        "zero_word": _word_to_sparse(code.zero_word),
        "one_word": _word_to_sparse(code.one_word),
    }


def code_from_json(payload: dict) -> Code:
    try:
        version = payload["schema_version"]
        if version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported code schema_version {version} (expected {SCHEMA_VERSION})"
            )
        dim = int(payload["cutoff_D"])
        code = Code(
            family=str(payload["family"]).upper(),
            N=int(payload["N"]),
            zero_word=_word_from_sparse(payload["zero_word"], dim),
            one_word=_word_from_sparse(payload["one_word"], dim),
            params=dict(payload.get("params", {})),
            seeds=tuple(payload.get("seeds", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed code file: {exc}") from exc
    return code


def _load_code(path: str) -> Code:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise ValueError("malformed code file: top level must be an object")
    return code_from_json(payload)


def _master_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("ROTCODE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"ROTCODE_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def _cmd_codegen(args: argparse.Namespace) -> int:
    family = args.family.upper()
    if family == "TRIV":
        code = trivial_code()
    elif family == "BIN":
        if args.K is None:
            raise ValueError("--K is required for the binomial family")
        code = binomial_code(args.N, args.K)
    elif family == "CAT":
        if args.alpha is None:
            raise ValueError("--alpha is required for the cat family")
        code = cat_code(args.N, args.alpha)
    elif family in ("RAND1", "RAND2"):
        if args.K is None:
            raise ValueError(f"--K is required for the {family} family")
        rng = SeededRng.from_key(_master_seed(args), f"codegen|{family}|N={args.N}|K={args.K}")
        if family == "RAND1":
            code = one_rand_code(args.N, args.K, rng=rng)
        else:
            code = two_rand_code(args.N, args.K, rng=rng)
    else:
        raise ValueError(f"unknown family {args.family!r}")
    payload = code_to_json(code)
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(
        f"wrote {family} code (N={code.N}, D={code.dim}, "
        f"nbar={payload['nbar_code']:.6g}) to {args.out}"
    )
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    code = _load_code(args.code_file)
    noise = NoisePoint(args.kl, args.kphi)
    channel = loss_dephasing_channel(noise, code.dim)
    problem = build_recovery_problem(code, channel)
    solution = solve_optimal_recovery(problem)
    if solution.solver_status == "failed":
        print(f"solver failed: {solution.diagnostics}", file=sys.stderr)
        return EXIT_SOLVER
    result = {
        "schema_version": SCHEMA_VERSION,
        "family": code.family,
        "N": code.N,
        "kappa_l_t": noise.kappa_l_t,
        "kappa_phi_t": noise.kappa_phi_t,
        "cutoff_D": code.dim,
        "support_dim": problem.support_dim,
        "fidelity": solution.fidelity,
        "infidelity": 1.0 - solution.fidelity,
        "solver_status": solution.solver_status,
        "solver_name": solution.solver_name,
        "runtime_s": solution.runtime,
    }
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    os.makedirs(args.out, exist_ok=True)
    config = SweepConfig(
        families=tuple(f.upper() for f in args.families),
        N_set=tuple(args.N_set),
        bin_K_range=(args.bin_K_min, args.bin_K_max),
        rand_K_range=(args.rand_K_min, args.rand_K_max),
        trials=args.trials,
        noise_min=args.noise_min,
        noise_max=args.noise_max,
        points_per_decade=args.points_per_decade,
        kl_axis=tuple(args.kl) if args.kl else None,
        kphi_axis=tuple(args.kphi) if args.kphi else None,
        master_seed=_master_seed(args),
        output_dir=args.out,
        jobs=args.jobs,
    )
    cells, records = phase_diagram(config)
    write_records_csv(records, os.path.join(args.out, "records.csv"))
    write_summary_csv(cells, os.path.join(args.out, "summary.csv"))
    write_manifest(config, os.path.join(args.out, "manifest.json"))
    ordered = sorted(config.families, key=lambda f: f.upper())
    for i, fam_a in enumerate(ordered):
        for fam_b in ordered[i + 1 :]:
            name = f"compare_{fam_a}_vs_{fam_b}.csv"
            write_compare_csv(cells, fam_a, fam_b, os.path.join(args.out, name))
    n_failed = sum(1 for r in records if r.solver_status == "failed")
    print(
        f"swept {len(cells)} noise cells, {len(records)} evaluations "
        f"({n_failed} failed) -> {args.out}"
    )
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be 'min:max:count', got {spec!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo or count < 2:
        raise ValueError(f"grid needs finite min < max and count >= 2, got {spec!r}")
    return np.linspace(lo, hi, count)


def _cmd_wigner(args: argparse.Namespace) -> int:
    code = _load_code(args.code_file)
    words = {
        "zero": code.zero_word,
        "one": code.one_word,
        "plus": code.plus_word(),
        "minus": code.minus_word(),
    }
    word = words[args.word]
    rho = np.outer(word, word.conj())
    axis = _parse_grid(args.grid)
    grid = PhaseGrid(axis, axis)
    values = wigner(rho, grid)
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        handle.write("# convention: hbar=1, alpha=(x+ip)/sqrt(2)\n")
        handle.write("# convention: integral of W over the x,p plane is 1\n")
        handle.write("x,p,W\n")
        for i, x in enumerate(axis):
            for j, p in enumerate(axis):
                handle.write(f"{_fmt(x)},{_fmt(p)},{_fmt(values[i, j])}\n")
    print(
        f"wrote {len(axis)}x{len(axis)} map of the {args.word} word "
        f"(peak |W| = {np.abs(values).max():.6g}) to {args.out}"
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotcode",
        description="Bosonic rotation codes under loss and dephasing with "
        "optimal recovery.",
    )
    parser.add_argument("--version", action="version", version=f"rotcode {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    codegen = sub.add_parser("codegen", help="construct a code and save it as JSON")
    codegen.add_argument(
        "--family",
        required=True,
        type=str,
        help="one of triv, bin, cat, rand1, rand2 (case-insensitive)",
    )
    codegen.add_argument("--N", type=int, default=2, help="rotation order (default 2)")
    codegen.add_argument("--K", type=int, default=None, help="ladder parameter")
    codegen.add_argument("--alpha", type=float, default=None, help="cat amplitude")
    codegen.add_argument("--seed", type=int, default=None, help="master seed")
    codegen.add_argument("--out", required=True, help="output JSON path")
    codegen.set_defaults(func=_cmd_codegen)

    evaluate = sub.add_parser(
        "evaluate", help="optimal-recovery fidelity of a code at one noise point"
    )
    evaluate.add_argument("--code-file", required=True, help="code JSON path")
    evaluate.add_argument("--kl", required=True, type=float, help="loss strength")
    evaluate.add_argument("--kphi", required=True, type=float, help="dephasing strength")
    evaluate.set_defaults(func=_cmd_evaluate)

    sweep = sub.add_parser("sweep", help="noise-grid sweep with CSV outputs")
    sweep.add_argument(
        "--families",
        nargs="+",
        default=["TRIV", "BIN", "CAT", "RAND1", "RAND2"],
        help="families to include",
    )
    sweep.add_argument(
        "--N-set", dest="N_set", nargs="+", type=int, default=[2, 3, 4],
        help="rotation orders to scan",
    )
    sweep.add_argument("--bin-K-min", type=int, default=1)
    sweep.add_argument("--bin-K-max", type=int, default=8)
    sweep.add_argument("--rand-K-min", type=int, default=1)
    sweep.add_argument("--rand-K-max", type=int, default=6)
    sweep.add_argument("--trials", type=int, default=50, help="random-code trials per K")
    sweep.add_argument("--noise-min", type=float, default=1e-3)
    sweep.add_argument("--noise-max", type=float, default=0.25)
    sweep.add_argument("--points-per-decade", type=int, default=5)
    sweep.add_argument(
        "--kl", nargs="+", type=float, default=None,
        help="explicit loss-axis values (overrides the log grid)",
    )
    sweep.add_argument(
        "--kphi", nargs="+", type=float, default=None,
        help="explicit dephasing-axis values (overrides the log grid)",
    )
    sweep.add_argument("--seed", type=int, default=None, help="master seed")
    sweep.add_argument("--jobs", type=int, default=1, help="parallel workers")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.set_defaults(func=_cmd_sweep)

    wigner_cmd = sub.add_parser(
        "wigner", help="quasiprobability map of a code word as CSV"
    )
    wigner_cmd.add_argument("--code-file", required=True, help="code JSON path")
    wigner_cmd.add_argument(
        "--word",
        choices=["zero", "one", "plus", "minus"],
        default="zero",
        help="which code word to map",
    )
    wigner_cmd.add_argument(
        "--grid",
        default="-4:4:81",
        help="'min:max:count' applied to both quadrature axes "
        "(write --grid=-4:4:81 when min is negative)",
    )
    wigner_cmd.add_argument("--out", required=True, help="output CSV path")
    wigner_cmd.set_defaults(func=_cmd_wigner)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help/--version.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
