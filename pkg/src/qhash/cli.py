"""Command-line driver: ``qhash {build,overlap,goodset,bounds,sweep}``.

Exit codes: 0 ok, 2 usage or parse error, 3 capacity guard, 4 I/O error.
Every command prints one JSON record to stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import CapacityError, QHashError
from .goodset import (
    SamplerConfig,
    azuma_bound,
    bias_report,
    exhaustive_min_goodset,
    monte_carlo_bad_rate,
    required_size,
    sample_key,
    scaling_pool,
    verify_good,
)
from .groups import Automorphism, GroupSpec, parse_element, unit_group
from .hashing import HashParams, build_state, classical_hash, overlap_sq
from .records import (
    SWEEP_COLUMNS,
    RunManifest,
    dumps,
    make_record,
    parse_key,
    read_key_file,
    write_key_file,
    write_state_file,
)

log = logging.getLogger("qhash")

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_IO = 4


class UsageError(QHashError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _group(args) -> GroupSpec:
    if args.group is None:
        raise UsageError("--group is required")
    return GroupSpec.parse(args.group)


def _epsilon(args) -> float:
    return _floats(args.epsilon)[0] if args.epsilon is not None else 0.1


def _key(args, spec: GroupSpec, required: bool = True) -> list[Automorphism] | None:
    """Resolve --key (file, inline list or "units"), else sample from --size/--seed."""
    if args.key is not None:
        if args.key == "units":
            return unit_group(spec)
        if Path(args.key).is_file():
            file_spec, key, _ = read_key_file(args.key)
            if file_spec != spec:
                raise UsageError(f"key file is for group {file_spec}, not {spec}")
            return key
        return parse_key(spec, args.key)
    if args.size is not None:
        size = _ints(args.size)[0]
        return sample_key(SamplerConfig(spec, size, _epsilon(args), seed=args.seed))
    if required:
        raise UsageError("give --key or --size (with --seed) to choose automorphisms")
    return None


def _manifest(args, spec: GroupSpec | None, set_size, epsilon=None) -> RunManifest:
    return RunManifest(
        command=args.command if args.command != "goodset" else f"goodset:{args.mode}",
        group=list(spec.moduli) if spec is not None else [],
        epsilon=_epsilon(args) if epsilon is None else epsilon,
        set_size=set_size,
        seed=args.seed,
    )


def _emit(record: dict, out=None) -> None:
    text = dumps(record)
    if out is not None:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_build(args) -> None:
    spec = _group(args)
    key = _key(args, spec)
    params = HashParams(spec, tuple(key), _epsilon(args))
    g = classical_hash(spec, args.input or "")
    state = build_state(params, g)
    manifest = _manifest(args, spec, params.t)
    if args.out:
        write_state_file(args.out, spec, state, manifest)
    payload = {
        "dims": {"t": state.t, "m": state.m},
        "dimension": state.dim,
        "norm": float(np.linalg.norm(state.amplitudes)),
        "element": list(g.residues),
        "out": args.out,
    }
    print(dumps(make_record("state", manifest, payload)))


def cmd_overlap(args) -> None:
    spec = _group(args)
    key = _key(args, spec)
    eps = _epsilon(args)
    params = HashParams(spec, tuple(key), eps)
    x, y = args.x or "", args.y or ""
    value = overlap_sq(params, x, y)
    payload = {"x": x, "y": y, "overlap_sq": value, "epsilon": eps, "below_epsilon": value < eps}
    _emit(make_record("overlap", _manifest(args, spec, params.t), payload), args.out)


def _goodset_payload(mode: str, report, key) -> dict:
    payload = report.to_dict()
    payload.pop("seed")
    payload["mode"] = mode
    payload["multipliers"] = [list(k.multipliers) for k in key]
    return payload


def cmd_goodset(args) -> None:
    spec = _group(args)
    eps = _epsilon(args)
    mode = args.mode

    if mode == "sample":
        if args.size is None:
            raise UsageError("--mode sample needs --size")
        size = _ints(args.size)[0]
        key = sample_key(SamplerConfig(spec, size, eps, seed=args.seed))
        report = verify_good(spec, key, eps, seed=args.seed, threads=args.threads)
        manifest = _manifest(args, spec, size)
        if args.out:
            write_key_file(args.out, spec, key, manifest)
        print(dumps(make_record("goodset", manifest, _goodset_payload(mode, report, key))))
        return

    if mode == "verify":
        if args.key is None:
            raise UsageError("--mode verify needs --key")
        key = _key(args, spec)
        report = verify_good(spec, key, eps, seed=args.seed, threads=args.threads)
        record = make_record("goodset", _manifest(args, spec, len(key)), _goodset_payload(mode, report, key))
        _emit(record, args.out)
        return

    if mode == "search":
        if args.size is None:
            raise UsageError("--mode search needs --size (largest key size to try)")
        max_t = _ints(args.size)[0]
        found = exhaustive_min_goodset(spec, eps, max_t)
        payload = {"mode": "search", "found": found is not None, "max_t": max_t, "epsilon": eps}
        if found is not None:
            t_min, key = found
            payload["t_min"] = t_min
            payload["multipliers"] = [list(k.multipliers) for k in key]
            payload["delta"] = verify_good(spec, key, eps, threads=args.threads).delta
        _emit(make_record("goodset", _manifest(args, spec, max_t), payload), args.out)
        return

    if mode == "bias":
        if args.diagnostic:
            pool = scaling_pool(spec)
        else:
            pool = _key(args, spec, required=False) or unit_group(spec)
        report = bias_report(spec, pool, diagnostic=args.diagnostic)
        payload = {
            "max_abs_bias": report.max_abs_bias,
            "claimed_zero": report.claimed_zero,
            "pool_size": len(pool),
            "diagnostic": args.diagnostic,
            "per_element_bias": [
                [row.tolist(), float(b)] for row, b in zip(report.elements, report.biases)
            ],
        }
        _emit(make_record("bias", _manifest(args, spec, len(pool)), payload), args.out)
        return

    if mode == "montecarlo":
        if args.size is None:
            raise UsageError("--mode montecarlo needs --size")
        size = _ints(args.size)[0]
        trials = args.trials if args.trials is not None else 1000
        if trials < 100:
            raise UsageError(f"--trials must be >= 100 for Monte Carlo, got {trials}")
        config = SamplerConfig(spec, size, eps, seed=args.seed, trials=trials)
        fixed = parse_element(spec, args.fixed_g) if args.fixed_g else None
        result = monte_carlo_bad_rate(config, fixed_g=fixed, threads=args.threads)
        payload = result.to_dict()
        payload["warning"] = (
            f"trials * bound = {trials * result.bound:.3g} < 5; rate comparison is weak"
            if result.insufficient
            else None
        )
        _emit(make_record("montecarlo", _manifest(args, spec, size), payload), args.out)
        return

    raise UsageError(f"unknown mode {mode!r}")


def cmd_bounds(args) -> None:
    eps = _epsilon(args)
    spec = None
    if args.order is not None:
        order = args.order
    elif args.group is not None:
        spec = _group(args)
        order = spec.order
    else:
        raise UsageError("bounds needs --order or --group")
    paper = required_size(eps, order)
    union = required_size(eps, order, union_bound=True)
    payload = {
        "epsilon": eps,
        "group_order": order,
        "paper_size": paper,
        "union_size": union,
        "paper_azuma_bound": azuma_bound(eps, paper),
        "union_azuma_bound": azuma_bound(eps, union),
        "selected": "union" if args.union else "paper",
        "selected_size": union if args.union else paper,
    }
    manifest = _manifest(args, spec, payload["selected_size"])
    if spec is None:
        manifest.group = [order]
    _emit(make_record("bounds", manifest, payload), args.out)


def sweep_rows(spec, epsilons, sizes, seeds, trials, threads=1):
    for eps in epsilons:
        for t in sizes:
            for seed in seeds:
                config = SamplerConfig(spec, t, eps, seed=seed, trials=trials)
                key = sample_key(config)
                report = verify_good(spec, key, eps, seed=seed, threads=threads)
                mc = monte_carlo_bad_rate(config, threads=threads)
                log.debug("eps=%s t=%d seed=%d delta=%r", eps, t, seed, report.delta)
                yield {
                    "group": str(spec),
                    "epsilon": repr(eps),
                    "t": t,
                    "seed": seed,
                    "delta": repr(report.delta),
                    "is_good": str(report.is_good).lower(),
                    "azuma_bound": repr(report.martingale_bound),
                    "bad_rate": repr(mc.rate),
                    "stderr": repr(mc.stderr),
                }


def cmd_sweep(args) -> None:
    spec = _group(args)
    if args.out is None:
        raise UsageError("sweep needs --out for the CSV file")
    epsilons = _floats(args.epsilon) if args.epsilon is not None else [0.1]
    if args.size is None:
        raise UsageError("sweep needs --size (comma-separated key sizes)")
    sizes = _ints(args.size)
    if args.seeds is not None:
        seeds = list(range(args.seed, args.seed + args.seeds))
    else:
        seeds = [args.seed]
    trials = args.trials if args.trials is not None else 100
    if not epsilons or not sizes or not seeds:
        raise UsageError("sweep ranges must be non-empty")
    manifest = _manifest(args, spec, sizes, epsilon=epsilons)
    manifest.seed = seeds
    rows = list(sweep_rows(spec, epsilons, sizes, seeds, trials, threads=args.threads))
    with open(args.out, "w", newline="") as fh:
        # one comment line carries the manifest; read back with comment="#"
        fh.write("# " + json.dumps(manifest.to_dict(), separators=(",", ":")) + "\n")
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    payload = {"rows": len(rows), "out": str(args.out), "columns": list(SWEEP_COLUMNS)}
    print(dumps(make_record("sweep", manifest, payload)))


COMMANDS = {
    "build": cmd_build,
    "overlap": cmd_overlap,
    "goodset": cmd_goodset,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", help='cyclic moduli joined by "x", e.g. 4x3x5')
    common.add_argument("--epsilon", help="collision bound (comma list for sweep)")
    common.add_argument("--size", help="key size t (comma list for sweep; max t for search)")
    common.add_argument("--seed", type=int, default=0, help="master 64-bit seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--key", help='key file, inline key like "1,2,3,4", or "units"')
    common.add_argument("--out", help="output file")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qhash", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="build and save a hash state")
    p.add_argument("--input", default="", help="message bits")

    p = sub.add_parser("overlap", parents=[common], help="squared overlap of two hash states")
    p.add_argument("--x", default="", help="first message bits")
    p.add_argument("--y", default="", help="second message bits")

    p = sub.add_parser("goodset", parents=[common], help="sample, verify or search good key sets")
    p.add_argument("--mode", required=True, choices=["sample", "verify", "search", "bias", "montecarlo"])
    p.add_argument("--fixed-g", help='element for per-element Monte Carlo, e.g. "1" or "1x0"')
    p.add_argument("--diagnostic", action="store_true", help="bias over all scalings, not just units")

    p = sub.add_parser("bounds", parents=[common], help="key sizes from the Azuma bound")
    p.add_argument("--order", type=int, help="group order |G| (instead of --group)")
    p.add_argument("--union", action="store_true", help="select the union-bound size")

    p = sub.add_parser("sweep", parents=[common], help="grid of sampled keys to CSV")
    p.add_argument("--seeds", type=int, help="number of consecutive seeds starting at --seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.threads < 1:
        print("qhash: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"qhash: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except QHashError as exc:
        print(f"qhash: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qhash: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
