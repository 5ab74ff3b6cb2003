"""Batch command-line front end.

Subcommands: ``gen`` (synthetic datasets), ``discover`` (mechanism-count
recovery on a CSV), ``bounds`` (resample-count tables), ``reproduce``
(reference tables 1-4 at a chosen scale), ``simulate`` (system traces).

Every command is reproducible from its flags plus the master seed (flag
``--seed``, falling back to the METACAUSAL_SEED environment variable, then
0).  Commands that write files also write a manifest JSON recording the
command, the configuration snapshot, the seeds, and the artifact paths;
JSON results name their manifest, CSV artifacts are named by it.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import reference_values as ref
from . import reproduce
from .bounds import (
    expected_success_prob,
    lower_bound_success_prob,
    required_resamples,
)
from .datagen import (
    CsvFormatError,
    class_probabilities,
    generate_dataset,
    read_dataset_csv,
    sample_mechanisms,
    write_dataset_csv,
)
from .discovery import DiscoveryConfig, recover_mechanism_count
from .systems import follower, locks, stress, tag

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _default_seed() -> int:
    try:
        return int(os.environ.get("METACAUSAL_SEED", "0"))
    except ValueError:
        return 0


def _manifest_path(out: Path) -> Path:
    return out.with_suffix(out.suffix + ".manifest.json")


def _write_manifest(
    out: Path,
    command: str,
    config: dict,
    master_seed: int,
    task_seeds: list[int],
    artifacts: list[str],
    budget_seconds: float | None,
) -> Path:
    path = _manifest_path(out)
    payload = {
        "command": command,
        "config": config,
        "master_seed": master_seed,
        "task_seeds": task_seeds,
        "artifacts": artifacts,
        "wall_clock_budget_seconds": budget_seconds,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _print_csv(rows: list[dict]) -> None:
    if not rows:
        return
    writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    mechs = sample_mechanisms(args.k, rng)
    probs = class_probabilities(args.k, args.dev)
    dataset = generate_dataset(mechs, probs, rng, n_per_class_avg=args.n, seed=args.seed)
    out = Path(args.out)
    write_dataset_csv(dataset, out)
    manifest = _write_manifest(
        out,
        "gen",
        {"k": args.k, "dev": args.dev, "n_per_class": args.n},
        args.seed,
        [args.seed],
        [out.name, out.name + ".meta.json"],
        args.budget,
    )
    print(f"wrote {out} ({dataset.m} points), manifest {manifest.name}")
    return EXIT_OK


def cmd_discover(args) -> int:
    dataset = read_dataset_csv(Path(args.data))
    config = DiscoveryConfig(
        k_max=args.kmax,
        max_class_dev=args.dev,
        resample_mode=args.mode,
        master_seed=args.seed,
        dominance_rule=args.dominance_rule,
    )
    result = recover_mechanism_count(dataset, config)
    out = Path(args.out)
    payload = {
        "k_hat": result.k_hat,
        "decided": result.decided,
        "master_seed": args.seed,
        "manifest": _manifest_path(out).name,
        "per_k": {
            str(k): {
                "resamples": diag.resamples,
                "passed": diag.passed,
                "log_likelihood": diag.state.log_likelihood,
                "mechanisms": [
                    {
                        "alpha": m.alpha,
                        "beta": m.beta,
                        "b": m.b,
                        "direction": m.direction.value,
                    }
                    for m in diag.state.mechanisms
                ],
                "ad_tests": [
                    None
                    if r is None
                    else {
                        "statistic": r.statistic,
                        "critical_value": r.critical_value,
                        "passed": r.passed,
                        "n": r.n,
                    }
                    for r in diag.ad_results
                ],
            }
            for k, diag in result.per_k.items()
        },
    }
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(
        out,
        "discover",
        {
            "data": str(args.data),
            "kmax": args.kmax,
            "dev": args.dev,
            "mode": args.mode,
            "dominance_rule": args.dominance_rule,
        },
        args.seed,
        [args.seed],
        [out.name],
        args.budget,
    )
    print(f"k_hat = {result.k_hat} ({'decided' if result.decided else 'no decision'}), wrote {out}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    devs = [float(d) for d in args.devs.split(",")]
    for d in devs:
        if not 0.0 <= d < 1.0:
            raise SystemExit(_usage(f"class deviation must lie in [0, 1), got {d}"))
    rows = []
    for d in devs:
        for n in range(1, args.n_max + 1):
            p_exp = expected_success_prob(n)
            p_low = lower_bound_success_prob(n, d)
            rows.append(
                {
                    "d": d,
                    "n": n,
                    "expected_prob": p_exp,
                    "lower_bound_prob": p_low,
                    "resamples_expected": required_resamples(p_exp, args.confidence),
                    "resamples_lower_bound": required_resamples(p_low, args.confidence),
                }
            )
    _print_csv(rows)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    common = dict(master_seed=args.seed, workers=args.workers)
    if args.table == 2:
        rows = reproduce.table2_rows()
    elif args.table == 1:
        rows = reproduce.table1_rows(
            scale=args.scale, only_k=args.k, only_d=args.dev, **common
        )
    elif args.table == 3:
        rows = reproduce.table3_rows(
            scale=args.scale, only_k=args.k, only_d=args.dev, **common
        )
    elif args.table == 4:
        rows = reproduce.table4_rows(
            scale=args.scale, only_k=args.k, only_d=args.dev, **common
        )
    else:
        raise SystemExit(_usage(f"unknown table {args.table}"))
    if args.out:
        out = Path(args.out)
        _write_csv(out, rows)
        _write_manifest(
            out,
            f"reproduce {args.table}",
            {"scale": args.scale, "k": args.k, "dev": args.dev, "workers": args.workers},
            args.seed,
            [args.seed],
            [out.name],
            args.budget,
        )
        print(f"wrote {out}")
    else:
        _print_csv(rows)
    return EXIT_OK


def _simulate_stress(args) -> list[dict]:
    schedule: list[float] = []
    if args.ext_schedule:
        with open(args.ext_schedule, newline="", encoding="utf-8") as f:
            for rownum, row in enumerate(csv.reader(f), start=1):
                if not row or row[0].strip().lower() == "ext":
                    continue
                try:
                    schedule.append(float(row[0]))
                except ValueError as exc:
                    raise CsvFormatError(str(exc), rownum) from exc
    state = stress.StressState(s=args.s0)
    rows = []
    for t in range(args.steps):
        ext = schedule[t] if t < len(schedule) else 0.0
        state = stress.StressState(s=state.s, ext=ext, d_internal=state.d_internal)
        nxt = stress.stress_step(state)
        rows.append(
            {
                "step": t,
                "s": state.s,
                "ext": ext,
                "decayed": nxt.d_internal,
                "next_s": nxt.s,
                "self_type": stress.stress_identify(state.s).label,
                # cobweb columns: the closed-loop response vs the identity
                "loop_response": min(1.0, max(0.0, stress.sigmoid_response(0.95 * state.s))),
                "identity": state.s,
            }
        )
        state = nxt
    return rows


def _simulate_tag(args, rng) -> list[dict]:
    states = tag.run_episode(args.steps, rng)
    rows = []
    for t, (prev, curr) in enumerate(zip(states, states[1:])):
        matrix = tag.tag_identify(prev, curr)
        rows.append(
            {
                "step": t,
                "a_x": curr.a_pos[0],
                "a_y": curr.a_pos[1],
                "b_x": curr.b_pos[0],
                "b_y": curr.b_pos[1],
                "edge_b_to_a": matrix.label(1, 0).label,
                "edge_a_to_b": matrix.label(0, 1).label,
                "chaser_truth": prev.chaser,
                "tag_event": int(prev.chaser != curr.chaser),
            }
        )
    return rows


def _simulate_follower(args, rng) -> list[dict]:
    rows = []
    for policy in (follower.Policy.FOLLOWING, follower.Policy.STANDING_STILL):
        trace = follower.simulate_follower_trace(policy, args.steps, rng)
        ident = follower.follower_identify(policy, trace)
        for t, (a, b) in enumerate(trace):
            rows.append(
                {
                    "policy": policy.value,
                    "step": t,
                    "a_pos": a,
                    "b_pos": b,
                    "edge_b_to_a": "following" if ident.edge_present else "none",
                    "meta_root_cause": ident.meta_root_cause,
                }
            )
    return rows


def _simulate_locks(args) -> list[dict]:
    state = locks.LocksState()
    rows = []
    for t, lock_index in enumerate((1, 2)):
        attribution = locks.locks_attribution(state, lock_index)
        rows.append(
            {
                "step": t,
                "action": f"open_lock{lock_index}",
                "classical_delta": attribution.classical_delta,
                "meta_changed": attribution.meta_changed,
                "state_before": str(attribution.before),
                "state_after": str(attribution.after),
            }
        )
        state = locks.LocksState(
            lock1=locks.Lock.OPEN,
            lock2=locks.Lock.OPEN if lock_index == 2 else state.lock2,
        )
    return rows


def cmd_simulate(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.system == "stress":
        rows = _simulate_stress(args)
    elif args.system == "tag":
        rows = _simulate_tag(args, rng)
    elif args.system == "follower":
        rows = _simulate_follower(args, rng)
    elif args.system == "locks":
        rows = _simulate_locks(args)
    else:
        raise SystemExit(_usage(f"unknown system {args.system!r}"))
    if args.out:
        out = Path(args.out)
        _write_csv(out, rows)
        _write_manifest(
            out,
            f"simulate {args.system}",
            {"steps": args.steps, "s0": getattr(args, "s0", None)},
            args.seed,
            [args.seed],
            [out.name],
            args.budget,
        )
        print(f"wrote {out} ({len(rows)} rows)")
    else:
        _print_csv(rows)
    return EXIT_OK


def _usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metacausal",
        description="Switching causal mechanisms: datasets, discovery, bounds, "
        "reference-table reproduction, and system simulations.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=_default_seed(),
        help="master seed (default: METACAUSAL_SEED env var, then 0)",
    )
    common.add_argument(
        "--budget",
        type=float,
        default=None,
        help="advisory wall-clock budget in seconds, recorded in manifests",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "gen", parents=[common], help="generate a synthetic switching-mechanism dataset"
    )
    p.add_argument("--k", type=int, required=True, choices=range(1, 5), metavar="K")
    p.add_argument("--dev", type=float, default=0.0, help="max class deviation in [0,1)")
    p.add_argument("--n", type=int, default=500, help="average points per class")
    p.add_argument("--out", default="dataset.csv")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("discover", parents=[common], help="recover the mechanism count from a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="discovery.json")
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--dev", type=float, default=0.0)
    p.add_argument("--mode", choices=("empirical", "theoretical"), default="empirical")
    p.add_argument("--dominance-rule", choices=("relative", "remainder"), default="relative")
    p.set_defaults(fn=cmd_discover)

    p = sub.add_parser("bounds", parents=[common], help="print restart-probability and resample tables")
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--devs", default="0.0,0.1,0.2", help="comma-separated deviations")
    p.add_argument("--confidence", type=float, default=0.95)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("reproduce", parents=[common], help="re-measure a reference table at a given scale")
    p.add_argument("table", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--scale", type=float, default=0.3)
    p.add_argument("--k", type=int, default=None, help="restrict to one mechanism count")
    p.add_argument("--dev", type=float, default=None, help="restrict to one deviation")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("simulate", parents=[common], help="run a system and emit its labeled trace")
    p.add_argument("--system", required=True, choices=("tag", "stress", "follower", "locks"))
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--s0", type=float, default=0.8, help="stress: initial level")
    p.add_argument(
        "--ext-schedule",
        default=None,
        help="stress: CSV with one external-stressor value per step",
    )
    p.add_argument("--out", default=None, help="write trace CSV here instead of stdout")
    p.set_defaults(fn=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except CsvFormatError as exc:
        print(f"error: malformed CSV: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
