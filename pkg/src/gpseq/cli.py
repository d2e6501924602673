"""Command-line benchmark harness.

Examples:
    gpseq-bench --objective oscillatory4d --methods mice-150,alc-150 \\
        --replicates 10 --budget 100 --seed 1 --out results/
    gpseq-bench --score-field mi --out fields/   # 2-D score-field dump

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (ExperimentConfig, clustered_grid_scenario, parse_arm,
                    run_experiment, score_field_dump)
from .exceptions import CholeskyFailure, ConfigError, GpseqError, NumericalBreakdown


def _load_config_file(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line: {line!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gpseq-bench", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="key=value config file; flags override")
    ap.add_argument("--objective", default="oscillatory4d")
    ap.add_argument("--methods", default="mice-150",
                    help="comma list, e.g. mice-150,alc-150,alm-1000,maximinlhd")
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--budget", type=int, default=150)
    ap.add_argument("--checkpoints", default="",
                    help="comma list of design sizes; default: every 5 plus 50,75,100,120")
    ap.add_argument("--tau-s", type=float, default=1.0)
    ap.add_argument("--tau2", type=float, default=1e-6)
    ap.add_argument("--mle-budget", type=int, default=1024)
    ap.add_argument("--mle-every", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--validate-size", type=int, default=1000)
    ap.add_argument("--out", default="gpseq-results")
    ap.add_argument("--score-field", default=None, metavar="CRITERION",
                    help="dump the clustered-grid 2-D score field instead of "
                         "running an experiment")
    return ap


def default_checkpoints(budget: int) -> tuple[int, ...]:
    cps = set(range(5, budget + 1, 5)) | ({50, 75, 100, 120} & set(range(budget + 1)))
    cps.add(budget)
    return tuple(sorted(c for c in cps if c <= budget))


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.config:
            file_vals = _load_config_file(args.config)
            for key, val in file_vals.items():
                if hasattr(args, key) and f"--{key.replace('_', '-')}" not in (argv or sys.argv):
                    cur = getattr(args, key)
                    setattr(args, key, type(cur)(val) if cur is not None else val)

        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.score_field:
            for variant, tag in ((False, "plain"), (True, "clustered")):
                model, pool = clustered_grid_scenario(extra_point=variant)
                sheet = score_field_dump(model, pool, args.score_field,
                                         tau2_s=args.tau_s,
                                         path=out_dir / f"field_{args.score_field}_{tag}.csv",
                                         debug_raw=True)
                print(f"{tag}: chosen candidate {sheet.chosen} "
                      f"(score {sheet.scores[sheet.chosen_index]:.6g})")
            return 0

        if args.checkpoints:
            checkpoints = tuple(int(v) for v in args.checkpoints.split(","))
        else:
            checkpoints = default_checkpoints(args.budget)
        methods = [parse_arm(tok, tau2_s=args.tau_s)
                   for tok in args.methods.split(",")]
        config = ExperimentConfig(
            objective=args.objective, methods=methods,
            replicates=args.replicates, budget_n=args.budget,
            validation_size=args.validate_size, checkpoints=checkpoints,
            base_seed=args.seed, tau2=args.tau2,
            mle_budget=args.mle_budget, mle_every=args.mle_every)
        table = run_experiment(config)
        out_path = out_dir / "results.csv"
        table.to_csv(out_path)
        print(f"wrote {out_path} ({len(table.rows)} rows)")
        return 0
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CholeskyFailure, NumericalBreakdown, GpseqError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
