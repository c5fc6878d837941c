"""Command-line experiment runner.

    coded-consensus run --scenario s.yaml [--format csv|json] [--out PATH] [--seed N] [--sweep-d 8,32]
    coded-consensus sweep --scenario DIR [...]
    coded-consensus predict --n 4 --t 1 --D 8 --L 800 [--B 9]
    coded-consensus selftest

Exit status is 0 when every verdict passes and 1 otherwise.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import metrics
from .bitcast import bits_per_bit
from .simnet import (
    Scenario,
    load_scenario,
    make_inputs,
    run_scenario,
    with_symbol_width,
)

log = logging.getLogger("coded_consensus")


def _parse_d_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _expand(sc: Scenario, seed: int | None, d_list: list[int] | None) -> list[Scenario]:
    if seed is not None:
        spec = sc.input_spec or {"common": "random"}
        sc = replace(sc, seed=seed, inputs=make_inputs(spec, sc.n, sc.L, seed))
    if not d_list:
        return [sc]
    k = sc.n - 2 * sc.t
    out = []
    for D in d_list:
        if D % k:
            raise ValueError(f"D={D} is not a multiple of n-2t={k}")
        s = with_symbol_width(sc, D // k)
        out.append(replace(s, name=f"{sc.name}@D={D}"))
    return out


def _run_all(scenarios: list[Scenario]):
    rows, details = [], []
    for sc in scenarios:
        try:
            res = run_scenario(sc)
        except Exception as exc:
            log.error("%s: %s", sc.name, exc)
            rows.append({"scenario": sc.name, "n": sc.n, "t": sc.t, "verdict": f"error: {exc}"})
            details.append({"scenario": sc.name, "error": str(exc)})
            continue
        rows.append(metrics.summary_row(res))
        details.append({
            "summary": rows[-1],
            "report": res.report.to_dict(),
            "verdicts": [v.__dict__ for v in metrics.compare(res.report)],
            "violations": res.violations,
            "log": res.log,
        })
    return rows, details


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields: list[str] = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _report(rows, details, fmt: str, out: str | None) -> int:
    if fmt == "json":
        _emit(json.dumps({"rows": rows, "runs": details}, indent=2, sort_keys=True) + "\n", out)
    else:
        _emit(_csv(rows), out)
    return 0 if rows and all(r.get("verdict") == "pass" for r in rows) else 1


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    rows, details = _run_all(_expand(sc, args.seed, args.sweep_d))
    return _report(rows, details, args.format, args.out)


def cmd_sweep(args) -> int:
    root = Path(args.scenario)
    files = sorted(list(root.glob("*.yaml")) + list(root.glob("*.yml"))) if root.is_dir() else [root]
    scenarios = []
    for f in files:
        scenarios += _expand(load_scenario(f), args.seed, args.sweep_d)
    rows, details = _run_all(scenarios)
    if not rows:
        _emit("" if args.format == "csv" else json.dumps({"rows": [], "runs": []}) + "\n", args.out)
        return 0
    return _report(rows, details, args.format, args.out)


def cmd_predict(args) -> int:
    B = args.B if args.B is not None else bits_per_bit(args.n, args.t)
    pred = metrics.predict(args.n, args.t, args.D, args.L, B)
    row = pred.to_dict()
    row["B_source"] = "given" if args.B is not None else "measured"
    if args.t >= 1:
        row["optimal_D"] = metrics.optimal_D(args.n, args.t, args.L)
    if args.format == "json":
        _emit(json.dumps(row, indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(_csv([row]), args.out)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftests

    results = run_selftests()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coded-consensus", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario_help):
        sp.add_argument("--scenario", required=True, help=scenario_help)
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, help="override the scenario seed (regenerates random inputs)")
        sp.add_argument("--sweep-d", type=_parse_d_list, help="comma-separated generation sizes D")

    common(sub.add_parser("run", help="run one scenario file"), "scenario YAML file")
    common(sub.add_parser("sweep", help="run every scenario in a directory"), "directory of scenario YAML files")

    pr = sub.add_parser("predict", help="evaluate the complexity bounds")
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--t", type=int, required=True)
    pr.add_argument("--D", type=int, required=True)
    pr.add_argument("--L", type=int, required=True)
    pr.add_argument("--B", type=int, help="bits per broadcast bit (default: measured)")
    pr.add_argument("--format", choices=("csv", "json"), default="csv")
    pr.add_argument("--out")

    sub.add_parser("selftest", help="run the built-in oracle suites")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "predict": cmd_predict, "selftest": cmd_selftest}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
