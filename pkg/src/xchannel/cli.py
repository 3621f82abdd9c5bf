"""Command-line entry point: ``xchannel <subcommand> ...``.

Exit codes: 0 pass, 1 verification failure or positive entropy gap,
2 usage or configuration error. ``--config file.toml`` supplies defaults
(top-level keys or a table named after the subcommand); flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .channel import ChannelModel
from .converse import exhaustive_check, sampled_check
from .harness import (
    SCHEMES,
    ExperimentConfig,
    ExperimentResult,
    export_ic_comparison,
    export_region,
    export_sumcap_sweep,
    parse_grid,
    run_experiment,
    verify,
)
from .schemes.common import SchemeReport


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xchannel", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="TOML file with default option values")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="export an (R1, R2) slice of the capacity region")
    p.add_argument("--p", type=float)
    p.add_argument("--r0", type=float)
    p.add_argument("--r01", type=float)
    p.add_argument("--r02", type=float)
    p.add_argument("--out")
    p.add_argument("--svg")

    p = sub.add_parser("simulate", help="run a scheme over seeded trials")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--r0", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check a simulation report against the region and its targets")
    p.add_argument("--report")
    p.add_argument("--tol", type=float)
    p.add_argument("--region-tol", type=float, dest="region_tol")

    p = sub.add_parser("entropy-check", help="search for encoder pairs violating the entropy inequality")
    p.add_argument("--claim", type=int, choices=(1, 2))
    p.add_argument("--n", type=int, choices=(1, 2))
    p.add_argument("--p", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("sumcap", help="export C_SUM over a grid of common rates")
    p.add_argument("--p", type=float)
    p.add_argument("--r0-grid", dest="r0_grid")
    p.add_argument("--out")
    p.add_argument("--svg")

    p = sub.add_parser("compare-ic", help="export X-Channel vs IC sum capacity over p")
    p.add_argument("--p-grid", dest="p_grid")
    p.add_argument("--out")
    p.add_argument("--svg")
    return ap


DEFAULTS = {
    "simulate": {"trials": 1, "seed": 0, "workers": 1},
    "verify": {"tol": 0.02},
    "entropy-check": {"claim": 2, "n": 1, "samples": 100_000, "seed": 0},
}
REQUIRED = {
    "region": ("p", "out"),
    "simulate": ("scheme", "p", "n", "out"),
    "verify": ("report",),
    "entropy-check": ("p",),
    "sumcap": ("p", "r0_grid", "out"),
    "compare-ic": ("p_grid", "out"),
}


def _options(args: argparse.Namespace) -> dict:
    file_opts: dict = {}
    if args.config:
        try:
            data = tomllib.loads(Path(args.config).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        file_opts = {k.replace("-", "_"): v for k, v in data.items() if not isinstance(v, dict)}
        section = data.get(args.command, {})
        file_opts.update({k.replace("-", "_"): v for k, v in section.items()})
    opts = dict(DEFAULTS.get(args.command, {}))
    opts.update(file_opts)
    opts.update({k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")})
    missing = [k for k in REQUIRED[args.command] if opts.get(k) is None]
    if missing:
        raise UsageError(f"{args.command}: missing --{', --'.join(m.replace('_', '-') for m in missing)}")
    return opts


def _region(o) -> int:
    sl = export_region(o.get("r0"), o["p"], o["out"], o.get("svg"), o.get("r01"), o.get("r02"))
    for x, y in sl.vertices:
        print(f"{x:.6f} {y:.6f}")
    return 0


def _simulate(o) -> int:
    cfg = ExperimentConfig(
        scheme=o["scheme"], p=o["p"], n=o["n"], trials=o["trials"], seed=o["seed"],
        r0=o.get("r0"), out=o["out"], workers=o["workers"],
    )
    result = run_experiment(cfg)
    verdict = verify(result, cfg.model, tol=1e-6, region_tol=1e-6)
    rates = ", ".join(f"{k}={v:.4f}" for k, v in result.mean_rates.items() if v)
    print(f"{cfg.scheme} p={cfg.p} n={cfg.n} trials={cfg.trials}: success {result.success_fraction:.2f}; {rates}")
    return 0 if verdict.criteria[0].passed and result.success_fraction > 0 else 1


def _load_report(path: str):
    data = json.loads(Path(path).read_text())
    if "reports" in data:
        res = ExperimentResult.from_dict(data)
        return res, res.p, res.targets
    rep = SchemeReport.from_dict(data)
    return rep, rep.p, data.get("targets", {})


def _verify(o) -> int:
    try:
        report, p, targets = _load_report(o["report"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read report {o['report']}: {exc}") from exc
    verdict = verify(report, ChannelModel(p), o["tol"], targets, o.get("region_tol"))
    for line in verdict.lines():
        print(line)
    print("PASS" if verdict.passed else "FAIL")
    return 0 if verdict.passed else 1


def _entropy(o) -> int:
    model = ChannelModel(o["p"])
    if o["n"] == 1:
        res = exhaustive_check(model, o["claim"])
    else:
        res = sampled_check(model, o["claim"], o["samples"], o["seed"])
    text = res.to_json(indent=2)
    if o.get("out"):
        Path(o["out"]).write_text(text + "\n")
    print(text)
    return 0 if res.passed else 1


def _sumcap(o) -> int:
    for r0, c in export_sumcap_sweep(o["p"], parse_grid(o["r0_grid"]), o["out"], o.get("svg")):
        print(f"{r0:.4f} {c:.6f}")
    return 0


def _compare(o) -> int:
    export_ic_comparison(parse_grid(o["p_grid"]), o["out"], o.get("svg"))
    return 0


COMMANDS = {
    "region": _region,
    "simulate": _simulate,
    "verify": _verify,
    "entropy-check": _entropy,
    "sumcap": _sumcap,
    "compare-ic": _compare,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](_options(args))
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
