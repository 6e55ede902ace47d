"""Command-line interface.

Subcommands: ``fit`` (dataset -> engine archive), ``recommend`` (engine +
covariates + weights -> recommendation document, locally or against a
running service), ``simulate`` (scenario -> accuracy report), ``aggregate``
(rank lists file -> aggregated ordering), ``serve`` (engine archives ->
HTTP service). All structured outputs are canonical JSON, byte-identical
for identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .archive import load_engine, save_engine
from .data import load_dataset
from .engine import EngineConfig, fit_engine, recommend
from .errors import PTSelectError
from .jsonio import canonical_json
from .rankagg import AggregationProblem, RankedList, aggregate_exact, exact_minimizers, psi, ranks_from_values
from .simulation import run_scenario, scenario_preset

__all__ = ["main"]


def _parse_floats(raw: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        raise SystemExit(f"error: usage: {flag} must be a comma-separated list of numbers")


def _write_json(payload: dict, out: str | None) -> None:
    text = canonical_json(payload) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_fit(args) -> int:
    cfg_dict = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    config = EngineConfig.from_dict(cfg_dict) if cfg_dict else EngineConfig()
    dataset = load_dataset(args.data, args.manifest)
    engine = fit_engine(dataset, config=config)
    save_engine(engine, args.out)
    diag = engine.diagnostics()
    print(
        f"fitted J={engine.J} K={engine.K} r={engine.r} -> {args.out} "
        f"(floored weights: {diag['floored_ipcw_weights']})",
        file=sys.stderr,
    )
    return 0


def _cmd_recommend(args) -> int:
    covariates = _parse_floats(args.covariates, "--covariates")
    weights = _parse_floats(args.weights, "--weights")
    if sum(weights) <= 0:
        raise SystemExit("error: usage: --weights must sum to a positive value")
    if args.url:
        import httpx

        body = {"covariates": covariates, "weights": weights, "seed": args.seed}
        if args.rho is not None:
            body["rho"] = args.rho
        resp = httpx.post(f"{args.url}/engines/{args.engine_id}/recommend", json=body)
        if resp.status_code != 200:
            print(f"error: service: {resp.status_code}: {resp.text.strip()}", file=sys.stderr)
            return 1
        if args.out is None or args.out == "-":
            sys.stdout.buffer.write(resp.content)
        else:
            Path(args.out).write_bytes(resp.content)
        return 0
    engine = load_engine(args.engine)
    rec = recommend(engine, covariates, weights, rho=args.rho, seed=args.seed)
    _write_json(rec.to_dict(), args.out)
    return 0


def _cmd_simulate(args) -> int:
    if args.preset:
        cfg = scenario_preset(args.preset, replicates=args.replicates, seed=args.seed)
    else:
        raise SystemExit("error: usage: --preset is required (see docs/formats.md for names)")

    def progress(done, total):
        if done % 10 == 0 or done == total:
            print(f"replicate {done}/{total}", file=sys.stderr)

    report = run_scenario(cfg, progress=progress if args.verbose else None)
    _write_json(report.to_dict(), args.out)
    if args.csv:
        with Path(args.csv).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["replicate", "k_star", "truth", "hit", "low_confidence"])
            for row in report.per_replicate:
                writer.writerow(
                    [row["replicate"], row["k_star"], row["truth"], int(row["hit"]), int(row["low_confidence"])]
                )
    print(
        f"accuracy {report.accuracy:.4f} [{report.ci_low:.4f}, {report.ci_high:.4f}] "
        f"hits={report.hits} excluded={report.excluded} wall={report.wall_clock_s:.1f}s",
        file=sys.stderr,
    )
    return 1 if report.failed_threshold_exceeded else 0


def _cmd_aggregate(args) -> int:
    doc = json.loads(Path(args.lists).read_text())
    rng = np.random.default_rng(args.seed)
    lists = []
    for entry in doc["lists"]:
        if "ranks" in entry:
            ranks = tuple(int(v) for v in entry["ranks"])
            k = len(ranks)
            values = entry.get("values") or [float(k + 1 - q) for q in ranks]
            lists.append(RankedList(ranks=ranks, values=tuple(float(v) for v in values)))
        else:
            lists.append(ranks_from_values(entry["values"], rng))
    weights = doc.get("weights") or [1.0] * len(lists)
    problem = AggregationProblem(
        lists=tuple(lists), weights=tuple(float(w) for w in weights), rho=float(doc.get("rho", 1.0))
    )
    best_psi, argmins = exact_minimizers(problem)
    v_star = argmins[int(rng.integers(len(argmins)))] if len(argmins) > 1 else argmins[0]
    _write_json(
        {
            "schema": "ptselect.aggregation/1",
            "v_star": list(v_star),
            "k_star": v_star.index(1) + 1,
            "psi": best_psi,
            "tie_break": len(argmins) > 1,
        },
        args.out,
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .archive import load_engine as _load
    from .jsonio import canonical_bytes, digest
    from .service import EngineStore, create_app

    store = EngineStore()
    for path in args.engine:
        engine = _load(path)
        engine_id = digest(Path(path).read_bytes())
        store.put(engine_id, engine)
        print(f"loaded {path} as {engine_id}", file=sys.stderr)
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptselect")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit an engine from a dataset")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--manifest", default=None)
    p_fit.add_argument("--config", default=None, help="EngineConfig JSON file")
    p_fit.add_argument("--seed", type=int, default=None)
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=_cmd_fit)

    p_rec = sub.add_parser("recommend", help="recommend an arm for a covariate vector")
    p_rec.add_argument("--engine", help="engine archive path (local mode)")
    p_rec.add_argument("--url", help="service base URL (thin-client mode)")
    p_rec.add_argument("--engine-id", help="engine id at the service")
    p_rec.add_argument("--covariates", required=True)
    p_rec.add_argument("--weights", required=True)
    p_rec.add_argument("--rho", type=float, default=None)
    p_rec.add_argument("--seed", type=int, default=0)
    p_rec.add_argument("--out", default=None)
    p_rec.set_defaults(func=_cmd_recommend)

    p_sim = sub.add_parser("simulate", help="run a scenario and report accuracy")
    p_sim.add_argument("--preset", required=False, help="e.g. ms1-j4-n100-none")
    p_sim.add_argument("--replicates", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--csv", default=None)
    p_sim.add_argument("--verbose", action="store_true")
    p_sim.set_defaults(func=_cmd_simulate)

    p_agg = sub.add_parser("aggregate", help="aggregate ranked lists from a JSON file")
    p_agg.add_argument("--lists", required=True)
    p_agg.add_argument("--seed", type=int, default=0)
    p_agg.add_argument("--out", default=None)
    p_agg.set_defaults(func=_cmd_aggregate)

    p_srv = sub.add_parser("serve", help="serve fitted engines over HTTP")
    p_srv.add_argument("--engine", action="append", default=[], help="engine archive to preload")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8321)
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "recommend" and not args.url and not args.engine:
        print("error: usage: recommend needs --engine or --url", file=sys.stderr)
        return 2
    if args.command == "recommend" and args.url and not args.engine_id:
        print("error: usage: --url mode needs --engine-id", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 2
        raise
    except (PTSelectError, ValueError, TypeError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
