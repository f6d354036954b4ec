"""Command-line entry point.

Exit status: 0 on success, 1 on a runtime failure or a failed check suite,
2 on bad flags or config. Errors are printed to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError, MixedRegError
from ..estimator import run_em
from ..initializer import GridConfig, grid_init, moment_matrix, proportion_init, random_init
from ..model import Observations, derive_seeds, generate, make_model
from . import experiments as ex
from . import io, lemmas
from .config import INIT_METHODS, SUITES, ExperimentConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _number_list(text: str) -> tuple:
    out = []
    for v in text.split(","):
        v = v.strip()
        if not v:
            continue
        try:
            out.append(int(v))
        except ValueError:
            try:
                out.append(float(v))
            except ValueError:
                raise argparse.ArgumentTypeError(f"not a number: {v!r}")
    return tuple(out)


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _common(p, experiment: bool):
    p.add_argument("--k", type=_int_list if experiment else int, help="dimension" +
                   (" (comma list)" if experiment else ""))
    p.add_argument("--n", type=_int_list if experiment else int, help="number of samples" +
                   (" (comma list)" if experiment else ""))
    p.add_argument("--p1", type=float, help="mixture weight of the first vector")
    p.add_argument("--delta", type=float, help="grid resolution in radians")
    p.add_argument("--t0", type=int, help="EM iterations")
    p.add_argument("--seed", type=int, help="seed (seed base for experiments)")
    p.add_argument("--init", choices=INIT_METHODS, help="initialization method")
    p.add_argument("--resample", type=_on_off, metavar="{on,off}")
    p.add_argument("--radius", type=float, help="norm of each true vector")
    p.add_argument("--inner-product", type=float, help="<beta1, beta2>")
    p.add_argument("--noise", type=float, help="noise standard deviation")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--config", type=Path, help="JSON config file")
    if experiment:
        p.add_argument("--ratios", type=_float_list, help="N/k grid (comma list)")
        p.add_argument("--trials", type=int, help="trials per cell")
        p.add_argument("--target", type=float, help="target success rate (sweep)")
        p.add_argument("--workers", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mixedreg", description="Mixed linear regression experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="draw a model and samples, write CSV + JSON")
    _common(p, experiment=False)

    p = sub.add_parser("solve", help="initialize and run EM on one data set")
    _common(p, experiment=False)
    p.add_argument("--data", type=Path, help="samples CSV from `gen` (columns x0.., y)")

    for name, text in (("sweep", "sample-complexity sweep"), ("phase", "phase-transition curves"),
                       ("trace", "error-vs-iteration curves, chosen init vs random")):
        p = sub.add_parser(name, help=text)
        _common(p, experiment=True)

    p = sub.add_parser("lemmas", help="numerical checks of the supporting lemmas")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--nmc", type=int, default=1_000_000, help="Monte-Carlo draws (cone suite)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("hardness", help="decide SubsetSum through the regression gadget")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--values", type=_number_list, help="comma-separated values")
    g.add_argument("--exhaustive", type=_int_list, metavar="MAX_K,MAX_VALUE",
                   help="check every multiset up to the given size and value")
    p.add_argument("--out", type=Path)
    return parser


_CFG_FLAGS = dict(p1="p1", delta="delta", t0="t0", seed="seed_base", init="init_method",
                  resample="resample", radius="radius", inner_product="inner_product",
                  noise="noise_sigma", ratios="ratios", trials="trials", target="target",
                  workers="workers")


def config_from_args(args, kind: str) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(kind=kind)
    changes = {dst: getattr(args, src, None) for src, dst in _CFG_FLAGS.items()}
    for src, dst in (("k", "k_values"), ("n", "n_values")):
        v = getattr(args, src, None)
        if v is not None:
            changes[dst] = v if isinstance(v, tuple) else (v,)
    return cfg.updated(kind=kind, **changes)


def _emit(obj):
    sys.stdout.write(io.json_text(obj))


def _write_result(out, res: ex.ExperimentResult, table_name: str, table_cols):
    if out is None:
        return
    io.write_csv(out / "trials.csv", ex.RAW_COLUMNS, [r.row() for r in res.raw])
    io.write_csv(out / "cells.csv", ex.CELL_COLUMNS, res.cells)
    if table_name:
        io.write_csv(out / table_name, table_cols, res.table)


def cmd_experiment(args) -> int:
    kind = {"sweep": "sample_complexity", "phase": "phase_transition",
            "trace": "convergence"}[args.command]
    cfg = config_from_args(args, kind)
    if cfg.n_values is None and cfg.ratios is None:
        raise InvalidInputError("give --n or --ratios (or set them in --config)")
    start = time.perf_counter()
    if kind == "sample_complexity":
        res = ex.sample_complexity_sweep(cfg)
        _write_result(args.out, res, "sweep.csv", ex.SWEEP_COLUMNS)
    elif kind == "phase_transition":
        res = ex.phase_transition(cfg)
        _write_result(args.out, res, "", ())
    else:
        res = ex.convergence_trace(cfg)
        _write_result(args.out, res, "curves.csv", ex.CURVE_COLUMNS)
        if args.out is not None:
            io.write_csv(args.out / "traces.csv", ex.TRACE_COLUMNS, res.summary["traces"])
        res.summary.pop("traces")
    summary = dict(res.summary, config=cfg.to_dict(), wall_time=time.perf_counter() - start)
    if args.out is not None:
        io.write_json(args.out / "summary.json", summary)
    _emit(summary)
    return 0


def _cell_from_args(args) -> ex.TrialCell:
    cfg = config_from_args(args, "phase_transition")
    k = cfg.k_values[0]
    n = cfg.n_values[0] if cfg.n_values else None
    if n is None:
        raise InvalidInputError("give --n")
    return ex.TrialCell.from_config(cfg, k, n, 0)


def cmd_gen(args) -> int:
    cell = _cell_from_args(args)
    model_seed, data_seed, _ = derive_seeds(cell.seed, 3)
    model = make_model(cell.k, cell.radius, cell.inner_product, cell.p1, model_seed)
    samples = generate(model, cell.n, cell.noise_sigma, data_seed)
    cols = [f"x{i}" for i in range(cell.k)] + ["y", "z"]
    rows = [dict(zip(cols, [*x, y, int(z)])) for x, y, z in
            zip(samples.xs, samples.ys, samples.zs)]
    meta = dict(seed=cell.seed, k=cell.k, n=cell.n, p1=model.p1, p2=model.p2,
                noise_sigma=cell.noise_sigma, beta1=model.beta1.tolist(),
                beta2=model.beta2.tolist())
    out = args.out or Path(".")
    io.write_csv(out / "samples.csv", cols, rows)
    io.write_json(out / "model.json", meta)
    _emit(dict(meta, samples=str(out / "samples.csv")))
    return 0


def _load_samples(path: Path, noise_sigma: float) -> Observations:
    rows = io.read_csv(path)
    if not rows:
        raise InvalidInputError(f"{path} has no samples")
    xcols = sorted((c for c in rows[0] if c.startswith("x")), key=lambda c: int(c[1:]))
    if not xcols or "y" not in rows[0]:
        raise InvalidInputError(f"{path} needs columns x0.. and y")
    xs = np.array([[float(r[c]) for c in xcols] for r in rows])
    ys = np.array([float(r["y"]) for r in rows])
    return Observations(xs, ys, noise_sigma)


def cmd_solve(args) -> int:
    if args.data is None:
        res = ex.solve_once(_cell_from_args(args))
    else:
        cfg = config_from_args(args, "phase_transition")
        obs = _load_samples(args.data, cfg.noise_sigma)
        if cfg.init_method == "random":
            init = random_init(obs.k, cfg.seed_base)
        else:
            spectrum = moment_matrix(obs)
            if cfg.init_method == "proportion":
                init = proportion_init(spectrum, cfg.p1, 1 - cfg.p1, obs,
                                       fallback_grid=GridConfig(cfg.delta or 0.3))
            else:
                if cfg.delta is None:
                    raise InvalidInputError("--delta is required with --data")
                init = grid_init(spectrum, GridConfig(cfg.delta), obs)
        trace = run_em(init.pair, obs, cfg.t0, resample=cfg.resample)
        res = ex.solution_summary(trace, obs) | dict(k=obs.k, n=len(obs),
                                                     init_method=init.method)
    if args.out is not None:
        io.write_json(args.out / "solve.json", res)
    _emit(res)
    return 0


def cmd_lemmas(args) -> int:
    if args.nmc < 10_000:
        raise InvalidInputError("--nmc must be at least 10000")
    results = lemmas.run_suites(args.suite, n_mc=args.nmc, seed=args.seed)
    summary = {}
    for name, (rows, verdict) in results.items():
        summary[name] = verdict
        if args.out is not None and rows:
            cols = list(rows[0])
            io.write_csv(args.out / f"lemma_{name}.csv", cols, rows)
    ok = all(v["ok"] for v in summary.values())
    summary = dict(all_passed=ok, suites=summary)
    if args.out is not None:
        io.write_json(args.out / "lemmas.json", summary)
    _emit(summary)
    return 0 if ok else 1


def cmd_hardness(args) -> int:
    if args.values is not None:
        res = lemmas.hardness_report(args.values)
        ok = res["agree"]
    else:
        if len(args.exhaustive) != 2:
            raise InvalidInputError("--exhaustive takes MAX_K,MAX_VALUE")
        res = lemmas.hardness_exhaustive(*args.exhaustive)
        ok = res["agree"] == res["instances"]
    if args.out is not None:
        io.write_json(args.out / "hardness.json", res)
    _emit(res)
    return 0 if ok else 1


COMMANDS = dict(gen=cmd_gen, solve=cmd_solve, sweep=cmd_experiment, phase=cmd_experiment,
                trace=cmd_experiment, lemmas=cmd_lemmas, hardness=cmd_hardness)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except InvalidInputError as exc:
        return _fail("usage", str(exc), 2)
    except FileNotFoundError as exc:
        return _fail("usage", str(exc), 2)
    except (MixedRegError, np.linalg.LinAlgError, OSError) as exc:
        return _fail("runtime", f"{type(exc).__name__}: {exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
