"""Command line interface.

Subcommands: ``generate``, ``mix``, ``separate``, ``evaluate``, ``benchmark``
and ``rerun``.  Matrices travel as CSV, everything else as JSON.  Each command
writes a manifest recording its argv, seeds, inputs, outputs and phase
timings; ``igbss rerun MANIFEST`` replays it.

Exit codes: 0 success, 2 no convergence, 64 usage error, 65 data-format
error, 74 I/O error.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import MixingSpec, gen_mixing, gen_pointcloud, gen_timeseries, mix
from .io import DataFormatError, _jsonable, read_json, read_matrix_csv, write_json, write_matrix_csv
from .loglinear import empirical_distribution
from .optimizer import FitConfig, OptimizationError, fit
from .pipeline import evaluate, separate
from .poset import build_sample_space

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 2, 64, 65, 74

log = logging.getLogger("igbss")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers, got %r" % text) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="igbss", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version="igbss " + __version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic source fixture")
    g.add_argument("kind", choices=["timeseries", "pointcloud"])
    g.add_argument("--samples", type=int, default=500, help="time-series length")
    g.add_argument("--count", type=int, default=1000, help="point-cloud size")
    g.add_argument("--noise", type=float, default=0.0, help="Gaussian noise std for time series")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)

    m = sub.add_parser("mix", help="mix source signals, optionally with higher-order terms")
    m.add_argument("--sources", required=True, help="source CSV (N x M)")
    m.add_argument("--order", type=int, default=1)
    m.add_argument("--received", type=int, default=None, help="number of mixed signals (default N)")
    m.add_argument("--lo", type=float, default=1.0)
    m.add_argument("--hi", type=float, default=6.0)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--spec", default=None, help="use this mixing-spec JSON instead of drawing one")
    m.add_argument("--spec-out", default=None, help="where to write the spec (default OUTPUT.spec.json)")
    m.add_argument("-o", "--output", required=True)

    s = sub.add_parser("separate", help="recover source signals from a received CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--sources", type=int, required=True)
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--norm", choices=["sum", "minmax", "exp"], default="sum")
    s.add_argument("--eps", type=float, default=None, help="min-max offset (default 1e-3 of the range)")
    s.add_argument("--optimizer", choices=["gd", "ng"], default="ng")
    s.add_argument("--lr", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--damping", type=float, default=1e-9)
    s.add_argument("--init", choices=["zeros", "random"], default="zeros")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True, help="output directory")

    e = sub.add_parser("evaluate", help="score recovered signals against ground truth")
    e.add_argument("--recovered", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--allow-sign", action="store_true")
    e.add_argument("-o", "--output", default=None, help="metrics JSON path (default: stdout only)")

    b = sub.add_parser("benchmark", help="aggregate RMSE/SNR/runtime tables")
    b.add_argument("--preset", choices=["timeseries", "scaling"], required=True)
    b.add_argument("--orders", type=_int_list, default=[1, 2, 3])
    b.add_argument("--seeds", type=_int_list, default=[0])
    b.add_argument("--samples", type=_int_list, default=None,
                   help="M values (scaling default 100,200,400,800; timeseries default 500)")
    b.add_argument("--optimizers", default="gd,ng", help="scaling preset only")
    b.add_argument("-o", "--output", required=True, help="output directory")

    r = sub.add_parser("rerun", help="replay the command recorded in a manifest")
    r.add_argument("manifest")
    return p


# manifest --------------------------------------------------------------

class _Run:
    def __init__(self, argv: list[str], args: argparse.Namespace):
        self.argv = argv
        self.args = args
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.timings: dict[str, float] = {}
        self.extra: dict = {}
        self._t = time.perf_counter()

    def phase(self, name: str) -> None:
        t = time.perf_counter()
        self.timings[name] = self.timings.get(name, 0.0) + t - self._t
        self._t = t

    def write(self, path: Path) -> None:
        flags = {k: v for k, v in vars(self.args).items() if k != "command"}
        manifest = {
            "command": self.args.command,
            "argv": self.argv,
            "flags": flags,
            "seeds": {k: v for k, v in flags.items() if "seed" in k},
            "inputs": self.inputs,
            "outputs": self.outputs + [str(path)],
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "timings": self.timings,
            **self.extra,
        }
        write_json(path, manifest)


def _out(run: _Run, path: str | Path) -> Path:
    path = Path(path)
    run.outputs.append(str(path))
    return path


# commands --------------------------------------------------------------

def cmd_generate(run: _Run) -> int:
    a = run.args
    if a.kind == "timeseries":
        Z = gen_timeseries(a.samples, noise=a.noise, seed=a.seed)
    else:
        Z = gen_pointcloud(a.count, seed=a.seed)
    run.phase("generate")
    write_matrix_csv(_out(run, a.output), Z)
    run.phase("write")
    run.write(Path(a.output + ".manifest.json"))
    return EXIT_OK


def cmd_mix(run: _Run) -> int:
    a = run.args
    run.inputs.append(a.sources)
    Z = read_matrix_csv(a.sources)
    if a.spec:
        run.inputs.append(a.spec)
        spec = MixingSpec.from_dict(read_json(a.spec))
    else:
        spec = gen_mixing(a.received or Z.shape[0], Z.shape[0], a.order, a.lo, a.hi, a.seed)
    run.phase("read")
    X = mix(Z, spec)
    run.phase("mix")
    write_matrix_csv(_out(run, a.output), X)
    write_json(_out(run, a.spec_out or a.output + ".spec.json"), spec.to_dict())
    run.phase("write")
    run.write(Path(a.output + ".manifest.json"))
    return EXIT_OK


def cmd_separate(run: _Run) -> int:
    a = run.args
    run.inputs.append(a.input)
    X = read_matrix_csv(a.input)
    run.phase("read")
    config = FitConfig(method=a.optimizer, lr=a.lr, tol=a.tol, max_iter=a.max_iter,
                       damping=a.damping, init=a.init, seed=a.seed)
    result = separate(X, a.sources, a.order, a.norm, config, eps=a.eps)
    run.phase("separate")
    outdir = Path(a.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(_out(run, outdir / "recovered.csv"), result.recovered)
    write_json(_out(run, outdir / "mixing_theta.json"), result.mixing_params_json())
    write_json(_out(run, outdir / "report.json"),
               {**result.report.to_dict(), "normalization": result.normalization.to_dict(),
                "space": {"L": X.shape[0], "N": a.sources, "M": X.shape[1], "order": a.order}})
    run.phase("write")
    run.extra["iterations"] = result.report.iterations
    run.write(outdir / "manifest.json")
    if not result.report.converged:
        print("igbss: no convergence after %d iterations (max |grad| %.3g)"
              % (result.report.iterations, result.report.final_grad_inf_norm), file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_evaluate(run: _Run) -> int:
    a = run.args
    run.inputs += [a.recovered, a.truth]
    Zhat, Z = read_matrix_csv(a.recovered), read_matrix_csv(a.truth)
    if Zhat.shape != Z.shape:
        raise DataFormatError("recovered %s and truth %s shapes differ" % (Zhat.shape, Z.shape))
    run.phase("read")
    metrics = evaluate(Zhat, Z, allow_sign=a.allow_sign)
    metrics.pop("matched")
    metrics["allow_sign"] = a.allow_sign
    run.phase("evaluate")
    sys.stdout.write(json.dumps(_jsonable(metrics), indent=2, sort_keys=True) + "\n")
    if a.output:
        write_json(_out(run, a.output), metrics)
        run.write(Path(a.output + ".manifest.json"))
    return EXIT_OK


# benchmark ---------------------------------------------------------------

TIMESERIES_COLUMNS = ["order", "norm", "optimizer", "seed", "samples", "rmse", "snr_db",
                      "iterations", "converged", "runtime_s"]
SCALING_COLUMNS = ["order", "samples", "optimizer", "seed", "omega", "params", "iterations",
                   "runtime_s", "per_iter_s", "p_eta_s", "fisher_s", "solve_s"]
RUNTIME_COLUMNS = {"runtime_s", "per_iter_s", "p_eta_s", "fisher_s", "solve_s"}
SCALING_ITERS = {"gd": 200, "ng": 3}


def _timeseries_task(order: int, norm: str, seed: int, samples: int) -> dict:
    Z = gen_timeseries(samples)
    X = mix(Z, gen_mixing(3, 3, order, 0.5, 2.0, seed))
    t0 = time.perf_counter()
    res = separate(X, 3, order, norm, FitConfig(method="ng"))
    runtime = time.perf_counter() - t0
    m = evaluate(res.recovered, Z)
    return {"order": order, "norm": norm, "optimizer": "ng", "seed": seed, "samples": samples,
            "rmse": m["rmse"], "snr_db": m["snr_db"], "iterations": res.report.iterations,
            "converged": res.report.converged, "runtime_s": runtime}


def _scaling_task(order: int, samples: int, optimizer: str, seed: int) -> dict:
    Z = gen_timeseries(samples)
    X = mix(Z, gen_mixing(3, 3, order, 0.5, 2.0, seed))
    space = build_sample_space(3, 3, samples, order)
    emp = empirical_distribution(space, X, "minmax")
    # fixed iteration budget: the tolerance is unreachable on purpose
    config = FitConfig(method=optimizer, tol=1e-300, max_iter=SCALING_ITERS[optimizer])
    t0 = time.perf_counter()
    _, rep = fit(space, emp, config)
    runtime = time.perf_counter() - t0
    tm = rep.timings
    return {"order": order, "samples": samples, "optimizer": optimizer, "seed": seed,
            "omega": len(space), "params": space.n_params, "iterations": rep.iterations,
            "runtime_s": runtime, "per_iter_s": runtime / max(rep.iterations, 1),
            "p_eta_s": tm.get("p_eta", 0.0), "fisher_s": tm.get("fisher", 0.0),
            "solve_s": tm.get("solve", 0.0)}


def _threads() -> int:
    env = os.environ.get("IGBSS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError("IGBSS_THREADS must be an integer, got %r" % env) from None
    return 1


def run_benchmark(preset: str, orders: list[int], seeds: list[int], samples: list[int] | None = None,
                  optimizers: list[str] = ("gd", "ng")) -> tuple[list[str], list[dict]]:
    """Run a benchmark preset and return ``(columns, rows)`` in a fixed order."""
    if preset == "timeseries":
        samples = samples or [500]
        tasks = [(_timeseries_task, (k, norm, seed, M))
                 for k in orders for norm in ("minmax", "exp") for seed in seeds for M in samples]
        columns = TIMESERIES_COLUMNS
    elif preset == "scaling":
        samples = samples or [100, 200, 400, 800]
        tasks = [(_scaling_task, (k, M, opt, seed))
                 for k in orders for M in samples for opt in optimizers for seed in seeds]
        columns = SCALING_COLUMNS
    else:
        raise UsageError("unknown preset %r" % preset)
    for k in orders:
        if not 1 <= k <= 3:
            raise UsageError("orders must lie in 1..3 for the three-source presets")
    n = _threads()
    if n == 1 or preset == "scaling":
        # timing runs stay sequential so they do not compete for cores
        rows = [f(*args) for f, args in tasks]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(lambda t: t[0](*t[1]), tasks))
    return columns, rows


def cmd_benchmark(run: _Run) -> int:
    a = run.args
    optimizers = [o for o in a.optimizers.split(",") if o]
    if set(optimizers) - {"gd", "ng"}:
        raise UsageError("--optimizers accepts gd and ng only")
    columns, rows = run_benchmark(a.preset, a.orders, a.seeds, a.samples, optimizers)
    run.phase("benchmark")
    outdir = Path(a.output)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(_out(run, outdir / "table.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    write_json(_out(run, outdir / "table.json"), {"preset": a.preset, "columns": columns,
                                                  "runtime_columns": sorted(RUNTIME_COLUMNS & set(columns)),
                                                  "rows": rows})
    run.phase("write")
    run.write(outdir / "manifest.json")
    return EXIT_OK


def cmd_rerun(run: _Run) -> int:
    manifest = read_json(run.args.manifest)
    argv = manifest.get("argv")
    if not isinstance(argv, list) or not argv or argv[0] == "rerun":
        raise DataFormatError("%s: manifest has no replayable argv" % run.args.manifest)
    return main(argv)


COMMANDS = {
    "generate": cmd_generate,
    "mix": cmd_mix,
    "separate": cmd_separate,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
    "rerun": cmd_rerun,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    run = _Run(argv, args)
    try:
        return COMMANDS[args.command](run)
    except UsageError as exc:
        print("igbss: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, ValueError, KeyError, OptimizationError) as exc:
        print("igbss: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print("igbss: %s" % exc, file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
