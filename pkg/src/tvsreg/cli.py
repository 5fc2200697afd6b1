"""``tvs`` command-line entry point.

    tvs simulate --config sim.json --out DIR [--seed N]
    tvs fit --data data.csv --config fit.json --out DIR [--seed N]
    tvs compare --result result.json --truth truth.json --out DIR

Every command writes into a staging directory first and moves the files
into ``--out`` only after all of them were produced, so a failed run leaves
nothing behind.
"""

from __future__ import annotations

import argparse
import shutil
import sys
import tempfile
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import HAS_NUMBA
from .fit import FitConfig, fit
from .io import DataFormatError, read_data_csv, read_json, write_csv, write_json
from .model import TVSError, apply_shifts, decompose
from .search import SearchConfig
from .simulate import SimConfig, simulate

FIT_KEYS = {"beta_bounds", "intercept_bounds", "sigma_eps_bounds", "lambda_tau_bounds",
            "population_size", "max_generations", "mutation", "crossover", "tol",
            "n_iters", "proposal_size", "tau_max", "seed", "rng_seed"}
INNER_KEYS = ("n_iters", "proposal_size", "tau_max")


class CliError(Exception):
    pass


def fit_config_from_dict(d: dict, seed=None) -> FitConfig:
    unknown = set(d) - FIT_KEYS
    if unknown:
        raise CliError(f"unknown fit config keys: {sorted(unknown)}")
    d = dict(d)
    inner = SearchConfig(**{k: d.pop(k) for k in INNER_KEYS if k in d})
    if "seed" in d:
        d["rng_seed"] = d.pop("seed")
    if seed is not None:
        d["rng_seed"] = seed
    for key in ("beta_bounds", "intercept_bounds", "sigma_eps_bounds", "lambda_tau_bounds"):
        if key in d:
            d[key] = tuple(float(v) for v in d[key])
    return FitConfig(inner=inner, **d)


def fit_config_to_dict(cfg: FitConfig) -> dict:
    d = asdict(cfg)
    inner = d.pop("inner")
    d.update({k: inner[k] for k in INNER_KEYS})
    d["tau_max"] = cfg.resolved_inner().tau_max
    for key in ("beta_bounds", "intercept_bounds", "sigma_eps_bounds", "lambda_tau_bounds"):
        d[key] = list(d[key])
    return d


def _floats(d: dict) -> dict:
    return {k: float(v) for k, v in d.items()}


def _manifest(command: str, config: dict, seeds: dict, files: list[str], t0: float) -> dict:
    return {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "seeds": seeds,
        "files": files,
        "duration_s": time.perf_counter() - t0,
        "version": __version__,
        "numba": HAS_NUMBA,
    }


class Staging:
    """Collect outputs in a temp dir next to ``out``; publish on success."""

    def __init__(self, out: Path):
        self.out = Path(out)
        self.tmp = None

    def __enter__(self):
        parent = self.out.resolve().parent
        try:
            parent.mkdir(parents=True, exist_ok=True)
            self.tmp = Path(tempfile.mkdtemp(prefix=".tvs-", dir=parent))
        except OSError as exc:
            raise CliError(f"cannot write to {parent}: {exc.strerror}") from exc
        return self

    def path(self, name: str) -> Path:
        return self.tmp / name

    def publish(self) -> list[str]:
        created = not self.out.exists()
        moved = []
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            for f in sorted(self.tmp.iterdir()):
                dest = self.out / f.name
                shutil.move(str(f), dest)
                moved.append(dest)
        except OSError as exc:
            for dest in moved:
                dest.unlink(missing_ok=True)
            if created:
                shutil.rmtree(self.out, ignore_errors=True)
            raise CliError(f"cannot write to {self.out}: {exc.strerror}") from exc
        return [str(p) for p in moved]

    def __exit__(self, *exc):
        if self.tmp is not None:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    raw = read_json(args.config)
    if args.seed is not None:
        raw = {k: v for k, v in raw.items() if k not in ("seed", "rng_seed")}
        raw["rng_seed"] = args.seed
    cfg = SimConfig.from_dict(raw)
    sim = simulate(cfg)
    imp = decompose(sim.x)
    names = ["data.csv", "truth.json", "manifest.json"]
    with Staging(args.out) as st:
        write_csv(st.path("data.csv"), ["t", "x", "y", "shifted_effect"],
                  [np.arange(cfg.n), sim.x.values, sim.y.values, sim.shifted_effect.values])
        truth = {
            "params": {"beta": float(cfg.beta), "intercept": float(cfg.intercept),
                       "sigma_eps": float(cfg.sigma_eps), "lambda_tau": float(cfg.lambda_tau)},
            "realized_shift_mean": sim.realized_shift_mean,
            "n": cfg.n,
            "k": imp.k,
            "positions": [int(p) for p in imp.positions],
            "amplitudes": [float(a) for a in imp.amplitudes],
            "shifts": sim.true_shifts.tolist(),
        }
        write_json(st.path("truth.json"), truth)
        files = [str(Path(args.out) / n) for n in names]
        write_json(st.path("manifest.json"),
                   _manifest("simulate", cfg.to_dict(), {"rng_seed": cfg.rng_seed}, files, t0))
        st.publish()
    print(f"wrote {', '.join(files)}")
    return 0


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    cfg = fit_config_from_dict(read_json(args.config), seed=args.seed)
    data = read_data_csv(args.data)
    res = fit(data["x"], data["y"], cfg)
    imp = decompose(data["x"])
    yhat = apply_shifts(imp, res.shifts, res.params).values
    tvs = res.params.to_dict()
    ols = res.ols.to_dict()
    result = {
        "n": int(imp.source_length),
        "k": imp.k,
        "tvs": tvs,
        "ols": ols,
        "table": [
            {"parameter": "beta", "tvs": tvs["beta"], "ols": ols["beta"]},
            {"parameter": "intercept", "tvs": tvs["intercept"], "ols": ols["intercept"]},
            {"parameter": "lambda_tau", "tvs": tvs["lambda_tau"], "ols": None},
            {"parameter": "sigma_eps", "tvs": tvs["sigma_eps"], "ols": ols["sigma"]},
        ],
        "positions": [int(p) for p in imp.positions],
        "shifts": res.shifts.tolist(),
        "loglik": res.loglik.to_dict(),
        "objective": res.objective,
        "scaled_params": res.scaled_params.to_dict(),
        "scaling": _floats(res.scaling.to_dict()),
        "generations": res.generations,
        "converged": res.converged,
        "message": res.message,
        "config": fit_config_to_dict(cfg),
    }
    names = ["result.json", "trace.csv", "residuals.csv", "manifest.json"]
    with Staging(args.out) as st:
        write_json(st.path("result.json"), result)
        write_csv(st.path("trace.csv"), ["generation", "best_objective"],
                  [res.trace[:, 0].astype(np.int64), res.trace[:, 1]])
        y = data["y"]
        write_csv(st.path("residuals.csv"), ["t", "y", "yhat", "residual"],
                  [data["t"], y, yhat, y - yhat])
        files = [str(Path(args.out) / n) for n in names]
        write_json(st.path("manifest.json"),
                   _manifest("fit", fit_config_to_dict(cfg), {"rng_seed": cfg.rng_seed}, files, t0))
        st.publish()
    print(f"TVS  beta={tvs['beta']:.4g} intercept={tvs['intercept']:.4g} "
          f"sigma_eps={tvs['sigma_eps']:.4g} lambda_tau={tvs['lambda_tau']:.4g}")
    print(f"OLS  beta={ols['beta']:.4g} intercept={ols['intercept']:.4g} sigma={ols['sigma']:.4g}")
    return 0


def compare(result: dict, truth: dict) -> dict:
    """Errors of a fit against ground truth.

    The delay mean is scored against the realized mean of the true shifts,
    which is what the fit can see; the generating value is reported too.
    """
    est = np.asarray(result["shifts"], dtype=np.int64)
    true = np.asarray(truth["shifts"], dtype=np.int64)
    if est.size != true.size:
        raise CliError(f"impulse counts differ: result has {est.size}, truth has {true.size}")
    tp = truth["params"]
    tvs = result["tvs"]
    ols = result.get("ols") or {}
    realized = truth.get("realized_shift_mean", float(true.mean()) if true.size else 0.0)
    errors = {
        "beta": abs(tvs["beta"] - tp["beta"]),
        "intercept": abs(tvs["intercept"] - tp["intercept"]),
        "sigma_eps": abs(tvs["sigma_eps"] - tp["sigma_eps"]),
        "lambda_tau": abs(tvs["lambda_tau"] - realized),
    }
    out = {
        "k": int(true.size),
        "errors": errors,
        "lambda_tau_error_vs_generating": abs(tvs["lambda_tau"] - tp["lambda_tau"]),
        "shift_recovery_rate": float(np.mean(est == true)) if true.size else 1.0,
        "shift_mismatches": [int(i) for i in np.flatnonzero(est != true)],
    }
    if ols:
        ols_err = {"beta": abs(ols["beta"] - tp["beta"]),
                   "intercept": abs(ols["intercept"] - tp["intercept"]),
                   "sigma": abs(ols["sigma"] - tp["sigma_eps"])}
        out["ols_errors"] = ols_err
        out["beta_error_ratio"] = (errors["beta"] / ols_err["beta"]
                                   if ols_err["beta"] > 0 else None)
    return out


def cmd_compare(args) -> int:
    t0 = time.perf_counter()
    report = compare(read_json(args.result), read_json(args.truth))
    with Staging(args.out) as st:
        write_json(st.path("compare.json"), report)
        files = [str(Path(args.out) / "compare.json"), str(Path(args.out) / "manifest.json")]
        write_json(st.path("manifest.json"),
                   _manifest("compare", {"result": str(args.result), "truth": str(args.truth)},
                             {}, files, t0))
        st.publish()
    e = report["errors"]
    print(f"shift recovery   {report['shift_recovery_rate']:.3f} ({report['k']} impulses)")
    for name in ("beta", "intercept", "sigma_eps", "lambda_tau"):
        print(f"|err| {name:<11}{e[name]:.4g}")
    if report.get("beta_error_ratio") is not None:
        print(f"beta error ratio TVS/OLS {report['beta_error_ratio']:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tvs", description="Regression under stochastic time delay.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic dataset")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit TVS and OLS regressions to data.csv")
    f.add_argument("--data", required=True, type=Path)
    f.add_argument("--config", required=True, type=Path)
    f.add_argument("--out", required=True, type=Path)
    f.add_argument("--seed", type=int)
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("compare", help="score a fit against ground truth")
    c.add_argument("--result", required=True, type=Path)
    c.add_argument("--truth", required=True, type=Path)
    c.add_argument("--out", required=True, type=Path)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, TVSError, DataFormatError, TypeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"tvs: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
