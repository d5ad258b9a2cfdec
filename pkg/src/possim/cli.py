"""``im``: batch command-line front end.

Subcommands
    contour     tabulate a plausibility contour to CSV
    interval    plausibility interval at a level, as JSON
    predict     predictive contour for a future observation
    validity    simulation check of the coverage guarantee
    reproduce   one-command regeneration of the bundled benchmark targets

Conventions shared by every subcommand: a JSON config file (``--config``)
supplies defaults and explicit flags override it; grids are written
``lo:hi:count`` (linear) or ``log:lo:hi:count``; the seed defaults to the
IM_SEED environment variable; every output embeds the fully resolved
configuration, so a run can be reproduced from its own header.  Errors
leave a machine-readable JSON object on stderr and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import reproduce as reproduce_mod
from .contours import contour_to_csv
from .errors import InvalidParameterError, PossimError
from .likelihood import PartialPrior
from .marginal import (
    MonteCarloPlan,
    contour_choquet,
    contour_closed_form,
    contour_conditional,
    contour_vacuous,
    default_variance_ratio_grid,
    linear_grid,
    log_grid,
    plausibility_interval,
)
from .models import BehrensFisher, model_from_config
from .models.gamma import DEFAULT_SHAPE_GRID
from .predictive import (
    PredictionProblem,
    gamma_link,
    max_of_k_link,
    multinomial_next_draw_log_ratio,
    normal_predictive_trio,
    predict_combine,
)
from .validity import contour_at_truth_batch, coverage_from_pis, _cdf_report


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    try:
        if parts[0] == "log":
            _, lo, hi, count = parts
            return log_grid(float(lo), float(hi), int(count))
        lo, hi, count = parts
        return linear_grid(float(lo), float(hi), int(count))
    except (ValueError, TypeError):
        raise InvalidParameterError(
            f"bad grid spec {spec!r}; use lo:hi:count or log:lo:hi:count"
        ) from None


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.replace(",", " ").split()])


def _parse_summary(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        k, _, v = item.partition("=")
        if not _:
            raise InvalidParameterError(f"summary item {item!r} is not key=value")
        out[k.strip()] = float(v)
    return out


def _parse_prior(spec: str) -> PartialPrior | None:
    if spec in (None, "", "vacuous"):
        return None
    kind, _, arg = spec.partition(":")
    if kind == "markov":
        return PartialPrior.markov(float(arg or 1.0))
    raise InvalidParameterError(f"unknown prior spec {spec!r}")


def _env_seed() -> int:
    return int(os.environ.get("IM_SEED", "0"))


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise InvalidParameterError("config file must hold a JSON object")
    return cfg


def _merge(args: argparse.Namespace, cfg: dict, defaults: dict) -> dict:
    """defaults < config file < explicit flags (argparse defaults are None)."""
    resolved = dict(defaults)
    resolved.update({k: v for k, v in cfg.items() if k in defaults})
    for key in defaults:
        flag_val = getattr(args, key.replace("-", "_"), None)
        if flag_val is not None:
            resolved[key] = flag_val
    return resolved


def _resolve_model_and_data(rc: dict):
    """Build (model, y) from the resolved config."""
    name = rc.get("model")
    if not name:
        raise InvalidParameterError("--model is required")
    data = rc.get("data")
    if data is not None and not isinstance(data, np.ndarray):
        data = np.asarray(data, dtype=float)
    if rc.get("data_file"):
        data = _parse_floats(Path(rc["data_file"]).read_text())
    summary = rc.get("summary") or {}

    if name == "behrens-fisher":
        need = ("n1", "m1", "s1", "n2", "m2", "s2")
        if not all(k in summary for k in need):
            raise InvalidParameterError(
                "behrens-fisher takes --summary n1=..,m1=..,s1=..,n2=..,m2=..,s2=.."
                " with s1, s2 the ddof-1 sample variances")
        if summary["s1"] <= 0 or summary["s2"] <= 0:
            raise InvalidParameterError("group variances must be positive")
        model = BehrensFisher(int(summary["n1"]), int(summary["n2"]))
        y = model.summary_from_stats(summary["m1"], math.sqrt(summary["s1"]),
                                     summary["m2"], math.sqrt(summary["s2"]))
        return model, y

    cfg = {"name": name}
    cfg.update(summary)
    if name in ("normal-mean", "normal-sd", "gamma-mean", "mean-length",
                "normal-known-var") and "n" not in cfg:
        if data is None:
            raise InvalidParameterError(f"{name} needs --data or summary n=")
        cfg["n"] = len(data)
    if name == "multinomial":
        if data is None:
            raise InvalidParameterError("multinomial needs --data counts")
        cfg.setdefault("n", int(np.sum(data)))
        cfg.setdefault("k", len(data))
    model = model_from_config(cfg)
    if data is None:
        raise InvalidParameterError(f"{name} needs --data or --data-file")
    return model, data


def _default_nuisance(model):
    if isinstance(model, BehrensFisher):
        return default_variance_ratio_grid()
    if model.name == "gamma-mean":
        return np.asarray(DEFAULT_SHAPE_GRID, dtype=float)
    return None


def _build_contour(rc: dict):
    model, y = _resolve_model_and_data(rc)
    if rc.get("closed_form"):
        grid = _parse_grid(rc["grid"]) if rc.get("grid") else None
        if grid is None:
            raise InvalidParameterError("closed-form contour still needs --grid")
        contour = contour_closed_form(model, y, rc["closed_form"], grid)
        return model, contour

    if not rc.get("grid"):
        raise InvalidParameterError("--grid lo:hi:count is required")
    nuis = _parse_grid(rc["lambda_grid"]) if rc.get("lambda_grid") \
        else _default_nuisance(model)
    plan = MonteCarloPlan(
        interest_grid=_parse_grid(rc["grid"]),
        n_mc=int(rc["nmc"]),
        nuisance_grid=nuis,
        seed=int(rc["seed"]),
        threads=int(rc["threads"]),
    )
    prior = _parse_prior(rc.get("prior"))
    engine = rc.get("engine") or ("choquet" if prior is not None else "vacuous")
    if engine == "vacuous":
        contour = contour_vacuous(model, y, plan, strategy=rc["strategy"])
    elif engine == "choquet":
        if prior is None:
            raise InvalidParameterError("the choquet engine needs --prior markov:c")
        contour = contour_choquet(model, y, prior, plan, strategy=rc["strategy"])
    elif engine == "conditional":
        contour = contour_conditional(model, y, plan, prior=prior)
    else:
        raise InvalidParameterError(f"unknown engine {engine!r}")
    return model, contour


def _config_echo(rc: dict) -> dict:
    """The resolved-settings block embedded in every output."""
    out = {}
    for k, v in sorted(rc.items()):
        if v is None:
            continue
        if isinstance(v, np.ndarray):
            v = [float(x) for x in v]
        if k == "data_file":
            v = Path(v).name  # keep headers path-independent
        out[k] = v
    return out


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommand bodies


_CONTOUR_DEFAULTS = {
    "model": None, "data": None, "data_file": None, "summary": None,
    "grid": None, "lambda_grid": None, "nmc": 2000, "seed": None,
    "threads": 1, "strategy": "profile", "engine": None, "closed_form": None,
    "prior": None, "out": None,
}


def cmd_contour(args) -> int:
    rc = _merge(args, _load_config(args.config), _CONTOUR_DEFAULTS)
    if rc["seed"] is None:
        rc["seed"] = _env_seed()
    if isinstance(rc.get("summary"), str):
        rc["summary"] = _parse_summary(rc["summary"])
    if isinstance(rc.get("data"), str):
        rc["data"] = _parse_floats(rc["data"])
    _, contour = _build_contour(rc)
    _emit(contour_to_csv(contour, header_meta={"config": _config_echo(rc)}),
          rc["out"])
    return 0


def cmd_interval(args) -> int:
    defaults = dict(_CONTOUR_DEFAULTS, level=0.95)
    rc = _merge(args, _load_config(args.config), defaults)
    if rc["seed"] is None:
        rc["seed"] = _env_seed()
    if isinstance(rc.get("summary"), str):
        rc["summary"] = _parse_summary(rc["summary"])
    if isinstance(rc.get("data"), str):
        rc["data"] = _parse_floats(rc["data"])
    _, contour = _build_contour(rc)
    region = plausibility_interval(contour, float(rc["level"]))
    doc = {
        "level": float(rc["level"]),
        "intervals": [[repr(iv.lo), repr(iv.hi)] for iv in region.intervals],
        "unbounded": [[iv.lo_unbounded, iv.hi_unbounded]
                      for iv in region.intervals],
        "config": _config_echo(rc),
    }
    _emit(json.dumps(doc, sort_keys=True, indent=1) + "\n", rc["out"])
    return 0


_PREDICT_DEFAULTS = {
    "model": None, "data": None, "data_file": None, "summary": None,
    "z_grid": None, "option": "all", "max_of": 1, "nmc": 2000,
    "seed": None, "threads": 1, "out": None,
}


def cmd_predict(args) -> int:
    rc = _merge(args, _load_config(args.config), _PREDICT_DEFAULTS)
    if rc["seed"] is None:
        rc["seed"] = _env_seed()
    if isinstance(rc.get("summary"), str):
        rc["summary"] = _parse_summary(rc["summary"])
    if isinstance(rc.get("data"), str):
        rc["data"] = _parse_floats(rc["data"])
    name = rc.get("model")
    echo = {"config": _config_echo(rc)}

    if name == "normal-known-var":
        summary = rc.get("summary") or {}
        data = rc.get("data")
        sigma = float(summary.get("sigma", 1.0))
        if data is not None:
            ybar, n = float(np.mean(data)), len(data)
        elif "ybar" in summary and "n" in summary:
            ybar, n = float(summary["ybar"]), int(summary["n"])
        else:
            raise InvalidParameterError(
                "normal prediction needs --data or --summary ybar=..,n=..,sigma=..")
        if not rc.get("z_grid"):
            raise InvalidParameterError("--z-grid lo:hi:count is required")
        z_grid = _parse_grid(rc["z_grid"])
        plan = MonteCarloPlan(interest_grid=z_grid, n_mc=int(rc["nmc"]),
                              seed=int(rc["seed"]), threads=int(rc["threads"]))
        trio = normal_predictive_trio(ybar, n, sigma, z_grid, plan)
        opt = str(rc["option"])
        if opt in ("1", "2", "3"):
            _emit(contour_to_csv(trio[f"option{opt}"], header_meta=echo), rc["out"])
            return 0
        lines = ["# possim-predictive v1",
                 "# meta: " + json.dumps(echo, sort_keys=True),
                 "z,option1,option2,option3"]
        tabs = [np.asarray(trio[f"option{k}"].grid_values()) for k in (1, 2, 3)]
        for i, z in enumerate(z_grid):
            lines.append(",".join(repr(float(v))
                                  for v in (z, tabs[0][i], tabs[1][i], tabs[2][i])))
        _emit("\n".join(lines) + "\n", rc["out"])
        return 0

    if name == "multinomial":
        model, y = _resolve_model_and_data(rc)
        k = model.k
        log_r = multinomial_next_draw_log_ratio(y)
        plan = MonteCarloPlan(interest_grid=np.arange(1, k + 1, dtype=float),
                              n_mc=int(rc["nmc"]), seed=int(rc["seed"]),
                              threads=int(rc["threads"]))
        problem = PredictionProblem(model, link=None, z_grid=np.arange(1, k + 1))
        from .predictive import _multinomial_next_draw

        contour = _multinomial_next_draw(problem, y, plan)
        _emit(contour_to_csv(contour, header_meta=echo), rc["out"])
        return 0

    if name == "gamma-mean":
        model, y = _resolve_model_and_data(rc)
        if not rc.get("z_grid"):
            raise InvalidParameterError("--z-grid lo:hi:count is required")
        z_grid = _parse_grid(rc["z_grid"])
        contour = reproduce_mod.gamma_max_of_k_contour(
            model, y, int(rc["max_of"]), z_grid, n_mc=int(rc["nmc"]),
            seed=int(rc["seed"]), threads=int(rc["threads"]))
        _emit(contour_to_csv(contour, header_meta=echo), rc["out"])
        return 0

    raise InvalidParameterError(f"prediction not wired for model {name!r}")


_VALIDITY_DEFAULTS = {
    "model": None, "summary": None, "truth": None, "phi_star": None,
    "sims": 2000, "nmc": 2000, "alpha_grid": "0:1:101", "level": None,
    "lambda_grid": None, "strategy": "profile", "seed": None,
    "threads": 1, "bins": False, "out": None,
}


def cmd_validity(args) -> int:
    rc = _merge(args, _load_config(args.config), _VALIDITY_DEFAULTS)
    if rc["seed"] is None:
        rc["seed"] = _env_seed()
    if isinstance(rc.get("summary"), str):
        rc["summary"] = _parse_summary(rc["summary"])
    if rc.get("truth") is None:
        raise InvalidParameterError("--truth t1,t2,... is required")
    truth = _parse_floats(rc["truth"]) if isinstance(rc["truth"], str) \
        else np.asarray(rc["truth"], dtype=float)

    cfg = {"name": rc["model"]}
    cfg.update(rc.get("summary") or {})
    model = model_from_config(cfg)
    truth_theta = truth
    phi_star = float(rc["phi_star"]) if rc.get("phi_star") is not None \
        else model.phi_of(truth_theta)

    nuis = _parse_grid(rc["lambda_grid"]) if rc.get("lambda_grid") \
        else _default_nuisance(model)
    plan = MonteCarloPlan(
        interest_grid=np.array([phi_star - 1.0, phi_star + 1.0]),
        n_mc=int(rc["nmc"]), nuisance_grid=nuis, seed=int(rc["seed"]),
        threads=int(rc["threads"]),
    )
    pis, phi_hats = contour_at_truth_batch(model, truth_theta, phi_star,
                                           int(rc["sims"]), plan,
                                           strategy=rc["strategy"])
    alpha_grid = _parse_grid(rc["alpha_grid"])
    report = _cdf_report(pis, alpha_grid, int(rc["sims"]),
                         {"phi_star": phi_star})
    if rc.get("level") is not None:
        report.coverage = {float(rc["level"]):
                           coverage_from_pis(pis, float(rc["level"]))}
    if rc.get("bins"):
        from .validity import TABLE_BIN_EDGES, directional_pvalues, pvalue_bin_table

        p = directional_pvalues(pis, phi_hats, phi_star)
        report.bins = pvalue_bin_table(p)
        report.bin_edges = TABLE_BIN_EDGES

    doc = json.loads(report.to_json())
    doc["config"] = _config_echo(rc)
    if rc.get("out"):
        base = Path(rc["out"])
        base.with_suffix(".csv").write_text(report.to_csv())
        base.with_suffix(".json").write_text(
            json.dumps(doc, sort_keys=True, indent=1) + "\n")
    else:
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return 0


def cmd_reproduce(args) -> int:
    seed = args.seed if args.seed is not None else None
    result = reproduce_mod.run_target(
        args.name, sims=args.sims, nmc=args.nmc, seed=seed,
        threads=args.threads or 1)
    out_dir = Path(args.out_dir or f"artifacts/{args.name}")
    out_dir.mkdir(parents=True, exist_ok=True)
    for fname, text in sorted(result.files.items()):
        (out_dir / fname).write_text(text)
    for check in result.checks:
        status = "ok" if check.passed else "FAIL"
        sys.stdout.write(
            f"[{status}] {result.name}/{check.name}: computed {check.computed} "
            f"vs expected {check.expected} (tol {check.tol})\n")
    sys.stdout.write(f"wrote {len(result.files)} files to {out_dir}\n")
    return 0 if all(c.passed for c in result.checks) else 1


# ---------------------------------------------------------------------------
# argument wiring


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--model")
    p.add_argument("--data", help="inline observations, comma separated")
    p.add_argument("--data-file", help="text file of observations")
    p.add_argument("--summary", help="summary statistics as k=v,k=v (behrens-fisher: s1, s2 are ddof-1 sample variances)")
    p.add_argument("--nmc", type=int, help="Monte Carlo replicates per cell")
    p.add_argument("--seed", type=int, help="RNG seed (default: $IM_SEED or 0)")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="im", description="possibilistic inference from the command line")
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("contour", help="tabulate a plausibility contour")
    _add_common(pc)
    pc.add_argument("--grid", help="interest grid lo:hi:count or log:lo:hi:count")
    pc.add_argument("--lambda-grid", help="nuisance grid, same syntax")
    pc.add_argument("--strategy", choices=("profile", "marginal", "full"))
    pc.add_argument("--engine", choices=("vacuous", "choquet", "conditional"))
    pc.add_argument("--closed-form",
                    choices=("student-t", "normal-sd-profile",
                             "normal-sd-marginal", "fieller-creasy"))
    pc.add_argument("--prior", help="vacuous (default) or markov:c")
    pc.set_defaults(fn=cmd_contour)

    pi = sub.add_parser("interval", help="plausibility interval at a level")
    _add_common(pi)
    pi.add_argument("--grid")
    pi.add_argument("--lambda-grid")
    pi.add_argument("--strategy", choices=("profile", "marginal", "full"))
    pi.add_argument("--engine", choices=("vacuous", "choquet", "conditional"))
    pi.add_argument("--closed-form",
                    choices=("student-t", "normal-sd-profile",
                             "normal-sd-marginal", "fieller-creasy"))
    pi.add_argument("--prior")
    pi.add_argument("--level", type=float, help="e.g. 0.95")
    pi.set_defaults(fn=cmd_interval)

    pp = sub.add_parser("predict", help="predictive contour for a future draw")
    _add_common(pp)
    pp.add_argument("--z-grid", help="prediction grid lo:hi:count")
    pp.add_argument("--option", choices=("1", "2", "3", "all"))
    pp.add_argument("--max-of", type=int,
                    help="predict the max of this many future draws")
    pp.set_defaults(fn=cmd_predict)

    pv = sub.add_parser("validity", help="simulate the coverage guarantee")
    _add_common(pv)
    pv.add_argument("--truth", help="true parameter vector, comma separated")
    pv.add_argument("--phi-star", type=float,
                    help="interest value to audit (default: from truth)")
    pv.add_argument("--sims", type=int)
    pv.add_argument("--alpha-grid")
    pv.add_argument("--level", type=float, help="also report coverage here")
    pv.add_argument("--lambda-grid")
    pv.add_argument("--strategy", choices=("profile", "marginal", "full"))
    pv.add_argument("--bins", action="store_true", default=None,
                    help="include the directional p-value bin table")
    pv.set_defaults(fn=cmd_validity)

    pr = sub.add_parser("reproduce", help="regenerate a benchmark target")
    pr.add_argument("name", choices=sorted(reproduce_mod.TARGETS))
    pr.add_argument("--out-dir")
    pr.add_argument("--sims", type=int, help="override the outer simulation count")
    pr.add_argument("--nmc", type=int, help="override Monte Carlo replicates")
    pr.add_argument("--seed", type=int)
    pr.add_argument("--threads", type=int)
    pr.set_defaults(fn=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PossimError as err:
        sys.stderr.write(json.dumps(
            {"error": type(err).__name__, "message": str(err)}) + "\n")
        return 2
    except (OSError, ValueError, KeyError) as err:
        sys.stderr.write(json.dumps(
            {"error": type(err).__name__, "message": str(err)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
