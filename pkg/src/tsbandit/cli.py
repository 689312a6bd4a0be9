"""Command-line front end.

Subcommands: ``simulate``, ``compare``, ``bounds``, ``verify`` and ``sweep``.
Experiments are described by a JSON document::

    {
      "arms": [0.5, 0.45, {"support": [0, 0.5, 1], "probs": [0.2, 0.3, 0.5]}],
      "policy": "ts",            # or "ucb1"
      "T": 100000,
      "runs": 1000,              # default 1
      "seed": 7,                 # default 0
      "checkpoints": [1000, 10000, 100000],
      "event_tracking": {"source": "thm2"} ,   # or {"source": "thm1", "eps": 0.2}
      "track_p": false,
      "eps": 0.2,                # bounds / compare only
      "policies": ["ts", "ucb1"],             # compare only
      "sweep": {"N": [2, 10], "T": [1000, 10000], "families": ["uniform", "worst_case"],
                "instances": 5}                # sweep only
    }

Exit status: 0 on success, 1 when a verification check fails, 2 on a bad
configuration. Every float written to CSV uses 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import bounds, sim, verify
from .env import Bernoulli, Discrete, make_instance
from .rng import stream

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2

SUBCOMMANDS = ("simulate", "compare", "bounds", "verify", "sweep")
FAMILIES = ("uniform", "worst_case")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry (e.g. ``arms[0]``)."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class CliConfig:
    subcommand: str
    config_path: Optional[Path] = None
    out_dir: Path = Path("out")
    seed: Optional[int] = None
    runs: Optional[int] = None
    horizon: Optional[int] = None
    workers: int = 1
    eps: Optional[float] = None
    theta_constant: float = bounds.MEASURED_THETA_CONSTANT
    quick: bool = False

    def overrides(self) -> dict:
        o = {"seed": self.seed, "runs": self.runs, "T": self.horizon, "eps": self.eps}
        return {k: v for k, v in o.items() if v is not None}


def fmt(v: Any) -> str:
    """Lossless text for CSV cells: ints as-is, floats with 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# -- config parsing -------------------------------------------------------------


def _require_int(doc: dict, key: str, default=None, minimum: int = 1) -> int:
    if key not in doc:
        if default is None:
            raise ConfigError(key, "required field is missing")
        return default
    v = doc[key]
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(key, f"must be at least {minimum}, got {v}")
    return v


def _parse_arm(k: int, spec: Any):
    name = f"arms[{k}]"
    try:
        if isinstance(spec, bool):
            raise ValueError(f"expected a mean or a support/probs object, got {spec!r}")
        if isinstance(spec, (int, float)):
            return Bernoulli(float(spec))
        if isinstance(spec, dict):
            if set(spec) != {"support", "probs"}:
                raise ValueError(f"discrete arm needs exactly 'support' and 'probs', got keys {sorted(spec)}")
            return Discrete(tuple(spec["support"]), tuple(spec["probs"]))
        raise ValueError(f"expected a mean or a support/probs object, got {spec!r}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(exc)) from None


def parse_arms(doc: dict):
    arms = doc.get("arms")
    if arms is None:
        raise ConfigError("arms", "required field is missing")
    if not isinstance(arms, list) or len(arms) < 2:
        raise ConfigError("arms", "expected a list of at least two arms")
    return make_instance([_parse_arm(k, a) for k, a in enumerate(arms)])


def _parse_tracking(doc: dict) -> Optional[sim.EventTracking]:
    et = doc.get("event_tracking")
    if et is None or et is False:
        return None
    if et is True:
        return sim.EventTracking("thm2")
    if isinstance(et, str):
        et = {"source": et}
    if not isinstance(et, dict) or "source" not in et:
        raise ConfigError("event_tracking", f"expected {{'source': 'thm1'|'thm2', 'eps': ...}}, got {et!r}")
    try:
        return sim.EventTracking(str(et["source"]), float(et.get("eps", doc.get("eps", 0.2))))
    except ValueError as exc:
        raise ConfigError("event_tracking", str(exc)) from None


def load_document(text: str, overrides: Optional[dict] = None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be a JSON object")
    doc.update(overrides or {})
    return doc


def config_from_document(doc: dict, policy: Optional[str] = None) -> sim.ExperimentConfig:
    instance = parse_arms(doc)
    T = _require_int(doc, "T")
    runs = _require_int(doc, "runs", default=1)
    seed = _require_int(doc, "seed", default=0, minimum=0)
    policy = policy or doc.get("policy", "ts")
    if policy not in sim.POLICIES:
        raise ConfigError("policy", f"expected one of {sim.POLICIES}, got {policy!r}")
    cps = doc.get("checkpoints")
    if cps is not None:
        if not isinstance(cps, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in cps):
            raise ConfigError("checkpoints", f"expected a list of integers, got {cps!r}")
        if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])) or cps[-1] > T:
            raise ConfigError("checkpoints", f"must be strictly increasing within [1, T={T}], got {cps}")
        cps = tuple(cps)
    track_p = doc.get("track_p", False)
    if not isinstance(track_p, bool):
        raise ConfigError("track_p", f"expected true or false, got {track_p!r}")
    tracking = _parse_tracking(doc)
    try:
        return sim.ExperimentConfig(instance, policy, T, runs, seed, cps, tracking, track_p)
    except ValueError as exc:
        name = "event_tracking" if (tracking is not None or track_p) else "policy"
        raise ConfigError(name, str(exc)) from None


def parse_config(text: str, overrides: Optional[dict] = None) -> sim.ExperimentConfig:
    """Validate a JSON experiment description; overrides win over file values."""
    return config_from_document(load_document(text, overrides))


def _eps(doc: dict) -> float:
    eps = doc.get("eps", 0.2)
    if isinstance(eps, bool) or not isinstance(eps, (int, float)) or not 0 < eps <= 1:
        raise ConfigError("eps", f"expected a number in (0, 1], got {eps!r}")
    return float(eps)


# -- subcommands ----------------------------------------------------------------


def _read_doc(cli: CliConfig, required: bool = True) -> dict:
    if cli.config_path is None:
        if required:
            raise ConfigError("--config", f"{cli.subcommand} needs a config file")
        return dict(cli.overrides())
    try:
        text = Path(cli.config_path).read_text()
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    return load_document(text, cli.overrides())


def _regret_rows(res: sim.AggregateResult) -> list[list]:
    return [
        [int(c), res.mean_regret[k], res.se_regret[k], *res.mean_pulls[k]]
        for k, c in enumerate(res.checkpoints)
    ]


def cmd_simulate(cli: CliConfig, out: Path) -> int:
    cfg = config_from_document(_read_doc(cli))
    res = sim.run_experiment(cfg, cli.workers, keep_trajectories=cfg.track_p)
    n = cfg.instance.n_arms
    write_csv(out / "regret.csv", ["checkpoint", "mean_regret", "se_regret", *[f"mean_pulls_{i}" for i in range(n)]],
              _regret_rows(res))
    thresholds = cfg.thresholds()
    if cfg.event_tracking is not None:
        rows = []
        for i, tp in thresholds.items():
            rows.append([
                i, tp.x, tp.y, res.mean_not_mu[i], res.se_not_mu[i], res.mean_mu_not_theta[i],
                res.se_mu_not_theta[i], 1.0 / verify.kl_bernoulli(tp.x, tp.mu_i) + 1.0, tp.L(cfg.T) + 1.0,
            ])
        write_csv(out / "events.csv", ["arm", "x", "y", "mean_not_mu", "se_not_mu", "mean_mu_not_theta",
                                        "se_mu_not_theta", "not_mu_bound", "mu_not_theta_bound"], rows)
    if cfg.track_p:
        rows = []
        for i in thresholds:
            series = [t.p_series[i] for t in res.trajectories]
            padded = np.full((len(series), max(len(s) for s in series)), np.nan)
            for r, s in enumerate(series):
                padded[r, : len(s)] = s
            counts = np.sum(~np.isnan(padded), axis=0)
            mean_p = np.nansum(padded, axis=0) / counts
            mean_inv = np.nansum(1.0 / padded, axis=0) / counts
            rows.extend([i, j, counts[j], mean_p[j], mean_inv[j]] for j in range(padded.shape[1]))
        write_csv(out / "p_series.csv", ["arm", "j", "runs", "mean_p", "mean_inverse_p"], rows)
    return EXIT_OK


def cmd_compare(cli: CliConfig, out: Path) -> int:
    doc = _read_doc(cli)
    policies = doc.get("policies", list(sim.POLICIES))
    if not isinstance(policies, list) or not policies or any(p not in sim.POLICIES for p in policies):
        raise ConfigError("policies", f"expected a nonempty list drawn from {sim.POLICIES}, got {policies!r}")
    base = {k: v for k, v in doc.items() if k not in ("event_tracking", "track_p")}
    configs = [config_from_document(base, p) for p in policies]
    table = sim.compare_policies(configs, cli.workers, _eps(doc))
    header = ["checkpoint"]
    for label in table.labels:
        header += [f"{label}_mean_regret", f"{label}_se_regret"]
    header += list(table.bound_columns)
    rows = []
    for k, c in enumerate(table.checkpoints):
        row: list = [int(c)]
        for r in table.results:
            row += [r.mean_regret[k], r.se_regret[k]]
        row += [col[k] for col in table.bound_columns.values()]
        rows.append(row)
    write_csv(out / "comparison.csv", header, rows)
    return EXIT_OK


def bound_rows(reports: Sequence[bounds.BoundReport]) -> list[list]:
    rows = []
    for r in reports:
        caveats = "; ".join(r.caveats)
        for t in r.per_arm_terms:
            rows.append([r.bound_name, r.T, t.arm, t.leading, t.additive, t.total, caveats])
        rows.append([r.bound_name, r.T, "all", r.leading_total, r.additive_total, r.total, caveats])
    return rows


def cmd_bounds(cli: CliConfig, out: Path) -> int:
    doc = _read_doc(cli)
    instance = parse_arms(doc)
    T = _require_int(doc, "T", minimum=2)
    try:
        instance.require_unique_optimum()
    except ValueError as exc:
        raise ConfigError("arms", str(exc)) from None
    reports = bounds.reports_for(instance, T, _eps(doc), cli.theta_constant)
    write_csv(out / "bounds.csv", ["bound_name", "T", "arm", "leading_term", "additive_term", "total", "caveats"],
              bound_rows(reports))
    return EXIT_OK


REPORT_HEADER = ["check", "inputs", "lhs", "rhs", "margin", "tolerance", "passed", "method"]


def _report_rows(reports: Sequence[verify.VerificationReport]) -> list[list]:
    return [
        [r.check, json.dumps(r.inputs, sort_keys=True), r.lhs, r.rhs, r.margin, r.tolerance, r.passed,
         json.dumps(r.method, sort_keys=True)]
        for r in reports
    ]


def cmd_verify(cli: CliConfig, out: Path) -> int:
    doc = _read_doc(cli, required=False)
    seed = _require_int(doc, "seed", default=0, minimum=0)
    checks = verify.run_all_checks(seed=seed, theta_constant=cli.theta_constant,
                                   workers=cli.workers, quick=cli.quick)
    summary: dict = {"failures": 0, "checks": {}, "measured": checks.measured}
    for name, reports in checks.reports.items():
        write_csv(out / f"{name}.csv", REPORT_HEADER, _report_rows(reports))
        failed = sum(not r.passed for r in reports)
        summary["checks"][name] = {"total": len(reports), "passed": len(reports) - failed, "failed": failed}
        summary["failures"] += failed
    if "arms" in doc:
        cfg = config_from_document(doc)
        if cfg.event_tracking is None:
            cfg = replace(cfg, event_tracking=sim.EventTracking("thm2"))
        res = sim.run_experiment(cfg, cli.workers)
        reports = verify.verify_lemma23_from_logs(res, cfg.thresholds(), cfg.T)
        write_csv(out / "event_tallies.csv", REPORT_HEADER, _report_rows(reports))
        failed = sum(not r.passed for r in reports)
        summary["checks"]["event_tallies"] = {"total": len(reports), "passed": len(reports) - failed,
                                              "failed": failed}
        summary["failures"] += failed
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_VERIFY_FAILED if summary["failures"] else EXIT_OK


def family_instance(family: str, n_arms: int, T: int, seed: int, index: int):
    """``uniform``: i.i.d. Uniform(0, 1) means. ``worst_case``: best arm 0.5, the rest at the
    gap sqrt(N ln T / T) below it (clipped to 0.5)."""
    if family == "uniform":
        return make_instance(stream(seed, index, f"sweep/{n_arms}/{T}").random(n_arms).tolist())
    if family == "worst_case":
        gap = min(bounds.worst_case_gap(n_arms, T), 0.5)
        return make_instance([0.5] + [0.5 - gap] * (n_arms - 1))
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _int_list(sw: dict, key: str, minimum: int) -> list[int]:
    v = sw.get(key)
    if not isinstance(v, list) or not v or any(isinstance(x, bool) or not isinstance(x, int) or x < minimum for x in v):
        raise ConfigError(f"sweep.{key}", f"expected a nonempty list of integers >= {minimum}, got {v!r}")
    return v


def cmd_sweep(cli: CliConfig, out: Path) -> int:
    doc = _read_doc(cli)
    sw = doc.get("sweep")
    if not isinstance(sw, dict):
        raise ConfigError("sweep", "required object is missing")
    Ns = _int_list(sw, "N", 2)
    Ts = _int_list(sw, "T", 2)
    families = sw.get("families", list(FAMILIES))
    if not isinstance(families, list) or not families or any(f not in FAMILIES for f in families):
        raise ConfigError("sweep.families", f"expected a nonempty list drawn from {FAMILIES}, got {families!r}")
    n_inst = _require_int(sw, "instances", default=1)
    runs = _require_int(doc, "runs", default=1)
    seed = _require_int(doc, "seed", default=0, minimum=0)
    policy = doc.get("policy", "ts")
    if policy not in sim.POLICIES:
        raise ConfigError("policy", f"expected one of {sim.POLICIES}, got {policy!r}")
    rows = []
    for N in Ns:
        for T in Ts:
            try:
                scale = bounds.thm2_bound(N, T)
            except ValueError as exc:
                raise ConfigError("sweep", str(exc)) from None
            for fam in families:
                regrets, ses, lr = [], [], []
                for k in range(n_inst):
                    try:
                        inst = family_instance(fam, N, T, seed, k)
                    except ValueError as exc:
                        raise ConfigError("sweep", str(exc)) from None
                    res = sim.run_experiment(sim.ExperimentConfig(inst, policy, T, runs, seed + k, (T,)), cli.workers)
                    regrets.append(float(res.mean_regret[-1]))
                    ses.append(float(res.se_regret[-1]))
                    lr.append(bounds.lai_robbins_lower(inst, T) if inst.unique_optimum else float("nan"))
                rows.append([
                    N, T, fam, n_inst, runs, math.fsum(regrets) / n_inst, max(ses), max(regrets) / scale,
                    math.fsum(lr) / n_inst,
                ])
    write_csv(out / "sweep.csv", ["N", "T", "family", "instances", "runs", "mean_regret", "max_se_regret",
                                  "max_regret_over_sqrt_NTlnT", "mean_lai_robbins"], rows)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "compare": cmd_compare, "bounds": cmd_bounds,
            "verify": cmd_verify, "sweep": cmd_sweep}


def run_subcommand(cli: CliConfig) -> int:
    if cli.subcommand not in COMMANDS:
        print(f"error: unknown subcommand {cli.subcommand!r}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    out = Path(cli.out_dir)
    try:
        if cli.workers < 1:
            raise ConfigError("--workers", f"must be at least 1, got {cli.workers}")
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cli.subcommand](cli, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsbandit", description="Thompson Sampling regret experiments and checks.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="JSON experiment description")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (created if absent)")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--horizon", type=int, help="horizon T")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--eps", type=float, help="epsilon of the problem-dependent bound")
    p.add_argument("--theta-constant", type=float, default=bounds.MEASURED_THETA_CONSTANT,
                   help="constant scaling the large-j E[1/p] envelope (bounds and verify)")
    p.add_argument("--quick", action="store_true", help="verify on reduced grids")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cli = CliConfig(args.subcommand, args.config, args.out, args.seed, args.runs, args.horizon,
                    args.workers, args.eps, args.theta_constant, args.quick)
    return run_subcommand(cli)


if __name__ == "__main__":
    sys.exit(main())
