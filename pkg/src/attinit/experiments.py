"""Built-in experiments, YAML config files, CSV outputs and plots."""

import csv
import logging
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .errors import ConfigError
from .scenario import Method, ScenarioConfig, run_monte_carlo

log = logging.getLogger(__name__)

CURVES_HEADER = ["method", "run", "t_s", "err_deg"]
SUMMARY_HEADER = ["method", "t_s", "mean_err_deg", "p95_err_deg", "runs"]
SWEEP_HEADER = ["bias_degph", "run", "t_s", "err_deg"]
SWEEP_SUMMARY_HEADER = ["bias_degph", "t_s", "mean_err_deg", "std_err_deg", "runs"]
DEFAULT_BIASES = (0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    methods: tuple = tuple(Method)
    outputs: str = "results"
    biases: tuple = ()  # deg/h per axis; only used by bias sweeps

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError("name", "must be a non-empty string")
        methods = self.methods
        if isinstance(methods, str):
            methods = [m for m in methods.split(",") if m]
        methods = tuple(Method.parse(m) if isinstance(m, str) else Method(m) for m in methods)
        if not methods:
            raise ConfigError("methods", "at least one method is required")
        object.__setattr__(self, "methods", methods)
        try:
            biases = tuple(float(b) for b in self.biases)
        except (TypeError, ValueError):
            raise ConfigError("biases", "expected a list of numbers") from None
        if any(not b >= 0 for b in biases):
            raise ConfigError("biases", "bias levels must be non-negative")
        object.__setattr__(self, "biases", biases)
        if not isinstance(self.scenario, ScenarioConfig):
            raise ConfigError("scenario", "expected a ScenarioConfig")


def _case(name, methods=tuple(Method), biases=(), **overrides):
    return ExperimentSpec(name, ScenarioConfig(**overrides), methods,
                          os.path.join("results", name), biases)


BUILTIN = {
    "case1": _case("case1"),
    "case2": _case("case2", init_att_err_deg=(30, 30, 60), mekf_att_std_deg=25.0),
    "case3": _case("case3", gyro_bias_degph=(10, 10, 10), bias_std_degph=10.0),
    "case4": _case("case4", gyro_bias_degph=(10, 10, 10), bias_std_degph=10.0,
                   init_att_err_deg=(30, 30, 60), mekf_att_std_deg=25.0),
    "bias_sweep": _case("bias_sweep", methods=(Method.OPTIMAL,), biases=DEFAULT_BIASES),
    "smoke": _case("smoke", duration=600.0, gyro_bias_degph=(0, 0, 0), sigma_v=0.0,
                   sigma_star=0.0, mc_runs=1),
}


def describe(spec):
    s = spec.scenario
    fmt = lambda v: "[" + ",".join(f"{x:g}" for x in v) + "]"  # noqa: E731
    bias = sorted(set(s.gyro_bias_degph))
    bias = f"{bias[0]:g}" if len(bias) == 1 else fmt(s.gyro_bias_degph)
    text = (f"bias {bias} deg/h, init err {fmt(s.init_att_err_deg)} deg, "
            f"att. covariance ({s.mekf_att_std_deg:g} deg)^2, "
            f"Optimal+MEKF att. covariance ({s.handoff_att_std_deg:g} deg)^2, "
            f"bias covariance ({s.bias_std_degph:g} deg/h)^2, "
            f"sigma_star {s.sigma_star:g} rad, sigma_v {s.sigma_v:g} rad/s/rtHz, "
            f"{s.mc_runs} runs x {s.duration:g} s, "
            f"methods {','.join(m.value for m in spec.methods)}")
    if spec.biases:
        text += f", sweep biases {fmt(spec.biases)} deg/h"
    return text


def list_cases():
    width = max(len(n) for n in BUILTIN)
    return "\n".join(f"{name:<{width}}  {describe(spec)}" for name, spec in BUILTIN.items())


def spec_to_dict(spec):
    d = {"name": spec.name, "methods": [m.value for m in spec.methods],
         "outputs": spec.outputs, "scenario": spec.scenario.to_dict()}
    if spec.biases:
        d["biases"] = list(spec.biases)
    return d


def spec_from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a mapping")
    known = {"name", "methods", "outputs", "scenario", "biases"}
    for key in d:
        if key not in known:
            raise ConfigError(key, "unknown key")
    scenario = d.get("scenario") or {}
    if not isinstance(scenario, dict):
        raise ConfigError("scenario", "expected a mapping")
    names = set(ScenarioConfig.__dataclass_fields__)
    for key in scenario:
        if key not in names:
            raise ConfigError(f"scenario.{key}", "unknown key")
    try:
        cfg = ScenarioConfig(**scenario)
    except ConfigError as exc:
        raise ConfigError(f"scenario.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    kwargs = {k: d[k] for k in ("methods", "outputs", "biases") if k in d}
    return ExperimentSpec(d.get("name", ""), cfg, **kwargs)


def dump_spec(spec):
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False)


def load_spec(path):
    with open(path, encoding="utf-8") as f:
        try:
            d = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(str(path), f"not valid YAML: {exc}") from None
    return spec_from_dict(d)


def resolve_spec(name_or_path):
    """Built-in case by name, otherwise a YAML config file path."""
    if name_or_path in BUILTIN:
        return BUILTIN[name_or_path]
    if os.path.exists(name_or_path):
        return load_spec(name_or_path)
    raise ConfigError("case", f"{name_or_path!r} is neither a built-in case nor a file")


def with_overrides(spec, seed=None, mc_runs=None, outputs=None, methods=None, **scenario):
    scenario = {k: v for k, v in scenario.items() if v is not None}
    if seed is not None:
        scenario["seed"] = seed
    if mc_runs is not None:
        scenario["mc_runs"] = mc_runs
    cfg = replace(spec.scenario, **scenario) if scenario else spec.scenario
    return replace(spec, scenario=cfg,
                   outputs=spec.outputs if outputs is None else outputs,
                   methods=spec.methods if methods is None else methods)


def _open_csv(path):
    return open(path, "w", encoding="utf-8", newline="")


def _writer(f):
    return csv.writer(f, lineterminator="\n")


def write_curves(path, results):
    with _open_csv(path) as f:
        w = _writer(f)
        w.writerow(CURVES_HEADER)
        for res in results:
            t = [repr(float(x)) for x in res.t]
            for run in np.flatnonzero(res.ok):
                w.writerows(zip([res.method.value] * len(t), [run] * len(t), t,
                                map(repr, res.errors[run].tolist())))


def summarize(res):
    """Per-epoch ``(t, mean, p95, runs)`` over successful runs."""
    e = res.errors[res.ok]
    if len(e) == 0:
        nan = np.full(len(res.t), np.nan)
        return res.t, nan, nan, 0
    return res.t, e.mean(axis=0), np.percentile(e, 95, axis=0), len(e)


def write_summary(path, results):
    with _open_csv(path) as f:
        w = _writer(f)
        w.writerow(SUMMARY_HEADER)
        for res in results:
            t, mean, p95, runs = summarize(res)
            for row in zip(t.tolist(), mean.tolist(), p95.tolist()):
                w.writerow([res.method.value, *map(repr, row), runs])


def plot_curves(path, series, title, label_fmt="{}"):
    """Mean error vs time; returns the path, or None if plotting failed."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(8, 4.5))
        for label, (t, mean) in series.items():
            ax.semilogy(t, mean, label=label_fmt.format(label))
        ax.set_xlabel("time [s]")
        ax.set_ylabel("mean attitude error [deg]")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=110, metadata={"Software": None})
        plt.close(fig)
        return path
    except Exception as exc:  # plots are a convenience; CSV is the contract
        log.warning("plotting failed, CSV outputs only: %s", exc)
        return None


@dataclass
class CaseOutputs:
    results: list
    files: dict
    failures: dict  # label -> {run: message}
    timings: dict = field(default_factory=dict)  # label -> wall seconds


def run_case(spec, workers=1, check_covariance=False):
    """Run every method of ``spec`` and write curves, summary and plot to ``spec.outputs``."""
    os.makedirs(spec.outputs, exist_ok=True)
    results, timings = [], {}
    for method in spec.methods:
        log.info("%s: running %s x %d", spec.name, method.value, spec.scenario.mc_runs)
        start = time.perf_counter()
        results.append(run_monte_carlo(spec.scenario, method, workers=workers,
                                       check_covariance=check_covariance))
        timings[method.value] = time.perf_counter() - start
    files = {"curves": os.path.join(spec.outputs, "curves.csv"),
             "summary": os.path.join(spec.outputs, "summary.csv")}
    write_curves(files["curves"], results)
    write_summary(files["summary"], results)
    plot = plot_curves(os.path.join(spec.outputs, "errors.png"),
                       {r.method.value: (r.t, summarize(r)[1]) for r in results},
                       f"{spec.name}: attitude error, {spec.scenario.mc_runs} runs")
    if plot:
        files["plot"] = plot
    failures = {r.method.value: r.failures for r in results if r.failures}
    return CaseOutputs(results, files, failures, timings)


def run_bias_sweep(base, biases=None, workers=1):
    """Run the initializer alone at each per-axis gyro bias (deg/h)."""
    biases = tuple(base.biases or DEFAULT_BIASES) if biases is None else tuple(biases)
    if not biases:
        raise ConfigError("biases", "at least one bias level is required")
    if any(not float(b) >= 0 for b in biases):
        raise ConfigError("biases", "bias levels must be non-negative")
    os.makedirs(base.outputs, exist_ok=True)
    results = []
    for b in biases:
        cfg = replace(base.scenario, gyro_bias_degph=(b, b, b))
        log.info("%s: bias %g deg/h", base.name, b)
        results.append((float(b), run_monte_carlo(cfg, Method.OPTIMAL, workers=workers)))

    files = {"sweep": os.path.join(base.outputs, "sweep.csv"),
             "sweep_summary": os.path.join(base.outputs, "sweep_summary.csv")}
    t_init = base.scenario.init_phase
    with _open_csv(files["sweep"]) as f:
        w = _writer(f)
        w.writerow(SWEEP_HEADER)
        for b, res in results:
            t = [repr(x) for x in res.t.tolist()]
            for run in np.flatnonzero(res.ok):
                w.writerows(zip([repr(b)] * len(t), [run] * len(t), t,
                                map(repr, res.errors[run].tolist())))
    with _open_csv(files["sweep_summary"]) as f:
        w = _writer(f)
        w.writerow(SWEEP_SUMMARY_HEADER)
        for b, res in results:
            e = res.at(t_init)
            std = float(e.std(ddof=1)) if len(e) > 1 else 0.0
            w.writerow([repr(b), repr(t_init), repr(float(e.mean())), repr(std), len(e)])
    plot = plot_curves(os.path.join(base.outputs, "sweep.png"),
                       {b: (r.t, summarize(r)[1]) for b, r in results},
                       f"{base.name}: Optimal error vs gyro bias", "{:g} deg/h")
    if plot:
        files["plot"] = plot
    failures = {f"{b:g}": r.failures for b, r in results if r.failures}
    return CaseOutputs([r for _, r in results], files, failures)
