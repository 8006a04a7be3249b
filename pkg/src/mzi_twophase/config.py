"""
Scenario configuration, read from TOML.

Every physical default is echoed into the run metadata, so no constant
is hidden from the output. A minimal file::

    [probe]
    alpha1 = 0.0
    alpha2 = 3.1622776601683795
    r = 1.7

    [truth]
    phi_s = 0.7
    phi_d = 1.1

    [lo]
    mode = "tuned"        # or "explicit" with theta1, theta2
    k1 = 0.25
    k2 = 0.25

    [run]
    nu = 2000
    repetitions = 200
    seed = 20240611

    [sweep]
    axis = "nu"           # "nu", "N" or (custom runs) "beta"
    values = [200, 500, 1000, 2000]

    [outputs]
    directory = "out/fig2"
    formats = ["svg"]

For ``axis = "N"`` the probe is rebuilt at each point with
``N_c = N_s = N/2`` and ``N_c1 = beta N_c``, so ``alpha1``, ``alpha2`` and
``r`` in ``[probe]`` are ignored there.
"""

import math
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .errors import ConfigurationError
from .homodyne import LoSetting

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_SEED = 20240611

SWEEP_AXES = ("nu", "N", "beta")
ESTIMATORS = ("auto", "closed_form", "numeric_mle")
PLOT_FORMATS = ("svg", "pdf", "png")


@dataclass(frozen=True)
class ProbeConfig:
    alpha1: float = 0.0
    alpha2: float = math.sqrt(10.0)
    r: float = 1.7


@dataclass(frozen=True)
class TruthConfig:
    phi_s: float = 0.7
    phi_d: float = 1.1


@dataclass(frozen=True)
class RunConfig:
    nu: int = 2000
    repetitions: int = 200
    seed: int = DEFAULT_SEED
    threads: int = 1
    estimator: str = "auto"
    # branch reference for the phi_s closed form; None uses the "+" branch
    phi_s_reference: Optional[float] = None


@dataclass(frozen=True)
class SweepConfig:
    axis: str = "nu"
    values: tuple = (200, 500, 1000, 2000)
    beta: float = 0.0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("svg",)


@dataclass(frozen=True)
class ScenarioConfig:
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    truth: TruthConfig = field(default_factory=TruthConfig)
    lo: LoSetting = field(default_factory=LoSetting.tuned)
    run: RunConfig = field(default_factory=RunConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    weights: Optional[tuple] = None

    def to_dict(self):
        d = asdict(self)
        d["sweep"]["values"] = list(self.sweep.values)
        d["outputs"]["formats"] = list(self.outputs.formats)
        if self.weights is not None:
            d["weights"] = list(self.weights)
        return d

    def with_overrides(self, seed=None, directory=None, threads=None):
        run, outputs = self.run, self.outputs
        if seed is not None:
            run = replace(run, seed=_seed(seed, "run.seed"))
        if threads is not None:
            run = replace(run, threads=_positive_int(threads, "run.threads"))
        if directory is not None:
            outputs = replace(outputs, directory=str(directory))
        return replace(self, run=run, outputs=outputs)


def fig2_defaults():
    """Default ``fig2`` scenario: alpha1 = 0, |alpha2|^2 = 10, r = 1.7, sweep over nu."""
    return ScenarioConfig(outputs=OutputConfig(directory="out/fig2"))


def fig3_defaults():
    """Default ``fig3`` scenario: N_c = N_s = N/2, alpha1 = 0, nu = 2000, k = 1/4."""
    return ScenarioConfig(
        sweep=SweepConfig(axis="N", values=(8, 16, 32, 64, 128)),
        outputs=OutputConfig(directory="out/fig3"),
    )


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"{name} must be a finite number, got {value!r}", name)
    return float(value)


def _positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigurationError(f"{name} must be a positive integer, got {value!r}", name)
    return value


def _seed(value, name):
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2**64:
        raise ConfigurationError(f"{name} must be an unsigned 64-bit integer, got {value!r}", name)
    return value


def _section(raw, name, known):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigurationError(f"[{name}] must be a table", name)
    unknown = set(sec) - set(known)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"unknown key {name}.{key}", f"{name}.{key}")
    return sec


def parse_config(raw, base=None):
    """Build a validated :class:`ScenarioConfig` from a parsed TOML mapping.

    Keys absent from ``raw`` keep the values of ``base`` (the figure defaults
    for the fig2/fig3 commands).
    """
    base = base or ScenarioConfig()
    unknown = set(raw) - {"probe", "truth", "lo", "run", "sweep", "outputs", "bound"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"unknown section [{key}]", key)

    sec = _section(raw, "probe", ("alpha1", "alpha2", "r"))
    probe = ProbeConfig(
        **{k: _number(sec.get(k, getattr(base.probe, k)), f"probe.{k}") for k in ("alpha1", "alpha2", "r")}
    )

    sec = _section(raw, "truth", ("phi_s", "phi_d"))
    truth = TruthConfig(
        **{k: _number(sec.get(k, getattr(base.truth, k)), f"truth.{k}") for k in ("phi_s", "phi_d")}
    )

    sec = _section(raw, "lo", ("mode", "k", "k1", "k2", "theta1", "theta2"))
    mode = sec.get("mode", base.lo.mode)
    if mode == "tuned":
        if "k" in sec and ("k1" in sec or "k2" in sec):
            raise ConfigurationError("give either lo.k or lo.k1/lo.k2, not both", "lo.k")
        k1 = _number(sec.get("k", sec.get("k1", base.lo.k1)), "lo.k1")
        k2 = _number(sec.get("k", sec.get("k2", base.lo.k2)), "lo.k2")
        lo = LoSetting.tuned(k1, k2)
    elif mode == "explicit":
        for key in ("theta1", "theta2"):
            if key not in sec:
                raise ConfigurationError(f"explicit LO needs lo.{key}", f"lo.{key}")
        lo = LoSetting.explicit(_number(sec["theta1"], "lo.theta1"), _number(sec["theta2"], "lo.theta2"))
    else:
        raise ConfigurationError(f"lo.mode must be 'tuned' or 'explicit', got {mode!r}", "lo.mode")

    sec = _section(raw, "run", ("nu", "repetitions", "seed", "threads", "estimator", "phi_s_reference"))
    estimator = sec.get("estimator", base.run.estimator)
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"run.estimator must be one of {ESTIMATORS}, got {estimator!r}", "run.estimator")
    reference = sec.get("phi_s_reference", base.run.phi_s_reference)
    run = RunConfig(
        nu=_positive_int(sec.get("nu", base.run.nu), "run.nu"),
        repetitions=_positive_int(sec.get("repetitions", base.run.repetitions), "run.repetitions"),
        seed=_seed(sec.get("seed", base.run.seed), "run.seed"),
        threads=_positive_int(sec.get("threads", base.run.threads), "run.threads"),
        estimator=estimator,
        phi_s_reference=None if reference is None else _number(reference, "run.phi_s_reference"),
    )
    if run.repetitions < 2:
        raise ConfigurationError("run.repetitions must be at least 2", "run.repetitions")

    sec = _section(raw, "sweep", ("axis", "values", "beta"))
    axis = sec.get("axis", base.sweep.axis)
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"sweep.axis must be one of {SWEEP_AXES}, got {axis!r}", "sweep.axis")
    values = sec.get("values", list(base.sweep.values) if axis == base.sweep.axis else None)
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigurationError("sweep.values must be a nonempty list", "sweep.values")
    values = tuple(_number(v, "sweep.values") for v in values)
    if axis == "nu":
        if any(v != int(v) for v in values):
            raise ConfigurationError("sweep.values must be integers for axis 'nu'", "sweep.values")
        values = tuple(int(v) for v in values)
    if axis == "beta":
        if any(not 0 <= v < 1 for v in values):
            raise ConfigurationError("beta sweep values must lie in [0, 1)", "sweep.values")
    elif any(v <= 0 for v in values):
        raise ConfigurationError("sweep.values must be positive", "sweep.values")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError("sweep.values must be strictly increasing", "sweep.values")
    beta = _number(sec.get("beta", base.sweep.beta), "sweep.beta")
    if not 0 <= beta <= 1:
        raise ConfigurationError("sweep.beta must lie in [0, 1]", "sweep.beta")
    sweep = SweepConfig(axis=axis, values=values, beta=beta)

    sec = _section(raw, "outputs", ("directory", "formats"))
    formats = tuple(sec.get("formats", base.outputs.formats))
    bad = [f for f in formats if f not in PLOT_FORMATS]
    if bad:
        raise ConfigurationError(f"unsupported plot format {bad[0]!r}", "outputs.formats")
    outputs = OutputConfig(directory=str(sec.get("directory", base.outputs.directory)), formats=formats)

    sec = _section(raw, "bound", ("weights",))
    weights = sec.get("weights", base.weights)
    if weights is not None:
        if not isinstance(weights, (list, tuple)) or len(weights) != 2:
            raise ConfigurationError("bound.weights must be a pair of numbers", "bound.weights")
        weights = tuple(_number(w, "bound.weights") for w in weights)

    return ScenarioConfig(probe, truth, lo, run, sweep, outputs, weights)


def load_config(path, base=None):
    """Read and validate a TOML scenario file."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}", "file") from exc
    return parse_config(raw, base)
