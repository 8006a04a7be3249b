"""
Batch experiments: bias, rmse and Cramer-Rao bounds across a parameter sweep.

Each sweep point draws ``repetitions`` independent batches of ``nu`` joint
homodyne outcomes, estimates both phases from every batch and reduces the
estimates to bias and rmse. Trial ``t`` of point ``i`` uses the random
stream ``(i, t)`` of the run seed (see :mod:`mzi_twophase.estimation`), so
the table does not depend on the number of workers.

CSV schema
----------
``fig2``   nu, bias_s, bias_d, rmse_s, rmse_d, crb_s, crb_d, fail_rate, seed
``fig3``   N followed by the ``fig2`` columns
``custom`` the sweep axis (nu, N or beta), the ``fig2`` columns, then the
           exact and asymptotic Fisher matrices, ``tr F^-1`` of both and the
           pseudo-inverse bound ``phi_bound_var`` on ``w . phi``

The ``crb_*`` columns hold standard deviations ``sqrt(var/nu)``; their origin
for each command is recorded in the metadata sidecar.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import __version__
from .errors import ConfigurationError, EstimatorError, SingularFisherError
from .estimation import (
    closed_form_estimate,
    mle_numeric,
    sample,
    statistics,
)
from .fisher import (
    crb,
    crb_pseudo,
    crb_total_closed_form,
    fim_exact_at,
    fim_noise_asymptotic,
    fim_signal_asymptotic,
    fim_total_asymptotic,
)
from .gaussian import make_probe
from .homodyne import output_distribution, resolve_lo
from .interferometer import PhasePair

BASE_COLUMNS = ("nu", "bias_s", "bias_d", "rmse_s", "rmse_d", "crb_s", "crb_d", "fail_rate", "seed")

CUSTOM_EXTRA = (
    "f_exact_ss",
    "f_exact_sd",
    "f_exact_dd",
    "f_asym_ss",
    "f_asym_sd",
    "f_asym_dd",
    "trace_inv_exact",
    "trace_inv_asym",
    "phi_bound_var",
)

PROVENANCE = {
    "N": "sweep value; N_c = N_s = N/2, N_c1 = beta N_c, sinh^2 r = N/2",
    "beta": "sweep value; fraction of coherent photons in the first input port",
    "nu": "number of joint homodyne outcomes per repetition",
    "bias_s": "mean of wrapped (phi_s_hat - phi_s) over successful repetitions",
    "bias_d": "mean of wrapped (phi_d_hat - phi_d) over successful repetitions",
    "rmse_s": "root-mean-square of wrapped (phi_s_hat - phi_s) over successful repetitions",
    "rmse_d": "root-mean-square of wrapped (phi_d_hat - phi_d) over successful repetitions",
    "fail_rate": "fraction of repetitions whose estimator failed (arccos domain or no convergence)",
    "seed": "run seed; repetition t of sweep point i uses stream (i, t)",
    "f_exact_ss": "exact Fisher information per outcome, (phi_s, phi_s)",
    "f_exact_sd": "exact Fisher information per outcome, (phi_s, phi_d)",
    "f_exact_dd": "exact Fisher information per outcome, (phi_d, phi_d)",
    "f_asym_ss": "large-N_s signal + noise information, general k (NaN for explicit LO)",
    "f_asym_sd": "large-N_s signal + noise information, general k (NaN for explicit LO)",
    "f_asym_dd": "large-N_s signal + noise information, general k (NaN for explicit LO)",
    "trace_inv_exact": "trace of the inverse exact Fisher matrix",
    "trace_inv_asym": "trace of the inverse asymptotic Fisher matrix (NaN for explicit LO)",
    "phi_bound_var": "pseudo-inverse bound w F_S^+ w / nu on the asymptotic signal information "
    "(NaN without bound.weights or when w . phi is not identifiable)",
}

CRB_PROVENANCE = {
    "closed_form": "sqrt of the closed-form total bound for k1 = k2 = k (signal + noise, large N_s)",
    "exact": "sqrt of diag(F^-1)/nu from the exact Fisher matrix",
}

#: Repetitions handed to one worker task.
CHUNK = 25


@dataclass
class ResultTable:
    """Rows of one experiment plus everything needed to reproduce them."""

    command: str
    columns: tuple
    rows: list
    config: object
    provenance: dict
    diagnostics: list = field(default_factory=list)
    fit: dict = None

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        return np.array([row[name] for row in self.rows], dtype=float)

    def metadata(self):
        cfg = self.config.to_dict()
        return {
            "tool": "mzi-twophase",
            "version": __version__,
            "command": self.command,
            "seed": self.config.run.seed,
            "repetitions": self.config.run.repetitions,
            "config": cfg,
            "columns": {name: self.provenance[name] for name in self.columns},
            "diagnostics": self.diagnostics,
            "scaling_fit": self.fit,
        }


@dataclass(frozen=True)
class PointJob:
    """One chunk of repetitions at one sweep point (picklable)."""

    point: int
    trials: tuple
    alpha1: float
    alpha2: float
    r: float
    phi_s: float
    phi_d: float
    theta1: float
    theta2: float
    nu: int
    seed: int
    method: str
    reference: object = None


def _estimate(job, trial, probe, dist):
    batch = sample(dist, job.nu, job.seed, (job.point, trial))
    if job.method == "closed_form":
        return closed_form_estimate(batch, job.r, job.theta1, job.theta2, job.reference)
    return mle_numeric(batch, probe, (job.theta1, job.theta2), PhasePair(job.phi_s, job.phi_d))


def run_job(job):
    """Estimate every repetition of ``job``; ``None`` marks a failed estimate."""
    probe = make_probe(job.alpha1, job.alpha2, job.r)
    dist = output_distribution(PhasePair(job.phi_s, job.phi_d), probe, job.theta1, job.theta2)
    out = []
    for trial in job.trials:
        try:
            rec = _estimate(job, trial, probe, dist)
        except EstimatorError:
            rec = None
        if rec is not None and not rec.converged:
            rec = None
        out.append(rec)
    return out


def _map(jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


@dataclass(frozen=True)
class SweepPoint:
    value: float
    nu: int
    alpha1: float
    alpha2: float
    r: float
    beta: float


def sweep_points(config):
    """Probe parameters and sample size at every sweep value."""
    sw, pr = config.sweep, config.probe
    n_c = pr.alpha1**2 + pr.alpha2**2
    points = []
    for v in sw.values:
        if sw.axis == "nu":
            beta = pr.alpha1**2 / n_c if n_c else 0.0
            points.append(SweepPoint(v, int(v), pr.alpha1, pr.alpha2, pr.r, beta))
        elif sw.axis == "N":
            half = v / 2
            points.append(
                SweepPoint(
                    v,
                    config.run.nu,
                    math.sqrt(sw.beta * half),
                    math.sqrt((1 - sw.beta) * half),
                    math.asinh(math.sqrt(half)),
                    sw.beta,
                )
            )
        else:
            points.append(
                SweepPoint(v, config.run.nu, math.sqrt(v * n_c), math.sqrt((1 - v) * n_c), pr.r, v)
            )
    return points


def _method(config, point):
    if config.run.estimator != "auto":
        return config.run.estimator
    lo = config.lo
    if point.alpha1 == 0 and lo.mode == "tuned" and lo.k1 == lo.k2:
        return "closed_form"
    return "numeric_mle"


def _simulate(config, points, thetas):
    truth = config.truth
    run = config.run
    jobs = []
    for i, (pt, (t1, t2)) in enumerate(zip(points, thetas)):
        for start in range(0, run.repetitions, CHUNK):
            trials = tuple(range(start, min(start + CHUNK, run.repetitions)))
            jobs.append(
                PointJob(
                    i, trials, pt.alpha1, pt.alpha2, pt.r, truth.phi_s, truth.phi_d,
                    t1, t2, pt.nu, run.seed, _method(config, pt), run.phi_s_reference,
                )
            )
    results = _map(jobs, run.threads)
    per_point = [[] for _ in points]
    for job, recs in zip(jobs, results):
        per_point[job.point].extend(recs)
    return per_point


def _summarize(records, truth, repetitions, where):
    ok = [r for r in records if r is not None]
    fail_rate = 1.0 - len(ok) / repetitions
    if len(ok) < 2:
        raise EstimatorError(
            f"only {len(ok)} of {repetitions} repetitions produced an estimate at {where}"
        )
    st = statistics(ok, PhasePair(truth.phi_s, truth.phi_d))
    row = dict(
        bias_s=st.bias_s, bias_d=st.bias_d, rmse_s=st.rmse_s, rmse_d=st.rmse_d, fail_rate=fail_rate
    )
    diag = {
        "successes": st.n,
        "stderr_bias_s": st.stderr_s,
        "stderr_bias_d": st.stderr_d,
        "stderr_rmse_s": st.rmse_stderr_s,
        "stderr_rmse_d": st.rmse_stderr_d,
        "branches": sorted({r.branch for r in ok if r.branch}),
        "methods": sorted({r.method for r in ok}),
    }
    return row, diag


def _closed_form_crb(point, k, nu):
    """``(Delta phi_s, Delta phi_d)`` from the symmetric total bound."""
    n_s = math.sinh(point.r) ** 2
    n_c = point.alpha1**2 + point.alpha2**2
    var_s, var_d = crb_total_closed_form(point.beta, n_s, n_c, k, nu)
    return math.sqrt(var_s), math.sqrt(var_d)


def _thetas(config, points):
    phases = PhasePair(config.truth.phi_s, config.truth.phi_d)
    return [resolve_lo(config.lo, phases, make_probe(p.alpha1, p.alpha2, p.r)) for p in points]


def _figure_table(config, command, axis_column):
    lo = config.lo
    if lo.mode != "tuned" or lo.k1 != lo.k2:
        raise ConfigurationError(f"{command} needs a tuned LO with k1 == k2", "lo.mode")
    points = sweep_points(config)
    if any(p.alpha1 != 0 for p in points):
        raise ConfigurationError(f"{command} needs alpha1 = 0 (use 'custom' otherwise)", "probe.alpha1")
    thetas = _thetas(config, points)
    per_point = _simulate(config, points, thetas)
    columns = ((axis_column,) if axis_column else ()) + BASE_COLUMNS
    rows, diags = [], []
    for pt, (t1, t2), recs in zip(points, thetas, per_point):
        where = f"{config.sweep.axis} = {pt.value}"
        row, diag = _summarize(recs, config.truth, config.run.repetitions, where)
        crb_s, crb_d = _closed_form_crb(pt, lo.k1, pt.nu)
        row.update(nu=pt.nu, crb_s=crb_s, crb_d=crb_d, seed=config.run.seed)
        if axis_column:
            row[axis_column] = pt.value
        diag.update(theta1=t1, theta2=t2)
        rows.append(row)
        diags.append(diag)
    provenance = dict(PROVENANCE)
    provenance["crb_s"] = provenance["crb_d"] = CRB_PROVENANCE["closed_form"]
    return ResultTable(command, columns, rows, config, provenance, diags)


def run_fig2(config):
    """Bias, rmse and bounds versus the number of measurements ``nu``."""
    if config.sweep.axis != "nu":
        raise ConfigurationError("fig2 sweeps over nu", "sweep.axis")
    return _figure_table(config, "fig2", None)


def scaling_fit(n_values, rmse):
    """Least-squares slope of ``log rmse`` against ``log N`` and its standard error."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.log(np.asarray(rmse, dtype=float))
    if len(x) < 3:
        raise ValueError("a slope with standard error needs at least three points")
    res = sps.linregress(x, y)
    return {"slope": float(res.slope), "stderr": float(res.stderr), "intercept": float(res.intercept)}


def run_fig3(config):
    """Scaling of rmse with the total photon number ``N`` at fixed ``nu``."""
    if config.sweep.axis != "N":
        raise ConfigurationError("fig3 sweeps over N", "sweep.axis")
    if config.sweep.beta != 0:
        raise ConfigurationError("fig3 needs sweep.beta = 0", "sweep.beta")
    table = _figure_table(config, "fig3", "N")
    n = table.column("N")
    fit = {}
    for p in ("s", "d"):
        rmse = table.column(f"rmse_{p}")
        fit[f"phi_{p}"] = scaling_fit(n, rmse) if np.all(np.isfinite(rmse)) and len(n) >= 3 else None
    table.fit = fit
    return table


def _asymptotic_fim(config, point, phases):
    lo = config.lo
    if lo.mode != "tuned":
        return None
    n_s = math.sinh(point.r) ** 2
    n_c = point.alpha1**2 + point.alpha2**2
    sig = fim_signal_asymptotic(point.beta, n_s, n_c, lo.k1, lo.k2, phases.phi_d).matrix
    noise = fim_noise_asymptotic(n_s, lo.k1, lo.k2, phases.phi_d).matrix
    if lo.k1 == lo.k2:
        # symmetric total form keeps the O(N_s) noise entries at zero
        return sig, fim_total_asymptotic(point.beta, n_s, n_c, lo.k1).matrix
    return sig, sig + noise


def _trace_inv(m):
    try:
        r = crb(m, 1)
    except SingularFisherError:
        return float("nan")
    return r.var_phi_s + r.var_phi_d


def run_custom(config):
    """Any scenario: explicit or tuned LO, ``beta != 0``, sweeps over nu, N or beta."""
    points = sweep_points(config)
    phases = PhasePair(config.truth.phi_s, config.truth.phi_d)
    thetas = _thetas(config, points)
    per_point = _simulate(config, points, thetas)
    axis = config.sweep.axis
    columns = BASE_COLUMNS + CUSTOM_EXTRA if axis == "nu" else (axis,) + BASE_COLUMNS + CUSTOM_EXTRA
    nan = float("nan")
    rows, diags = [], []
    for pt, (t1, t2), recs in zip(points, thetas, per_point):
        where = f"{config.sweep.axis} = {pt.value}"
        row, diag = _summarize(recs, config.truth, config.run.repetitions, where)
        probe = make_probe(pt.alpha1, pt.alpha2, pt.r)
        f = fim_exact_at(phases, probe, t1, t2).matrix
        try:
            bound = crb(f, pt.nu)
            crb_s, crb_d = math.sqrt(bound.var_phi_s), math.sqrt(bound.var_phi_d)
        except SingularFisherError:
            crb_s = crb_d = nan
        asym = _asymptotic_fim(config, pt, phases)
        fa = asym[1] if asym else np.full((2, 2), nan)
        phi_bound = nan
        if asym is not None and config.weights is not None:
            try:
                phi_bound = crb_pseudo(asym[0], config.weights, pt.nu)
            except SingularFisherError:
                pass
        row.update(
            nu=pt.nu, crb_s=crb_s, crb_d=crb_d, seed=config.run.seed,
            f_exact_ss=f[0, 0], f_exact_sd=f[0, 1], f_exact_dd=f[1, 1],
            f_asym_ss=fa[0, 0], f_asym_sd=fa[0, 1], f_asym_dd=fa[1, 1],
            trace_inv_exact=_trace_inv(f),
            trace_inv_asym=_trace_inv(fa) if asym else nan,
            phi_bound_var=phi_bound,
        )
        if axis != "nu":
            row[axis] = pt.value
        diag.update(theta1=t1, theta2=t2, beta=pt.beta)
        rows.append(row)
        diags.append(diag)
    provenance = dict(PROVENANCE)
    provenance["crb_s"] = provenance["crb_d"] = CRB_PROVENANCE["exact"]
    return ResultTable("custom", columns, rows, config, provenance, diags)


RUNNERS = {"fig2": run_fig2, "fig3": run_fig3, "custom": run_custom}


def format_value(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return "%.17g" % float(value)


def write_csv(table, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(row[c]) for c in table.columns])


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_metadata(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(table.metadata()), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(table, directory):
    """Write ``<command>.csv`` and ``<command>.meta.json``; return both paths."""
    if not table.rows:
        raise ValueError("refusing to write an empty result table")
    os.makedirs(directory, exist_ok=True)
    csv_path = os.path.join(directory, f"{table.command}.csv")
    meta_path = os.path.join(directory, f"{table.command}.meta.json")
    write_csv(table, csv_path)
    write_metadata(table, meta_path)
    return csv_path, meta_path


def read_csv(path):
    """Read a result CSV back as ``(columns, rows)`` with float values."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        columns = tuple(next(reader))
        rows = [{c: float(v) for c, v in zip(columns, line)} for line in reader]
    return columns, rows
