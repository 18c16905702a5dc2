"""Seeded experiment runners wiring schedules to coherence and recovery.

Every runner consumes a validated configuration, derives one RNG seed per
Monte Carlo trial as base seed plus trial index, and returns a table
(fieldnames plus rows) ready for CSV or JSON emission.  Identical
configurations and seeds reproduce identical tables byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import __version__
from .acquisition import AcquisitionOperator, apply
from .coherence import hpsf, mu_hypercomplex, mu_traditional
from .recovery import (
    SolverParams,
    SparseSpectrum,
    matched_filter,
    solve_ph1,
    theorem1_certificate,
    theorem2_certificate,
)
from .schedules import (
    SamplingSchedule,
    nus_exponential,
    nus_random,
    pcs,
    pcs_equal_coverage,
    rpd,
    uniform,
)
from .stats import SampleSummary, ols_fit, qq_pairs, z_score

__all__ = [
    "ConfigError",
    "Table",
    "build_schedule",
    "validate_config",
    "run_coverage_sweep",
    "run_method_compare",
    "run_scheme_compare",
    "run_scaling_fit",
    "run_hpsf",
    "run_recover",
    "run_qq",
    "write_table",
    "GAMMA_GRID",
]

GAMMA_GRID = (2.0, 1.75, 1.5, 1.25, 1.0, 0.75, 0.5, 0.33, 0.25)


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""


@dataclass
class Table:
    fieldnames: list
    rows: list


def _format_value(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_table(table: Table, fmt: str = "csv") -> str:
    """Render a table as RFC-4180 CSV (LF endings) or JSON."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.fieldnames)
        for row in table.rows:
            writer.writerow([_format_value(row.get(f)) for f in table.fieldnames])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(table.rows, indent=2) + "\n"
    raise ConfigError(f"config.format: unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# configuration


_COMMON_KEYS = {"kind", "seed", "n_monte", "format"}
_KIND_KEYS = {
    "coverage-sweep": {"dims", "deltas", "decay"},
    "method-compare": {"sizes", "direct_len", "delta", "scheme", "approach"},
    "scheme-compare": {"dims", "delta_i", "delta_c", "approach"},
    "scaling-fit": {"family", "sizes", "approaches", "deltas", "direct_len",
                    "gammas", "min_draws"},
    "hpsf": {"dims", "spike", "schedule"},
    "recover": {"dims", "schedule", "spectrum", "spectrum_path", "rho", "tol",
                "max_iter", "norm", "matched_filter"},
    "qq": {"sizes", "direct_len", "delta", "scheme", "approach"},
    "schedule-gen": {"dims", "schedule"},
}
_REQUIRED = {
    "coverage-sweep": {"dims"},
    "method-compare": {"sizes", "delta"},
    "scheme-compare": {"dims"},
    "scaling-fit": {"sizes"},
    "hpsf": {"dims", "spike", "schedule"},
    "recover": {"dims", "schedule"},
    "qq": {"sizes", "delta"},
    "schedule-gen": {"dims", "schedule"},
}
_SCHEDULE_KEYS = {"class", "delta_i", "delta_c", "scheme", "approach", "bias",
                  "decay", "variant"}


def validate_config(config: dict, kind: str) -> dict:
    """Check the key set and kind consistency; returns the config."""
    if not isinstance(config, dict):
        raise ConfigError("config: expected a JSON object")
    got_kind = config.get("kind", kind)
    if got_kind != kind:
        raise ConfigError(f"config.kind: expected {kind!r}, got {got_kind!r}")
    allowed = _COMMON_KEYS | _KIND_KEYS[kind]
    for key in config:
        if key not in allowed:
            raise ConfigError(f"config.{key}: unknown key for kind {kind!r}")
    for key in _REQUIRED[kind]:
        if key not in config:
            raise ConfigError(f"config.{key}: required for kind {kind!r}")
    sched = config.get("schedule")
    if sched is not None:
        if not isinstance(sched, dict):
            raise ConfigError("config.schedule: expected an object")
        for key in sched:
            if key not in _SCHEDULE_KEYS:
                raise ConfigError(f"config.schedule.{key}: unknown key")
        if "class" not in sched:
            raise ConfigError("config.schedule.class: required")
    return config


def _seeds(config: dict, default_n: int = 10) -> list:
    base = int(config.get("seed", 0))
    n = int(config.get("n_monte", default_n))
    if n < 1:
        raise ConfigError("config.n_monte: must be >= 1")
    return [base + t for t in range(n)]


def build_schedule(dims, spec: dict, seed: int) -> SamplingSchedule:
    """Instantiate a schedule from its descriptor-style configuration."""
    klass = spec["class"]
    if klass == "uniform":
        return uniform(dims)
    if klass == "nus-random":
        return nus_random(dims, spec.get("delta_i", 0.5), seed)
    if klass == "nus-exponential":
        return nus_exponential(dims, spec.get("delta_i", 0.5), spec.get("decay", 2.0),
                               spec.get("variant", "random"), seed)
    if klass == "pcs":
        return pcs(dims, spec.get("delta_i", 1.0), spec.get("delta_c", 0.5),
                   spec.get("scheme"), spec.get("approach", "A2"), seed)
    if klass == "rpd":
        return rpd(dims, spec.get("scheme"), spec.get("approach", "A2"), seed)
    if klass == "pcs-equal-coverage":
        return pcs_equal_coverage(dims, spec.get("delta_i", 0.5),
                                  spec.get("bias", "random"), seed)
    raise ConfigError(f"config.schedule.class: unknown class {klass!r}")


def _provenance(descriptor: dict, seed) -> dict:
    return {
        "descriptor": json.dumps(descriptor, sort_keys=True),
        "seed": seed,
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# runners


def _mu_sample(make_schedule, seeds, with_traditional: bool = False):
    mus, trads = [], []
    for s in seeds:
        op = AcquisitionOperator(make_schedule(s))
        rep = mu_hypercomplex(op)
        mus.append(rep.mu_h)
        if with_traditional:
            trads.append(mu_traditional(op))
    return mus, trads


def _mean_sd(values):
    """Mean and sample sd; infinite trials make the mean infinite, sd empty."""
    arr = np.asarray(values, dtype=float)
    n_inf = int(np.isinf(arr).sum())
    if n_inf:
        return float("inf"), None, n_inf
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd, 0


def run_coverage_sweep(config: dict) -> Table:
    """Mean and spread of coherence against indel and component coverage."""
    validate_config(config, "coverage-sweep")
    dims = tuple(config["dims"])
    deltas = [float(x) for x in config.get("deltas", (0.25, 0.5, 0.75, 1.0))]
    seeds = _seeds(config)
    series = [
        ("nus", None, lambda d, s: nus_random(dims, d, s)),
        ("pcs-half", 0.5, lambda d, s: pcs(dims, d, 0.5, None, "A2", s)),
        ("pcs-quarter", 0.25, lambda d, s: pcs(dims, d, 0.25, None, "A2", s)),
    ]
    fields = ["class", "delta_i", "delta_c", "mean_mu", "sd_mu", "n_infinite",
              "mean_mu_traditional", "n_monte", "descriptor", "seed", "version"]
    rows = []
    for name, delta_c, make in series:
        for delta in deltas:
            mus, trads = _mu_sample(lambda s, d=delta, mk=make: mk(d, s), seeds,
                                    with_traditional=(name == "nus"))
            mean, sd, n_inf = _mean_sd(mus)
            sched = make(delta, seeds[0])
            row = {
                "class": name,
                "delta_i": delta,
                "delta_c": delta_c if delta_c is not None else 1.0,
                "mean_mu": mean,
                "sd_mu": sd,
                "n_infinite": n_inf,
                "mean_mu_traditional": float(np.mean(trads)) if trads else None,
                "n_monte": len(seeds),
            }
            row.update(_provenance(sched.descriptor.to_dict(), f"{seeds[0]}..{seeds[-1]}"))
            rows.append(row)
    return Table(fields, rows)


def _method_schedules(n_i: int, direct_len: int, delta: float, scheme, approach):
    dims = (n_i, n_i, direct_len)
    if delta not in (0.25, 0.5):
        raise ConfigError("config.delta: method comparison supports 0.25 or 0.5")
    return {
        "nus": lambda s: nus_random(dims, delta, s),
        "pcs": lambda s: pcs_equal_coverage(dims, delta, "random", s),
        "fcpcs": lambda s: pcs(dims, 1.0, delta, scheme, approach, s),
    }


def run_method_compare(config: dict) -> Table:
    """Mean, standard error, and pairwise Z-scores for the three methods."""
    validate_config(config, "method-compare")
    sizes = [int(n) for n in config["sizes"]]
    direct_len = int(config.get("direct_len", 4))
    delta = float(config["delta"])
    scheme = config.get("scheme", "S4")
    approach = config.get("approach", "A2")
    seeds = _seeds(config, default_n=30)
    fields = ["N", "delta", "n_monte",
              "nus_mean", "nus_se", "pcs_mean", "pcs_se", "fcpcs_mean", "fcpcs_se",
              "z_nus_pcs", "z_nus_fcpcs", "z_pcs_fcpcs",
              "descriptor", "seed", "version"]
    rows = []
    for n_i in sizes:
        makers = _method_schedules(n_i, direct_len, delta, scheme, approach)
        dof = {}
        summaries = {}
        for method, make in makers.items():
            scheds = [make(s) for s in seeds]
            dof[method] = {s.n_real for s in scheds}
            mus = [mu_hypercomplex(AcquisitionOperator(s)).mu_h for s in scheds]
            summaries[method] = SampleSummary.from_values(mus)
        counts = {next(iter(v)) for v in dof.values() if len(v) == 1}
        if any(len(v) != 1 for v in dof.values()) or len(counts) != 1:
            raise ConfigError(
                f"config.sizes: unequal real degrees of freedom at N={n_i}: "
                + ", ".join(f"{m}={sorted(v)}" for m, v in dof.items())
            )
        row = {
            "N": n_i,
            "delta": delta,
            "n_monte": len(seeds),
            "nus_mean": summaries["nus"].mean, "nus_se": summaries["nus"].se,
            "pcs_mean": summaries["pcs"].mean, "pcs_se": summaries["pcs"].se,
            "fcpcs_mean": summaries["fcpcs"].mean, "fcpcs_se": summaries["fcpcs"].se,
            "z_nus_pcs": z_score(summaries["nus"], summaries["pcs"]),
            "z_nus_fcpcs": z_score(summaries["nus"], summaries["fcpcs"]),
            "z_pcs_fcpcs": z_score(summaries["pcs"], summaries["fcpcs"]),
        }
        row.update(_provenance({"delta": delta, "scheme": scheme, "approach": approach},
                               f"{seeds[0]}..{seeds[-1]}"))
        rows.append(row)
    return Table(fields, rows)


def run_scheme_compare(config: dict) -> Table:
    """Mean coherence per read scheme plus pairwise Z-scores."""
    validate_config(config, "scheme-compare")
    dims = tuple(config["dims"])
    delta_i = float(config.get("delta_i", 1.0))
    delta_c = float(config.get("delta_c", 0.25))
    approach = config.get("approach", "A2")
    seeds = _seeds(config, default_n=30)
    names = ["S1", "S2", "S3", "S4"]
    summaries = {}
    for name in names:
        mus, _ = _mu_sample(lambda s, nm=name: pcs(dims, delta_i, delta_c, nm, approach, s), seeds)
        summaries[name] = SampleSummary.from_values(mus)
    fields = ["scheme", "mean_mu", "se_mu", "n_monte"] + [f"z_vs_{n}" for n in names] + [
        "descriptor", "seed", "version"]
    rows = []
    for name in names:
        row = {"scheme": name, "mean_mu": summaries[name].mean,
               "se_mu": summaries[name].se, "n_monte": len(seeds)}
        for other in names:
            row[f"z_vs_{other}"] = 0.0 if other == name else z_score(summaries[name], summaries[other])
        row.update(_provenance({"delta_i": delta_i, "delta_c": delta_c,
                                "approach": approach}, f"{seeds[0]}..{seeds[-1]}"))
        rows.append(row)
    return Table(fields, rows)


_FROZEN_DIMS = {"A1": 0, "A2": 1, "A3": 2}


def run_scaling_fit(config: dict) -> Table:
    """Power-law fits of mean coherence against size over a gamma grid."""
    validate_config(config, "scaling-fit")
    sizes = [int(n) for n in config["sizes"]]
    if len(sizes) < 4:
        raise ConfigError("config.sizes: need at least 4 problem sizes")
    family = config.get("family", "rpd")
    gammas = [float(g) for g in config.get("gammas", GAMMA_GRID)]
    min_draws = float(config.get("min_draws", 60))
    seeds = _seeds(config)

    groups = []
    if family == "rpd":
        # coherence does not depend on the extent of dimensions whose masks
        # are constant, so frozen dimensions of the N-cube are shortened to
        # 4 without changing the sampled distribution
        reduced_dims = {
            "A1": lambda n: (n, n, n),
            "A2": lambda n: (n, n, 4),
            "A3": lambda n: (n, 4, 4),
        }
        for approach in config.get("approaches", ("A1", "A2", "A3")):
            k_frozen = _FROZEN_DIMS[approach]
            groups.append((
                f"rpd-{approach}",
                lambda n, s, a=approach: rpd(reduced_dims[a](n), "S4", a, s),
                lambda n, k=k_frozen: float(n) ** (3 - k),
            ))
    elif family == "pcs-equal-coverage":
        direct_len = int(config.get("direct_len", 4))
        for delta in config.get("deltas", (0.25, 0.5)):
            groups.append((
                f"pcs-eqcov-{delta}",
                lambda n, s, d=delta: pcs_equal_coverage((n, n, direct_len), d, "random", s),
                lambda n: float(n) ** 2,
            ))
    else:
        raise ConfigError(f"config.family: unknown family {family!r}")

    fields = ["group", "gamma", "model", "beta0", "beta1", "r_squared", "p_value_beta0",
              "excluded_sizes", "exclusion_waived", "best_r2", "best_pvalue",
              "n_monte", "descriptor", "seed", "version"]
    rows = []
    for name, make, draws in groups:
        means = []
        for n in sizes:
            mus = [mu_hypercomplex(AcquisitionOperator(make(n, s))).mu_h for s in seeds]
            means.append(float(np.mean(mus)))
        exclude = [n for n in sizes if draws(n) <= min_draws]
        waived = len(sizes) - len(exclude) < 3
        use_exclude = [] if waived else exclude
        fits_free = [ols_fit(sizes, means, g, "intercept-free", exclude=use_exclude) for g in gammas]
        fits_int = [ols_fit(sizes, means, g, "intercept", exclude=use_exclude) for g in gammas]
        best_r2 = int(np.argmax([f.r_squared for f in fits_free]))
        best_p = int(np.argmax([f.p_value_beta0 for f in fits_int]))
        for gi, g in enumerate(gammas):
            for model, fit in (("intercept-free", fits_free[gi]), ("intercept", fits_int[gi])):
                row = {
                    "group": name, "gamma": g, "model": model,
                    "beta0": fit.beta0, "beta1": fit.beta1,
                    "r_squared": fit.r_squared, "p_value_beta0": fit.p_value_beta0,
                    "excluded_sizes": ";".join(str(int(x)) for x in fit.excluded),
                    "exclusion_waived": waived,
                    "best_r2": (model == "intercept-free" and gi == best_r2),
                    "best_pvalue": (model == "intercept" and gi == best_p),
                    "n_monte": len(seeds),
                }
                row.update(_provenance({"family": family, "group": name},
                                       f"{seeds[0]}..{seeds[-1]}"))
                rows.append(row)
    return Table(fields, rows)


def run_hpsf(config: dict) -> Table:
    """Point-spread values for a spike under one schedule realization."""
    validate_config(config, "hpsf")
    dims = tuple(config["dims"])
    spike = tuple(int(v) for v in config["spike"])
    seed = int(config.get("seed", 0))
    sched = build_schedule(dims, config["schedule"], seed)
    op = AcquisitionOperator(sched)
    values, peak = hpsf(op, spike)
    d = len(dims)
    fields = [f"k_{j}" for j in range(1, d + 1)] + [
        "flat_index", "value", "is_spike", "descriptor", "seed", "version"]
    rows = []
    prov = _provenance(sched.descriptor.to_dict(), seed)
    for flat, idx in enumerate(np.ndindex(*dims)):
        row = {f"k_{j + 1}": idx[j] for j in range(d)}
        row["flat_index"] = flat
        row["value"] = peak if idx == spike else float(values[idx])
        row["is_spike"] = int(idx == spike)
        row.update(prov)
        rows.append(row)
    return Table(fields, rows)


def run_recover(config: dict) -> Table:
    """Solve one recovery instance and report the regime certificate."""
    validate_config(config, "recover")
    dims = tuple(config["dims"])
    seed = int(config.get("seed", 0))
    sched = build_schedule(dims, config["schedule"], seed)
    op = AcquisitionOperator(sched)
    if "spectrum" in config:
        spectrum = SparseSpectrum.from_json(json.dumps(config["spectrum"]))
    elif "spectrum_path" in config:
        with open(config["spectrum_path"]) as fh:
            spectrum = SparseSpectrum.from_json(fh.read())
    else:
        raise ConfigError("config.spectrum: a spectrum (inline or path) is required")
    if spectrum.dims != dims:
        raise ConfigError("config.spectrum: dims do not match config.dims")
    x0 = spectrum.to_array()
    y = apply(op, x0)
    rep = mu_hypercomplex(op)
    guaranteed = (not rep.infinite) and theorem2_certificate(rep.mu_h, spectrum.k)
    params = SolverParams(
        rho=float(config.get("rho", 1.0)),
        tol=float(config.get("tol", 1e-9)),
        max_iter=int(config.get("max_iter", 5000)),
    )
    if config.get("matched_filter"):
        est = matched_filter(op, y)
        err = float(np.max(np.abs(est.data - x0.data)))
        row = {"mode": "matched-filter", "converged": True, "iterations": 1,
               "relative_error": err / max(float(np.max(np.abs(x0.data))), 1e-300),
               "objective": None, "mu_h": rep.mu_h, "k": spectrum.k,
               "guaranteed": guaranteed, "exact": err <= 1e-6}
    else:
        result = solve_ph1(op, y, params, norm=config.get("norm", "group"))
        err = float(np.max(np.abs(result.estimate.data - x0.data)))
        rel = err / max(float(np.max(np.abs(x0.data))), 1e-300)
        row = {"mode": f"solve-{config.get('norm', 'group')}",
               "converged": result.converged, "iterations": result.iterations,
               "relative_error": rel, "objective": result.objective,
               "mu_h": rep.mu_h, "k": spectrum.k, "guaranteed": guaranteed,
               "exact": rel <= 1e-6}
    row.update(_provenance(sched.descriptor.to_dict(), seed))
    fields = ["mode", "converged", "iterations", "relative_error", "objective",
              "mu_h", "k", "guaranteed", "exact", "descriptor", "seed", "version"]
    return Table(fields, [row])


def run_qq(config: dict) -> Table:
    """Quantile pairs of coherence distributions for method pairs."""
    validate_config(config, "qq")
    sizes = [int(n) for n in config["sizes"]]
    direct_len = int(config.get("direct_len", 4))
    delta = float(config["delta"])
    scheme = config.get("scheme", "S4")
    approach = config.get("approach", "A2")
    seeds = _seeds(config, default_n=30)
    fields = ["N", "pair", "prob_index", "quantile_x", "quantile_y",
              "n_monte", "descriptor", "seed", "version"]
    rows = []
    for n_i in sizes:
        makers = _method_schedules(n_i, direct_len, delta, scheme, approach)
        samples = {
            m: [mu_hypercomplex(AcquisitionOperator(make(s))).mu_h for s in seeds]
            for m, make in makers.items()
        }
        for x_name, y_name in (("nus", "pcs"), ("nus", "fcpcs"), ("pcs", "fcpcs")):
            pairs = qq_pairs(samples[x_name], samples[y_name])
            for i, (qx, qy) in enumerate(pairs):
                row = {"N": n_i, "pair": f"{x_name}-vs-{y_name}", "prob_index": i,
                       "quantile_x": qx, "quantile_y": qy, "n_monte": len(seeds)}
                row.update(_provenance({"delta": delta, "scheme": scheme,
                                        "approach": approach}, f"{seeds[0]}..{seeds[-1]}"))
                rows.append(row)
    return Table(fields, rows)
