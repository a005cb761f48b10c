"""Experiment configuration, Monte Carlo runner, variance curves and identity checks."""

import dataclasses
import functools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from scipy import stats

from app.models.geometry_model import BlockGeometry
from app.models.noise_model import NoiseCovariance
from app.models.observation_model import ObservationMeta, ObservationSet, Seed
from app.models.path_model import (
    PRESETS, ConstantFunction, ModelSpec, SpotPath, blockwise_truth, integrated_volatility, preset, quantile_transform,
    timevarying_sigma_x, timevarying_sigma_y, true_integrated_covolatility,
)
from app.models.report_model import McReport
from app.utils import asymptotics, baselines, estimators, spectral
from app.utils.errors import ConfigError, DegenerateInput, SpecvError
from app.utils.logger import logger
from app.utils.settings import DEFAULT_OUTPUT_DIR, DEFAULT_QUAD_POINTS, DEFAULT_WORKERS
from app.utils.simulation import simulate_observations

ESTIMATORS = (
    "specv_oracle", "specv_adaptive", "specv_j1", "specv_uniform",
    "spev_x", "spev_y", "realized", "msrc", "msrc_oracle",
)
ESTIMATED_BY_DEFAULT = ("specv_adaptive", "spev_x", "spev_y")
NOISE_SOURCES = ("known", "estimated")
TARGETS = {"spev_x": "X", "spev_y": "Y"}
IDENTITY_TOLERANCE = 1e-10

PRESET_DEFAULTS = {
    "parametric_s4": {"n": 30000, "replications": 10000},
    "timevarying_s4": {"n": 30000, "replications": 10000},
    "parametric_s4_small": {"n": 7500, "replications": 1000},
    "timevarying_s4_small": {"n": 7500, "replications": 1000},
    "custom": {"n": 30000, "replications": 1000},
}


def _as_int(raw):
    return int(raw)


def _as_float(raw):
    return float(raw)


def _as_list(raw):
    return tuple(item.strip() for item in raw.split(",") if item.strip())


def _as_floats(raw):
    return tuple(float(item) for item in _as_list(raw))


def _as_cutoff(raw):
    return raw if raw == "auto" else int(raw)


def _as_sources(raw):
    pairs = []
    for item in _as_list(raw):
        name, sep, source = item.partition(":")
        if not sep:
            raise ValueError(f"expected estimator:source, got '{item}'")
        pairs.append((name.strip(), source.strip()))
    return tuple(pairs)


# key -> converter; the keys are listed in the README
SCHEMA = {
    "preset": str,
    "n": _as_int,
    "h_inv": _as_int,
    "J": _as_cutoff,
    "r_ratio": _as_int,
    "K": _as_int,
    "estimators": _as_list,
    "replications": _as_int,
    "master_seed": _as_int,
    "outputs": str,
    "noise_source": _as_sources,
    "noise_variant": str,
    "eta_x": _as_float,
    "eta_y": _as_float,
    "eta_xy": _as_float,
    "sigma_x": _as_float,
    "sigma_y": _as_float,
    "rho": _as_float,
    "model_tag": str,
    "msrc_grid": _as_floats,
    "msrc_M": _as_int,
    "workers": _as_int,
    "quad_points": _as_int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "parametric_s4"
    n: int = 30000
    h_inv: int = 30
    J: object = None
    r_ratio: int = 3
    K: int = 5
    estimators: tuple = ("specv_oracle",)
    replications: int = 1000
    master_seed: int = 0
    outputs: str = DEFAULT_OUTPUT_DIR
    noise_source: tuple = ()
    noise_variant: str = "lag_one"
    eta_x: float = 0.1
    eta_y: float = 0.1
    eta_xy: float = 0.0
    sigma_x: float | None = None
    sigma_y: float | None = None
    rho: float | None = None
    model_tag: str = "E0"
    msrc_grid: tuple | None = None
    msrc_M: int | None = None
    workers: int = DEFAULT_WORKERS
    quad_points: int = DEFAULT_QUAD_POINTS

    def geometry(self):
        nh = self.n // self.h_inv
        if self.J is None:
            J = nh
        elif self.J == "auto":
            J = BlockGeometry.auto_cutoff(self.n, nh)
        else:
            J = self.J
        return BlockGeometry(self.n, self.h_inv, J, self.r_ratio, self.K)

    def source_for(self, estimator):
        sources = dict(self.noise_source)
        if estimator in sources:
            return sources[estimator]
        return "estimated" if estimator in ESTIMATED_BY_DEFAULT else "known"

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_lines(self):
        """KEY=value lines that load_config reads back to an equal config"""
        lines = []
        for key in SCHEMA:
            value = getattr(self, key)
            if value is None:
                continue
            if key == "noise_source":
                value = ",".join(f"{name}:{source}" for name, source in value)
            elif isinstance(value, tuple):
                value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            if value == "":
                continue
            lines.append(f"{key}={value}")
        return lines


def _check_semantics(values):
    problems = {}
    name = values.get("preset", "parametric_s4")
    if name not in PRESET_DEFAULTS:
        problems["preset"] = f"unknown preset '{name}', expected one of {sorted(PRESET_DEFAULTS)}"
    if name == "custom":
        for key in ("sigma_x", "sigma_y", "rho"):
            if key not in values:
                problems[key] = "required by the custom preset"
    else:
        for key in ("sigma_x", "sigma_y", "rho"):
            if key in values:
                problems[key] = "only allowed with preset=custom"
    if values.get("replications", 1) < 1:
        problems["replications"] = "must be at least 1"
    if values.get("workers", 1) < 1:
        problems["workers"] = "must be at least 1"
    if values.get("quad_points", 3) < 3:
        problems["quad_points"] = "must be at least 3"
    unknown = [e for e in values.get("estimators", ()) if e not in ESTIMATORS]
    if unknown:
        problems["estimators"] = f"unknown estimators {unknown}, expected a subset of {list(ESTIMATORS)}"
    elif len(set(values.get("estimators", ()))) != len(values.get("estimators", ())):
        problems["estimators"] = "estimators must not repeat"
    for estimator, source in values.get("noise_source", ()):
        if estimator not in ESTIMATORS or source not in NOISE_SOURCES:
            problems["noise_source"] = f"invalid entry '{estimator}:{source}'"
    if values.get("noise_variant", "lag_one") not in estimators.NOISE_VARIANTS:
        problems["noise_variant"] = f"expected one of {list(estimators.NOISE_VARIANTS)}"
    if values.get("model_tag", "E0") not in ("E0", "E3"):
        problems["model_tag"] = "expected E0 or E3"
    if values.get("msrc_M") is not None and values["msrc_M"] < 1:
        problems["msrc_M"] = "must be positive"
    return problems


def parse_config(pairs):
    """Validate raw KEY -> string pairs into an ExperimentConfig

    Unknown keys, unconvertible values and semantic problems are all collected
    before a single ConfigError is raised.
    """
    problems = {}
    values = {}
    for key, raw in pairs.items():
        if key not in SCHEMA:
            problems[key] = "unknown key"
            continue
        if raw is None or str(raw).strip() == "":
            problems[key] = "missing value"
            continue
        try:
            values[key] = SCHEMA[key](str(raw).strip())
        except ValueError as e:
            problems[key] = f"cannot parse '{raw}': {e}"
    problems.update(_check_semantics(values))
    if problems:
        logger.error(f"Rejected experiment config: {problems}")
        raise ConfigError("invalid experiment config", problems)

    defaults = PRESET_DEFAULTS[values.get("preset", "parametric_s4")]
    for key, value in defaults.items():
        values.setdefault(key, value)
    cfg = ExperimentConfig(**values)
    try:
        cfg.geometry()
    except SpecvError as e:
        raise ConfigError("invalid block geometry", {"h_inv": str(e)}) from e
    except ZeroDivisionError as e:
        raise ConfigError("invalid block geometry", {"h_inv": "must be positive"}) from e
    return cfg


def load_config(path, overrides=None):
    """Read a flat KEY=value file (dotenv syntax) and apply string overrides"""
    if not os.path.isfile(path):
        logger.error(f"Config file {path} not found")
        raise ConfigError("config file not found", {"config": path})
    pairs = dict(dotenv_values(path))
    pairs.update({key: str(value) for key, value in (overrides or {}).items() if value is not None})
    logger.info(f"Loaded experiment config from {path}")
    return parse_config(pairs)


@functools.lru_cache(maxsize=8)
def build_model(cfg):
    """ModelSpec of the configured design"""
    if cfg.preset == "custom":
        path = SpotPath.constant(cfg.sigma_x, cfg.sigma_y, cfg.rho)
        spec = ModelSpec(path=path, noise=NoiseCovariance.from_levels(cfg.eta_x, cfg.eta_y, cfg.eta_xy), name="custom")
    else:
        spec = preset(cfg.preset, cfg.eta_x, cfg.eta_y, cfg.eta_xy)
    return dataclasses.replace(spec, tag=cfg.model_tag)


def truths(cfg):
    """Estimands per functional: integrals for E0, blockwise sums for E3"""
    spec = build_model(cfg)
    if cfg.model_tag == "E3":
        return {which: blockwise_truth(spec.path, cfg.h_inv, which) for which in ("XY", "X", "Y")}
    return {
        "XY": true_integrated_covolatility(spec.path, cfg.quad_points),
        "X": integrated_volatility(spec.path, "X", cfg.quad_points),
        "Y": integrated_volatility(spec.path, "Y", cfg.quad_points),
    }


@dataclass(frozen=True)
class EstimationContext:
    """What an estimator may know besides the observations"""
    geometry: BlockGeometry
    noise: NoiseCovariance | None = None
    path: SpotPath | None = None
    noise_variant: str = "lag_one"
    msrc_M: int | None = None


def _seed_label(obs):
    if obs.meta.seed_master is None:
        return None
    return f"{obs.meta.seed_master}:{obs.meta.seed_stream}"


def run_estimator(name, obs, context, noise_source="known", coeffs=None):
    """Run one named estimator on one ObservationSet

    noise_source 'known' uses context.noise, 'estimated' the noise estimator
    named by context.noise_variant. The MSRC modes never use H.
    """
    seed = _seed_label(obs)
    if name == "realized":
        return baselines.realized(obs)
    if name == "msrc":
        M = context.msrc_M or math.ceil(math.sqrt(obs.n))
        return baselines.msrc(obs, baselines.MsrcConfig(min(M, obs.n)), seed=seed)
    if name == "msrc_oracle":
        raise DegenerateInput("msrc_oracle needs the replications of a Monte Carlo run")
    if noise_source == "known":
        if context.noise is None:
            raise DegenerateInput(f"{name} with a known noise level needs H")
        noise = context.noise
    elif name == "specv_adaptive":
        noise = context.noise_variant
    else:
        noise = estimators.estimate_noise_covariance(obs, context.noise_variant)
    if name == "specv_adaptive":
        return estimators.specv_adaptive(obs, context.geometry, noise=noise)

    coeffs = coeffs if coeffs is not None else spectral.compute_coefficients(obs, context.geometry)
    if name == "specv_oracle":
        if context.path is None:
            raise DegenerateInput("specv_oracle needs the true spot path")
        return estimators.specv_oracle(coeffs, context.path, noise, seed, noise_source)
    if name == "specv_j1":
        return estimators.specv_j1(coeffs, noise, context.path, seed, noise_source)
    if name == "specv_uniform":
        return estimators.specv_uniform(coeffs, noise, context.path, seed, noise_source)
    if name in TARGETS:
        return estimators.spev(coeffs, TARGETS[name], None, noise, seed, noise_source)
    raise DegenerateInput(f"unknown estimator '{name}'")


@functools.lru_cache(maxsize=8)
def estimation_context(cfg):
    spec = build_model(cfg)
    return EstimationContext(
        geometry=cfg.geometry(),
        noise=spec.noise,
        path=quantile_transform(spec.path, spec.scheme),
        noise_variant=cfg.noise_variant,
        msrc_M=cfg.msrc_M,
    )


def _ladder(cfg):
    return baselines.scale_ladder(cfg.n, cfg.msrc_grid)


def _run_replication(cfg, index):
    """Simulate replication `index` and run every configured estimator

    Top-level so that worker processes can unpickle it.
    """
    spec = build_model(cfg)
    context = estimation_context(cfg)
    obs = simulate_observations(spec, cfg.n, Seed(cfg.master_seed, index), h_inv=cfg.h_inv)
    needs_coeffs = any(name not in ("realized", "msrc", "msrc_oracle", "specv_adaptive") for name in cfg.estimators)
    coeffs = spectral.compute_coefficients(obs, context.geometry) if needs_coeffs else None

    rows, timings, candidates = [], {}, None
    for name in cfg.estimators:
        started = time.perf_counter()
        row = {"replication": index, "estimator": name, "value": math.nan, "plugin_avar": math.nan, "error": ""}
        try:
            if name == "msrc_oracle":
                candidates = baselines.msrc_candidates(obs, _ladder(cfg))
            else:
                report = run_estimator(name, obs, context, cfg.source_for(name), coeffs)
                row["value"] = report.value
                row["plugin_avar"] = report.plugin_avar
        except (SpecvError, ArithmeticError, np.linalg.LinAlgError) as e:
            logger.warning(f"Replication {index}: {name} failed: {e}")
            row["error"] = f"{type(e).__name__}: {e}"
        timings[name] = time.perf_counter() - started
        rows.append(row)
    logger.debug(f"Replication {index} done")
    return rows, timings, candidates


def _target(estimator):
    return TARGETS.get(estimator, "XY")


def _standardize(frame, n):
    """Standardized errors: plug-in variance where available, empirical otherwise"""
    frame = frame.copy()
    frame["standardized"] = math.nan
    frame["standardization"] = ""
    for name, group in frame.groupby("estimator", sort=False):
        avar = group["plugin_avar"].to_numpy()
        values = group["value"].to_numpy()
        if np.all(np.isfinite(avar) & (avar > 0)):
            z = (values - group["truth"].to_numpy()) / np.sqrt(avar / math.sqrt(n))
            kind = "plugin"
        else:
            finite = values[np.isfinite(values)]
            spread = finite.std() if len(finite) > 1 else 0.0
            z = (values - finite.mean()) / spread if spread > 0 else np.full(len(values), math.nan)
            kind = "empirical"
        frame.loc[group.index, "standardized"] = z
        frame.loc[group.index, "standardization"] = kind
    return frame


def summarize(replications, n, order):
    """Per-estimator mean, bias, variance (ddof=0), RMSE, sqrt(n)-scaled variance and KS p-value"""
    rows = []
    for name in order:
        group = replications[replications["estimator"] == name]
        values = group["value"].to_numpy()
        finite = np.isfinite(values)
        truth = float(group["truth"].iloc[0])
        row = {"estimator": name, "truth": truth, "count": int(finite.sum()), "errors": int((group["error"] != "").sum())}
        if finite.sum() >= 1:
            mean = float(values[finite].mean())
            variance = float(values[finite].var())
            bias = mean - truth
            row.update(mean=mean, bias=bias, variance=variance, rmse=math.sqrt(bias * bias + variance),
                       scaled_variance=variance * math.sqrt(n))
        else:
            row.update(mean=math.nan, bias=math.nan, variance=math.nan, rmse=math.nan, scaled_variance=math.nan)
        z = group["standardized"].to_numpy()
        z = z[np.isfinite(z)]
        row["ks_pvalue"] = float(stats.kstest(z, "norm").pvalue) if len(z) >= 2 else math.nan
        rows.append(row)
    columns = ["estimator", "truth", "count", "errors", "mean", "bias", "variance", "rmse", "scaled_variance", "ks_pvalue"]
    return pd.DataFrame(rows, columns=columns)


def run_experiment(cfg, workers=None):
    """Monte Carlo study of the configured estimators

    Replication i uses Seed(master_seed, i), so results do not depend on the
    worker count; executor.map returns them in index order.
    """
    workers = cfg.workers if workers is None else workers
    geometry = cfg.geometry()
    logger.info(
        f"Experiment {cfg.preset} ({cfg.model_tag}): n={cfg.n}, geometry={geometry.to_dict()}, "
        f"estimators={list(cfg.estimators)}, replications={cfg.replications}, workers={workers}"
    )
    truth = truths(cfg)

    if workers <= 1:
        results = list(map(_run_replication, repeat(cfg), range(cfg.replications)))
    else:
        chunksize = max(1, cfg.replications // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_replication, repeat(cfg), range(cfg.replications), chunksize=chunksize))

    frame = pd.DataFrame([row for rows, _, _ in results for row in rows])
    frame["truth"] = [truth[_target(name)] for name in frame["estimator"]]
    warnings = []
    if "msrc_oracle" in cfg.estimators:
        warnings.extend(_apply_msrc_oracle(frame, results, truth["XY"], cfg))

    frame = _standardize(frame, cfg.n)
    summary = summarize(frame, cfg.n, cfg.estimators)
    timing_rows = [{"estimator": name, "seconds": sum(t[name] for _, t, _ in results)} for name in cfg.estimators]
    logger.info(f"Experiment finished: {summary[['estimator', 'rmse']].to_dict('records')}")
    columns = ["replication", "estimator", "value", "plugin_avar", "truth", "standardized", "standardization", "error"]
    return McReport(
        summary=summary,
        replications=frame[columns],
        timings=pd.DataFrame(timing_rows, columns=["estimator", "seconds"]),
        config=cfg.to_dict(),
        truths=truth,
        warnings=tuple(warnings),
    )


def _apply_msrc_oracle(frame, results, truth, cfg):
    usable = [(i, values) for i, (_, _, values) in enumerate(results) if values is not None]
    if not usable:
        return ["msrc_oracle: no replication produced estimates"]
    table = np.vstack([values for _, values in usable])
    ladder = _ladder(cfg)
    tuned, warnings = baselines.grid_oracle_scale(table, ladder, truth, cfg.n, cfg.msrc_grid)
    column = [M for _, M in ladder].index(tuned.M)
    mask = (frame["estimator"] == "msrc_oracle") & frame["replication"].isin([i for i, _ in usable])
    frame.loc[mask, "value"] = table[:, column]
    return warnings + [f"msrc_oracle selected M={tuned.M} (c={tuned.scale:.4g})"]


def write_outputs(report, out_dir):
    """summary.csv, replications.csv, timings.csv and the config echo"""
    os.makedirs(out_dir, exist_ok=True)
    options = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}
    report.summary.to_csv(os.path.join(out_dir, "summary.csv"), **options)
    report.replications.to_csv(os.path.join(out_dir, "replications.csv"), **options)
    report.timings.to_csv(os.path.join(out_dir, "timings.csv"), **options)
    cfg = ExperimentConfig(**report.config)
    with open(os.path.join(out_dir, "config.cfg"), "w") as handle:
        handle.write("\n".join(cfg.to_lines()) + "\n")
        for message in report.warnings:
            handle.write(f"# warning: {message}\n")
    logger.info(f"Wrote Monte Carlo outputs to {out_dir}")


def variance_curves(rho_grid, sigma_x=1.0, sigma_y=1.0, noise=None, constants=None, time_varying=False,
                    quad_points=DEFAULT_QUAD_POINTS):
    """Asymptotic variance curves over a grid of correlations

    Args:
        rho_grid: correlations in (-1, 1)
        sigma_x, sigma_y: constant volatilities (ignored when time_varying)
        noise (NoiseCovariance): noise level, eta_x = eta_y = 0.1 by default
        constants: (N, D, C) of an MSRC-type variance N c^-3 + D c + C c^-1,
            or a callable rho -> (N, D, C); adds the msrc_avar column
        time_varying (bool): use the time-varying volatility design

    Returns:
        pd.DataFrame with one row per rho
    """
    noise = noise or NoiseCovariance.from_levels(0.1, 0.1)
    rows = []
    for rho in rho_grid:
        rho = float(rho)
        if time_varying:
            path = SpotPath(timevarying_sigma_x, timevarying_sigma_y, ConstantFunction(rho), "time-varying volatility")
            v_local = math.nan
        else:
            path = SpotPath.constant(sigma_x, sigma_y, rho)
            v_local = asymptotics.local_variance(sigma_x, sigma_y, rho, noise)
        row = {
            "rho": rho,
            "sigma_x": math.nan if time_varying else sigma_x,
            "sigma_y": math.nan if time_varying else sigma_y,
            "eta_x": noise.eta_x,
            "eta_y": noise.eta_y,
            "eta_xy": noise.eta_xy,
            "v_local": v_local,
            "clt_variance": asymptotics.clt_variance(path, noise, quad_points),
        }
        if constants is not None:
            N, D, C = constants(rho) if callable(constants) else constants
            c = asymptotics.tuning_constant(N, D, C)
            row["msrc_avar"] = asymptotics.tuning_objective(c, N, D, C)
        rows.append(row)
    return pd.DataFrame(rows)


def _random_observations(rng, n, noise_level=0.0):
    times = np.arange(n + 1) / n
    steps = rng.standard_normal((n, 2)) / math.sqrt(n)
    x = np.concatenate(([0.0], np.cumsum(steps[:, 0])))
    y = np.concatenate(([0.0], np.cumsum(steps[:, 1])))
    if noise_level:
        x = x + noise_level * rng.standard_normal(n + 1)
        y = y + noise_level * rng.standard_normal(n + 1)
    return ObservationSet(times, x, y, ObservationMeta(n=n))


def run_identity_checks(nh_values=(4, 16, 100, 1000), samples=100, seed=0):
    """Exact identities of the spectral machinery with their maximal residuals

    Returns a DataFrame with columns identity, parameter, residual, tolerance, passed.
    """
    rng = np.random.default_rng(seed)
    rows = []

    def record(identity, parameter, residual, tolerance=IDENTITY_TOLERANCE):
        rows.append({"identity": identity, "parameter": parameter, "residual": residual,
                     "tolerance": tolerance, "passed": bool(residual < tolerance)})

    for nh in nh_values:
        o1, o2 = spectral.orthogonality_residuals(nh)
        record("orthogonality_cos", f"nh={nh}", o1)
        record("orthogonality_sin", f"nh={nh}", o2)

    geometry = BlockGeometry(n=64, h_inv=4, J=16, r_ratio=1, K=1)
    sbp, parseval, reduction = 0.0, 0.0, 0.0
    for _ in range(samples):
        obs = _random_observations(rng, geometry.n, noise_level=float(rng.uniform(0.0, 0.1)))
        j = int(rng.integers(1, geometry.nh + 1))
        k = int(rng.integers(0, geometry.h_inv))
        scale = max(np.max(np.abs(obs.y)), np.finfo(float).tiny)
        sbp = max(sbp, spectral.sbp_residual(obs, geometry, j, k) / scale)
        parseval = max(parseval, spectral.parseval_residual(obs, geometry))
        coeffs = spectral.compute_coefficients(obs, geometry)
        uniform = estimators.specv_uniform(coeffs, NoiseCovariance.zero()).value
        interior = spectral.block_interior_covariation(obs, geometry)
        dx, dy = obs.increments()
        scale = max(float(np.abs(dx) @ np.abs(dy)), np.finfo(float).tiny)
        reduction = max(reduction, abs(uniform - interior) / scale)
    record("summation_by_parts", f"{samples} random inputs", sbp)
    record("parseval", f"{samples} random inputs", parseval)
    record("noiseless_reduction", f"{samples} random inputs", reduction)

    reciprocity = 0.0
    for sx in (0.5, 1.0, 2.0):
        for rho in (-0.7, 0.0, 0.5):
            for eta in (0.01, 0.1, 1.0):
                noise = NoiseCovariance.from_levels(eta, eta)
                terms = asymptotics.variance_terms(sx, 1.0, rho, noise)
                numeric = asymptotics.quadrature_oracle(asymptotics.QuarticCoefficients.f1(terms.A, terms.B))
                v = asymptotics.local_variance(sx, 1.0, rho, noise)
                reciprocity = max(reciprocity, abs(v * numeric - 1.0))
    record("reciprocity", "27 parameter points", reciprocity)

    for M in (2, 10, 100, 1000):
        level, bias = baselines.MsrcConfig(M).constraint_residuals()
        record("msrc_weights", f"M={M}", max(abs(level), abs(bias)))

    report = pd.DataFrame(rows, columns=["identity", "parameter", "residual", "tolerance", "passed"])
    failed = report[~report["passed"]]
    if len(failed):
        logger.warning(f"Identity checks failed: {failed['identity'].tolist()}")
    return report


def preset_names():
    return list(PRESETS) + [f"{name}_small" for name in PRESETS] + ["custom"]
