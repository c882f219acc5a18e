"""Datasets and the sequential-design benchmark protocol.

A run splits the data into an initial training set, a candidate pool and a
validation set, fits a GP on the initial set, then adds ``n_add`` candidates
one at a time with an acquisition criterion, evaluating on the validation
set after every step.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .acquisition import CriterionSpec, select_next
from .gp import GPModel, fit_hyperparams, update
from .kernels import KernelSpec
from .metrics import METRICS, EvalReport, aggregate, evaluate_observational, evaluate_synthetic
from .prob import rng_stream
from .scoring import crps_gaussian

__all__ = [
    "Dataset",
    "ExperimentConfig",
    "Trajectory",
    "RepetitionResult",
    "DatasetError",
    "load_dataset",
    "save_dataset",
    "make_synthetic",
    "kernel_template",
    "derive_seed",
    "split",
    "compute_threshold",
    "half_std",
    "run_sequential",
    "run_repetitions",
    "sigma_sweep",
    "kernel_comparison",
]

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class DatasetError(ValueError):
    """Malformed dataset file."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Molecules (or any binary-featured items) with responses.

    ``truth`` and ``noise_var`` are set for synthetic datasets, where
    ``truth`` is the noiseless latent function and ``z`` holds noisy draws.
    """

    ids: tuple
    X: np.ndarray
    z: np.ndarray
    truth: Optional[np.ndarray] = None
    noise_var: Optional[float] = None

    def __post_init__(self):
        n = len(self.ids)
        if self.X.ndim != 2 or self.X.shape[0] != n or self.z.shape != (n,):
            raise ValueError("ids, fingerprints and responses must have equal length")
        if self.truth is not None and self.truth.shape != (n,):
            raise ValueError("truth must match the number of items")
        if (self.truth is None) != (self.noise_var is None):
            raise ValueError("truth and noise_var are given together (synthetic data) or not at all")
        if len(set(self.ids)) != n:
            raise ValueError("duplicate ids")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def synthetic(self) -> bool:
        return self.truth is not None


def _parse_fp(text, d, kind, where):
    text = text.strip()
    if kind == "fp_bits":
        if len(text) != d or set(text) - {"0", "1"}:
            raise DatasetError(f"{where}: expected a {d}-character 0/1 string, got length {len(text)}")
        return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")
    ndig = -(-d // 4)
    if len(text) != ndig:
        raise DatasetError(f"{where}: expected {ndig} hex digits for d={d}, got {len(text)}")
    try:
        value = int(text, 16)
    except ValueError:
        raise DatasetError(f"{where}: invalid hex fingerprint") from None
    if value >> d:
        raise DatasetError(f"{where}: fingerprint has bits beyond d={d}")
    bits = format(value, f"0{d}b")
    return np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")


def load_dataset(path: PathLike) -> Dataset:
    """Read a dataset CSV.

    The file starts with a ``# d=<bits>`` comment, then a header with columns
    ``id,response`` plus ``fp_hex`` (big-endian hex) or ``fp_bits`` (0/1
    string), and optionally ``truth,noise_var`` for synthetic data.
    """
    path = Path(path)
    d = None
    ids, fps, zs, truth, nvar = [], [], [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for lineno, line in enumerate(lines, 1):
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "d":
                d = int(val)
            continue
        if line.strip():
            body.append((lineno, line))
    if d is None or d <= 0:
        raise DatasetError(f"{path}: missing '# d=<bits>' header line")
    if not body:
        raise DatasetError(f"{path}: no header row")
    reader = csv.reader([ln for _, ln in body])
    header = [h.strip() for h in next(reader)]
    fp_col = "fp_hex" if "fp_hex" in header else "fp_bits" if "fp_bits" in header else None
    if "id" not in header or "response" not in header or fp_col is None:
        raise DatasetError(f"{path}: header needs id, response and fp_hex or fp_bits")
    has_truth = "truth" in header
    if has_truth != ("noise_var" in header):
        raise DatasetError(f"{path}: truth and noise_var columns go together")
    col = {h: i for i, h in enumerate(header)}
    for (lineno, _), row in zip(body[1:], reader):
        where = f"{path}: row at line {lineno}"
        if len(row) != len(header):
            raise DatasetError(f"{where}: expected {len(header)} fields, got {len(row)}")
        try:
            zs.append(float(row[col["response"]]))
            if has_truth:
                truth.append(float(row[col["truth"]]))
                nvar.append(float(row[col["noise_var"]]))
        except ValueError:
            raise DatasetError(f"{where}: non-numeric value") from None
        ids.append(row[col["id"]].strip())
        fps.append(_parse_fp(row[col[fp_col]], d, fp_col, where))
    if len(set(ids)) != len(ids):
        seen = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise DatasetError(f"{path}: duplicate id {dup!r}")
    if not ids:
        raise DatasetError(f"{path}: no data rows")
    noise = None
    if has_truth:
        if len(set(nvar)) != 1:
            raise DatasetError(f"{path}: noise_var must be constant")
        noise = nvar[0]
    return Dataset(
        tuple(ids),
        np.vstack(fps).astype(np.uint8),
        np.array(zs),
        np.array(truth) if has_truth else None,
        noise,
    )


def _fp_hex(bits):
    d = bits.shape[0]
    value = int("".join("1" if b else "0" for b in bits), 2)
    return f"{value:0{-(-d // 4)}x}"


def save_dataset(data: Dataset, path: PathLike) -> None:
    """Write ``data`` in the format read by :func:`load_dataset`."""
    header = ["id", "response", "fp_hex"] + (["truth", "noise_var"] if data.synthetic else [])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# d={data.d}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(data.n):
            row = [data.ids[i], repr(float(data.z[i])), _fp_hex(data.X[i])]
            if data.synthetic:
                row += [repr(float(data.truth[i])), repr(float(data.noise_var))]
            w.writerow(row)


def kernel_template(family: str) -> KernelSpec:
    """Kernel spec of ``family`` with placeholder parameters, for fitting."""
    return KernelSpec(family, 1.0, None if family == "tanimoto" else 1.0)


def _inputs(data: Dataset, kernel: KernelSpec):
    return data.X.astype(np.float64) if kernel.stationary else data.X


def derive_seed(base_seed: int, rep_id: int, tag: str) -> int:
    """Stable 64-bit child seed for ``(base_seed, rep_id, tag)``."""
    digest = hashlib.blake2b(f"{int(base_seed)}:{int(rep_id)}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _stream(base_seed, rep_id, tag):
    return rng_stream(derive_seed(base_seed, rep_id, tag), 0)


def make_synthetic(data: Dataset, template: KernelSpec, seed: int) -> Dataset:
    """Synthetic dataset whose ground truth is a GP posterior mean.

    Fits ``template`` (with noise) to all items, takes the posterior mean at
    every item as the truth and adds i.i.d. Gaussian noise with the fitted
    noise variance.
    """
    if data.synthetic:
        raise ValueError("dataset is already synthetic")
    model = fit_hyperparams(_inputs(data, template), data.z, template, fit_noise=True)
    truth, _ = model.predict(_inputs(data, template))
    noise = _stream(seed, 0, "synthetic-noise").standard_normal(data.n)
    z = truth + np.sqrt(model.noise_var) * noise
    logger.info("synthetic data: %s, noise variance %.6g", model.kernel, model.noise_var)
    return Dataset(data.ids, data.X, z, truth, float(model.noise_var))


def compute_threshold(data: Dataset, q: float) -> float:
    """Empirical ``q``-quantile of the responses (linear interpolation)."""
    if not 0 < q < 1:
        raise ValueError("quantile level must be in (0, 1)")
    return float(np.quantile(data.z, q))


def half_std(data: Dataset) -> float:
    """Half the sample standard deviation of the responses."""
    return 0.5 * float(np.std(data.z, ddof=1))


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of the sequential benchmark.

    ``sigma_gamma`` is a positive number or ``"half-std"``. ``threshold``
    overrides ``t_quantile`` when given. ``fit_noise=None`` estimates the
    noise for observed data and fixes it at the generating value for
    synthetic data. ``integration_set`` is ``"candidates"`` or
    ``"candidates+validation"``.
    """

    criterion: CriterionSpec = field(default_factory=lambda: CriterionSpec("random"))
    n_init: int = 30
    n_add: int = 25
    m_validation: int = 100
    t_quantile: float = 0.8
    threshold: Optional[float] = None
    sigma_gamma: Union[float, str] = "half-std"
    repetitions: int = 1
    seed: int = 0
    refit_each_step: bool = True
    kernel: str = "tanimoto"
    fit_noise: Optional[bool] = None
    integration_set: str = "candidates"
    redraw_noise: bool = False

    def __post_init__(self):
        if min(self.n_init, self.n_add, self.m_validation) < 0 or self.repetitions < 1:
            raise ValueError("sizes must be >= 0 and repetitions >= 1")
        if not 0 < self.t_quantile < 1:
            raise ValueError("t_quantile must be in (0, 1)")
        if isinstance(self.sigma_gamma, str):
            if self.sigma_gamma != "half-std":
                raise ValueError("sigma_gamma must be a positive number or 'half-std'")
        elif not self.sigma_gamma > 0:
            raise ValueError("sigma_gamma must be > 0")
        if self.integration_set not in ("candidates", "candidates+validation"):
            raise ValueError("integration_set must be 'candidates' or 'candidates+validation'")
        kernel_template(self.kernel)

    def check_sizes(self, n: int) -> None:
        if self.n_init + self.n_add + self.m_validation > n:
            raise ValueError(
                f"n_init + n_add + m_validation = {self.n_init + self.n_add + self.m_validation} exceeds {n} items"
            )

    def resolve_threshold(self, data: Dataset) -> float:
        return float(self.threshold) if self.threshold is not None else compute_threshold(data, self.t_quantile)

    def resolve_sigma(self, data: Dataset) -> float:
        return half_std(data) if self.sigma_gamma == "half-std" else float(self.sigma_gamma)


def split(data: Dataset, cfg: ExperimentConfig, stream: np.random.Generator):
    """Random disjoint (initial, candidate, validation) index arrays."""
    cfg.check_sizes(data.n)
    perm = stream.permutation(data.n)
    init = perm[: cfg.n_init]
    val = perm[cfg.n_init : cfg.n_init + cfg.m_validation]
    cand = perm[cfg.n_init + cfg.m_validation :]
    return init, cand, val


@dataclass
class Trajectory:
    """One repetition: a report per step and the acquisition trace."""

    rep_id: int
    reports: list
    acquired: list
    initial: np.ndarray
    validation: np.ndarray
    threshold: float
    sigma_gamma: float


def run_sequential(cfg: ExperimentConfig, data: Dataset, rep_id: int = 0, callback=None) -> Trajectory:
    """Run one repetition of the sequential design; deterministic in ``(cfg.seed, rep_id)``.

    ``callback(step, model, train, pool, val)``, if given, is called after
    every fit with the current model and index lists (step 0 is the initial
    design).
    """
    t = cfg.resolve_threshold(data)
    sigma = cfg.resolve_sigma(data)
    crit = cfg.criterion
    if crit.needs_sigma and crit.sigma_gamma is None:
        crit = crit.with_sigma(sigma)
    template = kernel_template(cfg.kernel)
    X = _inputs(data, template)

    z = data.z
    if data.synthetic and cfg.redraw_noise:
        eps = _stream(cfg.seed, rep_id, "noise").standard_normal(data.n)
        z = data.truth + np.sqrt(data.noise_var) * eps

    fit_noise = (not data.synthetic) if cfg.fit_noise is None else cfg.fit_noise
    noise_fixed = None
    if not fit_noise:
        if data.noise_var is None:
            raise ValueError("fit_noise=False needs a dataset with a known noise variance")
        noise_fixed = data.noise_var

    init, cand, val = split(data, cfg, _stream(cfg.seed, rep_id, "split"))
    select_stream = _stream(cfg.seed, rep_id, "select")

    def evaluate(model: GPModel) -> EvalReport:
        if data.synthetic:
            return evaluate_synthetic(model, X[val], data.truth[val], t, sigma)
        return evaluate_observational(model, X[val], z[val], t, sigma)

    train = [int(i) for i in init]
    pool = [int(i) for i in cand]
    model = fit_hyperparams(X[train], z[train], template, fit_noise, noise_fixed)
    reports = [evaluate(model)]
    if callback is not None:
        callback(0, model, list(train), list(pool), list(val))
    acquired = []
    for _ in range(cfg.n_add):
        Xc = X[pool]
        Xint = Xc if cfg.integration_set == "candidates" else np.vstack([Xc, X[val]])
        j = select_next(crit, model, Xc, Xint, t, select_stream)
        idx = pool.pop(j)
        train.append(idx)
        acquired.append(idx)
        if cfg.refit_each_step:
            model = fit_hyperparams(X[train], z[train], template, fit_noise, noise_fixed)
        else:
            model = update(model, X[idx], z[idx])
        reports.append(evaluate(model))
        if callback is not None:
            callback(len(acquired), model, list(train), list(pool), list(val))
    return Trajectory(rep_id, reports, acquired, np.asarray(init), np.asarray(val), t, sigma)


def _run_one(args):
    cfg, data, rep = args
    try:
        return rep, run_sequential(cfg, data, rep), None
    except Exception as exc:  # recorded, the batch continues
        logger.warning("repetition %d failed: %s", rep, exc)
        return rep, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}"


@dataclass
class RepetitionResult:
    """Trajectories of all repetitions and per-step aggregates."""

    config: ExperimentConfig
    trajectories: list
    failures: list
    summary: list

    def long_rows(self):
        """Rows ``(rep, step, criterion, metric, value)``; ``None`` for a missing metric."""
        for tr in self.trajectories:
            if tr is None:
                continue
            for step, rep in enumerate(tr.reports):
                for m in METRICS:
                    yield tr.rep_id, step, self.config.criterion.kind, m, getattr(rep, m)


def run_repetitions(cfg: ExperimentConfig, data: Dataset, workers: int = 1) -> RepetitionResult:
    """Run ``cfg.repetitions`` independent repetitions and aggregate per step.

    Failed repetitions are recorded in ``failures`` as ``(rep_id, message)``.
    """
    cfg.check_sizes(data.n)
    jobs = [(cfg, data, r) for r in range(cfg.repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    trajectories = [r[1] for r in results]
    failures = [(r[0], r[2]) for r in results if r[2] is not None]
    ok = [tr for tr in trajectories if tr is not None]
    summary = [aggregate([tr.reports[s] for tr in ok]) for s in range(cfg.n_add + 1)] if ok else []
    return RepetitionResult(cfg, trajectories, failures, summary)


def sigma_sweep(
    cfg: ExperimentConfig,
    data: Dataset,
    sigmas: Sequence[float],
    criteria: Sequence[str] = ("pw_twcrps_g2", "sur_icrps_g2"),
    workers: int = 1,
):
    """End-of-run metrics of the Gaussian-weight criteria over a grid of ``sigma_gamma``.

    Only the criterion's ``sigma_gamma`` varies; evaluation keeps the
    configured one. Returns ``(rows, failures)`` where each row is a dict
    with keys ``sigma_gamma, criterion, metric, n, mean, median, q1, q3``.
    """
    if len(sigmas) == 0:
        raise ValueError("empty sigma_gamma list")
    rows, failures = [], []
    for s in sigmas:
        for kind in criteria:
            c = replace(cfg, criterion=CriterionSpec(kind, sigma_gamma=float(s), mc_samples=cfg.criterion.mc_samples))
            res = run_repetitions(c, data, workers)
            failures += [(float(s), kind, rep, msg) for rep, msg in res.failures]
            if not res.summary:
                continue
            for m, summ in res.summary[-1].items():
                rows.append(
                    dict(sigma_gamma=float(s), criterion=kind, metric=m, n=summ.n, mean=summ.mean,
                         median=summ.median, q1=summ.q1, q3=summ.q3)
                )
    return rows, failures


def kernel_comparison(
    data: Dataset,
    fractions: Sequence[float] = (0.1, 0.2, 0.3),
    splits: int = 30,
    seed: int = 0,
    kernels: Sequence[str] = ("tanimoto", "exponential", "gaussian"),
):
    """Held-out RMSE and CRPS per kernel and training fraction.

    Every kernel and fraction uses the same ``splits`` random permutations;
    the first ``floor(fraction * N)`` items train, the rest test. The CRPS
    scores the noisy-observation predictive distribution against the held
    out responses. Returns rows with keys ``kernel, fraction, n_train,
    rmse, crps, rmse_sd, crps_sd``.
    """
    for f in fractions:
        if not 0 < f < 1:
            raise ValueError(f"training fraction {f} not in (0, 1)")
        n_train = int(f * data.n)
        if n_train < 2 or n_train >= data.n:
            raise ValueError(f"training fraction {f} leaves no test set or too few training points")
    perms = [_stream(seed, s, "kernel-split").permutation(data.n) for s in range(splits)]
    rows = []
    for family in kernels:
        template = kernel_template(family)
        X = _inputs(data, template)
        for f in fractions:
            n_train = int(f * data.n)
            rmse, crps = [], []
            for perm in perms:
                tr, te = perm[:n_train], perm[n_train:]
                model = fit_hyperparams(X[tr], data.z[tr], template, fit_noise=True)
                m, v = model.predict(X[te])
                rmse.append(float(np.sqrt(np.mean((m - data.z[te]) ** 2))))
                crps.append(float(np.mean(crps_gaussian(m, v + model.noise_var, data.z[te]))))
            rows.append(
                dict(kernel=family, fraction=float(f), n_train=n_train, rmse=float(np.mean(rmse)),
                     crps=float(np.mean(crps)), rmse_sd=float(np.std(rmse, ddof=1)) if splits > 1 else 0.0,
                     crps_sd=float(np.std(crps, ddof=1)) if splits > 1 else 0.0)
            )
    return rows
