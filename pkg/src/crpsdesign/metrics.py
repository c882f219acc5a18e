"""Validation metrics for excursion-set estimation and their aggregation."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .gp import GPModel
from .scoring import crps_gaussian, twcrps_gaussian_weight, twcrps_indicator

__all__ = ["EvalReport", "METRICS", "Summary", "evaluate_synthetic", "evaluate_observational", "aggregate", "summarize"]


@dataclass(frozen=True)
class EvalReport:
    """Metrics of one model on one validation set.

    ``None`` marks a metric that is undefined for this evaluation, e.g.
    ``rmse_p`` when no validation point is classified into the excursion
    set, or every ground-truth metric in the observational regime.
    """

    crps_mean: float
    twcrps1_mean: float
    twcrps2_mean: float
    rmse: Optional[float] = None
    rmse_gamma: Optional[float] = None
    rmse_p: Optional[float] = None
    sensitivity: Optional[float] = None
    precision: Optional[float] = None
    tp: Optional[int] = None
    fp: Optional[int] = None
    tn: Optional[int] = None
    fn: Optional[int] = None
    m_gamma: Optional[int] = None
    m_p: Optional[int] = None

    def as_dict(self) -> dict:
        return asdict(self)


METRICS = tuple(f.name for f in fields(EvalReport))


def _scores(mean, var, y, t, sigma_gamma):
    return (
        float(np.mean(crps_gaussian(mean, var, y))),
        float(np.mean(twcrps_indicator(mean, var, y, t))),
        float(np.mean(twcrps_gaussian_weight(mean, var, y, t, sigma_gamma))),
    )


def _rmse(err):
    return float(np.sqrt(np.mean(err * err))) if err.size else None


def evaluate_synthetic(model: GPModel, X, truth, t: float, sigma_gamma: float) -> EvalReport:
    """Score the latent predictive distribution against a known ground truth."""
    truth = np.asarray(truth, dtype=float)
    if truth.size == 0:
        raise ValueError("validation set is empty")
    mean, var = model.predict(X)
    crps, tw1, tw2 = _scores(mean, var, truth, t, sigma_gamma)
    in_set = truth >= t
    predicted = mean >= t
    tp = int(np.sum(predicted & in_set))
    fp = int(np.sum(predicted & ~in_set))
    tn = int(np.sum(~predicted & ~in_set))
    fn = int(np.sum(~predicted & in_set))
    err = mean - truth
    return EvalReport(
        crps_mean=crps,
        twcrps1_mean=tw1,
        twcrps2_mean=tw2,
        rmse=_rmse(err),
        rmse_gamma=_rmse(err[in_set]),
        rmse_p=_rmse(err[predicted]),
        sensitivity=tp / (tp + fn) if tp + fn else None,
        precision=tp / (tp + fp) if tp + fp else None,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        m_gamma=int(in_set.sum()),
        m_p=int(predicted.sum()),
    )


def evaluate_observational(model: GPModel, X, z, t: float, sigma_gamma: float) -> EvalReport:
    """Score the noisy-observation predictive distribution against noisy data.

    Only the CRPS-type fields are defined.
    """
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise ValueError("validation set is empty")
    mean, var = model.predict(X)
    crps, tw1, tw2 = _scores(mean, var + model.noise_var, z, t, sigma_gamma)
    return EvalReport(crps_mean=crps, twcrps1_mean=tw1, twcrps2_mean=tw2)


@dataclass(frozen=True)
class Summary:
    """Location and box-plot statistics of one metric across repetitions.

    Quartiles use linear interpolation. Fences sit 1.5 IQR beyond the
    quartiles; whiskers are the most extreme values inside the fences.
    """

    n: int
    mean: float
    median: float
    q1: float
    q3: float
    lower_fence: float
    upper_fence: float
    whisker_low: float
    whisker_high: float
    outliers: tuple

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def summarize(values: Sequence[Optional[float]]) -> Summary:
    """Summary of the non-missing entries of ``values``."""
    v = np.array([x for x in values if x is not None and np.isfinite(x)], dtype=float)
    if v.size == 0:
        nan = float("nan")
        return Summary(0, nan, nan, nan, nan, nan, nan, nan, nan, ())
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo) & (v <= hi)]
    out = np.sort(v[(v < lo) | (v > hi)])
    return Summary(
        n=int(v.size),
        mean=float(v.mean()),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        lower_fence=float(lo),
        upper_fence=float(hi),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=tuple(float(x) for x in out),
    )


def aggregate(reports: Sequence[EvalReport]) -> dict:
    """Per-metric :class:`Summary` over a list of reports (e.g. repetitions)."""
    if not reports:
        raise ValueError("nothing to aggregate")
    return {m: summarize([getattr(r, m) for r in reports]) for m in METRICS}
