"""Posterior summaries, autocorrelation and effective sample size."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NEGLIGIBLE_ACF = 0.05


def autocorrelation(series, max_lag: int | None = None) -> np.ndarray:
    """Sample ACF for lags ``0..max_lag`` via FFT.

    Uses the biased (divide by N) autocovariance, so ``|acf| <= 1``.  A
    zero-variance series has ACF 1 at lag 0 and NaN elsewhere.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if max_lag is None:
        max_lag = n - 1
    if not 0 <= max_lag < n:
        raise ValueError("series must be longer than max_lag")
    x = x - x.mean()
    var = float(x @ x) / n
    out = np.full(max_lag + 1, np.nan)
    out[0] = 1.0
    if var <= 0 or not np.isfinite(var):
        return out
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1] / n
    out[:] = acov / acov[0]
    out[0] = 1.0
    return out


def first_negligible_lag(series, threshold: float = NEGLIGIBLE_ACF, max_lag: int | None = None) -> int:
    """First lag with ``|acf| < threshold``; ``max_lag + 1`` if none is found."""
    x = np.asarray(series, dtype=float)
    if max_lag is None:
        max_lag = min(x.size - 1, 5000)
    acf = autocorrelation(x, max_lag)
    hits = np.nonzero(np.abs(acf[1:]) < threshold)[0]
    return int(hits[0] + 1) if hits.size else max_lag + 1


@dataclass
class ESSResult:
    ess: float
    iact: float
    degenerate: bool


def effective_sample_size(series) -> ESSResult:
    """N / IACT, with the ACF sum truncated by Geyer's initial positive sequence.

    Lag pairs ``acf(2k) + acf(2k+1)`` are summed while positive.  Constant
    series are flagged degenerate and get ESS = N.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 values")
    acf = autocorrelation(x)
    if np.isnan(acf[1]):
        return ESSResult(float(n), 1.0, True)
    total = -1.0  # pairs start at lag 0, whose acf of 1 counts once in 1 + 2 sum
    for k in range(0, n - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair <= 0:
            break
        total += 2.0 * pair
    iact = max(total, 1.0 / n)
    return ESSResult(float(n / iact), float(iact), False)


@dataclass
class PosteriorSummary:
    labels: list[str]
    chain_means: np.ndarray
    chain_sds: np.ndarray
    pooled_mean: np.ndarray
    pooled_sd: np.ndarray
    ess: np.ndarray
    acceptance: list[float]
    draws_per_chain: list[int]

    def as_dict(self) -> dict:
        rows = []
        for c in range(self.chain_means.shape[0]):
            rows.append({
                "chain": c + 1,
                "mean": self.chain_means[c].tolist(),
                "sd": self.chain_sds[c].tolist(),
                "acceptance": self.acceptance[c],
                "draws": self.draws_per_chain[c],
            })
        return {
            "parameters": self.labels,
            "chains": rows,
            "overall": {
                "mean": self.pooled_mean.tolist(),
                "sd": self.pooled_sd.tolist(),
                "ess": self.ess.tolist(),
                "acceptance": float(np.average(self.acceptance, weights=self.draws_per_chain)),
            },
        }

    def table(self) -> str:
        lines = [f"{'chain':>8} {'parameter':>14} {'mean':>10} {'sd':>10}"]
        for c in range(self.chain_means.shape[0]):
            for k, lab in enumerate(self.labels):
                lines.append(f"{c + 1:>8} {lab:>14} {self.chain_means[c, k]:>10.3f} {self.chain_sds[c, k]:>10.3f}")
        for k, lab in enumerate(self.labels):
            lines.append(f"{'Overall':>8} {lab:>14} {self.pooled_mean[k]:>10.3f} {self.pooled_sd[k]:>10.3f}")
        return "\n".join(lines)


def summarize(chains, burn_in: float = 0.0, labels=None, acceptance=None) -> PosteriorSummary:
    """Per-chain and pooled means/sds after dropping the first ``burn_in`` fraction.

    ``chains`` holds draw matrices or objects with a ``draws`` attribute.
    ESS is summed over chains per parameter.
    """
    if len(chains) == 0:
        raise ValueError("no chains")
    if not 0 <= burn_in < 1:
        raise ValueError("burn_in must be in [0, 1)")
    mats, acc = [], []
    for c in chains:
        draws = np.asarray(getattr(c, "draws", c), dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        mats.append(draws[int(np.floor(burn_in * draws.shape[0])):])
        acc.append(float(getattr(c, "overall_acceptance", np.nan)))
    d = mats[0].shape[1]
    if any(m.shape[1] != d for m in mats):
        raise ValueError("chains differ in dimension")
    if any(m.shape[0] == 0 for m in mats):
        raise ValueError("a chain is empty after burn-in")
    if acceptance is not None:
        acc = [float(a) for a in acceptance]
    pooled = np.vstack(mats)
    ess = np.zeros(d)
    for m in mats:
        for k in range(d):
            ess[k] += effective_sample_size(m[:, k]).ess if m.shape[0] >= 10 else m.shape[0]
    return PosteriorSummary(
        labels=list(labels) if labels is not None else [f"theta_{k + 1}" for k in range(d)],
        chain_means=np.array([m.mean(axis=0) for m in mats]),
        chain_sds=np.array([m.std(axis=0, ddof=1) if m.shape[0] > 1 else np.zeros(d) for m in mats]),
        pooled_mean=pooled.mean(axis=0),
        pooled_sd=pooled.std(axis=0, ddof=1) if pooled.shape[0] > 1 else np.zeros(d),
        ess=ess,
        acceptance=acc,
        draws_per_chain=[m.shape[0] for m in mats],
    )


def mc_standard_error(series) -> float:
    """Monte Carlo standard error of the mean, sd / sqrt(ESS)."""
    x = np.asarray(series, dtype=float)
    res = effective_sample_size(x)
    return float(x.std(ddof=1) / np.sqrt(res.ess))
