"""Dataset characterization statistics and the last-value naive baseline.

All scalar features operate on a single channel; :func:`characterize`
averages them over the channels of a :class:`SeriesMatrix`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    AllChannelsConstant,
    LengthMismatch,
    MissingValues,
    NonNumericValue,
    SingularDesign,
    TooShort,
    ValidationError,
)

DEFAULT_BINS = 64
DEFAULT_M = 2
DEFAULT_R = 0.2
DEFAULT_KMAX = 10
SAMPEN_CHUNK = 5000
_TIMESTAMP_NAMES = {"date", "time", "timestamp", "datetime", "ds"}


@dataclass(frozen=True)
class SeriesMatrix:
    name: str
    data: np.ndarray
    frequency: str | None = None
    channels: tuple[str, ...] = ()
    n_filled: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ValidationError(f"series must be T x C, got shape {data.shape}")
        if data.shape[0] < 2:
            raise TooShort(f"series {self.name!r} has {data.shape[0]} timesteps, need >= 2")
        if data.shape[1] < 1:
            raise ValidationError(f"series {self.name!r} has no channels")
        if not np.all(np.isfinite(data)):
            raise MissingValues(f"series {self.name!r} contains NaN or infinite values")
        object.__setattr__(self, "data", data)
        if not self.channels:
            object.__setattr__(self, "channels",
                               tuple(f"c{i}" for i in range(data.shape[1])))

    @property
    def n_timesteps(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def read_series(path, name: str | None = None, delimiter: str = ",", missing: str = "reject",
                stride: int = 1, frequency: str | None = None) -> SeriesMatrix:
    """Read a wide delimited file: optional leading timestamp column, then numeric channels.

    ``missing`` is ``"reject"`` (raise on the first empty/NaN cell) or
    ``"ffill"`` (carry the previous value forward; leading gaps are dropped
    rows).  ``stride`` keeps every ``stride``-th row.
    """
    if missing not in ("reject", "ffill"):
        raise ValidationError(f"missing-value policy must be reject or ffill, got {missing!r}")
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = [h.strip() for h in next(reader, [])]
        rows = [(i, r) for i, r in enumerate(reader, start=2) if any(c.strip() for c in r)]
    if not header or not rows:
        raise TooShort(f"{path}: no data")
    skip_first = header[0].lower() in _TIMESTAMP_NAMES or not _is_number(rows[0][1][0])
    first = 1 if skip_first else 0
    channels = tuple(header[first:])
    data = np.empty((len(rows), len(channels)))
    for k, (rowno, row) in enumerate(rows):
        if len(row) != len(header):
            raise ValidationError(f"expected {len(header)} fields, got {len(row)}", rowno)
        for j, tok in enumerate(row[first:]):
            tok = tok.strip()
            if tok == "" or tok.lower() in ("nan", "na", "null"):
                if missing == "reject":
                    raise MissingValues(f"missing value in column {channels[j]!r}", rowno)
                data[k, j] = np.nan
                continue
            try:
                data[k, j] = float(tok)
            except ValueError:
                raise NonNumericValue(f"non-numeric value {tok!r}", rowno) from None
    n_filled = int(np.isnan(data).sum())
    if n_filled:
        for j in range(data.shape[1]):
            col = data[:, j]
            idx = np.where(np.isnan(col), 0, np.arange(len(col)))
            np.maximum.accumulate(idx, out=idx)
            data[:, j] = col[idx]
        data = data[~np.isnan(data).any(axis=1)]
    data = data[::stride]
    return SeriesMatrix(name or str(path), data, frequency, channels, n_filled)


def _channel(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValidationError(f"expected a single channel, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise MissingValues("series contains NaN or infinite values")
    return x


def shannon_entropy(series, bins: int = DEFAULT_BINS) -> float:
    """Histogram entropy over ``bins`` equal-width bins on [min, max], scaled to [0, 1]."""
    x = _channel(series)
    if bins < 2:
        raise ValidationError("bins must be >= 2")
    if len(x) < 2:
        raise TooShort("need at least 2 samples")
    lo, hi = x.min(), x.max()
    if lo == hi:
        return 0.0
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(int)
    counts = np.bincount(np.clip(idx, 0, bins - 1), minlength=bins)
    p = counts[counts > 0] / len(x)
    return float(-np.sum(p * np.log(p)) / math.log(bins))


def spectral_entropy(series) -> float:
    """Entropy of the normalized periodogram over positive frequencies, scaled to [0, 1]."""
    x = _channel(series)
    if len(x) < 8:
        raise TooShort("spectral entropy needs at least 8 samples")
    x = x - x.mean()
    power = np.abs(np.fft.rfft(x))[1:] ** 2
    total = power.sum()
    if total == 0 or not np.isfinite(total):
        return 0.0
    p = power / total
    p = p[p > 0]
    return float(min(1.0, -np.sum(p * np.log(p)) / math.log(len(power))))


def _match_counts(z: np.ndarray, m: int, r: float) -> tuple[int, int]:
    # pairs of templates (i < j, both among the first N - m) within Chebyshev
    # distance r, for template lengths m and m + 1
    n = len(z)
    n_templates = n - m
    a = b = 0
    for d in range(1, n_templates):
        bad = np.abs(z[:n - d] - z[d:]) > r
        cs = np.concatenate(([0], np.cumsum(bad)))
        starts = np.arange(n_templates - d)
        b += int(np.count_nonzero(cs[starts + m] == cs[starts]))
        a += int(np.count_nonzero(cs[starts + m + 1] == cs[starts]))
    return a, b


def sample_entropy(series, m: int = DEFAULT_M, r: float = DEFAULT_R,
                   max_chunk: int | None = SAMPEN_CHUNK) -> float:
    """Sample entropy ``-ln(A / B)`` of the z-normalized series.

    ``r`` is in units of the channel's standard deviation.  Series longer
    than ``max_chunk`` are split into contiguous near-equal chunks whose
    estimates are averaged.  Returns ``inf`` when no template pair matches.
    """
    x = _channel(series)
    if m < 1:
        raise ValidationError("embedding dimension m must be >= 1")
    if r <= 0:
        raise ValidationError("tolerance r must be > 0")
    if len(x) < m + 2:
        raise TooShort(f"sample entropy needs at least m + 2 = {m + 2} samples")
    sd = x.std()
    z = (x - x.mean()) / sd if sd > 0 else x - x.mean()
    if max_chunk and len(z) > max_chunk:
        pieces = np.array_split(z, math.ceil(len(z) / max_chunk))
        vals = [_sampen_core(p, m, r) for p in pieces if len(p) >= m + 2]
        return float(np.mean(vals))
    return _sampen_core(z, m, r)


def _sampen_core(z, m, r):
    a, b = _match_counts(z, m, r)
    if a == 0 or b == 0:
        return math.inf
    return math.log(b / a)


def schwert_lags(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def adf_design(series, lags: int):
    """Regression target and design ``[1, y_{t-1}, dy_{t-1}, ..., dy_{t-lags}]``."""
    y = _channel(series)
    dy = np.diff(y)
    target = dy[lags:]
    cols = [np.ones(len(target)), y[lags:-1]]
    for j in range(1, lags + 1):
        cols.append(dy[lags - j:len(dy) - j])
    return target, np.column_stack(cols)


def adf_gamma(series, lags: int | None = None) -> float:
    """Coefficient on the lagged level in the augmented Dickey-Fuller regression.

    Constant included, no trend.  ``lags`` defaults to the Schwert rule
    ``floor(12 (T/100)^(1/4))``.  Solved through a QR factorization.
    """
    y = _channel(series)
    if lags is None:
        lags = schwert_lags(len(y))
    if lags < 0:
        raise ValidationError("lags must be >= 0")
    if len(y) < lags + 10:
        raise TooShort(f"ADF regression with {lags} lags needs >= {lags + 10} samples")
    target, X = adf_design(y, lags)
    q, rmat = np.linalg.qr(X)
    diag = np.abs(np.diag(rmat))
    if diag.min() <= max(X.shape) * np.finfo(float).eps * diag.max():
        raise SingularDesign("ADF design matrix is rank deficient (constant series?)")
    beta = np.linalg.solve(rmat, q.T @ target)
    return float(beta[1])


def higuchi_fd(series, k_max: int = DEFAULT_KMAX) -> float:
    """Higuchi fractal dimension: minus the log-log slope of curve length L(k), k = 1..k_max."""
    x = _channel(series)
    if k_max < 2:
        raise ValidationError("k_max must be >= 2")
    n = len(x)
    if n < 10 * k_max:
        raise TooShort(f"Higuchi FD with k_max={k_max} needs >= {10 * k_max} samples")
    ks = np.arange(1, k_max + 1)
    lengths = np.empty(k_max)
    for i, k in enumerate(ks):
        lm = []
        for m in range(k):
            sub = x[m::k]
            steps = len(sub) - 1
            if steps < 1:
                continue
            curve = np.abs(np.diff(sub)).sum() * (n - 1) / (steps * k)
            lm.append(curve / k)
        lengths[i] = np.mean(lm)
    if np.any(lengths <= 0):
        # a constant stretch at every scale has zero length: dimension of a flat line
        return 1.0
    slope = np.polyfit(np.log(ks), np.log(lengths), 1)[0]
    return float(-slope)


def _varying_channels(data: np.ndarray) -> np.ndarray:
    return np.flatnonzero(data.std(axis=0) > 0)


def pca_ev1(matrix) -> float:
    """Share of total standardized variance on the first principal component."""
    data = matrix.data if isinstance(matrix, SeriesMatrix) else np.asarray(matrix, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    keep = _varying_channels(data)
    if len(keep) == 0:
        raise AllChannelsConstant("every channel has zero variance")
    if len(keep) == 1:
        return 1.0
    x = data[:, keep]
    z = (x - x.mean(axis=0)) / x.std(axis=0)
    corr = z.T @ z / len(z)
    eig = np.linalg.eigvalsh(corr)
    return float(eig[-1] / np.trace(corr))


def locf_forecast(context, horizon: int) -> np.ndarray:
    ctx = np.asarray(context, dtype=float)
    if ctx.size == 0:
        raise ValidationError("context must be non-empty")
    if horizon < 1:
        raise ValidationError("horizon must be positive")
    return np.full(horizon, ctx.reshape(-1)[-1])


def error_metrics(pred, truth) -> tuple[float, float]:
    """(MSE, MAE) of a forecast."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise LengthMismatch(f"prediction shape {p.shape} != truth shape {t.shape}")
    if p.size == 0:
        raise LengthMismatch("empty vectors")
    err = p - t
    return float(np.mean(err ** 2)), float(np.mean(np.abs(err)))


def evaluate_locf(matrix, context: int, horizon: int, stride: int = 1,
                  standardize: bool = False) -> tuple[float, float]:
    """Rolling-origin (MSE, MAE) of the last-value forecast over all windows and channels.

    With ``standardize`` each channel is z-scored first (zero-variance
    channels are only centred).
    """
    data = matrix.data if isinstance(matrix, SeriesMatrix) else np.asarray(matrix, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if context < 1 or horizon < 1 or stride < 1:
        raise ValidationError("context, horizon and stride must be positive")
    if len(data) < context + horizon:
        raise TooShort(f"need >= {context + horizon} timesteps, got {len(data)}")
    if standardize:
        sd = data.std(axis=0)
        data = (data - data.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    origins = np.arange(context, len(data) - horizon + 1, stride)
    windows = np.lib.stride_tricks.sliding_window_view(data, horizon, axis=0)[origins]
    last = data[origins - 1][:, :, None]
    err = windows - last
    return float(np.mean(err ** 2)), float(np.mean(np.abs(err)))


@dataclass(frozen=True)
class FeatureReport:
    shannon_entropy: float
    spectral_entropy: float
    sample_entropy: float
    adf_gamma: float
    higuchi_fd: float
    pca_ev1: float
    n_timesteps: int = 0
    n_channels: int = 0
    dropped_channels: tuple[str, ...] = ()
    per_channel: Mapping[str, Mapping[str, float]] | None = None
    flags: tuple[str, ...] = field(default=())


_SCALAR_FEATURES = ("shannon_entropy", "spectral_entropy", "sample_entropy",
                    "adf_gamma", "higuchi_fd")


def characterize(matrix: SeriesMatrix, bins: int = DEFAULT_BINS, m: int = DEFAULT_M,
                 r: float = DEFAULT_R, lags: int | None = None, k_max: int = DEFAULT_KMAX,
                 max_chunk: int | None = SAMPEN_CHUNK, per_channel: bool = False) -> FeatureReport:
    """All dataset statistics for one series matrix (channel means for scalar features).

    Constant channels are excluded from the averages and listed in
    ``dropped_channels``.
    """
    data = matrix.data
    keep = _varying_channels(data)
    if len(keep) == 0:
        raise AllChannelsConstant(f"series {matrix.name!r}: every channel is constant")
    dropped = tuple(matrix.channels[j] for j in range(data.shape[1]) if j not in set(keep))
    values: dict[str, dict[str, float]] = {}
    for j in keep:
        x = data[:, j]
        values[matrix.channels[j]] = {
            "shannon_entropy": shannon_entropy(x, bins),
            "spectral_entropy": spectral_entropy(x),
            "sample_entropy": sample_entropy(x, m, r, max_chunk),
            "adf_gamma": adf_gamma(x, lags),
            "higuchi_fd": higuchi_fd(x, k_max),
        }
    means = {f: float(np.mean([v[f] for v in values.values()])) for f in _SCALAR_FEATURES}
    flags = []
    if dropped:
        flags.append(f"dropped {len(dropped)} constant channel(s)")
    if matrix.n_filled:
        flags.append(f"forward-filled {matrix.n_filled} missing value(s)")
    if not math.isfinite(means["sample_entropy"]):
        flags.append("sample entropy undefined: no matching templates")
    return FeatureReport(means["shannon_entropy"], means["spectral_entropy"],
                         means["sample_entropy"], means["adf_gamma"], means["higuchi_fd"],
                         pca_ev1(data), data.shape[0], data.shape[1], dropped,
                         values if per_channel else None, tuple(flags))
