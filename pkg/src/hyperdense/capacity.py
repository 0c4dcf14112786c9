"""Classical channel capacity of the conditional-detection matrix.

The detection scheme turns each sent message x into a distribution over
detected messages y, i.e. a discrete memoryless channel.  Capacity is
computed with the Blahut-Arimoto alternating maximization; closed-form
reference curves bound the achievable (success probability, capacity)
region for four-message and three-message encodings.

The three-symbol bound constructions mirror the four-symbol ones by
analogy (uniform noise for the lower curve, one noiseless symbol plus a
binary symmetric pair for the upper curve); they are not derived from a
characterized apparatus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import TransferMatrix
from .states import MESSAGES, signature_map

_LN2 = math.log(2.0)

_THREE_LABELS = ("S1", "S2", "S3")


def _prob_matrix(t) -> np.ndarray:
    if isinstance(t, TransferMatrix):
        return t.probabilities
    return np.asarray(t, dtype=float)


def validate_input_distribution(px, n: int) -> np.ndarray:
    px = np.asarray(px, dtype=float).ravel()
    if px.shape != (n,):
        raise ValueError(f"input distribution must have {n} entries, got {px.shape}")
    if px.min() < 0.0:
        raise ValueError(f"input distribution has negative entry {px.min()}")
    total = px.sum()
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"input distribution sums to {total!r}, not 1")
    return px / total


def mutual_information(px, t) -> float:
    """I(X;Y) in bits for input distribution px over the channel t.

    Zero-probability terms contribute zero (0*log 0 = 0 convention).
    """
    p = _prob_matrix(t)
    n = p.shape[1]
    px = validate_input_distribution(px, n)
    w = p.T  # w[x, y] = p(y | x)
    q = px @ w
    mask = (w > 0.0) & (px[:, None] > 0.0)
    safe_w = np.where(mask, w, 1.0)
    safe_q = np.where(q > 0.0, q, 1.0)
    terms = np.where(mask, px[:, None] * w * (np.log(safe_w) - np.log(safe_q)), 0.0)
    return float(terms.sum() / _LN2)


@dataclass(frozen=True)
class CapacityResult:
    capacity_bits: float
    input_distribution: np.ndarray
    iterations: int
    converged: bool


def channel_capacity(t, tol_bits: float = 1e-10,
                     max_iterations: int = 100_000) -> CapacityResult:
    """Channel capacity in bits via Blahut-Arimoto.

    Alternates the backward step q(x|y) proportional to p(x) p(y|x) with
    the input update p(x) proportional to exp(sum_y p(y|x) ln q(x|y)).
    The per-iteration bracket I(p) <= C <= max_x D(x) gives a stopping
    rule: iterate until the gap falls below tol_bits.  If the iteration
    cap is hit first the best lower bound so far is returned with
    converged=False.
    """
    p = _prob_matrix(t)
    n = p.shape[1]
    w = p.T
    positive = w > 0.0
    safe_w = np.where(positive, w, 1.0)
    log_w = np.log(safe_w)
    tol_nats = tol_bits * _LN2

    r = np.full(n, 1.0 / n)
    i_low = 0.0
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        q = r @ w
        safe_q = np.where(q > 0.0, q, 1.0)
        d = np.where(positive, w * (log_w - np.log(safe_q)), 0.0).sum(axis=1)
        i_low = float(r @ d)
        i_up = float(d.max())
        if i_up - i_low < tol_nats:
            converged = True
            break
        r = r * np.exp(d - d.max())
        r /= r.sum()
    capacity = max(i_low / _LN2, 0.0)
    return CapacityResult(capacity_bits=capacity, input_distribution=r,
                          iterations=iterations, converged=converged)


def average_success(t) -> float:
    """Mean of the diagonal: probability of detecting what was sent."""
    p = _prob_matrix(t)
    return float(np.mean(np.diag(p)))


_PAIR_COLUMNS = {
    m: [l1 * 4 + l2 for (l1, l2) in sorted(signature_map(m))]
    for m in MESSAGES
}


def snr_per_message(counts) -> list:
    """Signal-to-noise ratio per sent message from a 4x16 counts table.

    Columns follow the canonical Bell-pair order (photon-1 label major).
    Signal is the sum over the sent message's own signature columns,
    noise is everything else in the row.  A row with zero noise has no
    finite ratio and is reported as None.
    """
    c = np.asarray(counts, dtype=float)
    if c.shape != (4, 16):
        raise ValueError(f"counts table must be 4x16, got {c.shape}")
    if not np.all(np.isfinite(c)) or c.min() < 0.0:
        raise ValueError("counts must be finite and non-negative")
    out = []
    for m in MESSAGES:
        row = c[m]
        total = row.sum()
        if total <= 0.0:
            raise ValueError(f"no counts recorded for sent message {m.label}")
        signal = row[_PAIR_COLUMNS[m]].sum()
        noise = total - signal
        out.append(None if noise <= 0.0 else float(signal / noise))
    return out


# --- bound curves -----------------------------------------------------------

def bound_lower_4(p_s: float) -> TransferMatrix:
    """Uniform-noise four-symbol channel: diagonal p_s, off-diagonal (1-p_s)/3."""
    if not 0.25 <= p_s <= 1.0:
        raise ValueError(f"p_s must lie in [0.25, 1], got {p_s}")
    f = (1.0 - p_s) / 3.0
    p = np.full((4, 4), f)
    np.fill_diagonal(p, p_s)
    return TransferMatrix(p)


def bound_upper_4(p_s: float) -> TransferMatrix:
    """Two noiseless symbols plus a binary symmetric pair with diagonal 2*p_s-1."""
    if not 0.5 <= p_s <= 1.0:
        raise ValueError(f"p_s must lie in [0.5, 1], got {p_s}")
    d = 2.0 * p_s - 1.0
    p = np.array([
        [d, 1.0 - d, 0.0, 0.0],
        [1.0 - d, d, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    return TransferMatrix(p)


def bound_lower_3(p_s: float) -> TransferMatrix:
    """Uniform-noise three-symbol channel: diagonal p_s, off-diagonal (1-p_s)/2."""
    if not 1.0 / 3.0 <= p_s <= 1.0:
        raise ValueError(f"p_s must lie in [1/3, 1], got {p_s}")
    f = (1.0 - p_s) / 2.0
    p = np.full((3, 3), f)
    np.fill_diagonal(p, p_s)
    return TransferMatrix(p, _THREE_LABELS)


def bound_upper_3(p_s: float) -> TransferMatrix:
    """One noiseless symbol plus a binary symmetric pair with diagonal (3*p_s-1)/2."""
    if not 1.0 / 3.0 <= p_s <= 1.0:
        raise ValueError(f"p_s must lie in [1/3, 1], got {p_s}")
    d = (3.0 * p_s - 1.0) / 2.0
    p = np.array([
        [1.0, 0.0, 0.0],
        [0.0, d, 1.0 - d],
        [0.0, 1.0 - d, d],
    ])
    return TransferMatrix(p, _THREE_LABELS)


_CURVES = {
    (4, "lower"): (bound_lower_4, 0.25, 1.0),
    (4, "upper"): (bound_upper_4, 0.75, 1.0),
    (3, "lower"): (bound_lower_3, 1.0 / 3.0, 1.0),
    (3, "upper"): (bound_upper_3, 2.0 / 3.0, 1.0),
}


def bound_curve(encoding: int, which: str, resolution: int = 50) -> np.ndarray:
    """Sample (p_s, capacity_bits) along one bound curve.

    encoding is 3 or 4, which is "lower" or "upper".  Each curve is
    evaluated on the p_s range where its capacity rises monotonically
    to the noiseless limit: lower curves start at p_s = 1/n (uniform
    output, zero capacity), upper curves at the p_s where their noisy
    branch carries nothing.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    try:
        fn, lo, hi = _CURVES[(encoding, which)]
    except KeyError:
        raise ValueError(
            f"unknown curve ({encoding!r}, {which!r}); encoding must be 3 or 4 "
            "and which must be 'lower' or 'upper'") from None
    ps = np.linspace(lo, hi, resolution)
    caps = [channel_capacity(fn(p)).capacity_bits for p in ps]
    return np.column_stack([ps, caps])
