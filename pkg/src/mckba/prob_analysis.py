"""Closed-form confirmation probabilities and their empirical verification.

The closed forms below are the published per-bit model for solving the
kernel equation from one uniform observation:

    Prob(yt[i] = 0)   = 2/3 + 1/(3*4^i)                       (exact)
    Prob[c_i known]   = recursion seeded with 1, 3/4           (model)
    Prob[x_i known]   = combination of the two                 (model)

The yt law is exact for uniform inputs.  The carry and bit-confirmation
forms rest on independence assumptions that the solver's actual behaviour
does not satisfy: Monte Carlo (or exhaustive enumeration for small n) is
treated as ground truth, and both are reported side by side.  The empirical
"confirmed" statistic is literally "mask bit set by the solver".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mckba.kernel_solver import solve_batch

EXACT_ENUM_MAX_N = 8
_CHUNK = 1 << 18


def prob_y_zero(i: int) -> float:
    """Closed form for Prob(yt[i] = 0) under uniform inputs."""
    if i < 0:
        raise ValueError("bit index must be non-negative")
    return 2.0 / 3.0 + 1.0 / (3.0 * 4.0**i)


def prob_carry_confirmed(i: int) -> float:
    """Modelled probability that the solver pins down carry c[i]."""
    if i < 0:
        raise ValueError("bit index must be non-negative")
    if i == 0:
        return 1.0
    p = 0.75
    for j in range(2, i + 1):
        p = p * (7.0 / 12.0 + 1.0 / (6.0 * 4.0 ** (j - 1))) + 0.25 - 0.25**j
    return p


def prob_x_confirmed(i: int) -> float:
    """Modelled probability that the solver pins down bit x[i]."""
    if i < 0:
        raise ValueError("bit index must be non-negative")
    if i == 0:
        return 0.5
    py0 = prob_y_zero(i)
    pc = prob_carry_confirmed(i)
    t1 = 0.5 * py0
    t2 = 0.5 * py0 * pc
    t3 = 0.5 * (1.0 - prob_y_zero(i + 1)) * (1.0 - t1 - t2) * pc * 0.5
    return t1 + t2 + t3


@dataclass
class ConfirmationProfile:
    """Closed-form and measured per-bit statistics, side by side."""

    n: int
    trials: int
    exact: bool
    y_zero_closed: np.ndarray
    y_zero_empirical: np.ndarray
    carry_closed: np.ndarray
    carry_empirical: np.ndarray
    x_closed: np.ndarray
    x_empirical: np.ndarray

    def rows(self):
        """(i, closed, empirical, |delta|) triples per statistic, per bit."""
        for i in range(self.n):
            yield {
                "i": i,
                "y_zero_closed": float(self.y_zero_closed[i]),
                "y_zero_empirical": float(self.y_zero_empirical[i]),
                "y_zero_abs_delta": abs(float(self.y_zero_closed[i] - self.y_zero_empirical[i])),
                "carry_closed": float(self.carry_closed[i]),
                "carry_empirical": float(self.carry_empirical[i]),
                "carry_abs_delta": abs(float(self.carry_closed[i] - self.carry_empirical[i])),
                "x_closed": float(self.x_closed[i]) if i < self.n - 1 else float("nan"),
                "x_empirical": float(self.x_empirical[i]) if i < self.n - 1 else float("nan"),
                "x_abs_delta": abs(float(self.x_closed[i] - self.x_empirical[i]))
                if i < self.n - 1
                else float("nan"),
            }


def _tally(alpha, beta, y, n, counters):
    x_count, c_count, y0_count = counters
    _, x_mask, _, c_mask, bad = solve_batch(alpha, beta, y, n)
    if np.any(bad):
        raise AssertionError("generated instances must be consistent")
    yt = y ^ alpha ^ beta
    for i in range(n):
        bit = np.uint64(1 << i)
        y0_count[i] += int(np.count_nonzero((yt & bit) == 0))
        c_count[i] += int(np.count_nonzero(c_mask & bit))
        if i < n - 1:
            x_count[i] += int(np.count_nonzero(x_mask & bit))


def empirical_profile(n: int, trials: int, seed: int = 0) -> ConfirmationProfile:
    """Measure the solver's per-bit statistics over uniform (alpha, beta, x).

    For n <= 8 the full input space is enumerated and ``trials`` is ignored;
    otherwise ``trials`` uniform samples are drawn.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    mask_n = np.uint64((1 << n) - 1)
    x_count = [0] * n
    c_count = [0] * n
    y0_count = [0] * n
    counters = (x_count, c_count, y0_count)

    exact = n <= EXACT_ENUM_MAX_N
    if exact:
        total = 1 << (3 * n)
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
            x = idx & mask_n
            beta = (idx >> np.uint64(n)) & mask_n
            alpha = (idx >> np.uint64(2 * n)) & mask_n
            y = ((alpha + x) & mask_n) ^ ((beta + x) & mask_n)
            _tally(alpha, beta, y, n, counters)
    else:
        total = trials
        rng = np.random.default_rng(seed)
        done = 0
        while done < total:
            take = min(_CHUNK, total - done)
            draw = rng.integers(0, 1 << n, size=(3, take), dtype=np.uint64)
            alpha, beta, x = draw[0], draw[1], draw[2]
            y = ((alpha + x) & mask_n) ^ ((beta + x) & mask_n)
            _tally(alpha, beta, y, n, counters)
            done += take

    return ConfirmationProfile(
        n=n,
        trials=total,
        exact=exact,
        y_zero_closed=np.array([prob_y_zero(i) for i in range(n)]),
        y_zero_empirical=np.array(y0_count, dtype=float) / total,
        carry_closed=np.array([prob_carry_confirmed(i) for i in range(n)]),
        carry_empirical=np.array(c_count, dtype=float) / total,
        x_closed=np.array([prob_x_confirmed(i) for i in range(n - 1)] + [np.nan]),
        x_empirical=np.array([v / total for v in x_count[: n - 1]] + [np.nan]),
    )
