"""Exact finite-N entropies, Cover-Thomas bounds and a Monte Carlo rate estimate.

All enumerations extend the forward vectors of every length-(n-1) prefix by
one symbol, so the block entropies for n = 1..N come out of a single O(2^N)
pass.  Sums of -Q log Q use :func:`math.fsum`, which is exactly rounded and
therefore independent of summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError
from .model import ProcessParams, _check_cap, forward_increments, sample


@dataclass(frozen=True)
class BoundsReport:
    N: int
    h_block: float
    c_upper: float
    c_lower: float
    params: ProcessParams


def _neg_xlogx_sum(q: np.ndarray) -> float:
    q = q[q > 0.0]  # 0 log 0 := 0
    return -math.fsum(q * np.log(q))


@lru_cache(maxsize=64)
def _profile(n_max: int, p: float, eps: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Block entropies H_n and joint entropies H(r_1..r_n, s_1) for n = 1..n_max."""
    h_block = []
    h_joint = []
    # forward vectors, unconditioned (u) and with s_1 = +1 (c); index = prefix
    u_plus = np.array([0.5 * (1 - eps), 0.5 * eps])
    u_minus = np.array([0.5 * eps, 0.5 * (1 - eps)])
    c_plus = np.array([0.5 * (1 - eps), 0.5 * eps])
    c_minus = np.zeros(2)
    for n in range(1, n_max + 1):
        if n > 1:
            u_plus, u_minus = _extend(u_plus, u_minus, p, eps)
            c_plus, c_minus = _extend(c_plus, c_minus, p, eps)
        h_block.append(_neg_xlogx_sum(u_plus + u_minus))
        # P(R, s_1 = -1) = P(-R, s_1 = +1), so both halves contribute equally
        h_joint.append(2.0 * _neg_xlogx_sum(c_plus + c_minus))
    return tuple(h_block), tuple(h_joint)


def _extend(a_plus: np.ndarray, a_minus: np.ndarray, p: float, eps: float):
    pred_plus = (1 - p) * a_plus + p * a_minus
    pred_minus = p * a_plus + (1 - p) * a_minus
    # child 2i appends +1, child 2i+1 appends -1 (matches all_sequences order)
    new_plus = np.empty(2 * a_plus.size)
    new_minus = np.empty(2 * a_plus.size)
    new_plus[0::2] = pred_plus * (1 - eps)
    new_minus[0::2] = pred_minus * eps
    new_plus[1::2] = pred_plus * eps
    new_minus[1::2] = pred_minus * (1 - eps)
    return new_plus, new_minus


def entropy_profile(n_max: int, params: ProcessParams, *, cap: int | None = None):
    """Return ``(H, HS)`` lists with ``H[n-1] = H_n`` and ``HS[n-1] = H(r_1..r_n, s_1)``."""
    if n_max < 1:
        raise InvalidInputError("N must be >= 1")
    _check_cap(n_max, cap)
    h, hs = _profile(int(n_max), float(params.p), float(params.eps))
    return list(h), list(hs)


def block_entropy(N: int, params: ProcessParams, *, cap: int | None = None) -> float:
    """H_N = -sum_R Q(R) ln Q(R) by exhaustive enumeration."""
    return entropy_profile(N, params, cap=cap)[0][N - 1]


def conditional_entropy(N: int, params: ProcessParams, *, cap: int | None = None) -> float:
    """Upper bound C_N = H_N - H_{N-1}."""
    if N < 2:
        raise InvalidInputError("conditional entropy needs N >= 2")
    h, _ = entropy_profile(N, params, cap=cap)
    return h[N - 1] - h[N - 2]


def lower_bound(N: int, params: ProcessParams, *, cap: int | None = None) -> float:
    """Cover-Thomas lower bound H(r_N | r_1..r_{N-1}, s_1)."""
    if N < 2:
        raise InvalidInputError("lower bound needs N >= 2")
    _, hs = entropy_profile(N, params, cap=cap)
    return hs[N - 1] - hs[N - 2]


def bounds_report(N: int, params: ProcessParams, *, cap: int | None = None) -> BoundsReport:
    return BoundsReport(
        N=N,
        h_block=block_entropy(N, params, cap=cap),
        c_upper=conditional_entropy(N, params, cap=cap),
        c_lower=lower_bound(N, params, cap=cap),
        params=params,
    )


def bounds_table(n_max: int, params: ProcessParams, *, cap: int | None = None) -> list[BoundsReport]:
    """Reports for N = 2..n_max from one enumeration."""
    h, hs = entropy_profile(n_max, params, cap=cap)
    return [
        BoundsReport(N=n, h_block=h[n - 1], c_upper=h[n - 1] - h[n - 2], c_lower=hs[n - 1] - hs[n - 2], params=params)
        for n in range(2, n_max + 1)
    ]


def binary_entropy(x: float) -> float:
    """h_b(x) in nats."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(x * math.log(x) + (1.0 - x) * math.log1p(-x))


def smb_from_sequence(R, params: ProcessParams, seed: int, *, n_boot: int = 1000) -> tuple[float, float]:
    """Entropy-rate estimate -ln Q(R)/M of an observed sequence, with block-bootstrap stderr.

    Blocks are contiguous runs of ``floor(sqrt(M))`` conditional surprisals;
    the bootstrap resamples whole blocks with a generator seeded by ``seed``.
    """
    inc = forward_increments(R, params)
    length = inc.size
    if length < 1000:
        raise InvalidInputError("the Monte Carlo estimate needs M >= 1000")
    estimate = math.fsum(inc) / length
    block = math.isqrt(length)
    n_blocks = length // block
    block_means = inc[: n_blocks * block].reshape(n_blocks, block).mean(axis=1)
    rng = np.random.default_rng([seed, 1])
    picks = rng.integers(0, n_blocks, size=(n_boot, n_blocks))
    replicate_means = block_means[picks].mean(axis=1)
    return estimate, float(np.std(replicate_means, ddof=1))


def smb_estimate(params: ProcessParams, length: int, seed: int, *, n_boot: int = 1000) -> tuple[float, float]:
    """Sample one observed sequence of length M and return (estimate, stderr) in nats."""
    if length < 1000:
        raise InvalidInputError("smb_estimate needs M >= 1000")
    _, R = sample(params, length, seed)
    return smb_from_sequence(R, params, seed, n_boot=n_boot)
