"""Binary symmetric hidden Markov process and its random-field Ising form.

Sequences are numpy ``int8`` arrays over {+1, -1}.  The hidden chain starts
uniformly and flips sign with probability ``p`` at each step; the channel
flips each symbol independently with probability ``eps``.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from .errors import (
    InfiniteCouplingError,
    InvalidInputError,
    InvalidParameterError,
    ResourceLimitError,
    UnsupportedOrderError,
)

Boundary = Literal["open", "periodic"]

DEFAULT_MAX_N = 20


def brute_force_cap() -> int:
    """Enumeration cap, overridable with the ``HMP_MAX_N`` environment variable."""
    raw = os.environ.get("HMP_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"HMP_MAX_N must be an integer, got {raw!r}") from exc


def _check_cap(n: int, cap: int | None):
    cap = brute_force_cap() if cap is None else cap
    if n > cap:
        raise ResourceLimitError(f"N={n} exceeds the brute-force cap {cap} (set HMP_MAX_N to raise it)")


@dataclass(frozen=True)
class ProcessParams:
    p: float
    eps: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise InvalidParameterError(f"p must lie in (0, 1), got {self.p}")
        if not 0.0 <= self.eps < 0.5:
            raise InvalidParameterError(f"eps must lie in [0, 1/2), got {self.eps}")


def as_sequence(symbols) -> np.ndarray:
    """Validate and convert to an ``int8`` array over {+1, -1}."""
    arr = np.asarray(symbols, dtype=np.int8).ravel()
    if arr.size == 0:
        raise InvalidInputError("a bit sequence must be nonempty")
    if not np.all((arr == 1) | (arr == -1)):
        raise InvalidInputError("bit sequences contain only +1 and -1")
    return arr


def all_sequences(n: int) -> np.ndarray:
    """All 2**n sequences of length n as rows, in lexicographic order (+1 before -1)."""
    idx = np.arange(2**n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int8)


def markov_prob(S, p: float) -> float:
    """Probability of a hidden sequence: (1/2) * prod Pr(s_i | s_{i-1})."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
    S = as_sequence(S)
    flips = int(np.count_nonzero(S[1:] != S[:-1]))
    return 0.5 * (1.0 - p) ** (len(S) - 1 - flips) * p**flips


def emission_prob(R, S, eps: float) -> float:
    R, S = as_sequence(R), as_sequence(S)
    if R.shape != S.shape:
        raise InvalidInputError(f"length mismatch: {R.size} vs {S.size}")
    flips = int(np.count_nonzero(R != S))
    return (1.0 - eps) ** (R.size - flips) * eps**flips


def _joint_weights(R: np.ndarray, p: float, eps: float, boundary: Boundary) -> np.ndarray:
    n = R.size
    S = all_sequences(n)
    bond_flips = np.count_nonzero(S[:, 1:] != S[:, :-1], axis=1)
    n_bonds = n - 1
    if boundary == "periodic":
        bond_flips = bond_flips + (S[:, 0] != S[:, -1])
        n_bonds = n
    channel_flips = np.count_nonzero(S != R[None, :], axis=1)
    with np.errstate(divide="ignore"):
        w = (1.0 - p) ** (n_bonds - bond_flips) * np.float64(p) ** bond_flips
    w = w * (1.0 - eps) ** (n - channel_flips) * np.float64(eps) ** channel_flips
    if boundary == "periodic":
        # exact normalization of the cyclic chain: trace of the transfer matrix
        lam = 1.0 - 2.0 * p
        return w / (1.0 + lam**n)
    return 0.5 * w


def observed_prob_brute(R, params: ProcessParams, *, boundary: Boundary = "open", cap: int | None = None) -> float:
    """Q(R) by summing the joint probability over all 2**N hidden sequences.

    With ``boundary="periodic"`` the hidden chain carries the extra bond
    (s_N, s_1) and is normalized exactly over cyclic configurations.
    """
    R = as_sequence(R)
    _check_cap(R.size, cap)
    return float(math.fsum(_joint_weights(R, params.p, params.eps, boundary)))


@numba.njit(cache=True)
def _forward_increments(R, p, eps):
    # per-step -ln Pr(r_n | r_1..r_{n-1}); two-state filter normalized at every step
    n = R.shape[0]
    out = np.empty(n)
    a_plus = 0.5
    a_minus = 0.5
    for i in range(n):
        if i > 0:
            b_plus = (1.0 - p) * a_plus + p * a_minus
            b_minus = p * a_plus + (1.0 - p) * a_minus
        else:
            b_plus = a_plus
            b_minus = a_minus
        if R[i] > 0:
            b_plus *= 1.0 - eps
            b_minus *= eps
        else:
            b_plus *= eps
            b_minus *= 1.0 - eps
        c = b_plus + b_minus
        out[i] = -math.log(c)
        a_plus = b_plus / c
        a_minus = b_minus / c
    return out


def forward_increments(R, params: ProcessParams) -> np.ndarray:
    """Conditional surprisals ``-ln Pr(r_n | r_1..r_{n-1})`` for each position."""
    R = as_sequence(R)
    return _forward_increments(R, float(params.p), float(params.eps))


def observed_prob_forward(R, params: ProcessParams) -> float:
    """ln Q(R) from the scaled forward recursion (O(N), no underflow)."""
    return -math.fsum(forward_increments(R, params))


def forward_prob_batch(Rs: np.ndarray, p: float, eps: float) -> np.ndarray:
    """Q(R) for every row of ``Rs`` using a vectorized forward pass."""
    Rs = np.asarray(Rs)
    m, n = Rs.shape
    a_plus = np.full(m, 0.5)
    a_minus = np.full(m, 0.5)
    for i in range(n):
        if i:
            a_plus, a_minus = (1 - p) * a_plus + p * a_minus, p * a_plus + (1 - p) * a_minus
        up = Rs[:, i] > 0
        a_plus = a_plus * np.where(up, 1 - eps, eps)
        a_minus = a_minus * np.where(up, eps, 1 - eps)
    return a_plus + a_minus


def sample(params: ProcessParams | tuple[float, float], n: int, seed: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Draw a hidden sequence S and its noisy observation R.

    ``params`` may be a raw ``(p, eps)`` pair so degenerate sources (p = 0)
    can be sampled.  Parallel callers should derive per-worker seeds as
    ``seed ^ worker_index``.
    """
    if n < 1:
        raise InvalidInputError("sample length must be >= 1")
    p, eps = (params.p, params.eps) if isinstance(params, ProcessParams) else params
    if not (0.0 <= p <= 1.0 and 0.0 <= eps <= 1.0):
        raise InvalidParameterError(f"invalid sampling parameters p={p}, eps={eps}")
    rng = np.random.default_rng(seed)
    s1 = np.int8(1 if rng.random() < 0.5 else -1)
    steps = np.where(rng.random(n - 1) < p, -1, 1).astype(np.int8)
    S = (s1 * np.cumprod(np.concatenate(([np.int8(1)], steps)), dtype=np.int8)).astype(np.int8)
    noise = np.where(rng.random(n) < eps, -1, 1).astype(np.int8)
    return S, (S * noise).astype(np.int8)


# --------------------------------------------------------------------------
# Ising form
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IsingParams:
    J: float
    K: float
    A0: float
    A1: float
    n: int
    boundary: Boundary = "open"

    @property
    def A(self) -> float:
        return self.A0 * self.A1


def ising_couplings(params: ProcessParams, n: int, boundary: Boundary = "open") -> IsingParams:
    """Couplings with e^{2J} = (1-p)/p and e^{2K} = (1-eps)/eps.

    ``A0`` is ``(1/2)(2 cosh J)^-(N-1)`` for the open chain.  For the periodic
    chain it is ``1/Tr(T^N) = 1/((2 cosh J)^N + (2 sinh J)^N)``, the exact
    normalization of the cyclic weights.
    """
    if params.eps == 0.0:
        raise InfiniteCouplingError("eps = 0 gives an infinite field K; use the probability path")
    if boundary not in ("open", "periodic"):
        raise InvalidInputError(f"unknown boundary {boundary!r}")
    J = 0.5 * math.log((1.0 - params.p) / params.p)
    K = 0.5 * math.log((1.0 - params.eps) / params.eps)
    if boundary == "open":
        A0 = 0.5 * (2.0 * math.cosh(J)) ** (-(n - 1))
    else:
        A0 = 1.0 / ((2.0 * math.cosh(J)) ** n + (2.0 * math.sinh(J)) ** n)
    A1 = (2.0 * math.cosh(K)) ** (-n)
    return IsingParams(J=J, K=K, A0=A0, A1=A1, n=n, boundary=boundary)


def _bond_sum(S: np.ndarray, boundary: Boundary) -> np.ndarray:
    total = np.sum(S[..., 1:] * S[..., :-1], axis=-1, dtype=np.int64)
    if boundary == "periodic":
        total = total + S[..., 0].astype(np.int64) * S[..., -1]
    return total


def ising_z(R, ising: IsingParams, *, cap: int | None = None) -> float:
    """Z(R) = sum_S exp(J sum s_i s_{i+1} + K sum r_i s_i)."""
    R = as_sequence(R)
    _check_cap(R.size, cap)
    S = all_sequences(R.size)
    energy = ising.J * _bond_sum(S, ising.boundary) + ising.K * (S @ R.astype(np.int64))
    return float(math.fsum(np.exp(energy)))


def ising_z_low_order(R, ising: IsingParams, order: int) -> float:
    """Large-field expansion of the periodic Z(R), truncated after ``order`` flipped spins.

    Order 0 keeps S = R; order 1 adds all single flips; order 2 adds the
    nearest-neighbour pairs (class a) and the N(N-3)/2 separated pairs (class b).
    """
    if order not in (0, 1, 2):
        raise UnsupportedOrderError(f"low-order expansion only to order 2, got {order}")
    if ising.boundary != "periodic":
        raise InvalidInputError("the low-order expansion uses the periodic chain")
    R = as_sequence(R).astype(np.int64)
    n = R.size
    if order == 2 and n < 5:
        raise InvalidInputError("order 2 needs N >= 5")
    J, K = ising.J, ising.K
    left, right = np.roll(R, 1), np.roll(R, -1)  # r_{j-1}, r_{j+1}
    base = math.exp(n * K + J * float(np.sum(R * right)))
    total = 1.0
    if order >= 1:
        single = -2.0 * J * R * (left + right)  # bond change from flipping site j
        total += math.exp(-2 * K) * math.fsum(np.exp(single))
    if order >= 2:
        right2 = np.roll(R, -2)
        class_a = np.exp(-2.0 * J * (R * left + right * right2))
        terms_b = []
        for j, k in _separated_pairs(n):
            terms_b.append(single[j] + single[k])
        total += math.exp(-4 * K) * (math.fsum(class_a) + math.fsum(np.exp(terms_b)))
    return base * total


def _separated_pairs(n: int):
    """Unordered site pairs that are not cyclic nearest neighbours."""
    for j, k in itertools.combinations(range(n), 2):
        if (k - j) % n not in (1, n - 1):
            yield j, k


def separated_pair_count(n: int) -> int:
    return sum(1 for _ in _separated_pairs(n))
