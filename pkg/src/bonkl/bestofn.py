"""Exact best-of-n policy, its KL divergence to the base policy, and a sampler.

Sampling reproducibility
------------------------
Draws are generated in fixed blocks of :data:`BLOCK_SIZE` samples.  Block
``k`` of a run with seed ``s`` uses ``PCG64(SeedSequence(s, spawn_key=(k,)))``
and consumes exactly one ``Generator.random()`` double per best-of-n sample.
Because the stream depends only on ``(seed, block index)``, splitting a run
across any number of workers yields identical counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from numbers import Integral

import numpy as np

from bonkl.errors import InvalidN, InvalidSampleCount
from bonkl.policy import BasePolicy, CdfPair, cdf_pair

BLOCK_SIZE = 1 << 16
MAX_N = 10**7
TINY_PROB = 1e-300


def check_n(n) -> int:
    if isinstance(n, bool) or not isinstance(n, Integral):
        raise InvalidN(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise InvalidN(f"n must be >= 1, got {n}")
    if n > MAX_N:
        raise InvalidN(f"n must be <= {MAX_N}, got {n}")
    return n


@dataclass(frozen=True, eq=False)
class DerivedPolicy:
    """Best-of-n PMF aligned with the base policy's reward-ascending order."""

    n: int
    probs: np.ndarray
    log_probs: np.ndarray


@dataclass(frozen=True, eq=False)
class McReport:
    n: int
    num_samples: int
    seed: int
    counts: np.ndarray
    empirical_probs: np.ndarray
    exact_probs: np.ndarray
    tv_distance: float


def _log_bon_pmf(p: BasePolicy, cdf: CdfPair, n: int) -> np.ndarray:
    # F^n - (F^-)^n = F^n * (1 - (1 - p/F)^n), both factors evaluated in log space
    log_f = cdf.log_f_upper()
    bottom = cdf.f_lower == 0.0
    ratio = np.minimum(p.probs / cdf.f_upper, 1.0)
    ratio = np.where(bottom, 0.5, ratio)
    log_head = np.log(-np.expm1(n * np.log1p(-ratio)))
    return n * log_f + np.where(bottom, 0.0, log_head)


def bon_pmf(p: BasePolicy, n: int) -> DerivedPolicy:
    n = check_n(n)
    if n == 1:
        probs = np.array(p.probs)
        log_probs = np.log(probs)
    else:
        log_probs = _log_bon_pmf(p, cdf_pair(p), n)
        probs = np.exp(log_probs)
    probs.setflags(write=False)
    log_probs.setflags(write=False)
    return DerivedPolicy(n=n, probs=probs, log_probs=log_probs)


def exact_kl(p: BasePolicy, n: int) -> float:
    """KL(best-of-n || base) in nats for a single context."""
    n = check_n(n)
    if n == 1:
        return 0.0
    return kl_from_pmf(p, bon_pmf(p, n))


def kl_from_pmf(p: BasePolicy, pi: DerivedPolicy) -> float:
    if pi.n == 1:
        return 0.0
    # 0 log 0 = 0 for outcomes whose best-of-n mass underflows
    keep = pi.probs >= TINY_PROB
    terms = pi.probs[keep] * (pi.log_probs[keep] - np.log(p.probs[keep]))
    return math.fsum(terms.tolist())


def expected_reward(p: BasePolicy, n: int) -> float:
    pi = bon_pmf(p, n)
    return math.fsum((pi.probs * p.rewards).tolist())


def epsilon_infinity(p: BasePolicy) -> float:
    """Base probability of the highest-reward outcome."""
    return float(p.probs[-1])


# --- Monte Carlo ---------------------------------------------------------------


def _check_mc_args(n, num_samples, seed) -> tuple[int, int, int]:
    n = check_n(n)
    if isinstance(num_samples, bool) or not isinstance(num_samples, Integral) or num_samples < 1:
        raise InvalidSampleCount(f"num_samples must be a positive integer, got {num_samples!r}")
    if isinstance(seed, bool) or not isinstance(seed, Integral) or not (0 <= seed < 2**64):
        raise InvalidSampleCount(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return n, int(num_samples), int(seed)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _draw_block(f_upper: np.ndarray, n: int, seed: int, block: int, size: int) -> np.ndarray:
    v = 1.0 - block_rng(seed, block).random(size)  # in (0, 1]
    # max of n iid uniforms has the law of V**(1/n)
    top = np.exp(np.log(v) / n)
    idx = np.searchsorted(f_upper, top, side="right")
    return np.minimum(idx, len(f_upper) - 1)


def _block_sizes(num_samples: int) -> list[int]:
    full, rest = divmod(num_samples, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _partition(num_blocks: int, workers: int) -> list[range]:
    workers = max(1, min(workers, num_blocks))
    edges = np.linspace(0, num_blocks, workers + 1).round().astype(int)
    return [range(a, b) for a, b in zip(edges[:-1], edges[1:])]


def draw_best_of_n(p: BasePolicy, n: int, num_samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Indices (reward-ascending) of ``num_samples`` best-of-n draws."""
    n, num_samples, seed = _check_mc_args(n, num_samples, seed)
    f_upper = cdf_pair(p).f_upper
    sizes = _block_sizes(num_samples)

    def run(blocks: range) -> np.ndarray:
        parts = [_draw_block(f_upper, n, seed, b, sizes[b]) for b in blocks]
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)

    chunks = _partition(len(sizes), workers)
    if len(chunks) == 1:
        return run(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return np.concatenate(list(pool.map(run, chunks)))


def sample_best_of_n(p: BasePolicy, n: int, num_samples: int, seed: int, workers: int = 1) -> McReport:
    idx = draw_best_of_n(p, n, num_samples, seed, workers=workers)
    counts = np.bincount(idx, minlength=p.size)
    empirical = counts / num_samples
    exact = bon_pmf(p, n).probs
    tv = 0.5 * math.fsum(np.abs(empirical - exact).tolist())
    return McReport(
        n=int(n),
        num_samples=int(num_samples),
        seed=int(seed),
        counts=counts,
        empirical_probs=empirical,
        exact_probs=np.array(exact),
        tv_distance=tv,
    )


def epsilon_n_samples(p: BasePolicy, n: int, num_samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Base probability of each sampled best-of-n outcome."""
    idx = draw_best_of_n(p, n, num_samples, seed, workers=workers)
    return np.asarray(p.probs)[idx]
