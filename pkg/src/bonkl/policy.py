"""Finite reward-annotated base policies, their reward-ordered CDFs and entropies."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from bonkl.errors import (
    DuplicateOutcomeId,
    DuplicateReward,
    EmptyPolicy,
    InvalidAlpha,
    InvalidEnsemble,
    NonPositiveProb,
    OutOfRange,
    ParseError,
    ProbSumMismatch,
)

INGEST_SUM_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-12
TSV_HEADER = ("outcome_id", "reward", "prob")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def compensated_cumsum(values: Sequence[float]) -> np.ndarray:
    """Running sums with Neumaier compensation.

    ``np.cumsum`` loses the low digits once the partial sums approach 1 and
    the summands are ~1e-4 or smaller, which matters for ``F`` close to 1.
    """
    out = np.empty(len(values), dtype=np.float64)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(values):
        v = float(v)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


@dataclass(frozen=True)
class Context:
    id: str
    weight: float


@dataclass(frozen=True, eq=False)
class BasePolicy:
    """A finite distribution over outcomes with distinct rewards.

    Outcomes are stored in reward-ascending order, so index ``L - 1`` is the
    highest-reward outcome.  Construct through :func:`validate_policy`.
    """

    outcome_ids: tuple[str, ...]
    probs: np.ndarray
    rewards: np.ndarray

    def __len__(self) -> int:
        return len(self.outcome_ids)

    @property
    def size(self) -> int:
        return len(self.outcome_ids)

    def rows(self) -> list[tuple[str, float, float]]:
        return [(o, float(p), float(r)) for o, p, r in zip(self.outcome_ids, self.probs, self.rewards)]


@dataclass(frozen=True, eq=False)
class CdfPair:
    """Reward-ordered CDF values for each outcome.

    ``f_upper[i] = P[r(z) <= r(y_i)]`` and ``f_lower[i] = P[r(z) < r(y_i)]``.
    ``tail_above[i] = P[r(z) > r(y_i)]`` is accumulated from the top so that
    ``log f_upper`` stays accurate when ``f_upper`` is within a few ulps of 1.
    """

    f_upper: np.ndarray
    f_lower: np.ndarray
    tail_above: np.ndarray = field(repr=False)

    def log_f_upper(self) -> np.ndarray:
        near_one = self.f_upper > 0.5
        return np.where(near_one, np.log1p(-self.tail_above), np.log(np.where(near_one, 1.0, self.f_upper)))


@dataclass(frozen=True, eq=False)
class ContextEnsemble:
    contexts: tuple[tuple[Context, BasePolicy], ...]

    def __post_init__(self):
        if not self.contexts:
            raise InvalidEnsemble("ensemble must contain at least one context")
        ids = [c.id for c, _ in self.contexts]
        if len(set(ids)) != len(ids):
            raise InvalidEnsemble("context ids must be unique")
        weights = [c.weight for c, _ in self.contexts]
        if any(not (0.0 <= w <= 1.0) for w in weights):
            raise InvalidEnsemble("context weights must lie in [0, 1]")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidEnsemble(f"context weights sum to {math.fsum(weights)!r}, expected 1")


def validate_policy(
    raw: Iterable[tuple[str, float, float]],
    jitter: float | None = None,
    seed: int = 0,
) -> BasePolicy:
    """Validate ``(outcome_id, prob, reward)`` triples and build a BasePolicy.

    Zero-probability rows are dropped (only the support is represented).  The
    probabilities must sum to 1 within 1e-9 and are then renormalized.  Ties in
    reward are rejected unless ``jitter`` is given, in which case every reward
    gets a perturbation drawn uniformly from ``[0, jitter)`` by a PCG64
    generator seeded with ``seed``.
    """
    rows = list(raw)
    if not rows:
        raise EmptyPolicy("policy must have at least one outcome")

    seen: set[str] = set()
    for oid, _, _ in rows:
        if oid in seen:
            raise DuplicateOutcomeId(f"outcome id {oid!r} appears more than once")
        seen.add(oid)

    for oid, prob, reward in rows:
        if not (math.isfinite(prob) and prob >= 0.0):
            raise NonPositiveProb(f"outcome {oid!r} has probability {prob!r}")
        if not math.isfinite(reward):
            raise ParseError(f"outcome {oid!r} has non-finite reward {reward!r}")

    total = math.fsum(p for _, p, _ in rows)
    if abs(total - 1.0) > INGEST_SUM_TOL:
        raise ProbSumMismatch(f"probabilities sum to {total!r}, expected 1 within {INGEST_SUM_TOL}")

    rows = [r for r in rows if r[1] > 0.0]
    if not rows:
        raise NonPositiveProb("no outcome has positive probability")

    ids = [r[0] for r in rows]
    probs = np.array([r[1] for r in rows], dtype=np.float64)
    rewards = np.array([r[2] for r in rows], dtype=np.float64)
    if jitter is not None:
        if not (jitter > 0.0 and math.isfinite(jitter)):
            raise ParseError(f"jitter must be a positive finite number, got {jitter!r}")
        rng = np.random.default_rng(seed)
        rewards = rewards + rng.uniform(0.0, jitter, size=rewards.shape)

    order = np.argsort(rewards, kind="stable")
    rewards = rewards[order]
    if np.any(np.diff(rewards) == 0.0):
        dup = rewards[np.flatnonzero(np.diff(rewards) == 0.0)[0]]
        raise DuplicateReward(f"reward {dup!r} is shared by several outcomes")

    probs = probs[order]
    probs = probs / math.fsum(probs)
    return BasePolicy(
        outcome_ids=tuple(ids[i] for i in order),
        probs=_frozen(probs),
        rewards=_frozen(rewards),
    )


def cdf_pair(p: BasePolicy) -> CdfPair:
    upper = compensated_cumsum(p.probs)
    upper[-1] = 1.0
    lower = np.concatenate(([0.0], upper[:-1]))
    # survival mass strictly above each outcome, summed from the top
    tail = compensated_cumsum(p.probs[::-1])[::-1]
    tail_above = np.concatenate((tail[1:], [0.0]))
    return CdfPair(f_upper=_frozen(upper), f_lower=_frozen(lower), tail_above=_frozen(tail_above))


def renyi_entropy(p: BasePolicy, alpha: float) -> float:
    """Rényi entropy of order ``alpha`` in nats."""
    if not (alpha > 0.0) or alpha == 1.0 or not math.isfinite(alpha):
        raise InvalidAlpha(f"alpha must be positive and different from 1, got {alpha!r}")
    if alpha == 2.0:
        s = math.fsum(float(q) * float(q) for q in p.probs)
        return -math.log(s)
    # factor out max prob to keep p**alpha representable for large alpha
    pmax = float(np.max(p.probs))
    s = math.fsum(float(v) for v in (p.probs / pmax) ** alpha)
    return (alpha * math.log(pmax) + math.log(s)) / (1.0 - alpha)


def binary_entropy(x: float) -> float:
    if not (0.0 <= x <= 1.0):
        raise OutOfRange(f"binary entropy needs x in [0, 1], got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


# --- TSV distribution files -------------------------------------------------


def parse_distribution(text: str, jitter: float | None = None, seed: int = 0) -> BasePolicy:
    """Parse the ``outcome_id<TAB>reward<TAB>prob`` format."""
    header_seen = False
    rows = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if not header_seen:
            if tuple(f.strip() for f in fields) != TSV_HEADER:
                raise ParseError(f"line {lineno}: expected header {'<TAB>'.join(TSV_HEADER)!r}")
            header_seen = True
            continue
        if len(fields) != 3:
            raise ParseError(f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}")
        oid, reward_s, prob_s = fields
        try:
            reward = _parse_real(reward_s)
            prob = _parse_real(prob_s)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        rows.append((oid, prob, reward))
    if not header_seen:
        raise ParseError("missing header line")
    if not rows:
        raise ParseError("no outcome rows")
    return validate_policy(rows, jitter=jitter, seed=seed)


def _parse_real(s: str) -> float:
    s = s.strip()
    # float() alone would accept '1_0', 'inf' and 'nan'
    if not s or "_" in s:
        raise ValueError(f"not a decimal number: {s!r}")
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"not a finite number: {s!r}")
    return v


def read_distribution(path: str | Path, jitter: float | None = None, seed: int = 0) -> BasePolicy:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not valid UTF-8") from None
    return parse_distribution(text, jitter=jitter, seed=seed)


def format_distribution(p: BasePolicy) -> str:
    buf = io.StringIO()
    buf.write("\t".join(TSV_HEADER) + "\n")
    for oid, prob, reward in zip(p.outcome_ids, p.probs, p.rewards):
        buf.write(f"{oid}\t{float(reward)!r}\t{float(prob)!r}\n")
    return buf.getvalue()
