"""Built-in base policies used by the figure reproductions."""

from __future__ import annotations

import re

from bonkl.errors import UnknownScenario
from bonkl.policy import BasePolicy, validate_policy

NAMES = ("example1", "uniform(L)", "cherry_left", "cherry_right")


def example1() -> BasePolicy:
    """Two equiprobable outcomes with rewards 0 and 1."""
    return validate_policy([("0", 0.5, 0.0), ("1", 0.5, 1.0)])


def uniform(L: int) -> BasePolicy:
    if L < 2:
        raise UnknownScenario(f"uniform needs L >= 2, got {L}")
    return validate_policy([(f"y{i}", 1.0 / L, float(i)) for i in range(L)])


def _cherry(top_probs: list[float], size: int) -> BasePolicy:
    # top_probs is highest reward first; the remainder sits below them in reward
    rest = size - len(top_probs)
    each = (1.0 - sum(top_probs)) / rest
    rows = [(f"y{i}", each, float(i)) for i in range(rest)]
    for rank, prob in enumerate(reversed(top_probs)):
        rows.append((f"top{len(top_probs) - rank}", prob, float(rest + rank)))
    return validate_policy(rows)


def cherry_left() -> BasePolicy:
    return _cherry([1e-4], 5)


def cherry_right() -> BasePolicy:
    return _cherry([1e-5, 1e-3, 1e-1], 200)


_UNIFORM = re.compile(r"^uniform[(:]?(\d+)\)?$")


def builtin(name: str) -> BasePolicy:
    """Look up a scenario by name: ``example1``, ``uniform(L)`` / ``uniform:L``,
    ``cherry_left`` or ``cherry_right``."""
    key = name.strip().lower()
    if key == "example1":
        return example1()
    if key == "cherry_left":
        return cherry_left()
    if key == "cherry_right":
        return cherry_right()
    m = _UNIFORM.match(key)
    if m:
        return uniform(int(m.group(1)))
    raise UnknownScenario(f"unknown scenario {name!r}; expected one of {', '.join(NAMES)}")
