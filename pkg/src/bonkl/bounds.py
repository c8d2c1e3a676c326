"""The log(n) - (n-1)/n formula, bounds on its gap to the exact KL, and KL estimators.

Every ``(1 - eps)**n`` is evaluated as ``exp(n * log1p(-eps))`` and every
``1 - (1 - eps)**n`` as ``-expm1(n * log1p(-eps))``; the regimes of interest
reach n = 1e6 with eps = 1e-5.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from bonkl.bestofn import DerivedPolicy, bon_pmf, check_n, epsilon_infinity, exact_kl, kl_from_pmf
from bonkl.errors import InvalidDelta, InvalidEps, InvalidInterval, InvariantViolation
from bonkl.policy import BasePolicy, ContextEnsemble, renyi_entropy

SERIES_CUTOFF = 1e-12
REPORT_TOL = 1e-10


def _eps_array(eps) -> np.ndarray:
    e = np.asarray(eps, dtype=np.float64)
    if np.any(~np.isfinite(e)) or np.any(e <= 0.0) or np.any(e > 1.0):
        raise InvalidEps(f"eps must lie in (0, 1], got {eps!r}")
    return e


def _out(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


def survival_pow(eps: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``((1-eps)**n, 1-(1-eps)**n)`` without cancellation."""
    with np.errstate(divide="ignore"):
        x = n * np.log1p(-eps)
    stay = np.exp(x)
    leave = np.where(np.abs(x) < SERIES_CUTOFF, n * eps, -np.expm1(x))
    return stay, leave


def analytical_formula(n: int) -> float:
    """log(n) - (n-1)/n, the literature's value for KL(best-of-n || base)."""
    n = check_n(n)
    if n == 1:
        return 0.0
    return math.log(n) - (n - 1) / n


def gap_upper_bound(p: BasePolicy, n: int) -> float:
    n = check_n(n)
    return 2.0 * n * (n - 1) * math.exp(-renyi_entropy(p, 2.0))


def gap_upper_uniform_delta(delta: float, n: int) -> float:
    """Gap bound for a base policy whose probabilities are all at most ``delta``."""
    n = check_n(n)
    if not (0.0 < delta <= 1.0):
        raise InvalidDelta(f"delta must lie in (0, 1], got {delta!r}")
    return 2.0 * n * (n - 1) * delta


def gap_lower_bound(eps_inf, n: int):
    """Lower bound on the gap from the top outcome alone.

    Value of ``(1 - q) (log(n eps / (1 - q)) - (n-1)/n) - (n-1) q log(1 - eps)``
    with ``q = (1 - eps)**n``; this is ``g_n(1 - eps_inf, 1, n)`` and is
    evaluated through the same cancellation-free kernel.
    """
    n = check_n(n)
    e = _eps_array(eps_inf)
    if n == 1:
        return _out(np.zeros_like(e), eps_inf)
    with np.errstate(divide="ignore"):
        x = -np.log1p(-e)
    return _out(_gap_kernel(x, n), eps_inf)


def gap_lower_simple(eps_inf, n: int):
    """(1 - exp(-n eps)) log(n eps) - 1.

    Negative whenever n * eps_inf is small; it is then a valid but vacuous
    bound and is returned as is.
    """
    n = check_n(n)
    e = _eps_array(eps_inf)
    ne = n * e
    return _out(-np.expm1(-ne) * np.log(ne) - 1.0, eps_inf)


def alternate_estimator(eps, n: int):
    """log((1 - (1-eps)**n) / eps)."""
    n = check_n(n)
    e = _eps_array(eps)
    if n == 1:
        return _out(np.zeros_like(e), eps)
    _, leave = survival_pow(e, n)
    return _out(np.log(leave) - np.log(e), eps)


def proposed_estimator(eps, n: int):
    """Blend of the formula regime and the saturated regime, weighted by (1-eps)**n."""
    n = check_n(n)
    e = _eps_array(eps)
    if n == 1:
        return _out(np.zeros_like(e), eps)
    stay, leave = survival_pow(e, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        fresh = np.where(
            stay > 0.0,
            stay * (math.log(n) + (n - 1) * np.log1p(-e) - (n - 1) / n),
            0.0,
        )
    found = leave * (np.log(leave) - np.log(e))
    return _out(fresh + found, eps)


def thm4_bound(eps_inf, n: int):
    """Upper bound on the exact KL given the top outcome's base probability.

    Same expression as :func:`proposed_estimator`, evaluated at eps_inf.
    """
    return proposed_estimator(eps_inf, n)


_ESTIMATORS = {"alternate": alternate_estimator, "proposed": proposed_estimator}


def expected_estimator(p: BasePolicy, n: int, which: str, pi: DerivedPolicy | None = None) -> float:
    """Exact expectation of an estimator evaluated at eps_n = p(y), y ~ best-of-n."""
    try:
        est = _ESTIMATORS[which]
    except KeyError:
        raise ValueError(f"which must be one of {sorted(_ESTIMATORS)}, got {which!r}") from None
    n = check_n(n)
    if pi is None:
        pi = bon_pmf(p, n)
    values = est(np.asarray(p.probs), n)
    return math.fsum((pi.probs * values).tolist())


# --- per-interval gap ---------------------------------------------------------
#
# g_n(a, b) = b^n * g_n(a/b, 1).  Writing a/b = exp(-x) and y = n x,
#
#   g_n(exp(-x), 1) = (1 - e^-y) (phi(x) - phi(y) - (n-1)/n) + (n-1)/n * y e^-y,
#   phi(z) = log((1 - e^-z) / z),
#
# where log n has cancelled.  The kernel is ~ (n-1)^2 y^3 / (24 n^2) as y -> 0,
# so below SERIES_Y it is summed as a power series with exact coefficients.

SERIES_Y = 0.1
SERIES_TERMS = 20


@lru_cache(maxsize=512)
def _kernel_series(n: int) -> np.ndarray:
    m = Fraction(1, n)
    k = 1 - m
    T = SERIES_TERMS
    # (1 - e^-z)/z, then its logarithm by the usual power-series recurrence
    f = [Fraction((-1) ** j, math.factorial(j + 1)) for j in range(T + 1)]
    phi = [Fraction(0)] * (T + 1)
    for j in range(1, T + 1):
        phi[j] = f[j] - sum(i * phi[i] * f[j - i] for i in range(1, j)) / j
    bracket = [-k] + [phi[j] * (m**j - 1) for j in range(1, T + 1)]
    leave = [Fraction(0)] + [Fraction((-1) ** (j + 1), math.factorial(j)) for j in range(1, T + 1)]
    tail = [Fraction(0)] + [k * Fraction((-1) ** (j - 1), math.factorial(j - 1)) for j in range(1, T + 1)]
    coeffs = [sum(leave[i] * bracket[j - i] for i in range(j + 1)) + tail[j] for j in range(T + 1)]
    assert coeffs[0] == coeffs[1] == coeffs[2] == 0
    return np.array([float(c) for c in coeffs])


def _phi(z: np.ndarray) -> np.ndarray:
    return np.log(-np.expm1(-z)) - np.log(z)


def _gap_kernel(x: np.ndarray, n: int) -> np.ndarray:
    """g_n(exp(-x), 1) for x in (0, inf]; x = inf means the interval starts at 0."""
    x = np.asarray(x, dtype=np.float64)
    k = (n - 1) / n
    y = n * x
    full = math.log(n) - k
    small = y < SERIES_Y
    mid = ~small & np.isfinite(x)
    out = np.full(x.shape, full)
    if np.any(small):
        c = _kernel_series(n)
        ys = y[small]
        acc = np.zeros_like(ys)
        for coef in c[::-1]:
            acc = acc * ys + coef
        out[small] = acc
    if np.any(mid):
        xm, ym = x[mid], y[mid]
        out[mid] = -np.expm1(-ym) * (_phi(xm) - _phi(ym) - k) + k * ym * np.exp(-ym)
    return out


def _check_interval(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if np.any(~(a >= 0.0)) or np.any(~(b <= 1.0)) or np.any(~(a < b)):
        raise InvalidInterval(f"need 0 <= a < b <= 1, got a={a!r}, b={b!r}")
    return a, b


def _powers(a: np.ndarray, b: np.ndarray, n: int):
    """b**n, b**n - a**n, and b**n log b - a**n log a, with 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
        bn = np.exp(n * log_b)
        an = np.exp(n * log_a)
        width = b - a
        diff = bn * -np.expm1(n * np.log1p(-width / b))
        blogb = bn * log_b
        aloga = np.where(a > 0.0, an * log_a, 0.0)
    return width, diff, blogb - aloga


def g_n(a, b, n: int):
    """Gap contributed by the CDF interval [a, b]; nonnegative, at most 2n(n-1)(b-a)^2.

    Equal to ``(b^n - a^n) log(n (b-a) / (b^n - a^n)) + (n-1)(b^n log b - a^n log a)
    - (n-1)/n (b^n - a^n)`` with ``0 log 0 = 0``.
    """
    n = check_n(n)
    a_arr, b_arr = _check_interval(a, b)
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    if n == 1:
        return _out(np.zeros(a_arr.shape), a)
    with np.errstate(divide="ignore"):
        x = -np.log1p(-(b_arr - a_arr) / b_arr)
        scale = np.exp(n * np.log(b_arr))
    return _out(scale * _gap_kernel(x, n), a)


def integral_closed_form(a, b, n: int):
    """Closed form of the integral of n v^(n-1) log(n v^(n-1)) over [a, b]."""
    n = check_n(n)
    a_arr, b_arr = _check_interval(a, b)
    if n == 1:
        return _out(np.zeros(np.broadcast(a_arr, b_arr).shape), a)
    _, diff, xlogx = _powers(a_arr, b_arr, n)
    return _out(diff * math.log(n) + (n - 1) * xlogx - (n - 1) / n * diff, a)


@dataclass(frozen=True)
class KlReport:
    n: int
    exact_kl: float
    formula: float
    alt_estimator_expected: float
    proposed_estimator_expected: float
    gap_upper: float
    gap_lower: float
    gap_lower_simple: float
    thm4_bound: float
    eps_inf: float
    expected_reward: float

    @property
    def gap(self) -> float:
        return self.formula - self.exact_kl

    def violations(self, tol: float = REPORT_TOL) -> list[str]:
        """Names of the proven inequalities this report breaks (empty when consistent)."""
        checks = {
            "exact_kl <= formula": self.exact_kl <= self.formula + tol,
            "gap <= gap_upper": self.gap <= self.gap_upper + tol,
            "gap >= gap_lower": self.gap >= self.gap_lower - tol,
            "gap_lower >= 0": self.gap_lower >= -tol,
            "exact_kl <= thm4_bound": self.exact_kl <= self.thm4_bound + tol,
            "exact_kl <= alt_estimator_expected": self.exact_kl <= self.alt_estimator_expected + tol,
        }
        return [name for name, ok in checks.items() if not ok]

    def check(self, tol: float = REPORT_TOL) -> "KlReport":
        bad = self.violations(tol)
        if bad:
            raise InvariantViolation(f"n={self.n}: violated {', '.join(bad)}")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


def kl_report(p: BasePolicy, n: int) -> KlReport:
    n = check_n(n)
    pi = bon_pmf(p, n)
    eps_inf = epsilon_infinity(p)
    return KlReport(
        n=n,
        exact_kl=kl_from_pmf(p, pi),
        formula=analytical_formula(n),
        alt_estimator_expected=expected_estimator(p, n, "alternate", pi=pi),
        proposed_estimator_expected=expected_estimator(p, n, "proposed", pi=pi),
        gap_upper=gap_upper_bound(p, n),
        gap_lower=gap_lower_bound(eps_inf, n),
        gap_lower_simple=gap_lower_simple(eps_inf, n),
        thm4_bound=thm4_bound(eps_inf, n),
        eps_inf=eps_inf,
        expected_reward=math.fsum((pi.probs * p.rewards).tolist()),
    )


def ensemble_kl(e: ContextEnsemble, n: int) -> float:
    """Prompt-averaged KL: context weights times per-context exact KL."""
    return math.fsum(ctx.weight * exact_kl(policy, n) for ctx, policy in e.contexts)
