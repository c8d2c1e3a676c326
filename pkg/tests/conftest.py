import numpy as np
import pytest

from bonkl.policy import validate_policy

# fixed seed for the random-policy suite; change only with a note in the README
SUITE_SEED = 20240517
SUITE_SIZE = 1000
SUITE_N = (1, 2, 3, 5, 10, 100, 1000, 10000)


def random_policy(rng: np.random.Generator, L: int):
    """Probabilities uniform on the simplex, rewards a random permutation of 1..L."""
    probs = rng.dirichlet(np.ones(L))
    rewards = rng.permutation(np.arange(1, L + 1))
    return validate_policy([(f"y{i}", float(q), float(r)) for i, (q, r) in enumerate(zip(probs, rewards))])


def make_suite(size=SUITE_SIZE, seed=SUITE_SEED, low=2, high=200):
    rng = np.random.default_rng(seed)
    return [random_policy(rng, int(rng.integers(low, high + 1))) for _ in range(size)]


@pytest.fixture(scope="session")
def suite():
    return make_suite()


@pytest.fixture
def example1():
    return validate_policy([("0", 0.5, 0.0), ("1", 0.5, 1.0)])


@pytest.fixture
def point_mass():
    return validate_policy([("only", 1.0, 3.5)])


# --- acceptance summary ------------------------------------------------------------
# Tests tagged @pytest.mark.criterion(key, title) are grouped by key and reported
# as one PASS/FAIL line each at the end of the run.

_CRITERIA: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    key, title = mark.args
    details = [str(v) for k, v in item.user_properties if k == "detail"]
    _CRITERIA.setdefault(key, [title, []])[1].append((item.name, rep.passed, details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=int):
        title, results = _CRITERIA[key]
        failed = [name for name, ok, _ in results if not ok]
        line = f"{'PASS' if not failed else 'FAIL'}  criterion {key:>2}  {title}"
        if failed:
            line += f"  [failing: {', '.join(failed)}]"
        terminalreporter.write_line(line)
        for _, _, details in results:
            for d in details:
                terminalreporter.write_line(f"          {d}")
