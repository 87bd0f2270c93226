import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rankmem import EmbedderConfig, MemoryBank  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"

SMALL_EMBEDDER = EmbedderConfig(dim=32, seed=3, feature_buckets=128)
WORDS = [f"tok{i}" for i in range(60)]


def small_bank(capacity=4096, tau=8, d_model=8, **kw):
    return MemoryBank(d_model=d_model, capacity_pairs=capacity, tau=tau,
                      embedder=SMALL_EMBEDDER, **kw)


def random_text(rng, n_words=None):
    n = n_words if n_words is not None else int(rng.integers(1, 9))
    return " ".join(rng.choice(WORDS, size=n))


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def fill_random(bank, rng, n_entries, fixed_n=None, text_embed=False):
    """Insert ``n_entries`` random chunks; returns inserted chunk ids."""
    ids = []
    for _ in range(n_entries):
        n = fixed_n or int(rng.integers(1, bank.tau + 1))
        keys = rng.standard_normal((n, bank.d_model)) * rng.uniform(0.2, 3.0)
        values = rng.standard_normal((n, bank.d_model))
        if text_embed:
            ids.append(bank.insert_chunk(0, (0, n), random_text(rng), keys, values))
        else:
            ids.append(bank.insert_chunk(0, (0, n), "", keys, values,
                                         embedding=random_unit(rng, bank.d_ret)))
    return ids


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] {marker.args[0]} ({rep.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
