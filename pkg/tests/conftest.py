import numpy as np
import pytest

from moralframe.embeddings import EmbeddingTable
from moralframe.lexicon import SeedLexicon

TOY_VECTORS = {
    # care axis along x, fairness along y, loyalty along z
    "harm": (-1.0, 0.0, 0.0),
    "abuse": (-1.0, 0.2, 0.0),
    "care": (1.0, 0.0, 0.0),
    "safe": (1.0, 0.0, 0.2),
    "unfair": (0.0, -1.0, 0.0),
    "fair": (0.0, 1.0, 0.0),
    "enemy": (0.0, 0.0, -1.0),
    "family": (0.0, 0.0, 1.0),
    "dog": (0.3, 0.4, 0.5),
    "the": (0.1, 0.1, 0.1),
}


def toy_lexicon_pools():
    return {
        "care": (frozenset({"harm", "abuse"}), frozenset({"care", "safe"})),
        "fairness": (frozenset({"unfair"}), frozenset({"fair"})),
        "loyalty": (frozenset({"enemy"}), frozenset({"family"})),
    }


@pytest.fixture(scope="session")
def toy_table():
    return EmbeddingTable.from_mapping(TOY_VECTORS)


@pytest.fixture(scope="session")
def toy_lexicon():
    return SeedLexicon(toy_lexicon_pools(), "toy")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---- acceptance reporting: one line per criterion in the terminal summary

_CRITERIA: dict[str, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        if rep.skipped and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        _CRITERIA[str(num)] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA, key=int):
        status, title, detail = _CRITERIA[num]
        line = f"{status} criterion {num}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
