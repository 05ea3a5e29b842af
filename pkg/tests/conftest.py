import pytest
from hypothesis import HealthCheck, settings, strategies as st

from ppfim.dataset import TransactionDatabase, parse_basket_file

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SAMPLE = b"a b c\na b\na c\nb\n"

tokens = st.binary(min_size=1, max_size=4).map(lambda b: bytes(x & 0x7F for x in b))
plain_tokens = st.sampled_from([b"a", b"b", b"c", b"d", b"e", b"f"])


@st.composite
def databases(draw, max_tx=12, item_strategy=plain_tokens):
    baskets = draw(st.lists(st.lists(item_strategy, min_size=1, max_size=6), min_size=1, max_size=max_tx))
    return TransactionDatabase.from_baskets(baskets)


@pytest.fixture
def sample_db():
    return parse_basket_file(SAMPLE)


_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance.append(f"[{status}] {marker.args[0]}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance:
            terminalreporter.write_line(line)
