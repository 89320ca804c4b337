from fractions import Fraction

import pytest
from hypothesis import strategies as st

from pbtm.temporal import Catalog, Interval, Item, Transaction, weight_to_units

LETTERS = "ABCDEFGHIJKLMNOPQRST"


def ladder_catalog(n: int = 5) -> Catalog:
    """A=0.1, B=0.2, ... (cycling after J)."""
    return Catalog(Item(i, LETTERS[i], weight_to_units(Fraction(i % 10 + 1, 10))) for i in range(n))


def tx(itemsets, start=0, end=0):
    return [Transaction(f"t{k}", tuple(sorted(s)), Interval(start, end)) for k, s in enumerate(itemsets)]


@pytest.fixture
def catalog():
    return ladder_catalog(5)


def itemsets(n_items=8, max_size=None):
    return st.frozensets(st.integers(0, n_items - 1), min_size=1,
                         max_size=max_size or n_items).map(lambda s: tuple(sorted(s)))


@st.composite
def weighted_catalogs(draw, n_items):
    units = draw(st.lists(st.integers(1, 10_000), min_size=n_items, max_size=n_items))
    return Catalog(Item(i, LETTERS[i], u) for i, u in enumerate(units))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
