import pytest

from golden_cases import GOLDEN, cases, render

CASES = cases()


@pytest.mark.parametrize("name", sorted(CASES))
def test_matches_golden(name):
    assert render(CASES[name]) == (GOLDEN / f"{name}.json").read_text()
