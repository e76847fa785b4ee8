"""One test per acceptance criterion; each prints a single PASS/FAIL line.

The same checks back the ``reproduce`` command.  Run on their own with
``pytest tests/test_acceptance.py -v -s``.
"""

import pytest

from welding_moments.acceptance import CRITERIA, run_all

from conftest import record_acceptance


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number):
    (result,) = run_all({number})
    line = result.line()
    print(line)
    record_acceptance(line)
    assert result.ok, "\n".join([line, *result.details])
