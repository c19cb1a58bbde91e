"""Acceptance gate: every criterion at its stated tolerance, one line each."""

import pytest

from zeromass.acceptance import CRITERIA


@pytest.mark.parametrize("index,title,fn", CRITERIA, ids=[f"criterion_{i}" for i, _, _ in CRITERIA])
def test_criterion(index, title, fn, capsys):
    passed, detail = fn()
    with capsys.disabled():
        tag = "PASS" if passed else "FAIL"
        print(f"\n[{tag}] criterion {index:2d}: {title} -- {detail}")
    assert passed, f"criterion {index} ({title}): {detail}"
