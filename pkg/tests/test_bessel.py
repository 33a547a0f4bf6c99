import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gammacomb.bessel import SERIES_LIMIT, j1, j1_over_half_arg

ORACLE = json.loads((Path(__file__).parent / "data" / "j1_oracle.json").read_text())


def test_j1_against_mpmath_table():
    y = np.array([r[0] for r in ORACLE["j1"]])
    ref = np.array([float(r[1]) for r in ORACLE["j1"]])
    np.testing.assert_allclose(j1(y), ref, rtol=0, atol=1e-11)


def test_branch_seam_is_continuous():
    from scipy.special import jvp
    eps = 1e-6
    lo, hi = j1(SERIES_LIMIT - eps), j1(SERIES_LIMIT + eps)
    assert (hi - lo) / (2 * eps) == pytest.approx(jvp(1, SERIES_LIMIT), abs=1e-5)


def test_half_arg_ratio_at_origin():
    assert j1_over_half_arg(0.0) == 1.0
    assert float(j1_over_half_arg(1e-4)) == pytest.approx(1 - (1e-4) ** 2 / 8, rel=1e-15)


@given(st.floats(0.0, 200.0))
def test_j1_is_odd_and_bounded(y):
    assert j1(-y) == -j1(y)
    assert abs(j1(y)) <= 0.5819


@given(st.floats(0.5, 40.0))
def test_recurrence_against_scipy_j0_j2(y):
    from scipy.special import jv
    # J0 + J2 = (2/y) J1
    assert j1(y) == pytest.approx(y / 2 * (jv(0, y) + jv(2, y)), abs=1e-11)


def test_zeros_match_oracle():
    for z in ORACLE["j1_zeros"]:
        assert abs(j1(float(z))) < 1e-12
