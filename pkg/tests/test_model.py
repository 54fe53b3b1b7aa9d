import numpy as np
import pytest
from hypothesis import given, strategies as st

from soliton_flow.errors import ModelMismatchError
from soliton_flow.model import PRESETS, OrbitModel, preset, require_warped, total_dim, validate


def test_total_dim_examples():
    assert total_dim(OrbitModel.warped([1, 2], [0, 1])) == 3
    assert total_dim(preset("example1-m1")) == 6
    assert total_dim(preset("example2-m2")) == 11


def test_presets_group_constants():
    for m in range(1, 5):
        k = preset(f"example1-m{m}").kind
        assert (k.d1, k.d2, k.A2, k.A3) == (2, 4 * m, 2 * m * (m + 2), m / 2)
        k = preset(f"example2-m{m}").kind
        assert (k.d1, k.d2, k.A2, k.A3) == (3, 4 * m, 4 * m * (m + 2), 3 * m / 4)
    assert len(PRESETS) == 8
    with pytest.raises(KeyError):
        preset("example3-m1")


def test_validate_examples():
    m = preset("example1-m1")
    assert validate(m, -1.0) == []
    bad = validate(m, 0.0)
    assert len(bad) == 1 and bad[0].startswith("E-nonnegative")
    shifted = OrbitModel.two_summand(2, 4, 6, 0.5, C=-1.0)
    assert validate(shifted, 0.0) == []


def test_validate_names_each_violation():
    m = OrbitModel.warped([1, 2], [0.5, 1.0])
    assert any(v.startswith("circle-startup") for v in validate(m, -1))
    m = OrbitModel.warped([3, 2], [1.0, 1.0])
    assert any(v.startswith("round-sphere") for v in validate(m, -1))
    m = OrbitModel.warped([1, 2], [0.0, 1.0], epsilon=-1.0)
    assert any(v.startswith("epsilon-nonpositive") for v in validate(m, -1))
    m = OrbitModel.two_summand(2, 4, -1.0, 0.5)
    assert any(v.startswith("A2-nonpositive") for v in validate(m, -1))
    m = OrbitModel.warped([1, 2], [0.0, -1.0])
    assert any(v.startswith("einstein-const-negative") for v in validate(m, -1))


def test_model_kind_guards():
    with pytest.raises(ModelMismatchError):
        require_warped(preset("example1-m1"))
    with pytest.raises(ModelMismatchError):
        preset("example1-m1").lambdas
    with pytest.raises(ValueError):
        OrbitModel.warped([1, 2], [0.0])


def test_fingerprint_stable_and_distinct():
    a = OrbitModel.warped([1, 2], [0, 1])
    assert a.fingerprint() == OrbitModel.warped([1, 2], [0.0, 1.0]).fingerprint()
    assert a.fingerprint() != OrbitModel.warped([1, 2], [0, 1], epsilon=2.0).fingerprint()


@given(st.lists(st.integers(1, 8), min_size=1, max_size=5),
       st.floats(-5, 5, allow_nan=False), st.floats(0.1, 3))
def test_validate_is_pure(dims, u0, eps):
    lams = [0.0] + [1.0] * (len(dims) - 1)
    m = OrbitModel.warped([1] + dims[1:], lams, epsilon=eps)
    first = validate(m, u0)
    assert validate(m, u0) == first
    # E(0) < 0 is exactly the sign of eps*u0 here (C = 0)
    assert any(v.startswith("E-nonnegative") for v in first) == (not eps * u0 < 0)
    assert total_dim(m) == 1 + sum(dims[1:])
    assert np.all(m.dims >= 1)
