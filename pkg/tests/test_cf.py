import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfrule.cf import cf_combine, cf_negative, cf_partial, cf_positive, value_and_partials


def direct_combine(zs):
    """Reference: explicit loops over the two sign branches."""
    plus, minus = 1.0, 1.0
    for z in zs:
        if z >= 0:
            plus *= 1.0 - z
        else:
            minus *= 1.0 + z
    return (1.0 - plus) + (-1.0 + minus)


def central_difference(f, zs, j, h=1e-6):
    up, down = list(zs), list(zs)
    up[j] += h
    down[j] -= h
    return (f(up) - f(down)) / (2 * h)


cfs = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


class TestExamples:
    def test_positive(self):
        assert cf_positive([]) == 0.0
        assert cf_positive([1.0, 0.3]) == 1.0
        assert cf_positive([0.5, 0.5]) == pytest.approx(0.75, abs=1e-15)

    def test_negative(self):
        assert cf_negative([]) == 0.0
        assert cf_negative([-1.0, -0.3]) == -1.0
        assert cf_negative([-0.5, -0.5]) == pytest.approx(-0.75, abs=1e-15)

    def test_combine(self):
        assert cf_combine([0.5, -0.5]) == pytest.approx(0.0, abs=1e-15)
        assert cf_combine([1.0, -0.2, 0.3]) == pytest.approx(0.8, abs=1e-15)
        assert cf_combine([0, 0, 0]) == 0.0

    def test_partial_single_argument(self):
        assert cf_partial([0.2], 0) == 1.0

    def test_partial_matches_finite_difference(self):
        fd = central_difference(direct_combine, [0.5, 0.5], 0)
        assert fd == pytest.approx(0.5, abs=1e-8)
        assert cf_partial([0.5, 0.5], 0) == pytest.approx(fd, rel=1e-6)

    def test_partial_zero_when_coargument_is_one(self):
        assert cf_partial([0.3, 1.0], 0) == 0.0


class TestValidation:
    @pytest.mark.parametrize("func,bad", [
        (cf_positive, [0.2, -0.1]),
        (cf_positive, [1.5]),
        (cf_negative, [0.1]),
        (cf_negative, [-1.2]),
        (cf_combine, [1.01]),
        (cf_combine, [float("nan")]),
    ])
    def test_out_of_range_rejected(self, func, bad):
        with pytest.raises(ValueError):
            func(bad)

    def test_float_drift_is_snapped(self):
        assert cf_combine([1.0 + 5e-10]) == 1.0
        assert cf_positive([-5e-10, 0.5]) == 0.5
        assert cf_negative([5e-10, -0.5]) == -0.5

    def test_partial_index_error(self):
        with pytest.raises(IndexError):
            cf_partial([0.1, 0.2], 2)

    def test_zero_goes_to_nonnegative_branch(self):
        # derivative at 0 is the product over the other nonnegative arguments
        assert cf_partial([0.0, 0.4, -0.5], 0) == pytest.approx(0.6)


class TestProperties:
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), max_size=12))
    def test_nonnegative_input_is_positive_branch(self, xs):
        assert cf_combine(xs) == cf_positive(xs)

    @given(st.lists(st.floats(min_value=-1.0, max_value=0.0), max_size=12))
    def test_nonpositive_input_is_negative_branch(self, ys):
        # -0.0 >= 0 routes to the positive branch; either way the value agrees
        assert cf_combine(ys) == pytest.approx(cf_negative(ys), abs=1e-15)

    @given(st.lists(cfs, min_size=1, max_size=12), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, zs, rnd):
        shuffled = list(zs)
        rnd.shuffle(shuffled)
        assert cf_combine(shuffled) == cf_combine(zs)

    @given(st.lists(cfs, max_size=12))
    def test_zero_padding_exact(self, zs):
        assert cf_combine(zs + [0.0]) == cf_combine(zs)

    @given(st.lists(cfs, min_size=1, max_size=8), st.data())
    def test_monotone(self, zs, data):
        j = data.draw(st.integers(0, len(zs) - 1))
        bigger = data.draw(st.floats(min_value=zs[j], max_value=1.0))
        raised = list(zs)
        raised[j] = bigger
        assert cf_combine(raised) >= cf_combine(zs) - 1e-12

    @given(st.lists(cfs, min_size=1, max_size=10))
    def test_range(self, zs):
        assert -1.0 <= cf_combine(zs) <= 1.0

    @given(st.lists(cfs, min_size=1, max_size=10))
    def test_partials_nonnegative(self, zs):
        assert all(cf_partial(zs, j) >= 0.0 for j in range(len(zs)))

    @settings(max_examples=200)
    @given(st.lists(st.one_of(st.floats(min_value=-0.999, max_value=-1e-3),
                              st.floats(min_value=1e-3, max_value=0.999)),
                    min_size=1, max_size=10), st.data())
    def test_partial_matches_finite_difference(self, zs, data):
        j = data.draw(st.integers(0, len(zs) - 1))
        fd = central_difference(direct_combine, zs, j)
        analytic = cf_partial(zs, j)
        assert math.isclose(analytic, fd, rel_tol=1e-5, abs_tol=1e-9)


def test_vectorised_kernel_matches_scalar():
    rng = np.random.default_rng(7)
    z = rng.uniform(-1, 1, size=(4, 9))
    z[0, 2] = 1.0
    z[1, 3] = -1.0
    z[2, 4] = 0.0
    value, partials = value_and_partials(z)
    for r in range(z.shape[0]):
        assert value[r] == pytest.approx(direct_combine(z[r]), abs=1e-14)
        for j in range(z.shape[1]):
            assert partials[r, j] == pytest.approx(cf_partial(z[r], j), abs=1e-14)
