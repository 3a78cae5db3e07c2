import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chatprogress.analysis import (
    DegenerateVariance,
    LengthMismatch,
    SampleTooSmall,
    cohens_d_independent,
    cohens_d_paired,
    independent_t_test,
    paired_t_test,
    t_p_two_sided,
)
from .oracles import (
    oracle_d_independent,
    oracle_d_paired,
    oracle_p_two_sided,
    oracle_paired_t,
    oracle_pooled_t,
    oracle_welch_t,
)

# Frozen from the textbook-formula oracle (see oracles.py).
WELCH_EXAMPLE_T = -2.1908902300206643
WELCH_EXAMPLE_P = 0.07098765432098766
PAIRED_EXAMPLE_T = 2.6111648393354674
PAIRED_EXAMPLE_P = 0.07960498081790632
POOLED_SD_EXAMPLE = 1.2909944487358056
D_EXAMPLE = 1.5491933384829668


def random_sample(rng, n=None):
    n = n or rng.randrange(3, 12)
    return [rng.uniform(-5, 5) for _ in range(n)]


# -- frozen examples ------------------------------------------------------------

def test_welch_example():
    result = independent_t_test([1, 2, 3, 4], [3, 4, 5, 6])
    assert result.t == pytest.approx(WELCH_EXAMPLE_T, abs=1e-12)
    assert result.df == pytest.approx(6.0, abs=1e-12)
    assert result.p == pytest.approx(WELCH_EXAMPLE_P, abs=1e-9)


def test_paired_example():
    result = paired_t_test([1, 2, 3, 4], [2, 4, 3, 6])
    assert result.t == pytest.approx(PAIRED_EXAMPLE_T, abs=1e-12)
    assert result.df == 3
    assert result.p == pytest.approx(PAIRED_EXAMPLE_P, abs=1e-9)


def test_cohens_d_independent_example():
    d = cohens_d_independent([1, 2, 3, 4], [3, 4, 5, 6])
    assert abs(d) == pytest.approx(D_EXAMPLE, abs=1e-12)
    assert D_EXAMPLE == pytest.approx(2 / POOLED_SD_EXAMPLE, abs=1e-12)


def test_cohens_d_paired_zero_mean_difference():
    assert cohens_d_paired([1, 2], [2, 1]) == pytest.approx(0.0, abs=1e-15)


# -- degenerate and edge cases ----------------------------------------------------

def test_identical_pre_post_degenerate():
    with pytest.raises(DegenerateVariance):
        paired_t_test([1, 2, 3, 4], [1, 2, 3, 4])


def test_constant_difference_degenerate():
    with pytest.raises(DegenerateVariance):
        paired_t_test([1, 2, 3, 4], [2, 3, 4, 5])


def test_equal_samples_give_t_zero_p_one():
    result = independent_t_test([1, 2, 3, 4], [1, 2, 3, 4])
    assert result.t == 0.0
    assert result.p == 1.0


def test_singleton_samples_rejected():
    with pytest.raises(SampleTooSmall):
        independent_t_test([1], [2, 3])
    with pytest.raises(SampleTooSmall):
        paired_t_test([1], [2])
    with pytest.raises(SampleTooSmall):
        cohens_d_independent([1], [2, 3])


def test_length_mismatch_rejected():
    with pytest.raises(LengthMismatch):
        paired_t_test([1, 2, 3], [1, 2])


def test_both_samples_constant_degenerate():
    with pytest.raises(DegenerateVariance):
        independent_t_test([2, 2, 2], [3, 3, 3])
    with pytest.raises(DegenerateVariance):
        cohens_d_independent([2, 2, 2], [3, 3, 3])


def test_pooled_variant_matches_its_oracle():
    rng = random.Random(3)
    for _ in range(100):
        a, b = random_sample(rng), random_sample(rng)
        result = independent_t_test(a, b, equal_variance=True)
        t, df = oracle_pooled_t(a, b)
        assert result.t == pytest.approx(t, abs=1e-9)
        assert result.df == df
        assert result.p == pytest.approx(oracle_p_two_sided(t, df), abs=1e-9)


def test_d_method_variants():
    a, b = [1, 2, 3, 4], [3, 4, 5, 6]
    assert cohens_d_independent(a, b, method="average") == pytest.approx(
        (2.5 - 4.5) / math.sqrt((5 / 3 + 5 / 3) / 2), abs=1e-12
    )
    pre, post = [1, 2, 3, 4], [2, 4, 3, 6]
    d_av = cohens_d_paired(pre, post, method="sd-average")
    diffs_mean = 1.25
    assert d_av == pytest.approx(
        diffs_mean / math.sqrt((5 / 3 + math.sqrt(35 / 12) ** 2) / 2), abs=1e-9
    )


# -- oracle agreement over random samples -------------------------------------------

def test_statistics_match_brute_force_oracle_on_random_samples():
    rng = random.Random(42)
    checked = 0
    while checked < 250:
        pre = random_sample(rng)
        post = [v + rng.uniform(-2, 2) for v in pre]
        a, b = random_sample(rng), random_sample(rng)
        diffs = [y - x for x, y in zip(pre, post)]
        if len(set(diffs)) < 2 or len(set(a)) < 2 or len(set(b)) < 2:
            continue
        paired = paired_t_test(pre, post)
        t_o, df_o = oracle_paired_t(pre, post)
        assert paired.t == pytest.approx(t_o, abs=1e-9)
        assert paired.p == pytest.approx(oracle_p_two_sided(t_o, df_o), abs=1e-9)
        assert cohens_d_paired(pre, post) == pytest.approx(oracle_d_paired(pre, post), abs=1e-9)

        welch = independent_t_test(a, b)
        t_o, df_o = oracle_welch_t(a, b)
        assert welch.t == pytest.approx(t_o, abs=1e-9)
        assert welch.df == pytest.approx(df_o, abs=1e-9)
        assert welch.p == pytest.approx(oracle_p_two_sided(t_o, df_o), abs=1e-9)
        assert cohens_d_independent(a, b) == pytest.approx(oracle_d_independent(a, b), abs=1e-9)
        checked += 1


# -- invariance properties ------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(min_value=-50, max_value=50), min_size=3, max_size=10),
    st.lists(st.integers(min_value=-50, max_value=50), min_size=3, max_size=10),
)
def test_p_value_in_unit_interval_and_symmetric(a, b):
    if len(set(a)) < 2 or len(set(b)) < 2:
        return
    ab = independent_t_test(a, b)
    ba = independent_t_test(b, a)
    assert 0.0 <= ab.p <= 1.0
    assert ab.p == pytest.approx(ba.p, abs=1e-12)
    assert ab.t == pytest.approx(-ba.t, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(min_value=-20, max_value=20), min_size=3, max_size=8),
    st.lists(st.integers(min_value=-20, max_value=20), min_size=3, max_size=8),
    st.floats(min_value=0.1, max_value=10),
    st.floats(min_value=-100, max_value=100),
)
def test_scale_and_shift_invariance(a, b, scale, shift):
    if len(set(a)) < 2 or len(set(b)) < 2:
        return
    base_t = independent_t_test(a, b)
    base_d = cohens_d_independent(a, b)
    scaled_t = independent_t_test([scale * x for x in a], [scale * x for x in b])
    assert math.copysign(1, scaled_t.t) == math.copysign(1, base_t.t) or base_t.t == 0
    assert scaled_t.t == pytest.approx(base_t.t, rel=1e-9)
    shifted_d = cohens_d_independent([x + shift for x in a], [x + shift for x in b])
    assert shifted_d == pytest.approx(base_d, rel=1e-6, abs=1e-9)


def test_t_p_two_sided_extremes():
    assert t_p_two_sided(0.0, 5) == 1.0
    assert t_p_two_sided(100.0, 5) < 1e-8
