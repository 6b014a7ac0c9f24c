import math
from fractions import Fraction

import numpy as np
import pytest

from shiftarc.arc import (AdmissibilityViolation, Bernoulli, FileSource, Markov, SftParry,
                          TargetOutOfRange, arc_point, arc_sweep, bisect_entropy,
                          parse_alpha_policy, parse_source, parry_measure,
                          product_genericity_diagnostic, sample_generic, select_alpha)
from shiftarc.entropy import entropy_estimate
from shiftarc.families import SFT, Spacing
from shiftarc.sequence import FixedFraction, Window, write_window

F = Fraction
ALPHA = FixedFraction.golden()


@pytest.fixture(scope="module")
def small_coin():
    return sample_generic(Bernoulli((F(1, 2), F(1, 2))), 2 * 10 ** 5, 3)


# --------------------------------------------------------------------------
# sampling


def test_deterministic_source():
    assert sample_generic(Bernoulli((0, 1)), 4, 0).to_string() == "1111"


def test_fair_coin_frequency(fair_coin):
    assert abs(fair_coin.symbols.mean() - 0.5) <= 0.002


def test_same_seed_same_window():
    src = Bernoulli((F(1, 3), F(2, 3)))
    assert sample_generic(src, 1000, 99) == sample_generic(src, 1000, 99)
    assert sample_generic(src, 1000, 99) != sample_generic(src, 1000, 100)


def test_markov_frequencies_match_stationary_law():
    P = [[F(3, 4), F(1, 4)], [F(1, 2), F(1, 2)]]
    w = sample_generic(Markov(P), 10 ** 6, 5)
    # stationary law (2/3, 1/3); transition 1 -> 1 at rate 1/2
    assert abs(w.symbols.mean() - 1 / 3) <= 0.003
    s = w.symbols.astype(np.int64)
    ones = s[:-1] == 1
    assert abs(s[1:][ones].mean() - 0.5) <= 0.005


def test_markov_rejects_non_stochastic():
    with pytest.raises(ValueError):
        Markov([[F(1, 2), F(1, 3)], [1, 0]])


def test_parry_examples():
    full = parry_measure([[1, 1], [1, 1]])
    assert full.matrix == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
    assert full.log_perron == pytest.approx(math.log(2), abs=1e-12)
    golden = parry_measure([[1, 1], [1, 0]])
    assert abs(golden.log_perron - 0.4812118250596) <= 1e-6
    assert all(sum(row) == 1 for row in golden.matrix)
    with pytest.raises(ValueError, match="non-primitive"):
        parry_measure([[0, 1], [1, 0]])


def test_parry_sample_respects_forbidden_word():
    w = sample_generic(SftParry(((1, 1), (1, 0))), 10 ** 5, 1)
    assert "11" not in w.to_string()
    # Parry law of the golden shift puts weight 1/(1 + phi^2) on symbol 1
    phi = (1 + math.sqrt(5)) / 2
    assert abs(w.symbols.mean() - 1 / (1 + phi ** 2)) <= 0.01


def test_parse_source_forms(tmp_path):
    assert parse_source("bernoulli:0.5") == Bernoulli((F(1, 2), F(1, 2)))
    assert parse_source("bernoulli:1/5,4/5").probs == (F(1, 5), F(4, 5))
    assert parse_source("parry:golden") == SftParry(((1, 1), (1, 0)))
    assert parse_source("markov:[[0.5,0.5],[1,0]]").n == 2
    path = tmp_path / "w.txt"
    write_window(path, Window.from_string("0110"))
    assert sample_generic(parse_source(f"file:{path}"), 3, 0).to_string() == "011"
    with pytest.raises(ValueError):
        parse_source("gauss:1")
    assert isinstance(parse_source("file:x"), FileSource)


# --------------------------------------------------------------------------
# rotation number


def test_default_alpha():
    assert select_alpha() == ALPHA
    assert str(float(select_alpha()))[:12] == "0.6180339887"


@pytest.mark.parametrize("value", ["1/2", "0", "1", "0.25", "3/7"])
def test_low_denominator_rejected(value):
    with pytest.raises(ValueError):
        select_alpha("explicit", value)


def test_explicit_irrational():
    a = select_alpha("explicit", "sqrt(2) - 1")
    assert abs(float(a) - (math.sqrt(2) - 1)) < 1e-15


def test_randomized_alpha_is_deterministic():
    assert select_alpha("randomized", seed=7) == select_alpha("randomized", seed=7)
    assert select_alpha("randomized", seed=7) != select_alpha("randomized", seed=8)
    assert parse_alpha_policy("random:7") == select_alpha("randomized", seed=7)


def test_alpha_hex_policy():
    assert parse_alpha_policy("hex:" + ALPHA.hex()) == ALPHA


# --------------------------------------------------------------------------
# the arc


def test_arc_endpoints(small_coin):
    assert not arc_point(small_coin, ALPHA, 0).symbols.any()
    assert arc_point(small_coin, ALPHA, 1) == small_coin


def test_sweep_endpoints(small_coin):
    first, last = arc_sweep(small_coin, ALPHA, [0, 1], k=4)
    assert set(first.entropy_profile.block_entropies) == {0.0}
    assert last.entropy_profile == entropy_estimate(small_coin, 4)
    assert first.dbar_to_zero == 0 and last.dbar_to_x == 0


def test_sweep_rejects_unsorted_grid(small_coin):
    with pytest.raises(ValueError):
        arc_sweep(small_coin, ALPHA, [F(1, 2), 0], k=2)


def test_sweep_spot_checks_hereditary_family():
    x = sample_generic(SftParry(((1, 1), (1, 0))), 10 ** 4, 2)
    samples = arc_sweep(x, ALPHA, [0, F(1, 2), 1], k=2, spec=SFT(2, ((1, 1),)))
    assert len(samples) == 3


def test_sweep_reports_admissibility_violation():
    x = sample_generic(Bernoulli((F(1, 2), F(1, 2))), 10 ** 4, 2)
    with pytest.raises(AdmissibilityViolation):
        arc_sweep(x, ALPHA, [1], k=2, spec=Spacing(rule="evens"))


def test_fair_sweep_shape(fair_sweep):
    samples, _ = fair_sweep
    assert len(samples) == 21
    for s in samples:
        # a fair coin masked at density beta has half as many ones
        assert abs(float(s.dbar_to_zero) - float(s.beta) / 2) <= 0.005
        assert s.dbar_to_x == s.dbar_to_x  # exact Fractions
        assert isinstance(s.dbar_to_x, Fraction)


def test_bisect_target_zero(small_coin):
    res = bisect_entropy(small_coin, ALPHA, 0.0, 0.01, k=4)
    assert (res.beta_star, res.achieved, res.iterations, res.converged) == (0, 0.0, 0, True)


def test_bisect_target_top(small_coin):
    top = entropy_estimate(small_coin, 4).chosen_estimate
    res = bisect_entropy(small_coin, ALPHA, top, 0.01, k=4)
    assert res.converged and abs(res.achieved - top) <= 0.01
    assert res.beta_star >= F(9, 10)


def test_bisect_refines_between_grid_points(small_coin):
    res = bisect_entropy(small_coin, ALPHA, 0.35, 0.001, k=4)
    assert res.converged and res.iterations >= 1
    assert abs(res.achieved - 0.35) <= 0.001


def test_bisect_out_of_range(small_coin):
    with pytest.raises(TargetOutOfRange):
        bisect_entropy(small_coin, ALPHA, 0.9, 0.02, k=4)


def test_bisect_reports_non_convergence(small_coin):
    res = bisect_entropy(small_coin, ALPHA, 0.35, 1e-9, max_iter=2, k=4)
    assert not res.converged
    assert res.iterations == 2


def test_product_genericity_degenerate_endpoints(small_coin):
    assert product_genericity_diagnostic(small_coin, ALPHA, 0, 2) == 0
    assert product_genericity_diagnostic(small_coin, ALPHA, 1, 2) == 0


def test_product_genericity_detects_dependence():
    # x equal to its own mask is as dependent as possible
    from shiftarc.sequence import RotationCoding, sturmian_window
    y = sturmian_window(RotationCoding(ALPHA, F(1, 2)), 0, 10 ** 5)
    assert product_genericity_diagnostic(y, ALPHA, F(1, 2), 1) >= F(24, 100)
