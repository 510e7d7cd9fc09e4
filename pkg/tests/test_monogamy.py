import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monolab.errors import BracketError, CapabilityError, DomainError
from monolab.measures import parse_measure
from monolab.monogamy import (
    PowerConfig,
    SamplePool,
    SamplingConfig,
    ScanBudget,
    SplitSpec,
    check_inequality,
    conjecture_scan,
    conjecture_terms,
    default_split,
    estimate_monogamy_power,
    estimate_polygamy_power,
    parse_split,
    polygamy_residual,
    residual,
    theorem2_demo,
)
from monolab.states import RandomSpec, basis_state, ghz_state, random_state, w_state

C = parse_measure("C")
CA = parse_measure("a:C")
W3 = w_state(3)
PRODUCT = basis_state((2, 2, 2), (0, 0, 0))


class TestSplits:
    def test_parse_and_text(self):
        s = parse_split("0|1|2")
        assert s == SplitSpec(0, ((1,), (2,)))
        assert s.text() == "0|1|2"
        assert parse_split("1|0,2").whole.right == (0, 2)

    @pytest.mark.parametrize("text", ["0|0|1", "0|1|1", "0", "a|1"])
    def test_invalid(self, text):
        with pytest.raises(DomainError):
            parse_split(text)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            residual(C, 2.0, W3, parse_split("0|1|3"))


class TestResidual:
    def test_w_state_saturates_ckw(self):
        rep = residual(C, 2.0, W3)
        assert rep.lhs == pytest.approx(8 / 9, abs=1e-12)
        assert rep.rhs_terms == pytest.approx([4 / 9, 4 / 9], abs=1e-12)
        assert abs(rep.residual) <= 1e-9

    def test_w_state_linear(self):
        assert residual(C, 1.0, W3).residual == pytest.approx(2 * math.sqrt(2) / 3 - 4 / 3, abs=1e-12)

    @pytest.mark.parametrize("text", ["C", "N", "Ef", "tangle", "renyi:2"])
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_product_is_zero(self, text, alpha):
        assert residual(parse_measure(text), alpha, PRODUCT).residual == pytest.approx(0.0, abs=1e-12)

    def test_exponent_positive(self):
        with pytest.raises(DomainError):
            residual(C, 0.0, W3)

    def test_ghz_polygamy(self):
        rep = polygamy_residual(CA, 2.0, ghz_state(3))
        assert rep.residual == pytest.approx(-1.0, abs=1e-9)

    def test_polygamy_needs_assisted(self):
        with pytest.raises(DomainError, match="assisted"):
            polygamy_residual(C, 2.0, W3)

    def test_tilde_exponent_inside_roof(self):
        rho = random_state((2, 2, 2), RandomSpec(0, 0, "induced_mixed", 2))
        rep = residual(parse_measure("~C"), 2.0, rho)
        assert rep.roof_backed and rep.exponent == 2.0
        assert rep.residual == pytest.approx(rep.lhs - sum(rep.rhs_terms))

    def test_report_dict(self):
        d = residual(C, 2.0, W3).to_dict()
        assert d["split"] == "0|1|2" and d["measure"] == "C" and "fingerprint" in d["state_ref"]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), a=st.floats(0.5, 3.0), da=st.floats(0.01, 2.0))
def test_guarded_sign_transfer(seed, a, da):
    s = random_state((2, 2, 2), RandomSpec(seed, 0))
    lo, hi = residual(C, a, s), residual(C, a + da, s)
    if lo.lhs ** (1 / a) >= max(lo.rhs_terms) ** (1 / a) and lo.residual >= 0:
        assert hi.residual >= -1e-12


class TestSampling:
    def test_ckw_small_suite(self):
        rep = check_inequality(C, 2.0, SamplingConfig(n_samples=300, adversarial_budget=300))
        assert rep.residual >= -1e-9

    def test_linear_power_violated(self):
        rep = check_inequality(C, 1.0, SamplingConfig(n_samples=200, adversarial_budget=300))
        assert rep.residual <= -0.3

    def test_pool_reuse_across_exponents(self):
        pool = SamplePool(C, SamplingConfig(n_samples=50))
        assert pool.guard_violations == 0
        r2 = pool.residuals(2.0)
        assert r2.shape == (50,) and r2.min() >= -1e-12
        rep = pool.report(int(np.argmin(r2)), 2.0)
        assert rep.state_ref["random_spec"]["master_seed"] == 0

    def test_tilde_mixed_samples_rejected(self):
        with pytest.raises(CapabilityError):
            SamplePool(parse_measure("~C"), SamplingConfig(n_samples=2, mixed_rank=2))

    def test_bad_direction(self):
        with pytest.raises(DomainError):
            check_inequality(C, 2.0, SamplingConfig(n_samples=2), "sideways")

    def test_deterministic_reports(self):
        cfg = SamplingConfig(n_samples=100, adversarial_budget=200)
        a = check_inequality(C, 1.5, cfg).to_dict()
        b = check_inequality(C, 1.5, cfg).to_dict()
        assert a == b

    @pytest.mark.parametrize("bad", [dict(n_samples=0), dict(family="gaussian"),
                                     dict(mixed_rank=2, family="product"), dict(adversarial_budget=-1)])
    def test_config_validation(self, bad):
        with pytest.raises(DomainError):
            SamplingConfig(**bad).validated()


FAST = SamplingConfig(n_samples=500, adversarial_budget=800)


class TestEstimators:
    def test_concurrence_power(self):
        est = estimate_monogamy_power(C, (2, 2, 2), PowerConfig(sampling=FAST))
        assert est.estimate == pytest.approx(2.0, abs=0.05)
        lo, hi = est.bracket
        assert hi - lo <= 0.02
        assert est.to_dict()["label"] == "upper-bound-biased"

    def test_high_start_bracket_error(self):
        with pytest.raises(BracketError) as info:
            estimate_monogamy_power(C, (2, 2, 2), PowerConfig(bracket=(3, 8), sampling=FAST))
        assert info.value.extend == "low"

    def test_monogamy_failing_everywhere(self):
        with pytest.raises(BracketError) as info:
            estimate_monogamy_power(C, (2, 2, 2), PowerConfig(bracket=(0.5, 1.0), sampling=FAST))
        assert info.value.extend == "high"

    def test_product_family_polygamy(self):
        cfg = PowerConfig(sampling=SamplingConfig(n_samples=50, family="product", adversarial_budget=100))
        with pytest.raises(BracketError) as info:
            estimate_polygamy_power(CA, (2, 2, 2), cfg)
        assert info.value.extend == "high"

    def test_estimator_kinds_checked(self):
        with pytest.raises(DomainError):
            estimate_monogamy_power(CA, (2, 2, 2))
        with pytest.raises(DomainError):
            estimate_polygamy_power(C, (2, 2, 2))

    def test_bad_bracket(self):
        with pytest.raises(DomainError):
            estimate_monogamy_power(C, (2, 2, 2), PowerConfig(bracket=(2, 1), sampling=replace(FAST, n_samples=5)))


class TestConjecture:
    def test_terms_on_product(self):
        assert conjecture_terms(C, PRODUCT) == (0.0, 0.0)

    def test_small_scan(self):
        res = conjecture_scan(C, epsilon=1e-3, budget=ScanBudget(restarts=2, evals_per_round=400))
        assert res.best_violation <= 0.05
        if res.witness is not None:
            assert res.witness_gap <= 1e-3

    def test_epsilon_positive(self):
        with pytest.raises(DomainError):
            conjecture_scan(C, epsilon=0.0)

    def test_needs_tripartite_split(self):
        with pytest.raises(DomainError, match="tripartite"):
            conjecture_scan(C, dims=(2, 2, 2, 2), budget=ScanBudget(restarts=1, evals_per_round=10))


class TestGhzCounterexample:
    @pytest.mark.parametrize("text", ["C", "N", "Ef"])
    def test_table(self, text):
        t = theorem2_demo(parse_measure(text), [0.5, 1, 2, 4])
        assert t.violated_everywhere
        for row in t.rows:
            assert row.lhs == pytest.approx(1.0)
            assert row.rhs_terms == [0.0, 0.0, 0.0]
        assert all(t.marginal_ppt.values())

    def test_indicator_reading_at_zero(self):
        z = theorem2_demo(C).zero_power_rows[0]
        assert z["lhs"] == 1.0 and z["rhs_terms"] == [0.0, 0.0, 0.0]
        assert not z["reversed_inequality_holds"]

    def test_assisted_rejected(self):
        with pytest.raises(DomainError):
            theorem2_demo(CA)


def test_default_split():
    assert default_split(4).text() == "0|1|2|3"
