import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monolab.errors import CapabilityError, DomainError
from monolab.measures import (
    Cut,
    MeasureSpec,
    bipartite,
    concurrence_2q,
    concurrence_assistance_2q,
    concurrence_pure,
    entropy_pure,
    eof_2q,
    eof_from_concurrence,
    evaluate,
    is_closed_form,
    negativity,
    parse_cut,
    parse_measure,
    wootters_lambdas,
)
from monolab.roof import RoofBudget
from monolab.states import (
    QuantumState,
    RandomSpec,
    bell_state,
    ghz_state,
    haar_unitary,
    local_unitary,
    random_state,
    rng_for,
    w_state,
    werner_state,
)

W3 = w_state(3)
CUT_A_BC = Cut((0,), (1, 2))


class TestParse:
    @pytest.mark.parametrize("text,kind,param,exp,assisted,tilde", [
        ("C", "concurrence", None, 1.0, False, False),
        ("C^2", "concurrence", None, 2.0, False, False),
        ("tangle", "tangle", None, 1.0, False, False),
        ("a:C^2", "concurrence", None, 2.0, True, False),
        ("~a:N", "negativity", None, 1.0, True, True),
        ("a:~Ef^sqrt2", "eof", None, math.sqrt(2), True, True),
        ("renyi:2", "renyi", 2.0, 1.0, False, False),
        ("tsallis:0.5^1.5", "tsallis", 0.5, 1.5, False, False),
        ("Ncr", "convex_roof_negativity", None, 1.0, False, False),
    ])
    def test_fields(self, text, kind, param, exp, assisted, tilde):
        m = parse_measure(text)
        assert (m.kind, m.param, m.assisted, m.tilde) == (kind, param, assisted, tilde)
        assert m.exponent == pytest.approx(exp)

    @pytest.mark.parametrize("text", ["a:~C^2", "renyi:2", "N", "Ef^0.5", "~tsallis:3"])
    def test_canonical_round_trip(self, text):
        assert parse_measure(text).text == text
        assert parse_measure(parse_measure(text).text) == parse_measure(text)

    @pytest.mark.parametrize("text,token", [("C^", "C^"), ("Q", "Q"), ("C^-1", "C^-1")])
    def test_bad_token_named(self, text, token):
        with pytest.raises(DomainError, match=re.escape(repr(token))):
            parse_measure(text)

    def test_exponent_must_be_positive(self):
        with pytest.raises(DomainError, match="positive"):
            MeasureSpec("concurrence", exponent=0.0)

    def test_renyi_needs_parameter(self):
        with pytest.raises(DomainError):
            parse_measure("renyi")

    def test_cut_parse(self):
        assert parse_cut("0|1,2") == Cut((0,), (1, 2))
        with pytest.raises(DomainError):
            parse_cut("0,1")
        with pytest.raises(DomainError):
            parse_cut("0|0")


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(["C", "tangle", "N", "Ncr", "Ef", "renyi:2", "tsallis:0.5"]),
       exp=st.sampled_from([1.0, 0.5, 2.0, 1.25]), assisted=st.booleans(), tilde=st.booleans())
def test_text_form_round_trips(kind, exp, assisted, tilde):
    m = parse_measure(kind).with_exponent(exp)
    m = MeasureSpec(m.kind, m.param, m.exponent, assisted, tilde)
    assert parse_measure(m.text) == m


class TestPureStates:
    def test_w_state_values(self):
        assert concurrence_pure(W3, CUT_A_BC) == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-12)
        assert evaluate(parse_measure("C^2"), W3, CUT_A_BC).value == pytest.approx(8 / 9, abs=1e-12)

    def test_ghz_one_vs_rest(self):
        g = ghz_state(3)
        assert concurrence_pure(g, CUT_A_BC) == pytest.approx(1.0)
        assert entropy_pure(g, CUT_A_BC) == pytest.approx(1.0)

    def test_bell_values(self):
        b = bell_state()
        assert negativity(b) == pytest.approx(1.0)
        assert entropy_pure(b, family="tsallis", param=2) == pytest.approx(0.5)
        assert entropy_pure(b, family="renyi", param=2) == pytest.approx(1.0)
        assert entropy_pure(b, family="renyi", param=1) == pytest.approx(1.0)

    def test_product_state_is_zero(self):
        s = QuantumState.pure(np.kron([1, 0], [0.6, 0.8]), (2, 2))
        for text in ("C", "N", "Ef", "renyi:2", "tsallis:3"):
            assert evaluate(parse_measure(text), s).value == pytest.approx(0.0, abs=1e-12)

    def test_negativity_matches_trace_norm(self):
        s = random_state((2, 3), RandomSpec(5, 0))
        mixed = QuantumState.mixed(s.density(), s.dims)
        assert negativity(s) == pytest.approx(negativity(mixed), abs=1e-10)

    def test_pure_required(self):
        with pytest.raises(DomainError):
            concurrence_pure(werner_state(0.5))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), idx=st.integers(0, 10_000))
def test_negativity_equals_concurrence_on_two_qubit_pure(seed, idx):
    s = random_state((2, 2), RandomSpec(seed, idx))
    assert negativity(s) == pytest.approx(concurrence_pure(s), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_local_unitary_invariance(seed):
    s = random_state((2, 2, 2), RandomSpec(seed, 0))
    rng = rng_for(seed, 0, 7)
    t = local_unitary(s, [haar_unitary(2, rng) for _ in range(3)])
    for text in ("C", "N", "Ef", "renyi:2"):
        m = parse_measure(text)
        assert evaluate(m, t, CUT_A_BC).value == pytest.approx(evaluate(m, s, CUT_A_BC).value, abs=1e-9)
    ab_s, ab_t = bipartite(s, Cut((0,), (1,))), bipartite(t, Cut((0,), (1,)))
    assert concurrence_2q(ab_t) == pytest.approx(concurrence_2q(ab_s), abs=1e-9)


class TestTwoQubitClosedForms:
    def test_w_marginal(self):
        ab = bipartite(W3, Cut((0,), (1,)))
        assert concurrence_2q(ab) == pytest.approx(2 / 3, abs=1e-12)
        assert concurrence_assistance_2q(ab) == pytest.approx(2 / 3, abs=1e-12)

    @pytest.mark.parametrize("p,c", [(0.9, 0.85), (1.0, 1.0), (1 / 3, 0.0), (0.2, 0.0), (0.6, 0.4)])
    def test_werner(self, p, c):
        assert concurrence_2q(werner_state(p)) == pytest.approx(c, abs=1e-10)

    def test_werner_monotone(self):
        vals = [concurrence_2q(werner_state(p)) for p in np.linspace(0, 1, 21)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_eof_of_two_thirds(self):
        # h((1 + sqrt(5)/3)/2), frozen
        assert eof_from_concurrence(2 / 3) == pytest.approx(0.5500477595827, abs=1e-10)
        assert eof_2q(bipartite(W3, Cut((0,), (1,)))) == pytest.approx(0.5500477595827, abs=1e-10)

    def test_ghz_marginal_lambdas(self):
        ab = bipartite(ghz_state(4), Cut((0,), (1,)))
        assert wootters_lambdas(ab.density()) == pytest.approx([0.5, 0.5, 0, 0], abs=1e-10)
        assert concurrence_2q(ab) == 0.0

    def test_wrong_dims(self):
        with pytest.raises(DomainError, match="2x2"):
            concurrence_2q(random_state((2, 3), RandomSpec(0, 0, "induced_mixed", 2)))

    def test_mixed_negativity_of_werner(self):
        # N = C on two qubits only for pure states; Werner gives max(0, (3p-1)/2) too
        assert negativity(werner_state(0.9)) == pytest.approx(0.85, abs=1e-10)


class TestDispatch:
    def test_methods(self):
        ab = bipartite(W3, Cut((0,), (1,)))
        assert evaluate(parse_measure("C"), ab).method == "closed_form"
        assert evaluate(parse_measure("C"), W3, CUT_A_BC).method == "pure_state_formula"
        assert evaluate(parse_measure("a:C"), ab).method == "closed_form"

    def test_exponent_applied_after(self):
        ab = bipartite(W3, Cut((0,), (1,)))
        assert evaluate(parse_measure("C^2"), ab).value == pytest.approx(4 / 9)
        assert evaluate(parse_measure("tangle"), ab).value == pytest.approx(4 / 9)

    def test_roof_path_with_zero_budget(self):
        ab = bipartite(W3, Cut((0,), (1,)))
        with pytest.raises(CapabilityError, match="convex-roof"):
            evaluate(parse_measure("renyi:2"), ab, roof=RoofBudget(restarts=0))

    def test_roof_path_matches_closed_form(self):
        ab = bipartite(W3, Cut((0,), (1,)))
        v = evaluate(parse_measure("~C"), ab)
        assert v.method == "convex_roof_numeric"
        assert v.value == pytest.approx(2 / 3, abs=5e-3)

    def test_cut_required_for_multipartite(self):
        with pytest.raises(DomainError, match="cut"):
            evaluate(parse_measure("C"), W3)

    def test_is_closed_form(self):
        assert is_closed_form(parse_measure("C"), (2, 2), False)
        assert is_closed_form(parse_measure("N"), (2, 4), False)
        assert not is_closed_form(parse_measure("C"), (2, 4), False)
        assert not is_closed_form(parse_measure("~C"), (2, 2), False)
        assert is_closed_form(parse_measure("renyi:2"), (2, 4), True)
