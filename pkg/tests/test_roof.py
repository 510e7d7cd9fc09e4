import numpy as np
import pytest

from monolab.errors import CapabilityError, DomainError
from monolab.measures import (
    Cut,
    bipartite,
    concurrence_2q,
    concurrence_assistance_2q,
    evaluate,
    parse_measure,
    pure_objective,
)
from monolab.roof import (
    RoofBudget,
    RoofProblem,
    assisted_evaluate,
    ensemble_from_mixing,
    roof_optimize,
)
from monolab.states import QuantumState, RandomSpec, bell_state, ghz_state, random_state

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
ROOF_TOL = 5e-3


def rank2(i, seed=0):
    return random_state((2, 2), RandomSpec(seed, i, "induced_mixed", 2))


def c_problem(mode="infimum", budget=RoofBudget(), power=1.0):
    return RoofProblem(mode, pure_objective(parse_measure("C"), 2, 2, power), budget)


class TestEnsembles:
    def setup_method(self):
        self.rho = QuantumState.mixed(np.diag([0.5, 0, 0, 0.5]).astype(complex), (2, 2))

    def test_identity_and_hadamard_mixings(self):
        objective = pure_objective(parse_measure("C"), 2, 2)
        averages = []
        for mixing in (np.eye(2), HADAMARD):
            ens = ensemble_from_mixing(self.rho, mixing)
            assert np.allclose(ens.density(), self.rho.density(), atol=1e-12)
            assert ens.weights == pytest.approx([0.5, 0.5])
            averages.append(float(np.dot(ens.weights, objective(ens.states))))
        # product members |00>, |11> on one side, Bell pairs on the other
        assert sorted(averages) == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_members_are_states(self):
        ens = ensemble_from_mixing(self.rho, HADAMARD)
        for p, s in ens.members():
            assert s.is_pure and np.linalg.norm(s.data) == pytest.approx(1.0)

    def test_non_isometric_rejected(self):
        with pytest.raises(DomainError, match="orthonormal"):
            ensemble_from_mixing(self.rho, np.array([[1, 1], [0, 1]]))

    def test_wrong_column_count(self):
        with pytest.raises(DomainError, match="columns"):
            ensemble_from_mixing(self.rho, np.eye(3))


class TestOptimizer:
    def test_matches_wootters(self):
        for i in range(5):
            rho = rank2(i)
            res = roof_optimize(rho, c_problem())
            assert res.value == pytest.approx(concurrence_2q(rho), abs=ROOF_TOL)
            assert np.allclose(res.ensemble.density(), rho.density(), atol=1e-8)

    def test_supremum_matches_lambda_sum(self):
        for i in range(3):
            rho = rank2(i, seed=3)
            res = roof_optimize(rho, c_problem("supremum"))
            assert res.value == pytest.approx(concurrence_assistance_2q(rho), abs=ROOF_TOL)

    def test_never_worse_than_eigen_ensemble(self):
        rho = rank2(9)
        inf = roof_optimize(rho, c_problem())
        sup = roof_optimize(rho, c_problem("supremum"))
        assert inf.value <= inf.eigen_value + 1e-12
        assert sup.value >= sup.eigen_value - 1e-12

    def test_more_restarts_never_hurt(self):
        rho = rank2(4)
        small = roof_optimize(rho, c_problem(budget=RoofBudget(restarts=1, max_iter=150)))
        large = roof_optimize(rho, c_problem(budget=RoofBudget(restarts=3, max_iter=150)))
        assert large.value <= small.value + 1e-15
        assert large.restart_values[0] == small.restart_values[0]

    def test_deterministic(self):
        rho = rank2(2)
        a = roof_optimize(rho, c_problem())
        b = roof_optimize(rho, c_problem())
        assert a.value == b.value and a.restart_values == b.restart_values

    def test_zero_budget_is_capability_error(self):
        with pytest.raises(CapabilityError):
            roof_optimize(rank2(0), c_problem(budget=RoofBudget(restarts=0)))
        with pytest.raises(CapabilityError):
            roof_optimize(rank2(0), c_problem(budget=RoofBudget(max_iter=0)))

    def test_pure_input_short_circuits(self):
        res = roof_optimize(bell_state(), c_problem(budget=RoofBudget(restarts=0)))
        assert res.value == pytest.approx(1.0)

    def test_bad_mode_and_cardinality(self):
        with pytest.raises(DomainError):
            c_problem("median")
        with pytest.raises(DomainError, match="below rank"):
            roof_optimize(rank2(0), c_problem(budget=RoofBudget(cardinality=1)))

    def test_rank_cardinality(self):
        rho = rank2(1)
        res = roof_optimize(rho, c_problem(budget=RoofBudget(cardinality="rank")))
        assert len(res.ensemble) <= 2
        assert res.value == pytest.approx(concurrence_2q(rho), abs=ROOF_TOL)

    def test_convexity(self):
        r1, r2 = rank2(5), rank2(6)
        mix = QuantumState.mixed(0.3 * r1.density() + 0.7 * r2.density(), (2, 2))
        m = parse_measure("~C^2")
        lhs = evaluate(m, mix).value
        rhs = 0.3 * evaluate(m, r1).value + 0.7 * evaluate(m, r2).value
        assert lhs <= rhs + ROOF_TOL


class TestAssisted:
    def test_ghz4_marginal(self):
        ab = bipartite(ghz_state(4), Cut((0,), (1,)))
        assert assisted_evaluate(parse_measure("C"), ab).value == pytest.approx(1.0, abs=ROOF_TOL)
        assert evaluate(parse_measure("a:~C"), ab).value == pytest.approx(1.0, abs=ROOF_TOL)

    def test_summary_fields(self):
        v = evaluate(parse_measure("a:~C"), rank2(0))
        s = v.to_dict()["roof"]
        assert s["mode"] == "supremum" and s["restarts"] == 3
        assert s["value"] >= s["eigen_ensemble_value"] - 1e-12
