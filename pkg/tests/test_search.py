"""パラメータ射影・スイープ・山登り法のテスト"""

import pytest

from models.report import TheoremId
from models.run_config import GridSpec, RunConfig
from models.search import HillClimbSettings, ParameterTarget, SearchParameter, SearchSpace
from services.exceptions import BudgetError, SearchError
from services.experiment_service import ExperimentService
from services.search_service import best_row, build_instance, hill_climb, project, sweep, warm_start


def _space(*parameters, m=1, alpha=0.0, **kwargs):
    return SearchSpace(theorem=TheoremId.THM_MAX, m=m, alpha=alpha, parameters=list(parameters), **kwargs)


def _u(lower, upper, steps=3, slot=0):
    return SearchParameter(target=ParameterTarget.U_EXPONENT, slot=slot, lower=lower, upper=upper, steps=steps)


@pytest.fixture
def service():
    return ExperimentService(RunConfig(grid=GridSpec(dim=1, half_width=1.0, cells_per_axis=[16, 32, 64])))


class TestProjection:

    def test_clamps_to_range(self):
        assert project({"u_exponent[0]": -2.0}, _space(_u(-0.9, 0.5))) == {"u_exponent[0]": -0.9}

    def test_integrability_floor(self):
        # m = 1, α = 0: mq = 1 なので a > -1 + 0.05
        assert project({"u_exponent[0]": -2.0}, _space(_u(-3.0, 0.5))) == {"u_exponent[0]": pytest.approx(-0.95)}

    def test_floor_depends_on_mq(self):
        # m = 1, α = 0.5: mq = 2
        space = _space(_u(-3.0, 0.5), alpha=0.5)
        assert project({"u_exponent[0]": -1.0}, space)["u_exponent[0]"] == pytest.approx(-0.475)

    def test_empty_feasible_set(self):
        with pytest.raises(SearchError):
            project({"u_exponent[0]": -2.5}, _space(_u(-3.0, -2.0)))

    def test_indicator_width(self):
        space = _space(
            SearchParameter(target=ParameterTarget.F_LOWER, lower=-1.0, upper=1.0),
            SearchParameter(target=ParameterTarget.F_UPPER, lower=-1.0, upper=1.0),
        )
        out = project({"f_lower[0]": 0.3, "f_upper[0]": 0.31}, space)
        assert out["f_upper[0]"] - out["f_lower[0]"] == pytest.approx(0.05)

    def test_indicator_width_against_upper_edge(self):
        space = _space(
            SearchParameter(target=ParameterTarget.F_LOWER, lower=-1.0, upper=1.0),
            SearchParameter(target=ParameterTarget.F_UPPER, lower=-1.0, upper=1.0),
        )
        out = project({"f_lower[0]": 0.99, "f_upper[0]": 0.995}, space)
        assert out["f_upper[0]"] == 1.0
        assert out["f_lower[0]"] == pytest.approx(0.95)

    @pytest.mark.parametrize("params", [
        {"u_exponent[0]": -5.0, "v_exponent": 3.0, "f_lower[0]": 0.2, "f_upper[0]": 0.1},
        {"u_exponent[0]": 0.1, "v_exponent": -0.2, "f_lower[0]": -0.5, "f_upper[0]": 0.5},
    ])
    def test_idempotent(self, params):
        space = _space(
            _u(-2.0, 1.0),
            SearchParameter(target=ParameterTarget.V_EXPONENT, lower=-1.0, upper=1.0),
            SearchParameter(target=ParameterTarget.F_LOWER, lower=-1.0, upper=1.0),
            SearchParameter(target=ParameterTarget.F_UPPER, lower=-1.0, upper=1.0),
        )
        once = project(params, space)
        assert project(once, space) == once

    def test_slot_must_exist(self):
        with pytest.raises(ValueError):
            _space(_u(-0.5, 0.5, slot=1))

    def test_build_instance(self):
        space = _space(_u(-0.5, 0.5), m=2, alpha=1.0)
        instance = build_instance(space, {"u_exponent[0]": -0.25}, 1, "point")
        assert instance.u[0].exponent == -0.25 and instance.u[1].exponent == 0.0
        assert instance.functions[0].box.lower == [-0.5]
        assert instance.alpha == 1.0


class TestSweep:

    def test_rows_follow_the_grid(self, service):
        space = _space(_u(-1.0, 0.0), alpha=0.5)
        rows = sweep(service, space)
        assert len(rows) == 3
        assert [r.params["u_exponent[0]"] for r in rows] == [pytest.approx(-0.475), pytest.approx(-0.475), 0.0]
        assert all(len(r.constants) == 3 for r in rows)
        assert rows[2].stable

    def test_budget(self, service):
        space = _space(
            _u(-0.5, 0.5),
            SearchParameter(target=ParameterTarget.V_EXPONENT, lower=-0.5, upper=0.5),
            budget=5,
        )
        with pytest.raises(BudgetError) as excinfo:
            sweep(service, space)
        assert excinfo.value.required == 9
        assert excinfo.value.budget == 5

    def test_best_row_ignores_unstable(self, service):
        rows = sweep(service, _space(_u(-0.5, 0.5)))
        best = best_row(rows)
        assert best is not None and best.stable
        assert all(best.objective >= r.objective for r in rows if r.stable)


class TestHillClimb:

    def test_deterministic(self, service):
        space = _space(_u(-0.4, 0.4), alpha=0.5)
        settings = HillClimbSettings(max_steps=4)
        first = hill_climb(service, space, settings, seed=7)
        second = hill_climb(service, space, settings, seed=7)
        assert [r.params for r in first.history] == [r.params for r in second.history]
        assert [r.objective for r in first.history] == [r.objective for r in second.history]
        assert len(first.history) == 5

    def test_best_is_monotone(self, service):
        space = _space(_u(-0.4, 0.4), alpha=0.5)
        state = hill_climb(service, space, HillClimbSettings(max_steps=6), seed=1)
        accepted = [r.objective for r in state.history if r.accepted]
        assert accepted == sorted(accepted)
        assert state.best_objective == max(r.objective for r in state.history if r.stable)

    def test_flat_objective(self, service):
        """経験定数は f の高さによらないので最良値は初期値のまま"""
        space = _space(SearchParameter(target=ParameterTarget.F_HEIGHT, lower=0.5, upper=4.0))
        state = hill_climb(service, space, HillClimbSettings(max_steps=4), seed=3)
        assert state.best_objective == pytest.approx(state.history[0].objective, rel=1e-9)

    def test_initial_outside_constraints(self, service):
        space = _space(_u(-0.4, 0.4))
        with pytest.raises(SearchError):
            hill_climb(service, space, HillClimbSettings(initial={"u_exponent[0]": 0.9}), seed=0)

    def test_unknown_initial_parameter(self, service):
        space = _space(_u(-0.4, 0.4))
        with pytest.raises(SearchError):
            hill_climb(service, space, HillClimbSettings(initial={"v_exponent": 0.1}), seed=0)

    def test_budget(self, service):
        space = _space(_u(-0.4, 0.4), budget=3)
        with pytest.raises(BudgetError):
            hill_climb(service, space, HillClimbSettings(max_steps=5), seed=0)

    def test_warm_start_beats_sweep(self, service):
        space = _space(_u(-0.4, 0.4), alpha=0.5)
        settings = HillClimbSettings(max_steps=3)
        rows = sweep(service, space)
        start = warm_start(service, space, settings)
        state = hill_climb(service, space, settings, seed=0, initial=start)
        assert all(state.best_objective >= r.objective for r in rows if r.stable)
