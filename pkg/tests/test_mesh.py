"""Tests for mesh state, poll directions, and the polling operators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deltamads.mesh import (
    BudgetExhausted,
    Mesh,
    extended_poll,
    generate_directions,
    initial_mesh,
    mesh_project_point,
    opportunistic_poll,
    poll_candidates,
    project_to_mesh,
    update_mesh,
)
from deltamads.space import (
    Evaluation,
    Kind,
    Point,
    SearchSpace,
    Step,
    VariableSpec,
    normalize_reals,
)


def cont_space(n=2, lo=-5.0, hi=5.0):
    return SearchSpace(tuple(
        VariableSpec(f"x{i}", Kind.REAL, lo, hi) for i in range(n)
    ))


def mixed_space():
    return SearchSpace((
        VariableSpec("x0", Kind.REAL, 0.0, 1.0),
        VariableSpec("x1", Kind.REAL, 0.0, 1.0),
        VariableSpec("n", Kind.INTEGER, 0, 20),
        VariableSpec("c", Kind.CATEGORICAL, categories=("a", "b")),
    ))


class TestMeshState:
    def test_invariant_enforced(self):
        with pytest.raises(ValueError):
            Mesh(delta_p=0.5, delta_m=0.6, integer_steps=(), anchor=Point((0.0,)))
        with pytest.raises(ValueError):
            Mesh(delta_p=0.5, delta_m=0.25, integer_steps=(0,), anchor=Point((0.0,)))

    def test_initial_mesh_relation(self):
        sp = mixed_space()
        mesh = initial_mesh(sp, Point((0.5, 0.5, 10, "a")), 0.5)
        assert mesh.delta_p == 0.5
        assert mesh.delta_m == 0.25
        assert mesh.integer_steps == (10,)

    def test_update_success_doubles_capped(self):
        sp = cont_space()
        mesh = initial_mesh(sp, Point((0.0, 0.0)), 0.5)
        mesh = update_mesh(mesh, True, sp)
        assert mesh.delta_p == 1.0
        mesh = update_mesh(mesh, True, sp)
        assert mesh.delta_p == 1.0

    def test_update_failure_halves(self):
        sp = cont_space()
        mesh = initial_mesh(sp, Point((0.0, 0.0)), 0.5)
        for k in range(1, 6):
            mesh = update_mesh(mesh, False, sp)
            assert mesh.delta_p == pytest.approx(0.5 * 2.0 ** (-k))
            assert mesh.delta_m == pytest.approx(min(mesh.delta_p, mesh.delta_p**2))

    def test_integer_step_floors_at_one(self):
        sp = mixed_space()
        mesh = initial_mesh(sp, Point((0.5, 0.5, 10, "a")), 0.5)
        for _ in range(12):
            mesh = update_mesh(mesh, False, sp)
        assert mesh.integer_steps == (1,)

    @given(st.lists(st.booleans(), min_size=1, max_size=40))
    def test_alternating_updates_preserve_invariant(self, flags):
        sp = mixed_space()
        mesh = initial_mesh(sp, Point((0.5, 0.5, 10, "a")), 0.5)
        for flag in flags:
            mesh = update_mesh(mesh, flag, sp)
            assert 0 < mesh.delta_m <= mesh.delta_p <= 1
            assert mesh.delta_m == pytest.approx(min(mesh.delta_p, mesh.delta_p**2))


class TestDirections:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_positive_spanning(self, n):
        rng = np.random.default_rng(0)
        dirs = generate_directions(n, seed=7, delta_m=0.0625, delta_p=0.25)
        assert len(dirs) == 2 * n
        for _ in range(200):
            v = rng.standard_normal(n)
            assert max(float(v @ d) for d in dirs) > 0

    def test_plus_minus_pairs(self):
        dirs = generate_directions(3, seed=1, delta_m=0.25, delta_p=0.5)
        for j in range(3):
            assert np.array_equal(dirs[j], -dirs[j + 3])

    def test_max_norm_is_ratio(self):
        delta_m, delta_p = 0.0625, 0.25
        dirs = generate_directions(4, seed=3, delta_m=delta_m, delta_p=delta_p)
        ratio = round(delta_p / delta_m)
        for d in dirs:
            assert np.max(np.abs(d)) == ratio

    def test_deterministic_per_seed(self):
        a = generate_directions(4, seed=9, delta_m=0.25, delta_p=0.5)
        b = generate_directions(4, seed=9, delta_m=0.25, delta_p=0.5)
        c = generate_directions(4, seed=10, delta_m=0.25, delta_p=0.5)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert any(not np.array_equal(x, y) for x, y in zip(a, c))

    def test_zero_dims(self):
        assert generate_directions(0, seed=0, delta_m=0.25, delta_p=0.5) == []


class TestMeshProjection:
    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0),
           st.sampled_from([0.25, 0.0625, 2.0**-8]))
    def test_projection_lands_on_lattice(self, u, anchor, delta_m):
        v = project_to_mesh(u, anchor, delta_m)
        assert 0.0 <= v <= 1.0
        k = (v - anchor) / delta_m
        assert abs(k - round(k)) < 1e-9

    def test_candidates_on_mesh(self):
        sp = mixed_space()
        anchor = Point((0.5, 0.5, 10, "a"))
        mesh = initial_mesh(sp, anchor, 0.25)
        cands = poll_candidates(anchor, mesh, sp, seed=5)
        anchor_u = normalize_reals(anchor, sp)
        for cand in cands:
            u = normalize_reals(cand.point, sp)
            for ui, ai in zip(u, anchor_u):
                k = (ui - ai) / mesh.delta_m
                assert abs(k - round(k)) < 1e-9


class TestPollCandidates:
    def test_counts_by_construction(self):
        sp = mixed_space()
        anchor = Point((0.5, 0.5, 10, "a"))
        mesh = initial_mesh(sp, anchor, 0.25)
        cands = poll_candidates(anchor, mesh, sp, seed=0)
        # up to 2*2 continuous + 2 integer moves, after dedupe
        assert 1 <= len(cands) <= 6
        tags = [c.tag for c in cands]
        assert any(t.startswith("dir") for t in tags)
        assert any(t.startswith("int[") for t in tags)

    def test_incumbent_not_a_candidate(self):
        sp = mixed_space()
        anchor = Point((0.5, 0.5, 10, "a"))
        mesh = initial_mesh(sp, anchor, 0.25)
        for cand in poll_candidates(anchor, mesh, sp, seed=0):
            assert cand.point != anchor

    def test_corner_candidates_clamp_and_dedupe(self):
        sp = cont_space(2, 0.0, 1.0)
        anchor = Point((0.0, 0.0))
        mesh = initial_mesh(sp, anchor, 1.0)
        cands = poll_candidates(anchor, mesh, sp, seed=0)
        for cand in cands:
            assert all(0.0 <= v <= 1.0 for v in cand.point.values)
        keys = [cand.point.values for cand in cands]
        assert len(keys) == len(set(keys))

    def test_integer_moves_skip_noop_at_bounds(self):
        sp = SearchSpace((
            VariableSpec("x", Kind.REAL, 0.0, 1.0),
            VariableSpec("n", Kind.INTEGER, 0, 20),
        ))
        anchor = Point((0.5, 0))
        mesh = initial_mesh(sp, anchor, 0.5)
        moves = [c for c in poll_candidates(anchor, mesh, sp, seed=0)
                 if c.tag.startswith("int[")]
        assert all(c.point.values[1] != 0 for c in moves)
        assert len(moves) == 1  # the downward move is a no-op at the bound


def _make_eval(objective_of):
    counter = {"n": 0}

    def evaluate(point):
        counter["n"] += 1
        return Evaluation(point, objective_of(point), None, Step.POLL, counter["n"])

    return evaluate, counter


class TestOpportunisticPoll:
    def _cands(self, values):
        from deltamads.mesh import PollCandidate
        return [PollCandidate(Point((float(v),)), f"c{i}")
                for i, v in enumerate(values)]

    def test_stops_at_first_improvement(self):
        ev, counter = _make_eval(lambda p: p.values[0])
        out = opportunistic_poll(self._cands([0.5, 0.1, 0.0]), ev, 1.0)
        assert out.success
        assert counter["n"] == 1
        assert out.best.objective == 0.5

    def test_exhausts_without_improvement(self):
        ev, counter = _make_eval(lambda p: p.values[0])
        out = opportunistic_poll(self._cands([3.0, 2.0, 5.0]), ev, 1.0)
        assert not out.success
        assert counter["n"] == 3
        assert out.best.objective == 2.0

    def test_failures_are_non_improving(self):
        calls = {"n": 0}

        def ev(point):
            calls["n"] += 1
            if calls["n"] == 2:
                return Evaluation(point, None, "boom", Step.POLL, calls["n"])
            return Evaluation(point, point.values[0], None, Step.POLL, calls["n"])

        out = opportunistic_poll(self._cands([3.0, 2.0, 0.5]), ev, 1.0)
        assert out.success
        assert calls["n"] == 3

    def test_budget_exhaustion_flagged(self):
        def ev(point):
            raise BudgetExhausted

        out = opportunistic_poll(self._cands([1.0, 2.0]), ev, 0.5)
        assert out.exhausted
        assert not out.success

    def test_parallel_stops_after_improving_batch(self):
        ev, counter = _make_eval(lambda p: p.values[0])
        out = opportunistic_poll(
            self._cands([5.0, 0.1, 9.0, 9.0, 9.0]), ev, 1.0, parallel=2
        )
        assert out.success
        assert counter["n"] == 2  # first batch only

    def test_parallel_matches_serial_best(self):
        values = [4.0, 3.5, 3.0, 2.5, 2.0]
        ev_s, _ = _make_eval(lambda p: p.values[0])
        ev_p, _ = _make_eval(lambda p: p.values[0])
        serial = opportunistic_poll(self._cands(values), ev_s, 1.0)
        par = opportunistic_poll(self._cands(values), ev_p, 1.0, parallel=3)
        assert serial.best.objective == par.best.objective
        assert serial.success == par.success


class TestExtendedPoll:
    def _space(self):
        return SearchSpace((
            VariableSpec("x", Kind.REAL, 0.0, 1.0),
            VariableSpec("c", Kind.CATEGORICAL, categories=("a", "b", "c")),
        ))

    def test_all_neighbors_visited_when_no_improvement(self):
        sp = self._space()
        seen = []

        def ev(point):
            seen.append(point.values[1])
            return Evaluation(point, 10.0, None, Step.EXTENDED_POLL, len(seen))

        inc = Evaluation(Point((0.5, "a")), 1.0, None, Step.POLL, 0)
        mesh = initial_mesh(sp, inc.point, 0.5)
        out = extended_poll(inc, sp, mesh, 0.05, ev, seed=0)
        assert not out.success
        assert sorted(seen) == ["b", "c"]

    def test_strictly_better_neighbor_wins_immediately(self):
        sp = self._space()

        def ev(point):
            val = 0.5 if point.values[1] == "b" else 5.0
            return Evaluation(point, val, None, Step.EXTENDED_POLL, 1)

        inc = Evaluation(Point((0.5, "a")), 1.0, None, Step.POLL, 0)
        mesh = initial_mesh(sp, inc.point, 0.5)
        out = extended_poll(inc, sp, mesh, 0.05, ev, seed=0)
        assert out.success
        assert out.best.point.values[1] == "b"

    def test_close_neighbor_triggers_descent(self):
        sp = self._space()
        calls = []

        def ev(point):
            calls.append(point)
            # neighbor "b" at the same x is within the trigger; moving x
            # from it improves
            x, c = point.values
            val = 1.04 if (c == "b" and x == 0.5) else (0.2 if c == "b" else 5.0)
            return Evaluation(point, val, None, Step.EXTENDED_POLL, len(calls))

        inc = Evaluation(Point((0.5, "a")), 1.0, None, Step.POLL, 0)
        mesh = initial_mesh(sp, inc.point, 0.5)
        out = extended_poll(inc, sp, mesh, 0.05, ev, seed=0)
        assert out.success
        assert out.best.objective == 0.2

    def test_far_neighbor_gets_no_descent(self):
        sp = self._space()
        calls = []

        def ev(point):
            calls.append(point)
            return Evaluation(point, 100.0, None, Step.EXTENDED_POLL, len(calls))

        inc = Evaluation(Point((0.5, "a")), 1.0, None, Step.POLL, 0)
        mesh = initial_mesh(sp, inc.point, 0.5)
        extended_poll(inc, sp, mesh, 0.05, ev, seed=0)
        assert len(calls) == 2  # neighbors only, no continuous rounds

    def test_no_categoricals_is_noop(self):
        sp = cont_space(2)
        inc = Evaluation(Point((0.0, 0.0)), 1.0, None, Step.POLL, 0)
        mesh = initial_mesh(sp, inc.point, 0.5)
        out = extended_poll(inc, sp, mesh, 0.05, lambda p: None, seed=0)
        assert out.best is None and not out.success
