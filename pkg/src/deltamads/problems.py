"""Closed-form benchmark problems for the comparison harness.

Each problem ships its space, objective, documented optimum (value and one
optimizer), and a pair of default starting points: an advantageous one close
to the basin of the optimum and a disadvantageous one far from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .space import Kind, Point, SearchSpace, VariableSpec

# Styblinski-Tang per-dimension minimizer, Newton-refined
_ST_X = -2.903534027771177
_ST_MIN = -39.16616570377141


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    space: SearchSpace
    objective: Callable[[Point], float]
    optimum: float
    optimizer: Point
    x0_good: Point       # advantageous initialization
    x0_bad: Point        # disadvantageous initialization
    multimodal: bool = False


def _box(n: int, lo: float, hi: float) -> SearchSpace:
    return SearchSpace(tuple(
        VariableSpec(f"x{i}", Kind.REAL, lo, hi) for i in range(n)
    ))


def _sphere(n: int) -> BenchmarkProblem:
    def f(p: Point) -> float:
        return sum(v * v for v in p.values)

    good = Point(tuple(0.8 if i % 2 == 0 else -0.6 for i in range(n)))
    bad = Point(tuple(4.0 if i % 2 == 0 else -4.5 for i in range(n)))
    return BenchmarkProblem(
        name=f"sphere{n}",
        space=_box(n, -5.0, 5.0),
        objective=f,
        optimum=0.0,
        optimizer=Point((0.0,) * n),
        x0_good=good,
        x0_bad=bad,
    )


def _rosenbrock(n: int) -> BenchmarkProblem:
    def f(p: Point) -> float:
        x = p.values
        return sum(
            100.0 * (x[i + 1] - x[i] ** 2) ** 2 + (1.0 - x[i]) ** 2
            for i in range(n - 1)
        )

    return BenchmarkProblem(
        name=f"rosen{n}",
        space=_box(n, -2.048, 2.048),
        objective=f,
        optimum=0.0,
        optimizer=Point((1.0,) * n),
        x0_good=Point((0.8,) * n),
        x0_bad=Point(tuple(-1.2 if i % 2 == 0 else 1.5 for i in range(n))),
    )


def _styblinski(n: int) -> BenchmarkProblem:
    def f(p: Point) -> float:
        return 0.5 * sum(v**4 - 16.0 * v * v + 5.0 * v for v in p.values)

    return BenchmarkProblem(
        name=f"styblinski{n}",
        space=_box(n, -5.0, 5.0),
        objective=f,
        optimum=n * _ST_MIN,
        optimizer=Point((_ST_X,) * n),
        x0_good=Point((-2.0,) * n),
        x0_bad=Point((4.0,) * n),
        multimodal=True,
    )


def _branin_fn(x1: float, x2: float) -> float:
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    t = 1.0 / (8.0 * math.pi)
    return (x2 - b * x1 * x1 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * math.cos(x1) + 10.0


def _branin() -> BenchmarkProblem:
    def f(p: Point) -> float:
        return _branin_fn(p.values[0], p.values[1])

    return BenchmarkProblem(
        name="branin2",
        space=SearchSpace((
            VariableSpec("x1", Kind.REAL, -5.0, 10.0),
            VariableSpec("x2", Kind.REAL, 0.0, 15.0),
        )),
        objective=f,
        optimum=0.39788735772973816,
        optimizer=Point((math.pi, 2.275)),
        x0_good=Point((2.5, 5.0)),
        x0_bad=Point((-4.0, 14.0)),
        multimodal=True,
    )


_CAT_OFFSETS = {"base": 0.0, "shift1": 1.0, "shift2": 2.0}


def _categorical_branin() -> BenchmarkProblem:
    """A categorical variable selects among three vertically shifted Branin
    surfaces; an integer variable discretizes the x1 axis in steps of 0.5.

    With x2 adapted per k the landscape in k is a cosine with troughs near
    k = 4, 16, 29; lattice alignment makes k = 29 the global one.  Crossing
    troughs needs non-local integer moves, so both default starts sit in the
    global trough's basin (k > 22); the disadvantageous one still has the
    wrong category and a poor continuous value.
    """

    def f(p: Point) -> float:
        surface, k, x2 = p.values
        x1 = -5.0 + 0.5 * k
        return _branin_fn(x1, x2) + _CAT_OFFSETS[surface]

    return BenchmarkProblem(
        name="branin-cat",
        space=SearchSpace((
            VariableSpec("surface", Kind.CATEGORICAL,
                         categories=("base", "shift1", "shift2")),
            VariableSpec("k", Kind.INTEGER, 0, 30),
            VariableSpec("x2", Kind.REAL, 0.0, 15.0),
        )),
        objective=f,
        # frozen from a grid + closed-form inner minimization over x2
        optimum=0.4250406324668585,
        optimizer=Point(("base", 29, 2.539182356514196)),
        x0_good=Point(("base", 27, 4.0)),
        x0_bad=Point(("shift2", 27, 10.0)),
        multimodal=True,
    )


_ACT_PENALTY = {"ReLU": 0.0, "Tanh": 0.1, "Sigmoid": 0.3}
_OPT_PENALTY = {"Adam": 0.0, "RMSProp": 0.1, "SGD": 0.2, "Adagrad": 0.3}
_HP_TARGETS = (0.5, 0.9, 0.25, 0.125)


def _toy_hpo() -> BenchmarkProblem:
    """The autoencoder hyperparameter space with a synthetic separable
    objective; exercises all three variable kinds at once."""
    from .space import builtin_vae_space

    space = builtin_vae_space(32)

    def f(p: Point) -> float:
        (layers, latent, batch, act, dropout, opt,
         h1, h2, h3, h4, alpha) = p.values
        return (
            ((layers - 3) / 49.0) ** 2
            + ((latent - 8) / 30.0) ** 2
            + ((batch - 64) / 502.0) ** 2
            + _ACT_PENALTY[act]
            + (dropout - 0.1) ** 2
            + _OPT_PENALTY[opt]
            + sum((h - t) ** 2 for h, t in zip((h1, h2, h3, h4), _HP_TARGETS))
            + (alpha - 0.9) ** 2
        )

    optimizer = Point((3, 8, 64, "ReLU", 0.1, "Adam", *_HP_TARGETS, 0.9))
    return BenchmarkProblem(
        name="toy-hpo",
        space=space,
        objective=f,
        optimum=0.0,
        optimizer=optimizer,
        x0_good=Point((5, 10, 80, "ReLU", 0.2, "Adam", 0.4, 0.8, 0.3, 0.2, 0.85)),
        x0_bad=Point((50, 1, 512, "Sigmoid", 0.9, "Adagrad", 0.0, 0.0, 1.0, 1.0, 0.5)),
    )


def builtin_suite() -> list[BenchmarkProblem]:
    return [
        _sphere(2),
        _sphere(6),
        _rosenbrock(2),
        _rosenbrock(4),
        _styblinski(4),
        _branin(),
        _categorical_branin(),
        _toy_hpo(),
    ]


def get_problem(name: str) -> BenchmarkProblem:
    for prob in builtin_suite():
        if prob.name == name:
            return prob
    raise KeyError(f"unknown builtin problem {name!r}")
