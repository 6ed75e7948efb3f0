"""Search-space definitions, mixed-variable points, and the evaluation cache.

A :class:`SearchSpace` is an ordered list of typed variables (real, integer,
categorical).  Points are plain value tuples in variable order.  Canonical
keys make point identity deterministic across mesh projections: reals are
compared after affine normalization to [0, 1] and rounding to 12 decimal
digits, integers and category labels exactly.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

Value = float | int | str

#: decimal digits kept when canonicalizing normalized real coordinates
CANONICAL_DIGITS = 12


class SpaceError(ValueError):
    """Invalid space definition or malformed space JSON."""


class StructuralError(ValueError):
    """Point does not structurally match its space (arity or kind)."""


class Kind(str, Enum):
    REAL = "real"
    INTEGER = "integer"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    kind: Kind
    lower: float | None = None
    upper: float | None = None
    categories: tuple[str, ...] | None = None
    neighbors: dict[str, frozenset[str]] | None = None

    def __post_init__(self):
        if self.kind is Kind.REAL:
            if self.lower is None or self.upper is None or not self.lower < self.upper:
                raise SpaceError(f"{self.name}: real variable needs lower < upper")
        elif self.kind is Kind.INTEGER:
            if self.lower is None or self.upper is None:
                raise SpaceError(f"{self.name}: integer variable needs bounds")
            if int(self.lower) != self.lower or int(self.upper) != self.upper:
                raise SpaceError(f"{self.name}: integer bounds must be integral")
            if not self.lower <= self.upper:
                raise SpaceError(f"{self.name}: integer variable needs lower <= upper")
        elif self.kind is Kind.CATEGORICAL:
            if not self.categories:
                raise SpaceError(f"{self.name}: categorical variable needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise SpaceError(f"{self.name}: duplicate categories")
            object.__setattr__(self, "categories", tuple(self.categories))
            nbrs = self.neighbors
            if nbrs is None:
                nbrs = {
                    c: frozenset(o for o in self.categories if o != c)
                    for c in self.categories
                }
            else:
                nbrs = {c: frozenset(v) for c, v in nbrs.items()}
                for label, ns in nbrs.items():
                    if label not in self.categories:
                        raise SpaceError(f"{self.name}: unknown label {label!r}")
                    if label in ns:
                        raise SpaceError(f"{self.name}: {label!r} neighbors itself")
                    if not ns <= set(self.categories):
                        raise SpaceError(f"{self.name}: neighbor outside categories")
                for c in self.categories:
                    nbrs.setdefault(
                        c, frozenset(o for o in self.categories if o != c)
                    )
            object.__setattr__(self, "neighbors", nbrs)
        else:  # pragma: no cover
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")

    @property
    def span(self) -> float:
        return float(self.upper - self.lower)


@dataclass(frozen=True)
class SearchSpace:
    variables: tuple[VariableSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SpaceError("duplicate variable names")
        if not self.variables:
            raise SpaceError("empty space")

    @cached_property
    def real_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.variables) if v.kind is Kind.REAL)

    @cached_property
    def integer_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.variables) if v.kind is Kind.INTEGER)

    @cached_property
    def categorical_indices(self) -> tuple[int, ...]:
        return tuple(
            i for i, v in enumerate(self.variables) if v.kind is Kind.CATEGORICAL
        )

    @cached_property
    def discrete_indices(self) -> tuple[int, ...]:
        """Integer + categorical positions, in variable order."""
        return tuple(
            i for i, v in enumerate(self.variables) if v.kind is not Kind.REAL
        )

    @property
    def n_real(self) -> int:
        return len(self.real_indices)

    def __len__(self) -> int:
        return len(self.variables)

    def names(self) -> list[str]:
        return [v.name for v in self.variables]


@dataclass(frozen=True)
class Point:
    values: tuple[Value, ...]

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self, space: SearchSpace) -> dict[str, Value]:
        return {v.name: x for v, x in zip(space.variables, self.values)}

    @staticmethod
    def from_dict(d: dict[str, Value], space: SearchSpace) -> "Point":
        missing = [v.name for v in space.variables if v.name not in d]
        if missing:
            raise StructuralError(f"missing variables: {missing}")
        extra = set(d) - set(space.names())
        if extra:
            raise StructuralError(f"unknown variables: {sorted(extra)}")
        vals = []
        for v in space.variables:
            x = d[v.name]
            if v.kind is Kind.INTEGER:
                x = int(x)
            elif v.kind is Kind.REAL:
                x = float(x)
            vals.append(x)
        return Point(tuple(vals))


class Step(str, Enum):
    INITIAL = "initial"
    SEARCH = "search"
    POLL = "poll"
    EXTENDED_POLL = "extended_poll"
    BENCHMARK = "benchmark"


@dataclass(frozen=True)
class Evaluation:
    point: Point
    objective: float | None
    failure: str | None
    step: Step
    ordinal: int

    @property
    def ok(self) -> bool:
        return self.failure is None

    def __post_init__(self):
        if self.failure is not None and self.objective is not None:
            raise ValueError("a failed evaluation carries no objective")


def check_point(point: Point, space: SearchSpace) -> None:
    """Raise StructuralError if the point does not match the space."""
    if len(point) != len(space):
        raise StructuralError(
            f"arity mismatch: {len(point)} values for {len(space)} variables"
        )
    for v, x in zip(space.variables, point.values):
        if v.kind is Kind.REAL:
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise StructuralError(f"{v.name}: expected real, got {x!r}")
        elif v.kind is Kind.INTEGER:
            if not isinstance(x, int) or isinstance(x, bool):
                raise StructuralError(f"{v.name}: expected integer, got {x!r}")
        else:
            if x not in v.categories:
                raise StructuralError(f"{v.name}: unknown category {x!r}")


def validate_point(point: Point, space: SearchSpace) -> None:
    """check_point plus bounds/membership."""
    check_point(point, space)
    for v, x in zip(space.variables, point.values):
        if v.kind is not Kind.CATEGORICAL and not v.lower <= x <= v.upper:
            raise StructuralError(f"{v.name}: {x!r} outside [{v.lower}, {v.upper}]")


def canonical_key(point: Point, space: SearchSpace) -> tuple:
    """Opaque hashable identity of a point within its space."""
    check_point(point, space)
    key = []
    for v, x in zip(space.variables, point.values):
        if v.kind is Kind.REAL:
            u = (float(x) - v.lower) / v.span
            key.append(round(u, CANONICAL_DIGITS) + 0.0)  # normalize -0.0
        elif v.kind is Kind.INTEGER:
            key.append(int(x))
        else:
            key.append(x)
    return tuple(key)


def project_bounds(point: Point, space: SearchSpace) -> Point:
    """Clamp reals and integers into their bounds; categories pass through."""
    check_point(point, space)
    vals = []
    for v, x in zip(space.variables, point.values):
        if v.kind is Kind.REAL:
            vals.append(min(max(float(x), v.lower), v.upper))
        elif v.kind is Kind.INTEGER:
            vals.append(int(min(max(x, v.lower), v.upper)))
        else:
            vals.append(x)
    return Point(tuple(vals))


def split(point: Point, space: SearchSpace) -> tuple[tuple[Value, ...], tuple[Value, ...]]:
    """Split a point into its discrete part x_N and its real part x_R."""
    check_point(point, space)
    x_n = tuple(point.values[i] for i in space.discrete_indices)
    x_r = tuple(point.values[i] for i in space.real_indices)
    return x_n, x_r


def merge(x_n: tuple[Value, ...], x_r: tuple[Value, ...], space: SearchSpace) -> Point:
    """Inverse of split: recombine the discrete and real parts."""
    if len(x_n) != len(space.discrete_indices) or len(x_r) != len(space.real_indices):
        raise StructuralError("component arity mismatch on merge")
    vals: list[Value] = [None] * len(space)  # type: ignore[list-item]
    for i, x in zip(space.discrete_indices, x_n):
        vals[i] = x
    for i, x in zip(space.real_indices, x_r):
        vals[i] = x
    return Point(tuple(vals))


def normalize_reals(point: Point, space: SearchSpace) -> list[float]:
    """Continuous coordinates mapped to [0, 1], in real-variable order."""
    out = []
    for i in space.real_indices:
        v = space.variables[i]
        out.append((float(point.values[i]) - v.lower) / v.span)
    return out


def denormalize_reals(coords, space: SearchSpace) -> tuple[float, ...]:
    vals = []
    for u, i in zip(coords, space.real_indices):
        v = space.variables[i]
        vals.append(v.lower + float(u) * v.span)
    return tuple(vals)


class Cache:
    """Canonical-key -> Evaluation map with insertion order preserved.

    Reads are lock-free; writes take a lock (the driver serializes them
    anyway, the lock guards parallel-evaluation dispatchers).
    """

    def __init__(self, space: SearchSpace):
        self.space = space
        self._entries: dict[tuple, Evaluation] = {}
        self._lock = threading.Lock()

    def get(self, point: Point) -> Evaluation | None:
        return self._entries.get(canonical_key(point, self.space))

    def put(self, evaluation: Evaluation) -> None:
        key = canonical_key(evaluation.point, self.space)
        with self._lock:
            self._entries.setdefault(key, evaluation)

    def __contains__(self, point: Point) -> bool:
        return canonical_key(point, self.space) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def evaluations(self) -> list[Evaluation]:
        return list(self._entries.values())

    def successes(self) -> list[Evaluation]:
        return [e for e in self._entries.values() if e.ok]


def builtin_vae_space(n0: int = 32) -> SearchSpace:
    """The 11-variable autoencoder hyperparameter space.

    n0 is the input feature dimension; the latent dimension is bounded by
    n0 - 1 (strictly below n0).
    """
    if n0 < 2:
        raise SpaceError("n0 must be at least 2")
    return SearchSpace((
        VariableSpec("encoding_layers", Kind.INTEGER, 1, 50),
        VariableSpec("latent_dim", Kind.INTEGER, 1, n0 - 1),
        VariableSpec("batch_size", Kind.INTEGER, 10, 512),
        VariableSpec("activation", Kind.CATEGORICAL,
                     categories=("ReLU", "Sigmoid", "Tanh")),
        VariableSpec("dropout", Kind.REAL, 0.0, 1.0),
        VariableSpec("optimizer", Kind.CATEGORICAL,
                     categories=("SGD", "Adam", "Adagrad", "RMSProp")),
        VariableSpec("opt_hp1", Kind.REAL, 0.0, 1.0),
        VariableSpec("opt_hp2", Kind.REAL, 0.0, 1.0),
        VariableSpec("opt_hp3", Kind.REAL, 0.0, 1.0),
        VariableSpec("opt_hp4", Kind.REAL, 0.0, 1.0),
        VariableSpec("alpha", Kind.REAL, 0.5, 1.0),
    ))


# --- JSON space schema ------------------------------------------------------
# {"variables": [{"name": ..., "kind": "real"|"integer"|"categorical",
#                 "lower": ..., "upper": ..., "categories": [...],
#                 "neighbors": {...}}]}

_ALLOWED_FIELDS = {"name", "kind", "lower", "upper", "categories", "neighbors"}


def space_to_json(space: SearchSpace) -> str:
    out = []
    for v in space.variables:
        d: dict = {"name": v.name, "kind": v.kind.value}
        if v.kind is Kind.CATEGORICAL:
            d["categories"] = list(v.categories)
            d["neighbors"] = {c: sorted(v.neighbors[c]) for c in v.categories}
        else:
            d["lower"] = v.lower
            d["upper"] = v.upper
        out.append(d)
    return json.dumps({"variables": out}, indent=2)


def space_from_json(text: str) -> SearchSpace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceError(f"invalid space JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"variables"}:
        raise SpaceError('space JSON must be {"variables": [...]}')
    specs = []
    for entry in doc["variables"]:
        if not isinstance(entry, dict):
            raise SpaceError("variable entries must be objects")
        unknown = set(entry) - _ALLOWED_FIELDS
        if unknown:
            raise SpaceError(f"unknown fields: {sorted(unknown)}")
        try:
            kind = Kind(entry.get("kind"))
        except ValueError as exc:
            raise SpaceError(f"unknown kind {entry.get('kind')!r}") from exc
        nbrs = entry.get("neighbors")
        if nbrs is not None:
            nbrs = {k: frozenset(v) for k, v in nbrs.items()}
        specs.append(VariableSpec(
            name=entry.get("name", ""),
            kind=kind,
            lower=entry.get("lower"),
            upper=entry.get("upper"),
            categories=tuple(entry["categories"]) if "categories" in entry else None,
            neighbors=nbrs,
        ))
    return SearchSpace(tuple(specs))
