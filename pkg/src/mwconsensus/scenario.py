"""JSON scenario files.

Schema::

    {
      "name": str,
      "n": int, "d": int,
      "edges": [{"i": int, "j": int, "weight": [[...], ...]}, ...],
      "bearings": {"positions": [[...]], "edges": [[i, j], ...]}
               | {"vectors": [{"i": int, "j": int, "g": [...]}, ...]},
      "initial_states": [[...], ...],            # n rows of d numbers
      "seed": int,                               # required without initial_states
      "sim": {"step": float|null, "horizon": float, "record_stride": int},
      "tolerances": {"weight": float, "group": float, "convergence": float}
    }

Exactly one of ``edges`` and ``bearings`` must be present. Weights are
row-major nested lists.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .bearing import BearingSpec, bearing_laplacian
from .dynamics import CONVERGENCE_TOL, DEFAULT_HORIZON, GROUP_TOL, SimulationConfig, random_initial_state
from .errors import ParseError, ValidationError
from .graph import PSD_TOL, MatrixWeightedGraph, build_graph

BUNDLED = ("example1", "cluster9_case1", "cluster9_case2", "bearing_square")


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    n: int
    d: int
    edges: tuple = ()
    bearings: dict | None = None
    initial_states: np.ndarray | None = None
    seed: int | None = None
    step: float | None = None
    horizon: float = DEFAULT_HORIZON
    record_stride: int = 1
    weight_tol: float = PSD_TOL
    group_tol: float = GROUP_TOL
    convergence_tol: float = CONVERGENCE_TOL
    _graph: list = field(default_factory=list, repr=False)

    def bearing_spec(self) -> BearingSpec | None:
        if self.bearings is None:
            return None
        if "positions" in self.bearings:
            return BearingSpec.from_positions(self.bearings["positions"], [tuple(e) for e in self.bearings["edges"]])
        return BearingSpec.from_bearings(self.n, self.d, [(v["i"], v["j"], v["g"]) for v in self.bearings["vectors"]])

    def graph(self) -> MatrixWeightedGraph:
        if not self._graph:
            if self.bearings is not None:
                g = bearing_laplacian(self.bearing_spec())
            else:
                g = build_graph(self.n, self.d, self.edges, tol=self.weight_tol)
            self._graph.append(g)
        return self._graph[0]

    def initial_state(self, seed: int | None = None) -> np.ndarray:
        """Explicit initial states, else uniform in [-5, 5] from ``seed`` (or the scenario seed)."""
        if self.initial_states is not None and seed is None:
            return self.initial_states.ravel().copy()
        seed = self.seed if seed is None else seed
        if seed is None:
            raise ValidationError(f"scenario {self.name!r} has neither initial_states nor a seed")
        return random_initial_state(np.random.default_rng(seed), self.n, self.d)

    def sim_config(self) -> SimulationConfig:
        return SimulationConfig(self.step, self.horizon, self.convergence_tol, self.record_stride)

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, _graph=[], **kw) if kw else self


def _require(data: dict, key: str, kind, where: str = ""):
    if key not in data:
        raise ParseError(f"missing required field {key!r}", where or "scenario")
    value = data[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"expected an integer, got {value!r}", f"{where}{key}")
    if kind is str and not isinstance(value, str):
        raise ParseError(f"expected a string, got {value!r}", f"{where}{key}")
    return value


def _matrix(value, shape, where: str) -> np.ndarray:
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("expected a nested list of numbers", where) from None
    if a.shape != shape:
        raise ParseError(f"expected shape {shape}, got {a.shape}", where)
    return a


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded JSON document and build its graph eagerly."""
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    name = _require(data, "name", str)
    n = _require(data, "n", int)
    d = _require(data, "d", int)
    has_edges, has_bearings = "edges" in data, "bearings" in data
    if has_edges == has_bearings:
        raise ParseError("exactly one of 'edges' and 'bearings' must be given", "scenario")

    edges = []
    if has_edges:
        if not isinstance(data["edges"], list):
            raise ParseError("expected a list", "edges")
        for k, e in enumerate(data["edges"]):
            where = f"edges[{k}]."
            if not isinstance(e, dict):
                raise ParseError("expected an object", f"edges[{k}]")
            i, j = _require(e, "i", int, where), _require(e, "j", int, where)
            edges.append((i, j, _matrix(_require(e, "weight", list, where), (d, d), f"{where}weight")))

    bearings = None
    if has_bearings:
        bearings = data["bearings"]
        if not isinstance(bearings, dict) or not ({"positions", "vectors"} & bearings.keys()):
            raise ParseError("expected an object with 'positions'+'edges' or 'vectors'", "bearings")
        if "positions" in bearings:
            _matrix(bearings["positions"], (n, d), "bearings.positions")
            if not isinstance(bearings.get("edges"), list):
                raise ParseError("expected a list of [i, j] pairs", "bearings.edges")

    init = data.get("initial_states")
    if init is not None:
        init = _matrix(init, (n, d), "initial_states")
    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ParseError(f"expected an integer, got {seed!r}", "seed")
    if init is None and seed is None:
        raise ParseError("a seed is required when initial_states is absent", "seed")

    sim = data.get("sim", {}) or {}
    tols = data.get("tolerances", {}) or {}
    try:
        sc = Scenario(
            name=name, n=n, d=d, edges=tuple(edges), bearings=bearings, initial_states=init, seed=seed,
            step=None if sim.get("step") is None else float(sim["step"]),
            horizon=float(sim.get("horizon", DEFAULT_HORIZON)),
            record_stride=int(sim.get("record_stride", 1)),
            weight_tol=float(tols.get("weight", PSD_TOL)),
            group_tol=float(tols.get("group", GROUP_TOL)),
            convergence_tol=float(tols.get("convergence", CONVERGENCE_TOL)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), "sim/tolerances") from None
    sc.graph()
    return sc


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return parse_scenario(data)


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario from a file path or a bundled fixture name."""
    path = Path(source)
    if path.is_file():
        return loads(path.read_text())
    name = str(source)
    if name in BUNDLED:
        return loads(resources.files("mwconsensus.scenarios").joinpath(f"{name}.json").read_text())
    raise ParseError(f"no such file or bundled scenario: {source}")


def to_dict(sc: Scenario) -> dict:
    out = {"name": sc.name, "n": sc.n, "d": sc.d}
    if sc.bearings is not None:
        out["bearings"] = sc.bearings
    else:
        out["edges"] = [{"i": i, "j": j, "weight": np.asarray(w).tolist()} for i, j, w in sc.edges]
    if sc.initial_states is not None:
        out["initial_states"] = sc.initial_states.tolist()
    if sc.seed is not None:
        out["seed"] = sc.seed
    out["sim"] = {"step": sc.step, "horizon": sc.horizon, "record_stride": sc.record_stride}
    out["tolerances"] = {"weight": sc.weight_tol, "group": sc.group_tol, "convergence": sc.convergence_tol}
    return out


def dumps(sc: Scenario) -> str:
    return json.dumps(to_dict(sc), indent=2)
