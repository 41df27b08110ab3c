"""JSON instance formats.

Rationals are written as ``"p/q"`` strings (integers as ``"p"``); floats as
JSON numbers.  Alphabets are lists whose entries are either bare labels
(coordinates default to an even spread over ``[0, 1]``) or
``{"label": ..., "coord": [...]}`` objects.

Instance types (``"type"`` key):

``coupling``  ``{"rows": alphabet, "cols": alphabet, "mass": [[w, ...], ...]}``
``path_law``  ``{"N", "y_alphabets", "x_alphabets", "support": [{"y", "x", "w"}]}``
``tau``       ``{"N", "y_alphabets", "mu": [{"y", "w"}], "kernel": [{"y", "times": {"1": w, "inf": w}}]}``
``model``     ``{"N", "y_alphabets", "x_alphabets", "mu", "cost": [{"y", "x", "c"}], "default_cost", "functional"}``
``family``    ``{"family": name, "m": [..]}`` named generator for refinement studies
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .measure import Coupling, FiniteSpace, to_number
from .paths import PATH_SEP, AdaptedMap, JointPathLaw, PathMeasure, PathSpace
from .stopping import RandomizedStoppingTime, StoppingTime, parse_time, time_key
from .transport import ControlModel


def fmt_number(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return float(v)


def parse_number(v, exact: bool | None = None):
    return to_number(v, exact)


def _default_coords(space: FiniteSpace) -> bool:
    return space == FiniteSpace.from_labels(list(space.labels))


def alphabet_to_json(space: FiniteSpace) -> list:
    if _default_coords(space):
        return list(space.labels)
    return [{"label": lab, "coord": [fmt_number(c) for c in space.coord(i)]} for i, lab in enumerate(space.labels)]


def alphabet_from_json(data: list) -> FiniteSpace:
    if all(isinstance(a, str) for a in data):
        return FiniteSpace.from_labels(list(data))
    atoms = []
    for a in data:
        if isinstance(a, str):
            raise ValueError("mixing bare labels and labelled atoms in one alphabet")
        atoms.append((a["label"], tuple(parse_number(c) for c in a["coord"])))
    return FiniteSpace(tuple(atoms), len(atoms[0][1]))


def _path_space(alphabets) -> PathSpace:
    return PathSpace(tuple(alphabet_from_json(a) for a in alphabets))


def _path_space_json(ps: PathSpace) -> list:
    return [alphabet_to_json(a) for a in ps.alphabets]


def _measure_json(mu: PathMeasure) -> list:
    return [{"y": list(y), "w": fmt_number(w)} for y, w in mu.weights.items()]


def _measure_from(space: PathSpace, rows, exact=None) -> PathMeasure:
    return PathMeasure(space, {tuple(r["y"]): parse_number(r["w"], exact) for r in rows})


# -- per-type encoders ----------------------------------------------------------------

def coupling_to_json(P: Coupling) -> dict:
    return {
        "type": "coupling",
        "rows": alphabet_to_json(P.row_space),
        "cols": alphabet_to_json(P.col_space),
        "mass": [[fmt_number(w) for w in row] for row in P.mass],
    }


def law_to_json(J: JointPathLaw) -> dict:
    return {
        "type": "path_law",
        "N": J.N,
        "y_alphabets": _path_space_json(J.y_space),
        "x_alphabets": _path_space_json(J.x_space),
        "support": [{"y": list(y), "x": list(x), "w": fmt_number(w)} for (y, x), w in J.support.items()],
    }


def tau_to_json(tau: RandomizedStoppingTime, mu: PathMeasure) -> dict:
    return {
        "type": "tau",
        "N": tau.N,
        "y_alphabets": _path_space_json(tau.y_space),
        "mu": _measure_json(mu),
        "kernel": [
            {"y": list(y), "times": {time_key(t): fmt_number(p) for t, p in row.items()}}
            for y, row in tau.kernel.items()
        ],
    }


def model_to_json(model: ControlModel, sense: str | None = None) -> dict:
    if not isinstance(model.reward, dict):
        table = {(y, x): model.reward(y, x) for y in model.mu.support() for x in model.action_space.paths()}
    else:
        table = model.reward
    out = {
        "type": "model",
        "N": model.mu.space.N,
        "y_alphabets": _path_space_json(model.mu.space),
        "x_alphabets": _path_space_json(model.action_space),
        "mu": _measure_json(model.mu),
        "cost": [{"y": list(y), "x": list(x), "c": fmt_number(c)} for (y, x), c in table.items() if c],
        "default_cost": "0",
        "functional": model.functional,
    }
    if sense is not None:
        out["objective"] = sense
    return out


def adapted_map_to_json(f: AdaptedMap) -> list:
    """One object per step, keyed by the ``/``-joined prefix."""
    return [{PATH_SEP.join(pre): x for pre, x in step.items()} for step in f.steps]


def adapted_map_from_json(data: list) -> AdaptedMap:
    return AdaptedMap(tuple({tuple(k.split(PATH_SEP)): x for k, x in step.items()} for step in data))


def mixture_to_json(D) -> dict:
    return {
        "type": "mixture",
        "components": [
            {"weight": fmt_number(w), "u": [fmt_number(a), fmt_number(b)], "map": adapted_map_to_json(f)}
            for (w, f), (a, b) in zip(D.components, D.u_intervals)
        ],
    }


def stopping_time_to_json(st: StoppingTime) -> dict:
    return {PATH_SEP.join(y): time_key(t) for y, t in st.rule.items()}


def to_json(obj, **kw) -> dict:
    if isinstance(obj, Coupling):
        return coupling_to_json(obj)
    if isinstance(obj, JointPathLaw):
        return law_to_json(obj)
    if isinstance(obj, ControlModel):
        return model_to_json(obj, **kw)
    if isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[0], RandomizedStoppingTime):
        return tau_to_json(*obj)
    raise TypeError(f"no JSON form for {type(obj).__name__}")


# -- decoder --------------------------------------------------------------------------

def _infer_type(data: dict) -> str:
    if "type" in data:
        return data["type"]
    if "support" in data:
        return "path_law"
    if "kernel" in data:
        return "tau"
    if "mass" in data:
        return "coupling"
    if "family" in data:
        return "family"
    if "cost" in data:
        return "model"
    raise ValueError("cannot infer instance type")


def from_json(data: dict, exact: bool | None = None):
    """Decode an instance; taus decode to ``(tau, mu)``, families to their dict."""
    kind = _infer_type(data)
    if kind == "coupling":
        rows, cols = alphabet_from_json(data["rows"]), alphabet_from_json(data["cols"])
        mass = tuple(tuple(parse_number(w, exact) for w in r) for r in data["mass"])
        return Coupling(rows, cols, mass)
    if kind == "path_law":
        ys, xs = _path_space(data["y_alphabets"]), _path_space(data["x_alphabets"])
        if "N" in data and (ys.N != data["N"] or xs.N != data["N"]):
            raise ValueError("declared horizon N disagrees with the alphabets")
        return JointPathLaw(
            ys, xs, [((tuple(r["y"]), tuple(r["x"])), parse_number(r["w"], exact)) for r in data["support"]]
        )
    if kind == "tau":
        ys = _path_space(data["y_alphabets"])
        kern = {
            tuple(r["y"]): {parse_time(t): parse_number(p, exact) for t, p in r["times"].items()} for r in data["kernel"]
        }
        tau = RandomizedStoppingTime(ys, kern)
        mu = _measure_from(ys, data["mu"], exact) if "mu" in data else PathMeasure.uniform(ys)
        return tau, mu
    if kind == "model":
        ys, xs = _path_space(data["y_alphabets"]), _path_space(data["x_alphabets"])
        mu = _measure_from(ys, data["mu"], exact)
        default = parse_number(data.get("default_cost", "0"), exact)
        table = {(y, x): default for y in mu.support() for x in xs.paths()}
        for r in data["cost"]:
            table[(tuple(r["y"]), tuple(r["x"]))] = parse_number(r["c"], exact)
        return ControlModel(mu, xs, table, data.get("functional"))
    if kind == "family":
        return dict(data)
    raise ValueError(f"unknown instance type {kind!r}")


def load(path) -> object:
    with open(path) as fh:
        return from_json(json.load(fh))


def dumps(obj, **kw) -> str:
    data = obj if isinstance(obj, dict) else to_json(obj, **kw)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def dump(obj, path, **kw) -> None:
    Path(path).write_text(dumps(obj, **kw))
