"""Run configuration: a strict JSON document turned into a validated RunConfig."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .fock import Cat, Coherent, Fock, Thermal
from .observables import QGrid
from .solvers import SOLVERS

DEFAULT_STEPS_PER_UNIT_TIME = 10000
DEFAULT_THRESHOLD = 1e-6
FORMATS = ("csv", "json")

_TOP_KEYS = {
    "dimension", "chi", "gamma", "times", "t_max", "num_points", "initial_state",
    "solvers", "rk4_steps_per_unit_time", "output", "qgrid", "fidelity_reference",
    "threshold", "dump_density_matrices", "liouville_max_dim",
}
_STATE_KEYS = {"fock": {"n"}, "coherent": {"alpha"}, "thermal": {"nbar"}, "cat": {"alpha", "phase"}}
_OUTPUT_KEYS = {"path", "format"}
_QGRID_KEYS = {"re_min", "re_max", "im_min", "im_max", "resolution"}


@dataclass
class RunConfig:
    dimension: int
    chi: float
    gamma: float
    times: tuple
    initial_state: object
    solvers: tuple = ("kraus",)
    rk4_steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME
    output_path: str | None = None
    output_format: str = "csv"
    qgrid: QGrid | None = None
    fidelity_reference: object = None
    threshold: float = DEFAULT_THRESHOLD
    dump_density_matrices: bool = False
    liouville_max_dim: int = 32
    source: dict = field(default_factory=dict, repr=False)

    @property
    def reference(self):
        """Fidelity reference; defaults to the initial state."""
        return self.fidelity_reference if self.fidelity_reference is not None else self.initial_state

    def to_dict(self) -> dict:
        out = {
            "dimension": self.dimension,
            "chi": self.chi,
            "gamma": self.gamma,
            "times": list(self.times),
            "initial_state": state_to_dict(self.initial_state),
            "solvers": list(self.solvers),
            "rk4_steps_per_unit_time": self.rk4_steps_per_unit_time,
            "output": {"path": self.output_path, "format": self.output_format},
            "threshold": self.threshold,
            "dump_density_matrices": self.dump_density_matrices,
            "liouville_max_dim": self.liouville_max_dim,
        }
        if self.fidelity_reference is not None:
            out["fidelity_reference"] = state_to_dict(self.fidelity_reference)
        if self.qgrid is not None:
            g = self.qgrid
            out["qgrid"] = {"re_min": g.re_min, "re_max": g.re_max, "im_min": g.im_min,
                            "im_max": g.im_max, "resolution": g.resolution}
        return out


def _line_of(text, key):
    idx = text.find(f'"{key}"')
    return text.count("\n", 0, idx) + 1 if idx >= 0 else None


class _Parser:
    def __init__(self, text):
        self.text = text

    def fail(self, field, message):
        line = _line_of(self.text, field.split(".")[-1]) if field else None
        where = f" (line {line})" if line else ""
        raise ConfigError(f"{field}: {message}{where}", field=field, line=line)

    def check_keys(self, obj, allowed, where):
        if not isinstance(obj, dict):
            self.fail(where, "expected an object")
        unknown = sorted(set(obj) - allowed)
        if unknown:
            self.fail(f"{where}.{unknown[0]}" if where else unknown[0], f"unknown key {unknown[0]!r}")

    def number(self, obj, key, where=None, minimum=None):
        name = f"{where}.{key}" if where else key
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(name, f"expected a finite number, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(name, f"must be >= {minimum}, got {v!r}")
        return float(v)

    def integer(self, obj, key, minimum, where=None):
        name = f"{where}.{key}" if where else key
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(name, f"expected an integer, got {v!r}")
        if v < minimum:
            self.fail(name, f"must be >= {minimum}, got {v!r}")
        return v

    def complex_value(self, v, name):
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return complex(v)
        if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            return complex(v[0], v[1])
        self.fail(name, f"expected a number or [re, im], got {v!r}")

    def state(self, obj, where):
        if not isinstance(obj, dict) or "type" not in obj:
            self.fail(where, "expected an object with a 'type' key")
        kind = obj["type"]
        if kind not in _STATE_KEYS:
            self.fail(f"{where}.type", f"unknown state type {kind!r}")
        self.check_keys(obj, _STATE_KEYS[kind] | {"type"}, where)
        required = _STATE_KEYS[kind] - ({"phase"} if kind == "cat" else set())
        missing = sorted(required - set(obj))
        if missing:
            self.fail(f"{where}.{missing[0]}", "missing required key")
        if kind == "fock":
            return Fock(self.integer(obj, "n", 0, where))
        if kind == "thermal":
            return Thermal(self.number(obj, "nbar", where, minimum=0.0))
        alpha = self.complex_value(obj["alpha"], f"{where}.alpha")
        if kind == "coherent":
            return Coherent(alpha)
        phase = self.number(obj, "phase", where) if "phase" in obj else 0.0
        return Cat(alpha, phase)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration, filling defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config at line {exc.lineno}, column {exc.colno}: {exc.msg}", line=exc.lineno) from exc
    p = _Parser(text)
    p.check_keys(doc, _TOP_KEYS, "")
    for key in ("dimension", "chi", "gamma", "initial_state"):
        if key not in doc:
            p.fail(key, "missing required key")

    dim = p.integer(doc, "dimension", 2)
    chi = p.number(doc, "chi")
    gamma = p.number(doc, "gamma")
    if gamma < 0:
        p.fail("gamma", f"must be >= 0, got {doc['gamma']!r}")

    if "times" in doc:
        if "t_max" in doc or "num_points" in doc:
            p.fail("times", "give either times or t_max/num_points, not both")
        raw = doc["times"]
        if not isinstance(raw, list) or not raw:
            p.fail("times", "times must be a non-empty list")
        times = [p.number({"times": v}, "times") for v in raw]
        if any(v < 0 for v in times):
            p.fail("times", "times must be non-negative")
        if any(b <= a for a, b in zip(times, times[1:])):
            p.fail("times", "times not ascending")
    elif "t_max" in doc:
        if "num_points" not in doc:
            p.fail("num_points", "missing required key (needed with t_max)")
        t_max = p.number(doc, "t_max", minimum=0.0)
        num = p.integer(doc, "num_points", 1)
        times = [t_max] if num == 1 else np.linspace(0.0, t_max, num).tolist()
        if num > 1 and t_max == 0:
            p.fail("t_max", "t_max must be > 0 when num_points > 1")
    else:
        p.fail("times", "missing: give times or t_max/num_points")

    initial = p.state(doc["initial_state"], "initial_state")
    if isinstance(initial, Fock) and initial.n >= dim:
        p.fail("initial_state.n", f"Fock level {initial.n} >= dimension {dim}")

    solvers = doc.get("solvers", ["kraus"])
    if not isinstance(solvers, list) or not solvers:
        p.fail("solvers", "at least one solver required")
    for s in solvers:
        if s not in SOLVERS:
            p.fail("solvers", f"unknown solver {s!r} (choose from {', '.join(SOLVERS)})")
    if len(set(solvers)) != len(solvers):
        p.fail("solvers", "duplicate solver")
    solvers = tuple(s for s in SOLVERS if s in solvers)

    steps = p.integer(doc, "rk4_steps_per_unit_time", 1) if "rk4_steps_per_unit_time" in doc else DEFAULT_STEPS_PER_UNIT_TIME

    path, fmt = None, "csv"
    if "output" in doc:
        out = doc["output"]
        p.check_keys(out, _OUTPUT_KEYS, "output")
        path = out.get("path")
        if path is not None and not isinstance(path, str):
            p.fail("output.path", "expected a string")
        fmt = out.get("format", "csv")
        if fmt not in FORMATS:
            p.fail("output.format", f"format must be csv or json, got {fmt!r}")

    qgrid = None
    if "qgrid" in doc:
        g = doc["qgrid"]
        p.check_keys(g, _QGRID_KEYS, "qgrid")
        missing = sorted(_QGRID_KEYS - set(g))
        if missing:
            p.fail(f"qgrid.{missing[0]}", "missing required key")
        bounds = {k: p.number(g, k, "qgrid") for k in ("re_min", "re_max", "im_min", "im_max")}
        if bounds["re_max"] <= bounds["re_min"] or bounds["im_max"] <= bounds["im_min"]:
            p.fail("qgrid", "grid bounds must satisfy min < max")
        qgrid = QGrid(resolution=p.integer(g, "resolution", 2, "qgrid"), **bounds)

    ref = p.state(doc["fidelity_reference"], "fidelity_reference") if "fidelity_reference" in doc else None
    if isinstance(ref, Fock) and ref.n >= dim:
        p.fail("fidelity_reference.n", f"Fock level {ref.n} >= dimension {dim}")
    threshold = p.number(doc, "threshold", minimum=0.0) if "threshold" in doc else DEFAULT_THRESHOLD
    dump = doc.get("dump_density_matrices", False)
    if not isinstance(dump, bool):
        p.fail("dump_density_matrices", "expected true or false")
    max_dim = p.integer(doc, "liouville_max_dim", 2) if "liouville_max_dim" in doc else 32

    return RunConfig(
        dimension=dim, chi=chi, gamma=gamma, times=tuple(times), initial_state=initial,
        solvers=solvers, rk4_steps_per_unit_time=steps, output_path=path, output_format=fmt,
        qgrid=qgrid, fidelity_reference=ref, threshold=threshold, dump_density_matrices=dump,
        liouville_max_dim=max_dim, source=doc,
    )


def state_to_dict(spec) -> dict:
    def cplx(z):
        z = complex(z)
        return z.real if z.imag == 0 else [z.real, z.imag]

    if isinstance(spec, Fock):
        return {"type": "fock", "n": spec.n}
    if isinstance(spec, Coherent):
        return {"type": "coherent", "alpha": cplx(spec.alpha)}
    if isinstance(spec, Thermal):
        return {"type": "thermal", "nbar": spec.nbar}
    if isinstance(spec, Cat):
        return {"type": "cat", "alpha": cplx(spec.alpha), "phase": spec.phase}
    raise TypeError(f"not a state spec: {spec!r}")
