"""JSON scenario files and sweep configurations.

A scenario file is a JSON object::

    {
      "dim_system": 2, "dim_apparatus": 2,
      "a_spec": "pauli_z", "b_spec": "spin(pi/2, 0)", "meter_spec": "pauli_z",
      "unitary_spec": "cnot(0, 0)",
      "system_state": "bloch(pi/2, pi/2)", "apparatus_state": "basis(0)"
    }

Operators are ``pauli_x``, ``pauli_y``, ``pauli_z``, ``identity``,
``spin(theta, phi)`` or an explicit matrix of ``[re, im]`` pairs. The
unitary is ``identity``, ``cnot(theta, phi)``,
``partial(lambda, theta, phi)`` or an explicit matrix. States are
``basis(k)``, ``bloch(theta, phi)`` or an explicit list of ``[re, im]``
amplitudes. Arguments may be plain arithmetic in numbers and ``pi``.
"""

from __future__ import annotations

import ast
import json
import math
import operator
import re
from pathlib import Path

import numpy as np

from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_operator,
    as_state,
    basis_state,
    bloch_state,
    spin,
)
from .measurement import (
    MeasurementModel,
    Scenario,
    builtin_cnot_model,
    builtin_partial_model,
)

SCENARIO_FIELDS = ("dim_system", "dim_apparatus", "a_spec", "b_spec", "meter_spec",
                   "unitary_spec", "system_state", "apparatus_state")


class ScenarioError(ValueError):
    """Malformed scenario or sweep input; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def eval_number(text) -> float:
    """Evaluate a number or a small arithmetic expression in ``pi``."""
    if isinstance(text, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(text, (int, float)):
        return float(text)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return walk(ast.parse(str(text).strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"cannot parse number {text!r}") from None


_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def _call(text: str, field: str):
    m = _CALL.match(text)
    if not m:
        raise ScenarioError(field, f"cannot parse {text!r}")
    name, args = m.group(1), m.group(2)
    if args is None:
        return name, []
    try:
        return name, [eval_number(a) for a in args.split(",")] if args.strip() else []
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(field, str(exc)) from None


def _arity(name, args, n, field):
    if len(args) != n:
        raise ScenarioError(field, f"{name} takes {n} argument(s), got {len(args)}")


def _complex_array(value, ndim: int, field: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(field, "expected numbers in [re, im] pairs") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise ScenarioError(field, f"expected a {'matrix' if ndim == 2 else 'list'} of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_complex(arr) -> list:
    arr = np.asarray(arr)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def parse_operator(spec, dim: int, field: str) -> np.ndarray:
    if isinstance(spec, str):
        name, args = _call(spec, field)
        if name == "identity":
            _arity(name, args, 0, field)
            return np.eye(dim, dtype=complex)
        if dim != 2 and name in ("pauli_x", "pauli_y", "pauli_z", "spin"):
            raise ScenarioError(field, f"{name} needs dimension 2, got {dim}")
        if name in ("pauli_x", "pauli_y", "pauli_z"):
            _arity(name, args, 0, field)
            return {"pauli_x": PAULI_X, "pauli_y": PAULI_Y, "pauli_z": PAULI_Z}[name]
        if name == "spin":
            _arity(name, args, 2, field)
            return spin(*args)
        raise ScenarioError(field, f"unknown operator {name!r}")
    op = _complex_array(spec, 2, field)
    if op.shape != (dim, dim):
        raise ScenarioError(field, f"expected a {dim}x{dim} matrix, got {op.shape[0]}x{op.shape[1]}")
    return op


def parse_state(spec, dim: int, field: str) -> np.ndarray:
    if isinstance(spec, str):
        name, args = _call(spec, field)
        if name == "basis":
            _arity(name, args, 1, field)
            k = args[0]
            if k != int(k) or not 0 <= k < dim:
                raise ScenarioError(field, f"basis index must be an integer in [0, {dim})")
            return basis_state(dim, int(k))
        if name == "bloch":
            _arity(name, args, 2, field)
            if dim != 2:
                raise ScenarioError(field, f"bloch needs dimension 2, got {dim}")
            return bloch_state(*args)
        raise ScenarioError(field, f"unknown state {name!r}")
    psi = _complex_array(spec, 1, field)
    if psi.shape[0] != dim:
        raise ScenarioError(field, f"expected {dim} amplitudes, got {psi.shape[0]}")
    try:
        return as_state(psi, name=field)
    except ValueError as exc:
        raise ScenarioError(field, str(exc)) from None


def _interaction(spec, ds: int, da: int, field: str):
    """Returns an explicit unitary or a builtin model constructor result."""
    if isinstance(spec, str):
        name, args = _call(spec, field)
        if name == "identity":
            _arity(name, args, 0, field)
            return np.eye(ds * da, dtype=complex)
        if name in ("cnot", "partial"):
            if (ds, da) != (2, 2):
                raise ScenarioError(field, f"{name} needs dim_system = dim_apparatus = 2")
            if name == "cnot":
                _arity(name, args, 2, field)
                return builtin_cnot_model(*args).interaction
            _arity(name, args, 3, field)
            try:
                return builtin_partial_model(*args).interaction
            except ValueError as exc:
                raise ScenarioError(field, str(exc)) from None
        raise ScenarioError(field, f"unknown unitary {name!r}")
    u = _complex_array(spec, 2, field)
    if u.shape != (ds * da, ds * da):
        raise ScenarioError(field, f"expected a {ds * da}x{ds * da} matrix")
    return u


def _positive_int(data: dict, key: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ScenarioError(key, f"must be a positive integer, got {value!r}")
    return value


def scenario_from_dict(data: dict) -> Scenario:
    """Realize a scenario; every invariant failure is reported as :class:`ScenarioError`."""
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    missing = [k for k in SCENARIO_FIELDS if k not in data]
    if missing:
        raise ScenarioError(missing[0], "missing field")
    unknown = sorted(set(data) - set(SCENARIO_FIELDS))
    if unknown:
        raise ScenarioError(unknown[0], "unknown field")
    ds = _positive_int(data, "dim_system")
    da = _positive_int(data, "dim_apparatus")

    def checked(field, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(field, str(exc)) from None

    a = checked("a_spec", as_operator, parse_operator(data["a_spec"], ds, "a_spec"),
                hermitian=True, name="a_spec")
    b = checked("b_spec", as_operator, parse_operator(data["b_spec"], ds, "b_spec"),
                hermitian=True, name="b_spec")
    meter = checked("meter_spec", as_operator, parse_operator(data["meter_spec"], da, "meter_spec"),
                    hermitian=True, name="meter_spec")
    u = checked("unitary_spec", as_operator, _interaction(data["unitary_spec"], ds, da, "unitary_spec"),
                unitary=True, name="unitary_spec")
    psi = parse_state(data["system_state"], ds, "system_state")
    xi = parse_state(data["apparatus_state"], da, "apparatus_state")
    model = MeasurementModel(ds, da, xi, u, meter)
    return Scenario(model, a, b, psi)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Fully explicit file form of a realized scenario."""
    m = scenario.model
    return {
        "dim_system": m.dim_system,
        "dim_apparatus": m.dim_apparatus,
        "a_spec": _encode_complex(scenario.a),
        "b_spec": _encode_complex(scenario.b),
        "meter_spec": _encode_complex(m.meter),
        "unitary_spec": _encode_complex(m.interaction),
        "system_state": _encode_complex(scenario.system),
        "apparatus_state": _encode_complex(m.apparatus_state),
    }


def load_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None


def load_scenario(path) -> Scenario:
    return scenario_from_dict(load_json(path))


# -- sweeps --------------------------------------------------------------------

SWEEP_COLUMNS = ("epsilon", "eta", "sigma_a", "sigma_b", "bar_epsilon", "bar_eta",
                 "ozawa_lhs", "ozawa_rhs", "fujikawa_lhs", "fujikawa_rhs",
                 "heisenberg_lhs", "heisenberg_rhs")


def parse_sweep(data: dict, families: dict):
    """Validate a sweep configuration.

    Returns ``(family, axes, base)`` where ``axes`` is a list of
    ``(name, values)`` pairs (one or two) and ``base`` is the full parameter
    vector holding the fixed values.
    """
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "sweep config must be a JSON object")
    fam_name = data.get("family")
    if fam_name not in families:
        raise ScenarioError("family", f"unknown family {fam_name!r}; expected one of {', '.join(families)}")
    family = families[fam_name]()
    sweep = data.get("sweep")
    if isinstance(sweep, dict):
        sweep = [sweep]
    if not isinstance(sweep, list) or not 1 <= len(sweep) <= 2:
        raise ScenarioError("sweep", "expected one or two swept parameters")
    axes = []
    for i, ax in enumerate(sweep):
        where = f"sweep[{i}]"
        if not isinstance(ax, dict):
            raise ScenarioError(where, "expected an object with parameter, min, max, steps")
        name = ax.get("parameter")
        if name not in family.parameter_names:
            raise ScenarioError(f"{where}.parameter", f"unknown parameter {name!r}")
        if name in [n for n, _ in axes]:
            raise ScenarioError(f"{where}.parameter", f"{name} swept twice")
        steps = ax.get("steps")
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ScenarioError(f"{where}.steps", "empty grid: steps must be a positive integer")
        try:
            lo, hi = eval_number(ax.get("min")), eval_number(ax.get("max"))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ScenarioError(where, str(exc)) from None
        blo, bhi = family.bounds[family.index(name)]
        if not (blo <= lo <= bhi and blo <= hi <= bhi):
            raise ScenarioError(where, f"range [{lo}, {hi}] leaves the bounds [{blo}, {bhi}]")
        axes.append((name, np.linspace(lo, hi, steps)))
    fixed = data.get("fixed", {})
    if not isinstance(fixed, dict):
        raise ScenarioError("fixed", "expected an object")
    base = np.zeros(len(family.parameter_names))
    swept = {n for n, _ in axes}
    for i, name in enumerate(family.parameter_names):
        if name in swept:
            if name in fixed:
                raise ScenarioError(f"fixed.{name}", "parameter is also swept")
            continue
        if name not in fixed:
            raise ScenarioError(f"fixed.{name}", "missing value")
        try:
            base[i] = eval_number(fixed[name])
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ScenarioError(f"fixed.{name}", str(exc)) from None
    extra = sorted(set(fixed) - set(family.parameter_names))
    if extra:
        raise ScenarioError(f"fixed.{extra[0]}", "unknown parameter")
    clipped = family.clip(base)
    bad = np.flatnonzero(clipped != base)
    if bad.size:
        raise ScenarioError(f"fixed.{family.parameter_names[bad[0]]}", "value out of bounds")
    return family, axes, base


def sweep_rows(family, axes, base, evaluate):
    """Yield ``(grid_values, report)`` over the grid, first axis outermost."""
    idx = [family.index(name) for name, _ in axes]
    grids = [values for _, values in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    for point in zip(*(m.ravel() for m in mesh)):
        x = base.copy()
        x[idx] = point
        yield point, evaluate(family.realize(x))


def sweep_record(report) -> list:
    ozawa = report.relation("ozawa")
    fuji = report.relation("fujikawa")
    naive = report.relation("heisenberg_naive")
    return [report.epsilon, report.eta, report.sigma_a, report.sigma_b,
            report.bar_epsilon, report.bar_eta, ozawa.lhs, ozawa.rhs,
            fuji.lhs, fuji.rhs, naive.lhs, naive.rhs]
