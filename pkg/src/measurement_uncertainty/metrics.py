"""Error, disturbance and deviation functionals, and the uncertainty relations built on them.

All expectations are taken on the joint initial state ``|psi> x |xi>``.
Every quantity in a :class:`RelationReport` is derived from one set of
:class:`~measurement_uncertainty.measurement.OutOperators`, so the entries
are mutually consistent.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .linalg import (
    SLACK_TOL,
    STRUCTURE_TOL,
    DimensionError,
    InvariantError,
    NumericalIntegrityError,
    commutator,
    is_hermitian,
    max_abs,
)
from .measurement import (
    MeasurementModel,
    OutOperators,
    Scenario,
    joint_initial_state,
    out_operators,
    partial_expectation,
)

UNIVERSAL_RELATIONS = ("ozawa", "fujikawa", "robertson_in", "robertson_out")
OBSERVED_RELATIONS = ("heisenberg_naive", "arthurs_kelly")
RELATION_NAMES = UNIVERSAL_RELATIONS + OBSERVED_RELATIONS

UNBIASED_TOL = 1e-10


@dataclass(frozen=True)
class Relation:
    name: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    asserted: bool


@dataclass(frozen=True)
class UnbiasednessFlags:
    measurement_unbiased: bool
    disturbance_unbiased: bool
    # max-abs of P(D), P(A D), P(D A), P(E), P(B E), P(E B) with
    # D = M_out - A_in and E = B_out - B_in
    residuals: tuple


class Chain(NamedTuple):
    lhs: float
    mid: float
    right: float


@dataclass(frozen=True)
class RelationReport:
    epsilon: float
    eta: float
    sigma_a: float
    sigma_b: float
    bar_epsilon: float
    bar_eta: float
    sigma_m_out: float
    sigma_b_out: float
    commutator_bound: float
    out_commutator_bound: float
    relations: tuple
    unbiasedness: UnbiasednessFlags
    variance_residuals: tuple
    chain: Chain

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(f"unknown relation {name!r}; expected one of {', '.join(RELATION_NAMES)}")

    def slack(self, name: str) -> float:
        return self.relation(name).slack

    @property
    def violations(self) -> list:
        """Asserted relations whose slack is below ``-SLACK_TOL``."""
        return [r for r in self.relations if r.asserted and not r.holds]

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "epsilon", "eta", "sigma_a", "sigma_b", "bar_epsilon", "bar_eta",
            "sigma_m_out", "sigma_b_out", "commutator_bound", "out_commutator_bound")}
        out["relations"] = {
            r.name: {"lhs": r.lhs, "rhs": r.rhs, "slack": r.slack,
                     "holds": r.holds, "asserted": r.asserted}
            for r in self.relations
        }
        flags = asdict(self.unbiasedness)
        flags["residuals"] = list(flags["residuals"])
        out["unbiasedness"] = flags
        out["variance_residuals"] = list(self.variance_residuals)
        out["chain"] = self.chain._asdict()
        return out


def _norm(o, s) -> float:
    # sqrt(<s|o^2|s>) for hermitian o, evaluated as ||o s|| so it is >= 0
    return float(np.linalg.norm(o @ s))


def _sd(o, s) -> float:
    mean = np.vdot(s, o @ s).real
    return float(np.linalg.norm(o @ s - mean * s))


def _half_abs_commutator(a, b, s) -> float:
    return 0.5 * abs(np.vdot(s, commutator(a, b) @ s))


def _check(o, s, name):
    o, s = np.asarray(o), np.asarray(s)
    if o.shape[0] != s.shape[0]:
        raise DimensionError(f"{name}: operator dim {o.shape[0]} != state dim {s.shape[0]}")
    if not is_hermitian(o):
        raise InvariantError(f"{name}: operator is not hermitian")
    return o, s


def std_dev(o, s) -> float:
    """Standard deviation ``<(o - <o>)^2>^(1/2)`` of a hermitian ``o`` in state ``s``."""
    o, s = _check(o, s, "std_dev")
    mean = np.vdot(s, o @ s).real
    shifted = o - mean * np.eye(o.shape[0])
    # <(o - <o>)^2> evaluated as <v|v>, v = (o - <o>) s
    v = shifted @ s
    var = np.vdot(v, v).real
    if var < -STRUCTURE_TOL:
        raise NumericalIntegrityError(f"negative variance {var:.3e}")
    return float(np.sqrt(max(var, 0.0)))


def error_epsilon(model: MeasurementModel, a, system) -> float:
    """Root-mean-square noise ``<(M_out - A_in)^2>^(1/2)``."""
    ops = out_operators(model, a, a)
    return _norm(ops.m_out - ops.a_in, joint_initial_state(system, model))


def disturbance_eta(model: MeasurementModel, b, system) -> float:
    """Root-mean-square disturbance ``<(B_out - B_in)^2>^(1/2)``."""
    ops = out_operators(model, b, b)
    return _norm(ops.b_out - ops.b_in, joint_initial_state(system, model))


def _unbiasedness(model, ops: OutOperators, tolerance: float) -> UnbiasednessFlags:
    d = ops.m_out - ops.a_in
    e = ops.b_out - ops.b_in
    res = tuple(max_abs(partial_expectation(x, model)) for x in (
        d, ops.a_in @ d, d @ ops.a_in, e, ops.b_in @ e, e @ ops.b_in))
    return UnbiasednessFlags(
        measurement_unbiased=max(res[:3]) <= tolerance,
        disturbance_unbiased=max(res[3:]) <= tolerance,
        residuals=res,
    )


def unbiasedness(model: MeasurementModel, a, b, tolerance: float = UNBIASED_TOL) -> UnbiasednessFlags:
    """Decide, for all system states at once, whether noise and disturbance are unbiased.

    The measurement is unbiased when ``<D>``, ``<A_in D>`` and ``<D A_in>``
    vanish for every system state, with ``D = M_out - A_in``; this is checked
    on the partial expectations over the apparatus state. The disturbance
    flag is the same test for ``E = B_out - B_in`` and ``B_in``.
    """
    return _unbiasedness(model, out_operators(model, a, b), tolerance)


def _relation(name, lhs, rhs, asserted=True) -> Relation:
    slack = lhs - rhs
    return Relation(name, float(lhs), float(rhs), float(slack), bool(slack >= -SLACK_TOL), asserted)


def _report(model, ops: OutOperators, system, tolerance=UNBIASED_TOL) -> RelationReport:
    psi = joint_initial_state(system, model)
    d = ops.m_out - ops.a_in
    e = ops.b_out - ops.b_in
    eps = _norm(d, psi)
    eta = _norm(e, psi)
    sa = _sd(ops.a_in, psi)
    sb = _sd(ops.b_in, psi)
    smo = _sd(ops.m_out, psi)
    sbo = _sd(ops.b_out, psi)
    bound = _half_abs_commutator(ops.a_in, ops.b_in, psi)
    out_bound = _half_abs_commutator(d, e, psi)
    bar_eps, bar_eta = eps + sa, eta + sb
    flags = _unbiasedness(model, ops, tolerance)
    both = flags.measurement_unbiased and flags.disturbance_unbiased
    relations = (
        _relation("ozawa", eps * eta + sa * eta + eps * sb, bound),
        _relation("fujikawa", bar_eps * bar_eta, 2 * bound),
        _relation("robertson_in", sa * sb, bound),
        _relation("robertson_out", eps * eta, out_bound),
        _relation("heisenberg_naive", eps * eta, bound, asserted=False),
        _relation("arthurs_kelly", smo * sbo, 2 * bound, asserted=both),
    )
    residuals = (abs(smo**2 - eps**2 - sa**2), abs(sbo**2 - eta**2 - sb**2))
    chain = Chain(bar_eps * bar_eta,
                  float(np.sqrt(eps**2 + sa**2) * np.sqrt(eta**2 + sb**2)),
                  smo * sbo)
    return RelationReport(
        epsilon=eps, eta=eta, sigma_a=sa, sigma_b=sb,
        bar_epsilon=bar_eps, bar_eta=bar_eta,
        sigma_m_out=smo, sigma_b_out=sbo,
        commutator_bound=float(bound), out_commutator_bound=float(out_bound),
        relations=relations, unbiasedness=flags,
        variance_residuals=residuals, chain=chain,
    )


def evaluate_relations(model: MeasurementModel, a, b, system) -> RelationReport:
    """Compute every functional and relation for one scenario."""
    return _report(model, out_operators(model, a, b), system)


def evaluate_scenario(scenario: Scenario) -> RelationReport:
    return evaluate_relations(scenario.model, scenario.a, scenario.b, scenario.system)


def decomposition_residual(model: MeasurementModel, a, b):
    """Check the commutator decomposition of ``[M_out, B_out]``.

    Returns ``(residual, commutator_norm)``: the max-abs entry of
    ``[M_out, B_out]`` minus the sum of its four-term splitting through
    ``A_in`` and ``B_in``, and the max-abs entry of ``[M_out, B_out]`` itself.
    """
    ops = out_operators(model, a, b)
    d = ops.m_out - ops.a_in
    e = ops.b_out - ops.b_in
    lhs = commutator(ops.m_out, ops.b_out)
    rhs = (commutator(d, e) + commutator(ops.a_in, e)
           + commutator(d, ops.b_in) + commutator(ops.a_in, ops.b_in))
    return max_abs(lhs - rhs), max_abs(lhs)


def variance_decomposition_check(model: MeasurementModel, a, b, system):
    """``(|s^2(M_out) - eps^2 - s^2(A)|, |s^2(B_out) - eta^2 - s^2(B)|)``.

    Both vanish when the corresponding unbiasedness flag holds; otherwise they
    are reported without any contract.
    """
    return evaluate_relations(model, a, b, system).variance_residuals


def inequality_chain(model: MeasurementModel, a, b, system) -> Chain:
    """``(bar_eps * bar_eta, sqrt(eps^2+s_A^2) sqrt(eta^2+s_B^2), s(M_out) s(B_out))``."""
    return evaluate_relations(model, a, b, system).chain
