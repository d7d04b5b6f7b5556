"""Indirect measurement models and their Heisenberg-picture operators.

A model couples a system of dimension ``dim_system`` to an apparatus
prepared in ``apparatus_state`` through the joint unitary ``interaction``;
the reading is the apparatus observable ``meter``. With ``U`` the
interaction, the operators after the coupling are

    M_out = U^dagger (I x M) U,      B_out = U^dagger (B x I) U,

and the operators before it are A_in = A x I, B_in = B x I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    UNITARY_TOL,
    DimensionError,
    InvariantError,
    as_operator,
    as_state,
    basis_state,
    commutator,
    max_abs,
    spin,
    tensor,
)


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    dim_system: int
    dim_apparatus: int
    apparatus_state: np.ndarray
    interaction: np.ndarray
    meter: np.ndarray

    def __post_init__(self):
        if self.dim_system < 1 or self.dim_apparatus < 1:
            raise InvariantError("model dimensions must be positive")
        xi = as_state(self.apparatus_state, name="apparatus_state")
        u = as_operator(self.interaction, unitary=True, name="interaction")
        m = as_operator(self.meter, hermitian=True, name="meter")
        if xi.shape[0] != self.dim_apparatus:
            raise DimensionError(
                f"apparatus_state has dim {xi.shape[0]}, expected {self.dim_apparatus}")
        if m.shape[0] != self.dim_apparatus:
            raise DimensionError(f"meter has dim {m.shape[0]}, expected {self.dim_apparatus}")
        joint = self.dim_system * self.dim_apparatus
        if u.shape[0] != joint:
            raise DimensionError(f"interaction has dim {u.shape[0]}, expected {joint}")
        object.__setattr__(self, "apparatus_state", xi)
        object.__setattr__(self, "interaction", u)
        object.__setattr__(self, "meter", m)

    @property
    def dim_joint(self) -> int:
        return self.dim_system * self.dim_apparatus


@dataclass(frozen=True, eq=False)
class OutOperators:
    m_out: np.ndarray
    b_out: np.ndarray
    a_in: np.ndarray
    b_in: np.ndarray


@dataclass(frozen=True, eq=False)
class Scenario:
    """A model together with the observable pair and the system state."""
    model: MeasurementModel
    a: np.ndarray
    b: np.ndarray
    system: np.ndarray


def _hermitize(x: np.ndarray) -> np.ndarray:
    # removes the O(1e-16) anti-hermitian part left by the conjugation
    h = (x + x.conj().T) / 2
    h.setflags(write=False)
    return h


def out_operators(model: MeasurementModel, a, b) -> OutOperators:
    """Heisenberg-picture operators of ``model`` for the observable pair (a, b)."""
    ds, da = model.dim_system, model.dim_apparatus
    a = as_operator(a, hermitian=True, name="A")
    b = as_operator(b, hermitian=True, name="B")
    for name, op in (("A", a), ("B", b)):
        if op.shape[0] != ds:
            raise DimensionError(f"{name} has dim {op.shape[0]}, expected {ds}")
    u = model.interaction
    if max_abs(u @ u.conj().T - np.eye(u.shape[0])) > UNITARY_TOL:
        raise InvariantError("interaction is not unitary")
    ud = u.conj().T
    b_in = tensor(b, np.eye(da))
    ops = OutOperators(
        m_out=_hermitize(ud @ tensor(np.eye(ds), model.meter) @ u),
        b_out=_hermitize(ud @ b_in @ u),
        a_in=_hermitize(tensor(a, np.eye(da))),
        b_in=_hermitize(b_in),
    )
    dev = max_abs(commutator(ops.m_out, ops.b_out))
    if dev > UNITARY_TOL:
        raise InvariantError(f"[M_out, B_out] does not vanish (max entry {dev:.3e})")
    return ops


def joint_initial_state(system, model: MeasurementModel) -> np.ndarray:
    """``|psi> x |xi>`` under the system-first index convention."""
    psi = np.asarray(system)
    if psi.shape[0] != model.dim_system:
        raise DimensionError(
            f"system state has dim {psi.shape[0]}, expected {model.dim_system}")
    joint = np.kron(psi, model.apparatus_state)
    joint.setflags(write=False)
    return joint


def partial_expectation(x, model: MeasurementModel) -> np.ndarray:
    """System operator with entries ``<i x xi| x |j x xi>``.

    ``<psi x xi| X |psi x xi> = <psi| P(X) |psi>`` for every system state, so
    ``P(X) = 0`` is the operator form of "the expectation vanishes for all psi".
    """
    ds, da = model.dim_system, model.dim_apparatus
    xi = model.apparatus_state
    blocks = np.asarray(x).reshape(ds, da, ds, da)
    return np.einsum("a,iajb,b->ij", xi.conj(), blocks, xi)


def spin_projectors(theta: float, phi: float):
    """Eigenprojectors (+1, -1) of the spin observable along (theta, phi)."""
    a = spin(theta, phi)
    eye = np.eye(2)
    return (eye + a) / 2, (eye - a) / 2


def controlled_flip(strength: float) -> np.ndarray:
    """Apparatus rotation ``exp(i alpha (I - X)/2)`` with ``alpha = strength * pi``.

    Equal to ``exp(-i alpha X/2)`` up to a global phase chosen so that
    strength 1 gives exactly the bit flip X and strength 0 the identity.
    """
    w = np.exp(1j * np.pi * strength)
    return np.array([[(1 + w) / 2, (1 - w) / 2], [(1 - w) / 2, (1 + w) / 2]], dtype=complex)


def builtin_cnot_model(theta: float, phi: float) -> MeasurementModel:
    """Precise qubit measurement of ``spin(theta, phi)``.

    A controlled-NOT whose control is the eigenbasis of the measured spin
    writes the outcome onto an apparatus qubit prepared in ``|0>`` and read by
    ``sigma_z``. At ``theta = 0`` the interaction is the textbook CNOT.
    """
    p_up, p_down = spin_projectors(theta, phi)
    u = tensor(p_up, np.eye(2)) + tensor(p_down, np.array([[0, 1], [1, 0]]))
    return MeasurementModel(2, 2, basis_state(2, 0), u, np.diag([1.0, -1.0]))


def builtin_partial_model(strength: float, theta: float, phi: float) -> MeasurementModel:
    """Qubit measurement interpolating between no coupling (0) and the CNOT model (1).

    The apparatus is rotated about x by ``strength * pi`` when the system is
    in the -1 eigenspace of ``spin(theta, phi)``.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must lie in [0, 1], got {strength}")
    p_up, p_down = spin_projectors(theta, phi)
    u = tensor(p_up, np.eye(2)) + tensor(p_down, controlled_flip(strength))
    return MeasurementModel(2, 2, basis_state(2, 0), u, np.diag([1.0, -1.0]))


def identity_model(dim_system: int, meter, apparatus_state) -> MeasurementModel:
    """No coupling at all: ``U = I``."""
    meter = np.asarray(meter)
    return MeasurementModel(dim_system, meter.shape[0], apparatus_state,
                            np.eye(dim_system * meter.shape[0]), meter)
