"""Hamiltonians, dissipators, Liouvillian superoperators and drive schedules.

Rates follow the source convention in which each dissipator contributes
``rate * (2 L rho L^dag - L^dag L rho - rho L^dag L)`` to drho/dt.  The
qubit decay rate ``gamma`` and mode decay rate ``kappa`` are therefore HALF
the rates of the conventional ``D[L] = L rho L^dag - {L^dag L, rho}/2``
form: a single excitation of the mode decays at 2*kappa.

All rates are in units of kappa and all times in units of 1/kappa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    SIGMA_EE,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SpaceLayout,
    annihilation,
    embed,
)

__all__ = [
    "SystemParams",
    "Schedule",
    "LiouvillianFamily",
    "hamiltonian_lab",
    "hamiltonian_rot",
    "hamiltonian_pump",
    "hamiltonian_reduced",
    "dissipators",
    "liouvillian",
    "schedule_value",
    "scheduled_liouvillian",
]


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters, all in units of kappa (times in 1/kappa).

    The lab-frame qubit frequencies are derived, never stored:
    omega_e1 = omega_m - delta and omega_e2 = omega_m + delta.
    """

    g: float = 0.0
    delta: float = 0.0
    gamma: float = 0.0
    kappa: float = 1.0
    epsilon: float = 0.0
    fock_cutoff: int = 5
    omega_m: float = 0.0

    def __post_init__(self):
        for name in ("g", "delta", "gamma", "kappa", "epsilon"):
            v = getattr(self, name)
            if v < 0:
                raise ValueError(f"{name} must be >= 0, got {v}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")

    @property
    def omega_e1(self) -> float:
        return self.omega_m - self.delta

    @property
    def omega_e2(self) -> float:
        return self.omega_m + self.delta

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(self.fock_cutoff)


@dataclass(frozen=True)
class Schedule:
    """Time profile of a drive parameter.

    kind "constant" returns ``value`` for every t.  kind "tanh_down" is
    (max_value/2)*[1 - tanh(rate*(t - t0))]; "tanh_up" flips the sign of
    the tanh term.  Both ramps pass through max_value/2 at t = t0.
    """

    kind: str
    value: float = 0.0
    max_value: float = 0.0
    t0: float = 0.0
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "tanh_down", "tanh_up"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind != "constant" and self.rate <= 0:
            raise ValueError("tanh schedules need rate > 0")

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls(kind="constant", value=value)

    @classmethod
    def tanh_down(cls, max_value: float, t0: float, rate: float) -> "Schedule":
        return cls(kind="tanh_down", max_value=max_value, t0=t0, rate=rate)

    @classmethod
    def tanh_up(cls, max_value: float, t0: float, rate: float) -> "Schedule":
        return cls(kind="tanh_up", max_value=max_value, t0=t0, rate=rate)

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.value
        ramp = np.tanh(self.rate * (t - self.t0))
        if self.kind == "tanh_down":
            return 0.5 * self.max_value * (1.0 - ramp)
        return 0.5 * self.max_value * (1.0 + ramp)


def schedule_value(schedule: Schedule, t: float) -> float:
    """Value of a schedule at time t."""
    return schedule(t)


def hamiltonian_lab(params: SystemParams, layout: SpaceLayout) -> np.ndarray:
    """Lab-frame Hamiltonian.

    omega_e1*see1 + omega_e2*see2 + omega_m*a^dag a
    + g*[a*(sp1 + sp2) + h.c.] with omega_e(1,2) = omega_m -/+ delta.
    """
    a = embed(annihilation(layout.fock_cutoff), 2, layout)
    see1 = embed(SIGMA_EE, 0, layout)
    see2 = embed(SIGMA_EE, 1, layout)
    sp = embed(SIGMA_PLUS, 0, layout) + embed(SIGMA_PLUS, 1, layout)
    coupling = params.g * (a @ sp)
    return (
        params.omega_e1 * see1
        + params.omega_e2 * see2
        + params.omega_m * (a.conj().T @ a)
        + coupling
        + coupling.conj().T
    )


def hamiltonian_rot(
    params: SystemParams, layout: SpaceLayout, *, flip_detuning: bool = False
) -> np.ndarray:
    """Rotating-frame Hamiltonian delta*(see1 - see2) + g*[a*(sp1+sp2) + h.c.].

    ``flip_detuning`` swaps the sign of the detuning term (equivalent to
    relabeling the qubits); physical results such as the concurrence are
    identical under the flip.
    """
    sign = -1.0 if flip_detuning else 1.0
    a = embed(annihilation(layout.fock_cutoff), 2, layout)
    see1 = embed(SIGMA_EE, 0, layout)
    see2 = embed(SIGMA_EE, 1, layout)
    sp = embed(SIGMA_PLUS, 0, layout) + embed(SIGMA_PLUS, 1, layout)
    coupling = params.g * (a @ sp)
    return sign * params.delta * (see1 - see2) + coupling + coupling.conj().T


def hamiltonian_pump(epsilon: float, layout: SpaceLayout) -> np.ndarray:
    """Coherent pump of the mode, epsilon*(a^dag + a)."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    a = embed(annihilation(layout.fock_cutoff), 2, layout)
    return epsilon * (a + a.conj().T)


def hamiltonian_reduced(g: float, delta: float) -> np.ndarray:
    """Single-excitation Hamiltonian on the ordered basis (E, PsiPlus, PsiMinus).

    Couplings are sqrt(2)*g between E and PsiPlus and delta between
    PsiPlus and PsiMinus.
    """
    if g < 0 or delta < 0:
        raise ValueError("g and delta must be >= 0")
    s2g = np.sqrt(2.0) * g
    return np.array(
        [
            [0.0, s2g, 0.0],
            [s2g, 0.0, delta],
            [0.0, delta, 0.0],
        ],
        dtype=complex,
    )


def dissipators(params: SystemParams, layout: SpaceLayout) -> list[tuple[np.ndarray, float]]:
    """Jump operators with their half-convention rates.

    Returns [(sigma_minus_1, gamma), (sigma_minus_2, gamma), (a, kappa)];
    each pair (L, r) contributes r*(2 L rho L^dag - L^dag L rho - rho L^dag L).
    """
    return [
        (embed(SIGMA_MINUS, 0, layout), params.gamma),
        (embed(SIGMA_MINUS, 1, layout), params.gamma),
        (embed(annihilation(layout.fock_cutoff), 2, layout), params.kappa),
    ]


def lindblad_rhs(
    rho: np.ndarray, h: np.ndarray, jumps: list[tuple[np.ndarray, float]]
) -> np.ndarray:
    """Master-equation right-hand side evaluated directly on a matrix."""
    drho = -1j * (h @ rho - rho @ h)
    for op, rate in jumps:
        if rate == 0.0:
            continue
        opd = op.conj().T
        opdop = opd @ op
        drho += rate * (2.0 * (op @ rho @ opd) - opdop @ rho - rho @ opdop)
    return drho


def liouvillian(
    h: np.ndarray, jumps: list[tuple[np.ndarray, float]] | None = None
) -> np.ndarray:
    """Superoperator L with L @ vec(rho) = vec(drho/dt), column stacking.

    vec stacks columns, so vec(A X B) = (B^T kron A) vec(X).
    """
    d = h.shape[0]
    if h.shape != (d, d):
        raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
    ident = np.eye(d, dtype=complex)
    sup = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
    for op, rate in jumps or []:
        if op.shape != (d, d):
            raise ValueError(
                f"jump operator shape {op.shape} does not match Hamiltonian dimension {d}"
            )
        if rate == 0.0:
            continue
        opd = op.conj().T
        opdop = opd @ op
        sup += rate * (
            2.0 * np.kron(op.conj(), op)
            - np.kron(ident, opdop)
            - np.kron(opdop.T, ident)
        )
    return sup


@dataclass(frozen=True)
class LiouvillianFamily:
    """Time-dependent Liouvillian L(t) = base + sum_i coeff_i(t) * part_i.

    The parts are precomputed constant superoperators; evaluation at a
    time costs only scalar schedule evaluations plus matrix arithmetic,
    so adaptive integrators can sample arbitrary off-grid times cheaply.
    """

    base: np.ndarray
    parts: tuple[tuple[Schedule, np.ndarray], ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.base.shape[0])))

    def value(self, t: float) -> np.ndarray:
        out = self.base.copy()
        for sched, part in self.parts:
            out += sched(t) * part
        return out

    def apply(self, t: float, vec: np.ndarray) -> np.ndarray:
        out = self.base @ vec
        for sched, part in self.parts:
            out += sched(t) * (part @ vec)
        return out


def scheduled_liouvillian(
    params: SystemParams,
    delta_schedule: Schedule,
    g_schedule: Schedule,
    layout: SpaceLayout,
    *,
    flip_detuning: bool = False,
) -> LiouvillianFamily:
    """Liouvillian family for time-dependent detuning and coupling.

    The static part carries the dissipators and the pump (params.epsilon);
    params.delta and params.g are ignored in favor of the schedules.
    """
    unit = SystemParams(g=1.0, delta=0.0, kappa=params.kappa, fock_cutoff=layout.fock_cutoff)
    h_g = hamiltonian_rot(unit, layout)  # pure coupling term at g = 1
    unit_d = SystemParams(g=0.0, delta=1.0, kappa=params.kappa, fock_cutoff=layout.fock_cutoff)
    h_delta = hamiltonian_rot(unit_d, layout, flip_detuning=flip_detuning)
    base = liouvillian(hamiltonian_pump(params.epsilon, layout), dissipators(params, layout))
    parts = []
    for sched, h_part in ((delta_schedule, h_delta), (g_schedule, h_g)):
        if sched.kind == "constant":
            base = base + sched.value * liouvillian(h_part)
        else:
            parts.append((sched, liouvillian(h_part)))
    return LiouvillianFamily(base=base, parts=tuple(parts))
