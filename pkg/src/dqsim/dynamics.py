"""Time evolution and steady-state solvers for the master equation.

Density matrices are vectorized by column stacking (Fortran order), so a
Liouvillian matrix L satisfies L @ vec(rho) = vec(drho/dt).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .hilbert import SpaceLayout, check_density_matrix
from .model import (
    LiouvillianFamily,
    SystemParams,
    dissipators,
    hamiltonian_pump,
    hamiltonian_rot,
    liouvillian,
)

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "SteadyStateError",
    "ConvergenceError",
    "evolve",
    "steady_state",
    "converge_cutoff",
]


class IntegrationError(RuntimeError):
    """Time integration failed; carries the time at which it gave up."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t = {time:.6g})")
        self.time = time


class SteadyStateError(RuntimeError):
    """Steady-state solve failed (singular or degenerate system)."""


class ConvergenceError(RuntimeError):
    """Fock-cutoff convergence search exhausted the supported range."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive integrator settings.

    ``method`` is "rk45" or "dop853" (explicit embedded Runge-Kutta pairs),
    "bdf" (implicit multistep), or "expm" (spectral propagator: one
    eigendecomposition of L, then exact evaluation of exp(L t) at each
    sample).  "bdf" and "expm" require a constant Liouvillian; "expm" is
    the method of choice for long, weakly damped horizons where stepping
    methods would need millions of steps.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = np.inf
    first_step: float | None = None
    method: str = "rk45"

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.method not in ("rk45", "dop853", "bdf", "expm"):
            raise ValueError(f"unknown integrator method {self.method!r}")


@dataclass
class Trajectory:
    """Time-ordered density-matrix samples plus derived observable columns."""

    times: np.ndarray
    states: list[np.ndarray]
    observables: dict[str, np.ndarray] = field(default_factory=dict)


_SCIPY_METHOD = {"rk45": "RK45", "dop853": "DOP853", "bdf": "BDF"}


def _vec(rho: np.ndarray) -> np.ndarray:
    return np.reshape(rho, -1, order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.reshape(v, (d, d), order="F")


def _as_applier(generator) -> tuple[Callable[[float, np.ndarray], np.ndarray], bool, np.ndarray | None]:
    """Normalize a generator into apply(t, v); also report constancy."""
    if isinstance(generator, LiouvillianFamily):
        if not generator.parts:
            mat = generator.base
            return (lambda t, v: mat @ v), True, mat
        return generator.apply, False, None
    if isinstance(generator, np.ndarray):
        mat = generator
        return (lambda t, v: mat @ v), True, mat
    if callable(generator):
        return (lambda t, v: generator(t) @ v), False, None
    raise TypeError(f"unsupported generator type {type(generator)!r}")


def evolve(
    rho0: np.ndarray,
    generator,
    t_span: tuple[float, float],
    sample_times: Sequence[float] | None = None,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate drho/dt = L(t) rho from t_span[0] to t_span[1].

    ``generator`` is a constant Liouvillian matrix, a LiouvillianFamily,
    or a callable t -> matrix.  States are re-symmetrized to (rho+rho^dag)/2
    at the sample points only; trace preservation within 1e-6 and
    Hermiticity within 1e-8 are enforced at every sample.
    """
    cfg = cfg or IntegratorConfig()
    rho0 = np.asarray(rho0, dtype=complex)
    try:
        check_density_matrix(rho0)
    except ValueError as exc:
        raise ValueError(f"invalid initial state: {exc}") from exc
    d = rho0.shape[0]

    t0, t1 = float(t_span[0]), float(t_span[1])
    if sample_times is None:
        sample_times = np.array([t0, t1])
    sample_times = np.asarray(sample_times, dtype=float)
    if sample_times.size and (sample_times[0] < t0 - 1e-15 or sample_times[-1] > t1 + 1e-15):
        raise ValueError("sample_times must lie within t_span")

    apply, constant, mat = _as_applier(generator)
    if cfg.method in ("bdf", "expm") and not constant:
        raise ValueError(f"{cfg.method} integration supports constant Liouvillians only")

    if cfg.method == "expm":
        return _evolve_expm(rho0, mat, sample_times)

    kwargs: dict = dict(
        method=_SCIPY_METHOD[cfg.method],
        t_eval=sample_times,
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.max_step,
    )
    if cfg.first_step is not None:
        kwargs["first_step"] = cfg.first_step

    if cfg.method == "bdf":
        # scipy's BDF needs a real-valued system: stack Re and Im parts.
        a, b = mat.real, mat.imag
        jac = np.block([[a, -b], [b, a]])
        y0 = np.concatenate([_vec(rho0).real, _vec(rho0).imag])
        sol = solve_ivp(lambda t, y: jac @ y, (t0, t1), y0, jac=lambda t, y: jac, **kwargs)
    else:
        sol = solve_ivp(lambda t, y: apply(t, y), (t0, t1), _vec(rho0), **kwargs)

    if sol.status != 0 or not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else t0
        raise IntegrationError(f"integration failed: {sol.message}", t_fail)

    states = []
    for k in range(sol.t.size):
        if cfg.method == "bdf":
            v = sol.y[: d * d, k] + 1j * sol.y[d * d :, k]
        else:
            v = sol.y[:, k]
        rho = _unvec(v, d)
        herm = np.max(np.abs(rho - rho.conj().T))
        tr = np.trace(rho).real
        if herm > 1e-8 or abs(tr - 1.0) > 1e-6:
            raise IntegrationError(
                f"sampled state violates density-matrix invariants "
                f"(hermiticity defect {herm:.3e}, trace {tr:.12g})",
                float(sol.t[k]),
            )
        states.append(0.5 * (rho + rho.conj().T))
    return Trajectory(times=sol.t.copy(), states=states)


def _evolve_expm(rho0: np.ndarray, mat: np.ndarray, sample_times: np.ndarray) -> Trajectory:
    """Sample exp(L t) rho0 via one eigendecomposition of L."""
    d = rho0.shape[0]
    w, vr = np.linalg.eig(mat)
    # Stationary eigenvalues come out as O(eps)*||L|| instead of exactly 0;
    # left unclamped they drift the trace by exp(Re(w) t) - 1 at large t.
    w[np.abs(w) <= 1e-12 * np.max(np.abs(w))] = 0.0
    try:
        coeff = np.linalg.solve(vr, _vec(rho0))
    except np.linalg.LinAlgError as exc:
        raise IntegrationError(f"Liouvillian eigenbasis is singular: {exc}", float(sample_times[0])) from exc
    states = []
    for t in sample_times:
        rho = _unvec(vr @ (np.exp(w * t) * coeff), d)
        herm = np.max(np.abs(rho - rho.conj().T))
        tr = np.trace(rho).real
        if herm > 1e-8 or abs(tr - 1.0) > 1e-6:
            raise IntegrationError(
                f"sampled state violates density-matrix invariants "
                f"(hermiticity defect {herm:.3e}, trace {tr:.12g})",
                float(t),
            )
        states.append(0.5 * (rho + rho.conj().T))
    return Trajectory(times=np.asarray(sample_times, dtype=float).copy(), states=states)


def steady_state(
    sup: np.ndarray,
    layout: SpaceLayout | None = None,
    *,
    residual_tol: float = 1e-10,
    positivity_tol: float = 1e-8,
) -> np.ndarray:
    """Unique steady state of a Liouvillian, via a dense linear solve.

    Solves L vec(rho) = 0 with the first equation replaced by the trace
    constraint tr(rho) = 1.  Raises SteadyStateError when the system is
    singular, when the residual ||L vec(rho)||_inf exceeds residual_tol
    (degenerate steady-state manifold), or when the result has an
    eigenvalue below -positivity_tol.
    """
    sup = np.asarray(sup, dtype=complex)
    d2 = sup.shape[0]
    d = int(round(np.sqrt(d2)))
    if sup.shape != (d2, d2) or d * d != d2:
        raise ValueError(f"Liouvillian shape {sup.shape} is not a square over a square dimension")
    if layout is not None and layout.dim != d:
        raise ValueError(f"layout dimension {layout.dim} does not match Liouvillian dimension {d}")

    a = sup.copy()
    a[0, :] = 0.0
    a[0, np.arange(d) * (d + 1)] = 1.0  # trace row on the diagonal entries of vec(rho)
    b = np.zeros(d2, dtype=complex)
    b[0] = 1.0
    try:
        v = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SteadyStateError(f"steady-state system is singular: {exc}") from exc

    residual = float(np.max(np.abs(sup @ v)))
    if residual > residual_tol:
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} exceeds {residual_tol:.1e}; "
            "the steady-state manifold may be degenerate"
        )
    rho = _unvec(v, d)
    rho = 0.5 * (rho + rho.conj().T)
    lam_min = float(np.min(np.linalg.eigvalsh(rho)))
    if lam_min < -positivity_tol:
        raise SteadyStateError(f"steady state has eigenvalue {lam_min:.3e} below -{positivity_tol}")
    return rho


def steady_state_params(
    params: SystemParams, *, flip_detuning: bool = False
) -> tuple[np.ndarray, SpaceLayout, float]:
    """Steady state for pumped rotating-frame parameters.

    Convenience wrapper: builds H_rot + H_pump and the three dissipators,
    then solves.  Returns (rho, layout, residual_inf_norm).
    """
    layout = params.layout
    h = hamiltonian_rot(params, layout, flip_detuning=flip_detuning) + hamiltonian_pump(
        params.epsilon, layout
    )
    sup = liouvillian(h, dissipators(params, layout))
    rho = steady_state(sup, layout)
    residual = float(np.max(np.abs(sup @ _vec(rho))))
    return rho, layout, residual


def converge_cutoff(
    params: SystemParams,
    observable: Callable[[np.ndarray, SpaceLayout], float],
    start_cutoff: int = 1,
    tol: float = 1e-6,
    *,
    max_cutoff: int = 8,
    flip_detuning: bool = False,
) -> tuple[int, float]:
    """Smallest cutoff N with |obs(N+1) - obs(N)| < tol, with obs(N+1).

    The observable receives the steady state and its layout.  The search
    is capped at max_cutoff; non-convergence raises ConvergenceError.
    """
    if start_cutoff < 1:
        raise ValueError(f"start_cutoff must be >= 1, got {start_cutoff}")

    def obs_at(n: int) -> float:
        p = SystemParams(
            g=params.g,
            delta=params.delta,
            gamma=params.gamma,
            kappa=params.kappa,
            epsilon=params.epsilon,
            fock_cutoff=n,
            omega_m=params.omega_m,
        )
        rho, layout, _ = steady_state_params(p, flip_detuning=flip_detuning)
        return observable(rho, layout)

    prev = obs_at(start_cutoff)
    for n in range(start_cutoff, max_cutoff):
        cur = obs_at(n + 1)
        if abs(cur - prev) < tol:
            return n, cur
        prev = cur
    raise ConvergenceError(
        f"observable did not converge to {tol:.1e} by cutoff {max_cutoff}"
    )
