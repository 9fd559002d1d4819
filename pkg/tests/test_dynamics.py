import numpy as np
import pytest

from dqsim.dynamics import (
    ConvergenceError,
    IntegrationError,
    IntegratorConfig,
    SteadyStateError,
    converge_cutoff,
    evolve,
    steady_state,
    steady_state_params,
)
from dqsim.hilbert import SpaceLayout, basis_index, named_state, partial_trace_mode
from dqsim.measures import concurrence, mean_photon_number, trace_distance
from dqsim.model import (
    Schedule,
    SystemParams,
    dissipators,
    hamiltonian_pump,
    hamiltonian_rot,
    liouvillian,
    scheduled_liouvillian,
)
from tests.test_hilbert import random_density

PARAMS = SystemParams(g=1.0, delta=1.0, gamma=1e-5, epsilon=1.0, fock_cutoff=3)


def pumped_liouvillian(params):
    layout = params.layout
    h = hamiltonian_rot(params, layout) + hamiltonian_pump(params.epsilon, layout)
    return liouvillian(h, dissipators(params, layout)), layout


class TestIntegratorConfig:
    def test_defaults(self):
        cfg = IntegratorConfig()
        assert cfg.method == "rk45"
        assert cfg.rtol == 1e-8

    @pytest.mark.parametrize("method", ["rk45", "dop853", "bdf", "expm"])
    def test_accepts_methods(self, method):
        assert IntegratorConfig(method=method).method == method

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            IntegratorConfig(method="euler")

    def test_rejects_bad_tolerances(self):
        with pytest.raises(ValueError):
            IntegratorConfig(rtol=0.0)


class TestEvolve:
    def test_decay_of_excited_qubit(self):
        # oracle: an excited qubit population decays as exp(-2*gamma*t)
        params = SystemParams(g=0.0, delta=0.0, gamma=0.25, epsilon=0.0, fock_cutoff=1)
        sup, layout = pumped_liouvillian(params)
        psi = np.zeros(layout.dim, dtype=complex)
        psi[basis_index(0, 1, 0, layout)] = 1.0  # |e,g>|0>
        rho0 = np.outer(psi, psi.conj())
        times = np.linspace(0.0, 4.0, 9)
        traj = evolve(rho0, sup, (0.0, 4.0), times)
        for t, rho in zip(traj.times, traj.states):
            pop = float(np.real(psi.conj() @ rho @ psi))
            assert pop == pytest.approx(np.exp(-2 * 0.25 * t), abs=1e-7)

    def test_decay_of_photon_state(self):
        # |E> = |g,g>|1> holds one photon and decays at 2*kappa
        params = SystemParams(g=0.0, delta=0.0, gamma=0.0, kappa=1.0, epsilon=0.0, fock_cutoff=1)
        sup, layout = pumped_liouvillian(params)
        psi = named_state("E", layout)
        rho0 = np.outer(psi, psi.conj())
        traj = evolve(rho0, sup, (0.0, 2.0), np.array([0.0, 0.5, 2.0]))
        for t, rho in zip(traj.times, traj.states):
            pop = float(np.real(psi.conj() @ rho @ psi))
            assert pop == pytest.approx(np.exp(-2 * t), abs=1e-7)

    def test_cavity_photon_decay(self):
        # single photon decays at 2*kappa
        params = SystemParams(g=0.0, gamma=0.0, kappa=0.5, epsilon=0.0, fock_cutoff=2)
        layout = params.layout
        sup, _ = pumped_liouvillian(params)
        psi = np.zeros(layout.dim, dtype=complex)
        psi[1] = 1.0  # |e,e>|1> has index 1; any single-photon ket works
        rho0 = np.outer(psi, psi.conj())
        traj = evolve(rho0, sup, (0.0, 3.0), np.array([0.0, 1.0, 3.0]))
        for t, rho in zip(traj.times, traj.states):
            assert mean_photon_number(rho, layout) == pytest.approx(
                np.exp(-2 * 0.5 * t), abs=1e-7
            )

    @pytest.mark.parametrize("method", ["rk45", "dop853", "bdf", "expm"])
    def test_methods_agree(self, method):
        sup, layout = pumped_liouvillian(PARAMS)
        psi = named_state("G0", layout)
        rho0 = np.outer(psi, psi.conj())
        baseline = evolve(rho0, sup, (0.0, 5.0), np.array([5.0]))
        cfg = IntegratorConfig(method=method, rtol=1e-9, atol=1e-11)
        other = evolve(rho0, sup, (0.0, 5.0), np.array([5.0]), cfg)
        assert trace_distance(baseline.states[0], other.states[0]) < 1e-6

    def test_time_dependent_generator(self):
        # with the detuning held at zero, |PsiMinus> is dark for every value
        # of g, so it survives an arbitrary coupling ramp untouched
        layout = SpaceLayout(2)
        params = SystemParams(gamma=0.0, epsilon=0.0, fock_cutoff=2)
        fam = scheduled_liouvillian(
            params, Schedule.constant(0.0), Schedule.tanh_up(2.0, 1.0, 3.0), layout
        )
        assert fam.parts  # genuinely time dependent
        psi = named_state("PsiMinus", layout)
        rho0 = np.outer(psi, psi.conj())
        traj = evolve(rho0, fam, (0.0, 2.0), np.array([2.0]))
        assert float(np.real(psi.conj() @ traj.states[0] @ psi)) == pytest.approx(
            1.0, abs=1e-8
        )

    def test_trace_and_hermiticity_preserved(self):
        sup, layout = pumped_liouvillian(PARAMS)
        rng = np.random.default_rng(41)
        rho0 = random_density(rng, layout.dim)
        traj = evolve(rho0, sup, (0.0, 10.0), np.linspace(0.0, 10.0, 6))
        for rho in traj.states:
            assert abs(np.trace(rho).real - 1.0) < 1e-6
            assert np.max(np.abs(rho - rho.conj().T)) == 0.0  # resymmetrized
            assert float(np.min(np.linalg.eigvalsh(rho))) > -1e-8

    def test_rejects_invalid_initial_state(self):
        sup, layout = pumped_liouvillian(PARAMS)
        with pytest.raises(ValueError, match="initial state"):
            evolve(np.eye(layout.dim, dtype=complex), sup, (0.0, 1.0))

    def test_rejects_samples_outside_span(self):
        sup, layout = pumped_liouvillian(PARAMS)
        psi = named_state("G0", layout)
        rho0 = np.outer(psi, psi.conj())
        with pytest.raises(ValueError, match="sample_times"):
            evolve(rho0, sup, (0.0, 1.0), np.array([2.0]))

    def test_expm_requires_constant_generator(self):
        layout = SpaceLayout(2)
        params = SystemParams(gamma=0.0, epsilon=0.0, fock_cutoff=2)
        fam = scheduled_liouvillian(
            params, Schedule.tanh_down(1.0, 0.5, 1.0), Schedule.constant(1.0), layout
        )
        psi = named_state("E", layout)
        rho0 = np.outer(psi, psi.conj())
        with pytest.raises(ValueError, match="constant"):
            evolve(rho0, fam, (0.0, 1.0), cfg=IntegratorConfig(method="expm"))

    def test_expm_long_horizon_matches_steady_state(self):
        sup, layout = pumped_liouvillian(PARAMS)
        psi = named_state("G0", layout)
        rho0 = np.outer(psi, psi.conj())
        traj = evolve(
            rho0, sup, (0.0, 1e7), np.array([1e7]), IntegratorConfig(method="expm")
        )
        assert trace_distance(traj.states[0], steady_state(sup, layout)) < 1e-8


class TestSteadyState:
    def test_pure_decay_ground_state(self):
        params = SystemParams(g=0.0, gamma=0.5, epsilon=0.0, fock_cutoff=2)
        sup, layout = pumped_liouvillian(params)
        rho = steady_state(sup, layout)
        g0 = named_state("G0", layout)
        assert float(np.real(g0.conj() @ rho @ g0)) == pytest.approx(1.0, abs=1e-12)

    def test_driven_empty_cavity_photon_number(self):
        # oracle: decoupled driven cavity settles at <n> = (epsilon/kappa)^2
        params = SystemParams(g=0.0, delta=0.0, gamma=1.0, kappa=1.0, epsilon=0.3, fock_cutoff=12)
        sup, layout = pumped_liouvillian(params)
        rho = steady_state(sup, layout)
        assert mean_photon_number(rho, layout) == pytest.approx(0.09, rel=1e-6)

    def test_zero_residual(self):
        sup, layout = pumped_liouvillian(PARAMS)
        rho = steady_state(sup, layout)
        vec = rho.reshape(-1, order="F")
        assert np.max(np.abs(sup @ vec)) < 1e-10

    def test_agrees_with_long_time_evolution(self):
        sup, layout = pumped_liouvillian(PARAMS)
        psi = named_state("G0", layout)
        rho0 = np.outer(psi, psi.conj())
        traj = evolve(
            rho0, sup, (0.0, 2e6), np.array([2e6]), IntegratorConfig(method="expm")
        )
        assert trace_distance(traj.states[0], steady_state(sup, layout)) < 1e-6

    def test_degenerate_manifold_rejected(self):
        # no dissipation at all: every density matrix commuting with H is
        # stationary, so the solve must refuse
        layout = SpaceLayout(1)
        h = hamiltonian_rot(SystemParams(g=1.0, delta=0.5, fock_cutoff=1), layout)
        sup = liouvillian(h, [])
        with pytest.raises(SteadyStateError):
            steady_state(sup, layout)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            steady_state(np.zeros((10, 10)))

    def test_params_wrapper(self):
        rho, layout, residual = steady_state_params(PARAMS)
        assert rho.shape == (layout.dim, layout.dim)
        assert residual < 1e-10

    def test_flip_detuning_symmetry(self):
        # swapping which qubit is above/below the mode frequency mirrors the
        # state but leaves the entanglement unchanged
        rho_a, layout, _ = steady_state_params(PARAMS)
        rho_b, _, _ = steady_state_params(PARAMS, flip_detuning=True)
        ca = concurrence(partial_trace_mode(rho_a, layout))
        cb = concurrence(partial_trace_mode(rho_b, layout))
        assert ca == pytest.approx(cb, abs=1e-10)


class TestConvergeCutoff:
    def test_weak_pump_converges_fast(self):
        # with a very weak pump almost no photons are present, so the
        # smallest cutoffs already agree
        params = SystemParams(g=1.0, delta=0.1, gamma=1e-5, epsilon=1e-3, fock_cutoff=1)
        n, value = converge_cutoff(
            params,
            lambda rho, layout: concurrence(partial_trace_mode(rho, layout)),
            tol=1e-6,
        )
        assert n <= 3
        ref, _, _ = steady_state_params(
            SystemParams(g=1.0, delta=0.1, gamma=1e-5, epsilon=1e-3, fock_cutoff=n + 1)
        )
        layout = SpaceLayout(n + 1)
        assert value == pytest.approx(concurrence(partial_trace_mode(ref, layout)))

    def test_nonconvergence_raises(self):
        params = SystemParams(g=1.0, delta=0.1, gamma=1e-5, epsilon=1.0, fock_cutoff=1)
        with pytest.raises(ConvergenceError):
            converge_cutoff(
                params,
                lambda rho, layout: concurrence(partial_trace_mode(rho, layout)),
                tol=1e-12,
                max_cutoff=3,
            )

    def test_rejects_bad_start(self):
        with pytest.raises(ValueError):
            converge_cutoff(PARAMS, lambda rho, layout: 0.0, start_cutoff=0)


def test_integration_error_carries_time():
    err = IntegrationError("boom", 1.5)
    assert err.time == 1.5
    assert "1.5" in str(err)
