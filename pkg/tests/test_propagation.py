"""Direct integration, the one-period propagator, and stroboscopic evolution.

The heavyweight dim-402 cases live in the acceptance suite; here the same
contracts are exercised on systems small enough to run in seconds.
"""

import math

import numpy as np
import pytest
import scipy.sparse as sparse

import starkband as sb
from starkband.fock import FockState
from starkband.propagation import WaveFunction

SMALL = sb.ModelParams(delta=4.39, c0=-0.15, t_a=0.062, t_b=0.62, w_a=0.03, w_b=0.018,
                       w_x=0.012, g=0.4, force=2.2201, n_particles=2, n_sites=3)


@pytest.fixture(scope="module")
def small_system():
    sector = sb.build_k0_sector(2, 3)
    parts = sb.build_interaction_picture(SMALL, sector)
    psi0 = sb.project_initial_state(FockState((1, 1, 0), (0, 0, 0)), sector)
    return sector, parts, psi0


def _diagonal_parts(energies, force=2.0):
    dim = len(energies)
    zero = sparse.csr_matrix((dim, dim), dtype=complex)
    return sb.HamiltonianParts(
        h_static=sparse.diags(np.asarray(energies, dtype=complex)).tocsr(),
        h_hop=zero, h_hop_dag=zero, basis_dim=dim, force=force,
    )


def test_diagonal_evolution_exact():
    energies = np.array([0.3, -1.1, 2.7])
    parts = _diagonal_parts(energies)
    psi0 = np.array([0.5, 0.5j, math.sqrt(0.5)], dtype=complex)
    result = sb.evolve(psi0, parts, 5.0, sample_every=1.25)
    for snap in result:
        expected = psi0 * np.exp(-1j * energies * snap.time)
        assert np.abs(snap.coords - expected).max() < 1e-10
        assert np.abs(np.abs(snap.coords) - np.abs(psi0)).max() < 1e-10


def test_evolve_two_level_closed_form():
    # hopping masked off leaves a static 2x2; compare against the Rabi solution
    p = sb.ModelParams(**{**SMALL.__dict__, "n_particles": 1, "n_sites": 2, "g": 0.0})
    sector = sb.build_k0_sector(1, 2)
    mask = sb.TermMask(hop_a=False, hop_b=False, tilt=False)
    parts = sb.build_interaction_picture(p, sector, mask)
    psi0 = sb.project_initial_state(FockState((1, 0), (0, 0)), sector)
    result = sb.evolve(psi0, parts, 10.0, sample_every=0.05)
    trace = sb.occupation_series(result, sector)
    v = p.c0 * p.force
    half_gap = math.hypot(0.5 * p.delta, v)
    oracle = (v / half_gap) ** 2 * np.sin(half_gap * trace.times) ** 2
    assert np.abs(trace.values - oracle).max() < 1e-6


def test_evolve_validation():
    parts = _diagonal_parts([1.0, 2.0])
    with pytest.raises(ValueError):
        sb.evolve(np.array([1.0, 0.0]), parts, -1.0, sample_every=0.1)
    with pytest.raises(ValueError):
        sb.evolve(np.array([1.0, 0.0]), parts, 1.0, sample_every=0.0)
    with pytest.raises(ValueError):
        sb.evolve(np.array([1.0, 0.0, 0.0]), parts, 1.0, sample_every=0.1)


def test_evolve_sampling_grid():
    parts = _diagonal_parts([0.5, -0.5])
    result = sb.evolve(np.array([1.0, 0.0], dtype=complex), parts, 1.0, sample_every=0.4)
    assert [round(s.time, 12) for s in result] == [0.0, 0.4, 0.8, 1.0]


def test_floquet_diagonal_case():
    energies = np.array([0.2, 1.4, -0.9])
    parts = _diagonal_parts(energies, force=3.0)
    u = sb.floquet_operator(parts)
    expected = np.diag(np.exp(-1j * energies * parts.t_bloch))
    assert np.abs(u - expected).max() < 1e-10


def test_floquet_unitarity_and_periodicity(small_system):
    sector, parts, psi0 = small_system
    u = sb.floquet_operator(parts)
    defect = np.abs(u.conj().T @ u - np.eye(sector.dim)).max()
    assert defect < 1e-8
    # evolving over two periods equals applying U twice
    result = sb.evolve(psi0, parts, 2 * parts.t_bloch, sample_every=parts.t_bloch)
    assert np.abs(result.snapshots[-1].coords - u @ (u @ psi0)).max() < 1e-8


def test_floquet_dimension_cap():
    parts = _diagonal_parts([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        sb.floquet_operator(parts, dimension_cap=2)


def test_diagonalize_identity():
    psi0 = np.array([0.6, 0.8j], dtype=complex)
    spec = sb.diagonalize_floquet(np.eye(2, dtype=complex), t_bloch=2.0, psi0=psi0)
    assert np.abs(spec.quasi_energies).max() == 0.0
    assert np.abs(np.sort(np.abs(spec.coefficients)) - np.array([0.6, 0.8])).max() < 1e-14
    assert spec.unitarity_defect < 1e-15


def test_spectrum_contracts(small_system):
    sector, parts, psi0 = small_system
    u = sb.floquet_operator(parts)
    spec = sb.diagonalize_floquet(u, parts.t_bloch, psi0)
    lam = np.exp(-1j * spec.quasi_energies * parts.t_bloch)
    # |lambda_n| = 1 and quasi-energies folded into [-F/2, F/2)
    assert np.abs(np.abs(lam) - 1.0).max() < 1e-8
    assert spec.quasi_energies.min() >= -parts.force / 2
    assert spec.quasi_energies.max() < parts.force / 2
    assert np.sum(np.abs(spec.coefficients) ** 2) == pytest.approx(1.0, abs=1e-8)
    # orthonormal eigenvectors
    q = spec.eigen_vectors
    assert np.abs(q.conj().T @ q - np.eye(sector.dim)).max() < 1e-12


def test_stroboscopic_reconstruction(small_system):
    sector, parts, psi0 = small_system
    u = sb.floquet_operator(parts)
    spec = sb.diagonalize_floquet(u, parts.t_bloch, psi0)
    assert np.abs(sb.stroboscopic_evolve(spec, 0).coords - psi0).max() < 1e-8
    for m in (1, 7, 50):
        assert sb.stroboscopic_evolve(spec, m).norm == pytest.approx(1.0, abs=1e-10)


def test_stroboscopic_vs_direct(small_system):
    sector, parts, psi0 = small_system
    u = sb.floquet_operator(parts)
    spec = sb.diagonalize_floquet(u, parts.t_bloch, psi0)
    m = 50
    direct = sb.evolve(psi0, parts, m * parts.t_bloch, sample_every=m * parts.t_bloch)
    assert np.abs(sb.stroboscopic_evolve(spec, m).coords
                  - direct.snapshots[-1].coords).max() < 1e-5


def test_quasi_energy_refolding_is_harmless(small_system):
    # eps_n and eps_n + F generate identical stroboscopic dynamics
    sector, parts, psi0 = small_system
    u = sb.floquet_operator(parts)
    spec = sb.diagonalize_floquet(u, parts.t_bloch, psi0)
    refolded = sb.FloquetSpectrum(
        quasi_energies=spec.quasi_energies + spec.force,
        eigen_vectors=spec.eigen_vectors,
        coefficients=spec.coefficients,
        unitarity_defect=spec.unitarity_defect,
        t_bloch=spec.t_bloch,
    )
    for m in (1, 13, 60):
        a = sb.stroboscopic_evolve(spec, m).coords
        b = sb.stroboscopic_evolve(refolded, m).coords
        assert np.abs(a - b).max() < 1e-9


def test_stroboscopic_occupation_trace(small_system):
    sector, parts, psi0 = small_system
    u = sb.floquet_operator(parts)
    spec = sb.diagonalize_floquet(u, parts.t_bloch, psi0)
    trace = sb.stroboscopic_occupations(spec, sector, 40)
    assert trace.times.size == 41
    assert trace.values[0] == pytest.approx(0.0, abs=1e-12)
    # matches per-sample reconstruction
    for m in (3, 17, 40):
        psi = sb.stroboscopic_evolve(spec, m)
        nb = float((np.abs(psi.coords) ** 2) @ sector.upper_fractions)
        assert trace.values[m] == pytest.approx(nb, abs=1e-12)


def test_occupation_series_trivial_states():
    sector = sb.build_k0_sector(2, 2)
    lower = sb.project_initial_state(FockState((1, 1), (0, 0)), sector)
    upper = sb.project_initial_state(FockState((0, 0), (1, 1)), sector)
    tr = sb.occupation_series([WaveFunction(lower, 0.0), WaveFunction(upper, 1.0)], sector)
    assert tr.values[0] == 0.0
    assert tr.values[1] == 1.0
    with pytest.raises(ValueError):
        sb.occupation_series([], sector)


def test_norm_drift_small_system(small_system):
    sector, parts, psi0 = small_system
    tb = parts.t_bloch
    result = sb.evolve(psi0, parts, 200 * tb, sample_every=200 * tb)
    # drift budget is 1e-8 per 1e3 Bloch periods
    assert result.norm_drift / (200 / 1000) < 1e-8


def test_preset_g0_two_dominant_clusters(preset_runs):
    # without interactions two (degenerate-cluster) weights dominate: the
    # resonant doublet carries ~0.3 each, satellites stay below a third of that
    spec = preset_runs.spectrum(0.0)
    energies, weights = sb.cluster_weights(spec)
    order = np.argsort(weights)[::-1]
    assert weights[order[0]] > 0.25 and weights[order[1]] > 0.25
    assert weights[order[2]] < 0.12
    assert weights[order[2]] < 0.5 * weights[order[1]]
    assert weights.sum() == pytest.approx(1.0, abs=1e-8)


def test_preset_interaction_shifts_quasi_energies(preset_runs):
    # the dominant-pair gap moves measurably when g is turned on
    def dominant_gap(spec):
        energies, weights = sb.cluster_weights(spec)
        top = np.argsort(weights)[::-1][:2]
        gap = abs(energies[top[0]] - energies[top[1]])
        return min(gap, spec.force - gap)

    gap0 = dominant_gap(preset_runs.spectrum(0.0))
    gap2 = dominant_gap(preset_runs.spectrum(0.2))
    assert abs(gap2 - gap0) > 1e-4
