"""Shared fixtures: the expensive dim-402 builds are cached per session so the
acceptance suite and the unit tests do not repeat one-period integrations."""

import math

import numpy as np
import pytest

import starkband as sb


@pytest.fixture(scope="session")
def sector55():
    return sb.build_k0_sector(5, 5)


@pytest.fixture(scope="session")
def psi0_unit(sector55):
    return sb.project_initial_state("unit-filling-lower", sector55)


class PresetRuns:
    """Lazily built Floquet spectra and stroboscopic traces for preset_v0_4."""

    def __init__(self, sector, psi0):
        self.sector = sector
        self.psi0 = psi0
        self._parts = {}
        self._spectra = {}
        self._traces = {}

    def params(self, g):
        return sb.preset_v0_4(g)

    def parts(self, g, mask_key="full"):
        key = (g, mask_key)
        if key not in self._parts:
            mask = sb.TermMask() if mask_key == "full" else sb.TermMask.density_cross_only()
            self._parts[key] = sb.build_interaction_picture(self.params(g), self.sector, mask)
        return self._parts[key]

    def spectrum(self, g, mask_key="full"):
        key = (g, mask_key)
        if key not in self._spectra:
            parts = self.parts(g, mask_key)
            u = sb.floquet_operator(parts)
            self._spectra[key] = sb.diagonalize_floquet(u, parts.t_bloch, self.psi0)
        return self._spectra[key]

    def trace(self, g, mask_key="full"):
        """Stroboscopic N_b out to ~1.8x the universal revival estimate."""
        key = (g, mask_key)
        if key not in self._traces:
            p = self.params(g)
            if g > 0:
                n_tb = int(math.ceil(1.8 * sb.revival_estimate_universal(p) / p.t_bloch))
            else:
                n_tb = 6000
            self._traces[key] = sb.stroboscopic_occupations(
                self.spectrum(g, mask_key), self.sector, n_tb
            )
        return self._traces[key]

    def report(self, g):
        p = self.params(g)
        return sb.build_revival_report(
            self.trace(g), self.spectrum(g), sb.revival_estimate_universal(p)
        )


@pytest.fixture(scope="session")
def preset_runs(sector55, psi0_unit):
    return PresetRuns(sector55, psi0_unit)


@pytest.fixture(scope="session")
def continuous_g0_run(sector55, psi0_unit):
    """Direct (not stroboscopic) g=0 run over 600 Bloch periods, T_B/32 sampling."""
    params = sb.preset_v0_4(0.0)
    parts = sb.build_interaction_picture(params, sector55)
    tb = parts.t_bloch
    result = sb.evolve(psi0_unit, parts, 600 * tb, sample_every=tb / 32)
    trace = sb.occupation_series(result, sector55)
    return result, trace
