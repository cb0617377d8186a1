"""Smoke tests for the _rfio extension module."""

import math

import numpy as np
import pytest

import _rfio as rf


@pytest.fixture(scope="module")
def small_setup():
    fgrid = rf.build_polar_grid(-4, 1, 8, 128)
    sgrid = rf.SpatialGrid.lattice(4.0, 12)
    return fgrid, sgrid


def test_grid_basics(small_setup):
    fgrid, sgrid = small_setup
    assert fgrid.n_radial == 6 * 8
    assert abs(fgrid.angular_weight_sum - 4 * math.pi) < 1e-10
    assert sgrid.size == 12**3


def test_flat_gaussian_identity(small_setup):
    fgrid, sgrid = small_setup
    op = rf.FioOperator(rf.PhaseField.flat(), rf.SymbolField.unit(), fgrid, sgrid)
    nodes = np.asarray(fgrid.radial_nodes)
    f = np.exp(-0.5 * nodes[:, None] ** 2) * np.ones((1, fgrid.n_angular))
    uf = np.asarray(rf.apply(op, f.astype(complex)))
    pts = np.asarray(sgrid.points)
    expect = (2 * math.pi) ** 1.5 * np.exp(-0.5 * (pts**2).sum(axis=1))
    rel = np.linalg.norm(uf - expect) / np.linalg.norm(expect)
    assert rel < 2e-3


def test_jet_and_assumptions(small_setup):
    fgrid, sgrid = small_setup
    flat = rf.PhaseField.flat()
    j = rf.jet(flat, (0.3, -0.2, 0.5), (0.0, 0.0, 1.0))
    assert j["a"] == 1.0
    assert j["N"] == (0.0, 0.0, 1.0)
    rep = rf.check_assumptions(flat, fgrid, sgrid, 0.0)
    assert rep["all_pass"]


def test_spectrum_pythagoras(small_setup):
    fgrid, sgrid = small_setup
    op = rf.FioOperator(rf.PhaseField.perturbed(0.05), rf.SymbolField.unit(), fgrid, sgrid)
    f = np.asarray(rf.random_band_limited_density(fgrid, 7))
    sp = rf.spectrum_gamma_j(op, f)
    total = sp["total_norm"]
    assert total > 0
    assert abs(sum(g * g for g in sp["gamma_j"]) - total**2) < 1e-8 * total**2


def test_solve_roundtrip():
    fgrid = rf.build_polar_grid(-5, 1, 8, 96)
    sgrid = rf.SpatialGrid.lattice(4.0, 12)
    pts = np.asarray(sgrid.points)
    phi0 = np.exp(-(pts**2).sum(axis=1)).astype(complex)
    phi1 = np.zeros_like(phi0)
    out = rf.solve_wave_data(rf.PhaseField.flat(), fgrid, sgrid, phi0, phi1, tol=1e-7)
    assert out["converged"]
    assert out["residual"] < 1e-7
    # f+- = F(phi0)/2 for phi1 = 0
    nodes = np.asarray(fgrid.radial_nodes)
    expect = 0.5 * math.pi**1.5 * np.exp(-0.25 * nodes**2) / (2 * math.pi) ** 3
    got = np.asarray(out["f_plus"]).mean(axis=1).real
    rel = np.linalg.norm(got - expect) / np.linalg.norm(expect)
    assert rel < 1e-2
    # t = 0 trace reproduces phi0
    field = np.asarray(rf.evolve_flat(out["f_plus"], out["f_minus"], 0.0, fgrid, sgrid))
    assert np.linalg.norm(field - phi0) / np.linalg.norm(phi0) < 1e-2
