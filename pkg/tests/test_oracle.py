"""Finite-difference reference solvers."""

import math
import warnings

import numpy as np
import pytest

from postincident.errors import CFLViolation, InvalidGrid, TruncationWarning
from postincident.forward import solve_heat, solve_wave
from postincident.oracle import FDField, FDGrid, compare, fd_heat, fd_wave
from postincident.sources import ModeCombination, Ramp, SmoothBump, Table
from postincident.spectra import Interval, enumerate_spectrum

DOM = Interval(1.0)
SPEC = enumerate_spectrum(DOM, 256)
F = SmoothBump((0.37,), 0.25)


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


def test_grid_validation():
    with pytest.raises(InvalidGrid):
        FDGrid(0.0, 1e-3)
    with pytest.raises(InvalidGrid):
        FDGrid(0.01, 1e-3, "euler")
    with pytest.raises(CFLViolation):
        FDGrid(0.01, 0.02, "leapfrog")
    with pytest.raises(InvalidGrid):
        FDGrid(0.3, 0.01).nodes(DOM)
    assert FDGrid(1 / 64, 1 / 128, "leapfrog").cfl == pytest.approx(0.5)


def test_zero_data_zero_field():
    grid = FDGrid(1 / 64, 1e-3)
    field = fd_heat(DOM, lambda x: np.zeros(len(x)), Table.zero(1.0), grid, 0.5, times=[0.1, 0.5])
    assert not np.any(field.values)
    wgrid = FDGrid(1 / 64, 1 / 128, "leapfrog")
    wfield = fd_wave(DOM, F, Table.zero(1.0), wgrid, 0.5, times=[0.25, 0.5])
    assert not np.any(wfield.values)


def test_homogeneous_eigen_decay():
    phi1 = ModeCombination.of(DOM, {1: 1.0})
    lam1 = math.pi**2
    errs = []
    for h, dt in ((1 / 64, 2e-3), (1 / 128, 1e-3)):
        grid = FDGrid(h, dt)
        x = grid.nodes(DOM)
        field = fd_heat(DOM, F, Table.zero(1.0), grid, 0.2, times=[0.2], initial=phi1(x[:, None]))
        exact = math.exp(-lam1 * 0.2) * phi1(x[:, None])
        errs.append(np.max(np.abs(field.values[0] - exact)))
    assert errs[0] < 5e-4
    assert errs[0] / errs[1] > 3.5


def test_heat_versus_spectral_reference():
    grid = FDGrid(1 / 512, 1e-4)
    times = [0.5, 1.0, 2.0]
    field = fd_heat(DOM, F, Ramp(1.0), grid, 2.0, times=times)
    report = compare(solve_heat(SPEC, F, Ramp(1.0), 128), field)
    assert report.max_error < 1e-3


def test_wave_versus_spectral_reference():
    grid = FDGrid(1 / 512, 1 / 1024, "leapfrog")
    times = [0.5, 1.0, 2.0]
    field = fd_wave(DOM, F, Ramp(1.0), grid, 2.0, times=times)
    report = compare(solve_wave(SPEC, F, Ramp(1.0), 128), field)
    assert report.max_error < 5e-3


@pytest.mark.parametrize("solver", ["heat", "wave"])
def test_second_order_convergence(solver):
    errs = []
    for k in (1, 2):
        h = 1 / (64 * k)
        if solver == "heat":
            grid = FDGrid(h, 4e-3 / k)
            field = fd_heat(DOM, F, Ramp(1.0), grid, 1.2, times=[1.2])
            ref = solve_heat(SPEC, F, Ramp(1.0), 128)
        else:
            grid = FDGrid(h, h / 2, "leapfrog")
            field = fd_wave(DOM, F, Ramp(1.0), grid, 1.25, times=[1.25])
            ref = solve_wave(SPEC, F, Ramp(1.0), 128)
        errs.append(compare(ref, field).max_error)
    assert errs[0] / errs[1] >= 3.5


def test_wave_free_phase_energy():
    grid = FDGrid(1 / 512, 1 / 1024, "leapfrog")
    times = np.arange(1.0, 3.001, 0.25)
    field = fd_wave(DOM, F, Ramp(1.0), grid, 3.0, times=times)
    e = field.energy
    drift_per_time = np.max(np.abs(e - e[0])) / e[0] / (times[-1] - times[0])
    assert drift_per_time < 1e-6


def test_compare_identical_inputs():
    grid = FDGrid(1 / 64, 1e-3)
    field = fd_heat(DOM, F, Ramp(1.0), grid, 1.0, times=[0.5, 1.0])
    assert compare(field, field).max_error == 0.0
    assert compare(field, field, norm="max").max_error == 0.0


def test_compare_rejects_unknown_time():
    grid = FDGrid(1 / 64, 1e-3)
    field = fd_heat(DOM, F, Ramp(1.0), grid, 1.0, times=[0.5, 1.0])
    with pytest.raises(InvalidGrid):
        compare(field, field, times=[0.7])


def test_field_dataclass_shapes():
    grid = FDGrid(1 / 32, 1e-2)
    field = fd_heat(Interval(1.0, "neumann"), F, Ramp(1.0), grid, 0.5, times=[0.1, 0.5])
    assert isinstance(field, FDField)
    assert field.values.shape == (2, 33)


def test_neumann_heat_versus_spectral_reference():
    dom = Interval(1.0, "neumann")
    grid = FDGrid(1 / 256, 2e-4)
    field = fd_heat(dom, F, Ramp(1.0), grid, 1.6, times=[0.4, 1.0, 1.6])
    report = compare(solve_heat(enumerate_spectrum(dom, 128), F, Ramp(1.0), 128), field)
    assert report.max_error < 1e-3
