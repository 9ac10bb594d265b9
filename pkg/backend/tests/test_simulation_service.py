import math

import numpy as np
import pytest

from app.core.errors import (
    DegenerateDenominator,
    FlatCurve,
    InvalidParameterError,
    InvalidSweepSpec,
)
from app.physics.mirror_em import radiative_correction
from app.physics.steady_closed import local_visibility, p3_closed
from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.sweep import OUTPUT_ORDER, SweepSpec
from app.services.simulation_service import (
    FIG5_ATOM,
    SimulationService,
)

# 10 个调制周期，每周期约 70 个采样点
R_GRID = dict(lo=1.0, hi=6.0, count=701)


@pytest.fixture
def service():
    return SimulationService(max_workers=4, show_progress=False, chunk_size=16)


def _spec(atom, **kwargs):
    data = dict(variable="r", lo=1.0, hi=6.0, count=201, atom=atom, mirror=MirrorConfig(r=1.0))
    data.update(kwargs)
    return SweepSpec(**data)


def test_sweep_spec_validation(fig4_atom):
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, lo=2.0, hi=1.0)
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, count=1)
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, outputs=[])
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, outputs=["P3", "P3"])
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, lo=0.0)
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, variable="omega1", lo=-1.0, hi=1.0)
    with pytest.raises(InvalidSweepSpec):
        _spec(fig4_atom, hi=math.inf)


def test_two_point_sweep(service, fig4_atom):
    result = service.run_sweep(_spec(fig4_atom, count=2))
    assert len(result) == 2
    assert result.grid == [1.0, 6.0]
    assert list(result.columns) == ["r", "k31r", *OUTPUT_ORDER]
    assert result.headers()[0] == "r [lambda31]"


def test_sweep_matches_pointwise_evaluation(service, fig4_atom):
    result = service.run_sweep(_spec(fig4_atom, outputs=["shift", "P3"]))
    assert list(result.columns) == ["r", "k31r", "P3", "shift"]
    for r, p3 in zip(result.grid[::37], result.columns["P3"][::37]):
        assert p3 == p3_closed(fig4_atom, radiative_correction(MirrorConfig(r=r), fig4_atom))


def test_sweep_is_independent_of_scheduling(fig4_atom):
    spec = _spec(fig4_atom)
    serial = SimulationService(max_workers=1, show_progress=False, chunk_size=500).run_sweep(spec)
    parallel = SimulationService(max_workers=8, show_progress=False, chunk_size=3).run_sweep(spec)
    assert serial.columns == parallel.columns


def test_rabi_frequency_sweep(service, fig4_atom):
    spec = _spec(fig4_atom, variable="omega1", lo=0.5, hi=20.0, count=40, mirror=MirrorConfig(r=5.0))
    result = service.run_sweep(spec)
    assert "k31r" not in result.columns
    assert result.units["omega1"] == "MHz"
    assert len(result.columns["P3"]) == 40
    assert result.metadata["variable"] == "omega1"


def test_cross_check_columns(service, fig4_atom):
    result = service.run_sweep(_spec(fig4_atom, count=50), cross_check=True)
    assert max(result.columns["P3_residual"]) < 1e-8
    assert result.metadata["hamiltonian_sign"] == 1


def test_sweep_failure_aborts_whole_run(service):
    undriven = AtomParams(omega1=0.0, omega2=0.0, delta1=1.0, delta2=0.0, gamma1=15.1, gamma2=5.4)
    with pytest.raises(DegenerateDenominator):
        service.run_sweep(_spec(undriven))


def test_steady_point(service, fig4_atom):
    summary = service.steady_point(fig4_atom, MirrorConfig(r=5.0), cross_check=True)
    assert summary.k31r == pytest.approx(10 * math.pi)
    assert summary.P3_residual < 1e-8
    assert sum(summary.populations) == pytest.approx(1.0, abs=1e-12)
    assert not summary.dark_state
    assert summary.hamiltonian_sign == 1


def test_unknown_preset(service):
    with pytest.raises(InvalidParameterError):
        service.run_preset("fig7")


def test_fig4_preset(service):
    preset = service.run_preset("fig4", **R_GRID)
    summary = preset.summary
    assert summary["I1_visibility"] == pytest.approx(1.0, abs=1e-6)
    assert summary["I2_visibility"] < 0.15
    assert abs(summary["phase_difference"] - math.pi) < 0.5
    assert set(preset.metrics) == {"I1", "I2", "P3"}


def test_fig4_second_transition_modulation_fades_with_distance(service):
    preset = service.run_preset("fig4", **R_GRID)
    windows = local_visibility(preset.sweeps["base"], "I2")
    assert len(windows) == 5
    visibilities = [v for _, v in windows]
    assert all(b < a for a, b in zip(visibilities, visibilities[1:]))
    assert abs(preset.summary["I2_local_r"] - 5.0) < 0.6
    assert preset.summary["I2_local_visibility"] < 0.15


def test_fig5_preset_phase_flip(service):
    preset = service.run_preset("fig5", **R_GRID)
    assert len(preset.sweeps) == 7
    assert preset.summary["amplitude_ratio"] >= 20.0
    assert abs(preset.summary["phase_flip"] - math.pi) <= 0.05 * 2 * math.pi


def test_fig5_equal_rabi_frequencies_is_local_minimum(service):
    k31r = np.linspace(2 * math.pi, 12 * math.pi, 701)
    mirrors = [MirrorConfig.from_k31r(x) for x in k31r]
    corrections = [radiative_correction(m, FIG5_ATOM) for m in mirrors]
    amplitudes = [
        service._p3_amplitude(FIG5_ATOM.with_value("omega1", w), k31r, corrections) for w in (9.0, 10.0, 11.0)
    ]
    assert amplitudes[1] < amplitudes[0]
    assert amplitudes[1] < amplitudes[2]


def test_fig6_preset_phase_is_continuous(service):
    preset = service.run_preset("fig6", **R_GRID)
    assert len(preset.sweeps) == 50
    assert preset.summary["max_phase_jump"] <= math.pi / 4


def test_saturation_study(service):
    report = service.saturation_study(omega1_grid=np.geomspace(0.05, 20.0, 41), **R_GRID)
    assert report.omega2 == 1.0
    assert report.amplitude_sat >= max(report.amplitudes) * (1 - 1e-2)
    assert report.ratio == pytest.approx(report.amplitude_sat / report.amplitude_3sat)
    assert report.ratio > 1.0
    assert not report.within_expected


def test_saturation_ratio_with_default_grid(service):
    # Ω_sat 取振幅最大处时，比值落在 [15, 60] 之外
    report = service.saturation_study(**R_GRID)
    assert report.omega_sat == pytest.approx(1.086, rel=0.05)
    assert report.ratio == pytest.approx(5.95, rel=0.05)
    assert not report.within_expected


def test_saturation_dark_configuration_is_flat(service):
    dark = AtomParams(omega1=1.0, omega2=1.0, delta1=0.3, delta2=0.3, gamma1=15.1, gamma2=5.4)
    with pytest.raises(FlatCurve):
        service.saturation_study(atom=dark, omega1_grid=[0.5, 1.0, 2.0], **R_GRID)


def test_default_spec_uses_settings(service):
    from app.core.config import settings

    settings.GRID_N = 33
    spec = service.default_spec("delta1", lo=-1.0, hi=1.0)
    assert spec.count == 33
    assert spec.variable == "delta1"
    assert spec.atom.omega1 == settings.OMEGA1
