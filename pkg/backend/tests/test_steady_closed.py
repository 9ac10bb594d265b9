import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from app.core.errors import (
    DegenerateDenominator,
    InsufficientSamples,
    InvalidSweepSpec,
    ZeroDetuning,
    ZeroDriving,
)
from app.physics.mirror_em import radiative_correction
from app.physics.steady_closed import (
    curve_metrics,
    effective_detunings,
    is_dark_state,
    local_visibility,
    modulation_metrics,
    p3_closed,
    p3_large_detuning,
    p3_weak_detuning,
    wrap_phase,
)
from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.radiation import RadiativeCorrection
from app.schemas.sweep import SweepResult

rates = st.floats(min_value=0.1, max_value=30.0)
rabi = st.floats(min_value=0.1, max_value=30.0)
detuning = st.floats(min_value=-20.0, max_value=20.0)


def _atom(o1, o2, d1, d2, g1=15.1, g2=5.4):
    return AtomParams(omega1=o1, omega2=o2, delta1=d1, delta2=d2, gamma1=g1, gamma2=g2)


def test_effective_detunings(fig4_atom, fig4_correction):
    e = effective_detunings(fig4_atom, fig4_correction)
    assert e.dbar1 == fig4_atom.delta1 - fig4_correction.shift
    assert e.dbar2 == fig4_atom.delta2 - fig4_correction.shift
    assert e.two_photon == fig4_atom.delta1 - fig4_atom.delta2


@pytest.mark.parametrize("common", [-3.0, 0.0, 0.7, 12.0])
def test_dark_state_is_exactly_zero(fig4_correction, common):
    atom = _atom(10.0, 5.0, common, common)
    assert p3_closed(atom, fig4_correction) == 0.0
    assert is_dark_state(atom, fig4_correction)


def test_not_dark_when_one_laser_off(fig4_correction):
    assert not is_dark_state(_atom(0.0, 5.0, 1.0, 1.0), fig4_correction)


def test_fig4_value_is_a_population(fig4_atom, fig4_correction):
    value = p3_closed(fig4_atom, fig4_correction)
    assert 0.0 < value < 0.5


def test_zero_driving_is_degenerate(fig4_correction):
    with pytest.raises(DegenerateDenominator):
        p3_closed(_atom(0.0, 0.0, 1.0, 0.0), fig4_correction)


def test_single_laser_gives_zero(fig4_correction):
    # 只有一束光时布居全部被泵浦到未驱动的基态
    assert p3_closed(_atom(0.0, 5.0, 1.0, 0.0), fig4_correction) == 0.0


def test_population_bounds_random_draws():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        o1, o2 = rng.uniform(0.1, 30.0, size=2)
        d1, d2, shift = rng.uniform(-20.0, 20.0, size=3)
        g1 = rng.uniform(0.0, 30.0)
        g2 = rng.uniform(0.1, 30.0)
        rc = RadiativeCorrection(gamma_bar_1=g1, gamma_bar_2=g2, shift=shift)
        value = p3_closed(_atom(o1, o2, d1, d2), rc)
        assert 0.0 <= value <= 0.5 + 1e-12


@given(rabi, rabi, detuning, detuning, detuning, rates, rates)
def test_exchange_symmetry(o1, o2, d1, d2, shift, g1, g2):
    rc = RadiativeCorrection(gamma_bar_1=g1, gamma_bar_2=g2, shift=shift)
    swapped = RadiativeCorrection(gamma_bar_1=g2, gamma_bar_2=g1, shift=shift)
    forward = p3_closed(_atom(o1, o2, d1, d2), rc)
    backward = p3_closed(_atom(o2, o1, d2, d1), swapped)
    assert backward == pytest.approx(forward, rel=1e-9, abs=1e-12)


@given(rabi, rabi, detuning, detuning, detuning, st.floats(min_value=-5.0, max_value=5.0))
def test_common_detuning_shift_invariance(o1, o2, d1, d2, shift, c):
    rc = RadiativeCorrection(gamma_bar_1=10.0, gamma_bar_2=5.4, shift=shift)
    moved = RadiativeCorrection(gamma_bar_1=10.0, gamma_bar_2=5.4, shift=shift + c)
    base = p3_closed(_atom(o1, o2, d1, d2), rc)
    assert p3_closed(_atom(o1, o2, d1 + c, d2 + c), moved) == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_one_sided_trapping(fig4_correction):
    values = [p3_closed(_atom(o1, 1.0, 2.0, 0.0), fig4_correction) for o1 in (1e2, 1e3, 1e4)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 1e-9


def test_weak_detuning_equal_rabi_is_flat_in_r():
    atom = _atom(10.0, 10.0, 0.3, -0.2)
    expected = 0.5**2 / 10.0**2
    for r in (0.4, 1.3, 2.2, 3.7, 5.0):
        rc = radiative_correction(MirrorConfig(r=r), atom)
        assert p3_weak_detuning(atom, rc) == pytest.approx(expected, rel=1e-12)


def test_weak_detuning_regime_agreement():
    atom = _atom(10.0, 12.0, 0.5, -0.3, g1=10.0, g2=10.0)
    for k31r in (10.5 * math.pi, 11.0 * math.pi, 11.3 * math.pi):
        rc = radiative_correction(MirrorConfig.from_k31r(k31r), atom)
        assert p3_weak_detuning(atom, rc) == pytest.approx(p3_closed(atom, rc), rel=0.1)


def test_weak_detuning_errors(fig4_correction):
    assert p3_weak_detuning(_atom(3.0, 4.0, 1.0, 1.0), fig4_correction) == 0.0
    with pytest.raises(ZeroDriving):
        p3_weak_detuning(_atom(0.0, 0.0, 1.0, 0.0), fig4_correction)


def test_large_detuning_symmetric_case():
    rc = RadiativeCorrection(gamma_bar_1=3.0, gamma_bar_2=3.0, shift=0.0)
    atom = _atom(2.0, 2.0, 5.0, -5.0)
    assert p3_large_detuning(atom, rc) == pytest.approx(2.0**2 / (4 * 5.0**2), rel=1e-14)


def test_large_detuning_regime_agreement():
    atom = _atom(1.0, 1.5, 40.0, -35.0, g1=1.0, g2=1.2)
    rc = radiative_correction(MirrorConfig.from_k31r(10 * math.pi), atom)
    assert p3_large_detuning(atom, rc) == pytest.approx(p3_closed(atom, rc), rel=0.1)


def test_large_detuning_vanishes_far_off_resonance(fig4_correction):
    values = [p3_large_detuning(_atom(10.0, 5.0, d, -d), fig4_correction) for d in (1e2, 1e4, 1e6)]
    assert values[0] > values[1] > values[2] > 0.0
    assert values[2] < 1e-9


def test_large_detuning_zero_detuning():
    rc = RadiativeCorrection(gamma_bar_1=3.0, gamma_bar_2=3.0, shift=0.0)
    with pytest.raises(ZeroDetuning):
        p3_large_detuning(_atom(2.0, 2.0, 0.0, 1.0), rc)


def test_wrap_phase():
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_phase(-0.25) == -0.25


def _grid(periods=10, per_period=128):
    return np.linspace(2 * math.pi, 2 * math.pi + periods * math.pi, periods * per_period + 1)


def test_metrics_of_pure_sin_squared():
    x = _grid()
    m = curve_metrics(x, np.sin(x) ** 2)
    assert m.visibility == pytest.approx(1.0, abs=1e-12)
    assert abs(m.phase) < 1e-9
    assert m.amplitude == pytest.approx(0.5, rel=1e-9)
    assert m.mean == pytest.approx(0.5, rel=1e-9)
    assert not m.flat
    assert m.periods == pytest.approx(10.0)
    assert len(m.maxima) == 10
    assert len(m.minima) == 9
    expected = 2 * math.pi + math.pi / 2 + math.pi * np.arange(10)
    assert np.allclose(m.maxima, expected, atol=1e-3)


@pytest.mark.parametrize("shift", [0.3, -0.7, math.pi / 4])
def test_phase_is_twice_the_spatial_shift(shift):
    x = _grid()
    m = curve_metrics(x, 1.0 + np.sin(x - shift) ** 2)
    assert wrap_phase(m.phase - 2 * shift) == pytest.approx(0.0, abs=1e-9)


def test_half_period_shift_flips_phase():
    x = _grid()
    a = curve_metrics(x, np.sin(x) ** 2)
    b = curve_metrics(x, np.cos(x) ** 2)
    assert abs(wrap_phase(a.phase - b.phase)) == pytest.approx(math.pi, abs=1e-9)


def test_constant_curve_is_flat():
    x = _grid()
    m = curve_metrics(x, np.full_like(x, 0.125))
    assert m.flat
    assert m.phase is None
    assert m.visibility == 0.0


@pytest.mark.parametrize(
    "x",
    [
        np.linspace(0.0, 1.5 * math.pi, 400),
        np.linspace(0.0, 4 * math.pi, 100),
        np.linspace(0.0, 4 * math.pi, 2),
    ],
)
def test_insufficient_samples(x):
    with pytest.raises(InsufficientSamples):
        curve_metrics(x, np.sin(x) ** 2)


def test_modulation_metrics_reads_sweep_columns():
    x = _grid()
    curve = SweepResult(
        variable="r",
        columns={"r": (x / (2 * math.pi)).tolist(), "k31r": x.tolist(), "P3": (np.sin(x) ** 2).tolist()},
        units={"r": "lambda31", "k31r": "rad", "P3": "1"},
    )
    assert modulation_metrics(curve).visibility == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidSweepSpec):
        modulation_metrics(curve, "I1")


def test_modulation_metrics_needs_distance_sweep():
    curve = SweepResult(variable="omega1", columns={"omega1": [1.0, 2.0], "P3": [0.1, 0.2]}, units={})
    with pytest.raises(InvalidSweepSpec):
        modulation_metrics(curve)


def _r_curve(x, y):
    return SweepResult(
        variable="r",
        columns={"r": (x / (2 * math.pi)).tolist(), "k31r": x.tolist(), "P3": y.tolist()},
        units={"r": "lambda31", "k31r": "rad", "P3": "1"},
    )


def test_local_visibility_follows_envelope():
    x = _grid()
    envelope = 1.0 / x
    curve = _r_curve(x, 1.0 + envelope * np.sin(x) ** 2)
    windows = local_visibility(curve, "P3")
    assert len(windows) == 5
    centres = [r for r, _ in windows]
    visibilities = [v for _, v in windows]
    assert centres == sorted(centres)
    assert all(b < a for a, b in zip(visibilities, visibilities[1:]))
    # 第一个窗口 k31r ∈ [2π, 4π]，峰值约为 1/(2.5π)
    assert visibilities[0] == pytest.approx(1.0 / (2.5 * math.pi) / (2.0 + 1.0 / (2.5 * math.pi)), rel=0.1)


def test_local_visibility_of_constant_curve():
    x = _grid()
    windows = local_visibility(_r_curve(x, np.full_like(x, 0.3)), "P3")
    assert [v for _, v in windows] == [0.0] * 5


def test_local_visibility_errors():
    x = _grid()
    curve = _r_curve(x, np.sin(x) ** 2)
    with pytest.raises(InvalidSweepSpec):
        local_visibility(curve, "I2")
    with pytest.raises(InvalidSweepSpec):
        local_visibility(curve, "P3", window=0.0)
    with pytest.raises(InvalidSweepSpec):
        local_visibility(SweepResult(variable="omega1", columns={"omega1": [1.0], "P3": [0.1]}, units={}), "P3")
