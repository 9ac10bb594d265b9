import pytest

from app.core.errors import EXIT_OK, EXIT_VERIFICATION_FAILED, DegenerateDenominator
from app.physics.steady_closed import p3_closed
from app.schemas.sweep import PresetResult
from app.schemas.verification import CheckResult
from app.services import verification_service
from app.services.simulation_service import SimulationService
from app.services.verification_service import VerificationService


@pytest.fixture
def verifier():
    return VerificationService(simulation=SimulationService(show_progress=False))


def test_closed_form_check_passes(verifier):
    result = verifier.check_closed_form()
    assert result.passed, result.detail
    assert result.max_residual < 1e-8


def test_swapped_decay_rates_are_detected(verifier, monkeypatch):
    def mutated(p, rc):
        return p3_closed(p, rc.model_copy(update={"gamma_bar_1": rc.gamma_bar_2, "gamma_bar_2": rc.gamma_bar_1}))

    monkeypatch.setattr(verification_service, "p3_closed", mutated)
    result = verifier.check_closed_form()
    assert not result.passed
    assert result.max_residual > 1e-6


def test_flipped_mirror_term_is_detected(verifier, monkeypatch):
    # Γ̄1 = Γ1(1 − F) 被改成 Γ1(1 + F)
    def mutated(p, rc):
        return p3_closed(p, rc.model_copy(update={"gamma_bar_1": 2.0 * p.gamma1 - rc.gamma_bar_1}))

    monkeypatch.setattr(verification_service, "p3_closed", mutated)
    result = verifier.check_closed_form()
    assert not result.passed
    assert result.max_residual > 1e-6


def test_saturation_check_is_soft_and_reports_ratio(verifier):
    result = verifier.check_saturation()
    assert result.soft
    assert not result.passed
    assert result.max_residual == pytest.approx(5.95, rel=0.05)


def test_fig5_check_gates_on_amplitude_ratio(verifier, monkeypatch):
    summary = {"visibility_ratio": 30.0, "amplitude_ratio": 19.0, "phase_flip": 3.14}
    preset = PresetResult(name="fig5", sweeps={}, metrics={})
    monkeypatch.setattr(
        verifier.simulation, "run_preset", lambda name, **kwargs: preset.model_copy(update={"summary": summary})
    )
    assert not verifier.check_fig5().passed
    summary["amplitude_ratio"] = 21.0
    assert verifier.check_fig5().passed


@pytest.mark.parametrize(
    "check",
    ["check_quadrature", "check_dicke", "check_limits", "check_dark_state", "check_liouvillian_trace", "check_lens"],
)
def test_individual_checks_pass(verifier, check):
    result = getattr(verifier, check)()
    assert result.passed, result.detail


def test_emission_check(verifier):
    assert verifier.check_emission().passed


def test_failed_check_sets_exit_status(verifier, monkeypatch):
    def broken():
        raise DegenerateDenominator("测试")

    def ok():
        return CheckResult(name="ok", passed=True)

    def soft_failure():
        return CheckResult(name="soft", passed=False, soft=True)

    monkeypatch.setattr(verifier, "checks", lambda: [("ok", ok), ("soft", soft_failure)])
    report = verifier.verify_all()
    assert report.passed
    assert report.exit_status == EXIT_OK

    monkeypatch.setattr(verifier, "checks", lambda: [("ok", ok), ("broken", broken)])
    report = verifier.verify_all()
    assert not report.passed
    assert report.exit_status == EXIT_VERIFICATION_FAILED
    assert [c.name for c in report.failed()] == ["broken"]
    assert report.failed()[0].detail.startswith("DegenerateDenominator")


def test_verify_all(verifier):
    report = verifier.verify_all()
    assert [c.name for c in report.failed()] == []
    assert report.exit_status == EXIT_OK
    assert len(report.checks) == 12
    assert all(c.max_residual is not None for c in report.checks if c.name != "emission_determinism")
