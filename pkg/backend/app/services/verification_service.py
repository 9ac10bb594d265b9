import logging
import math
import os
import tempfile
from typing import Callable, List, Tuple

import numpy as np

from app.core.errors import EXIT_OK, EXIT_VERIFICATION_FAILED, MirrorSimError
from app.physics.dicke_equiv import verify_mirror_image
from app.physics.lindblad import build_liouvillian, reference_sign, steady_state
from app.physics.mirror_em import converged_total_rate, gamma_bar_1, level_shift, radiative_correction
from app.physics.params import effective_image_distance
from app.physics.steady_closed import local_visibility, p3_closed
from app.schemas.params import AtomParams, LensGeometry, MirrorConfig
from app.schemas.verification import CheckResult, VerificationReport
from app.services.simulation_service import (
    FIG4_ATOM,
    FIG5_ATOM,
    FIG5_OMEGA1,
    FIG6_ATOM,
    FIG6_DELTA1,
    SimulationService,
)
from app.utils.file_utils import emit, read_csv_columns

logger = logging.getLogger(__name__)

SEED = 20240611
CLOSED_FORM_TOL = 1e-8
FIXED_POINT_TOL = 1e-10
QUADRATURE_TOL = 1e-6
DICKE_TOL = 1e-12
DARK_STATE_TOL = 1e-10
LIMIT_TOL = 1e-5


class VerificationService:
    """
    自检套件

    每一项检查返回 CheckResult；检查内部抛出的异常记为该项失败，不中断其余检查。
    """

    def __init__(self, simulation: SimulationService = None, seed: int = SEED):
        self.simulation = simulation or SimulationService(show_progress=False)
        self.seed = seed

    def _random_atoms(self, rng: np.random.Generator, count: int) -> List[Tuple[AtomParams, MirrorConfig]]:
        draws = []
        while len(draws) < count:
            delta1, delta2 = rng.uniform(-10.0, 10.0, size=2)
            # 避开暗态附近，那里稳态方程组的条件数很差
            if abs(delta1 - delta2) < 0.1:
                continue
            atom = AtomParams(
                omega1=rng.uniform(0.5, 20.0),
                omega2=rng.uniform(0.5, 20.0),
                delta1=delta1,
                delta2=delta2,
                gamma1=rng.uniform(1.0, 20.0),
                gamma2=rng.uniform(1.0, 20.0),
            )
            draws.append((atom, MirrorConfig.from_k31r(rng.uniform(0.3, 30.0))))
        return draws

    def _closed_vs_numeric_points(self) -> List[Tuple[AtomParams, MirrorConfig]]:
        rng = np.random.default_rng(self.seed)
        points = [(FIG4_ATOM, MirrorConfig.from_k31r(x)) for x in np.linspace(2 * math.pi, 12 * math.pi, 200)]
        sparse_r = np.linspace(1.0, 6.0, 50)
        for omega1 in FIG5_OMEGA1:
            atom = FIG5_ATOM.with_value("omega1", omega1)
            points.extend((atom, MirrorConfig(r=r)) for r in sparse_r)
        for delta1 in FIG6_DELTA1[::5]:
            atom = FIG6_ATOM.with_value("delta1", delta1)
            points.extend((atom, MirrorConfig(r=r)) for r in sparse_r)
        points.extend(self._random_atoms(rng, 500))
        return points

    def check_closed_form(self, closed_form: Callable = None) -> CheckResult:
        """闭式解与刘维尔零空间解逐点比较，同时检查稳态是不动点"""
        closed_form = closed_form or p3_closed
        sign = reference_sign()
        worst, worst_fixed = 0.0, 0.0
        points = self._closed_vs_numeric_points()
        for atom, mirror in points:
            rc = radiative_correction(mirror, atom)
            liouvillian = build_liouvillian(atom, rc, sign)
            rho = steady_state(liouvillian)
            worst = max(worst, abs(rho.p3 - closed_form(atom, rc)))
            worst_fixed = max(worst_fixed, float(np.linalg.norm(liouvillian.matrix @ rho.vector())))
        passed = worst < CLOSED_FORM_TOL and worst_fixed < FIXED_POINT_TOL
        return CheckResult(
            name="closed_form_vs_liouvillian",
            passed=passed,
            max_residual=worst,
            tolerance=CLOSED_FORM_TOL,
            detail=f"{len(points)} 个参数点，不动点残差 {worst_fixed:.3e}，符号约定 {sign:+d}",
        )

    def check_quadrature(self) -> CheckResult:
        """球面积分 intensity_1 与 Γ̄1 比较"""
        rng = np.random.default_rng(self.seed + 1)
        atom = FIG4_ATOM
        worst = 0.0
        for k31r in rng.uniform(0.1, 50.0, size=20):
            cfg = MirrorConfig.from_k31r(float(k31r))
            total, _, _ = converged_total_rate(cfg, atom)
            expected = gamma_bar_1(cfg, atom.gamma1)
            worst = max(worst, abs(total - expected) / expected)
        return CheckResult(
            name="quadrature_vs_gamma_bar_1",
            passed=worst < QUADRATURE_TOL,
            max_residual=worst,
            tolerance=QUADRATURE_TOL,
            detail="20 个随机距离 k31r ∈ (0.1, 50)",
        )

    def check_dicke(self) -> CheckResult:
        """镜像与反对称 Dicke 态逐点比较"""
        configs = [MirrorConfig(r=r) for r in np.linspace(0.05, 20.0, 100)]
        report = verify_mirror_image(configs, FIG4_ATOM.gamma1, tolerance=DICKE_TOL)
        return CheckResult(
            name="dicke_equivalence",
            passed=report.passed,
            max_residual=max(report.max_rate_residual, report.max_shift_residual),
            tolerance=DICKE_TOL,
            detail=f"衰减率残差 {report.max_rate_residual:.3e}，能级移动残差 {report.max_shift_residual:.3e}",
        )

    def check_limits(self) -> CheckResult:
        """远场与近场极限"""
        gamma1 = FIG4_ATOM.gamma1
        far = MirrorConfig.from_k31r(1e6)
        near = MirrorConfig.from_k31r(1e-4)
        far_rate = abs(gamma_bar_1(far, gamma1) / gamma1 - 1.0)
        far_shift = abs(level_shift(far, gamma1)) / gamma1
        near_rate = gamma_bar_1(near, gamma1) / gamma1
        worst = max(far_rate, far_shift)
        return CheckResult(
            name="distance_limits",
            passed=worst < LIMIT_TOL and near_rate < 1e-6,
            max_residual=worst,
            tolerance=LIMIT_TOL,
            detail="k31r = 1e6 时 Γ̄1 → Γ1、Δ → 0；k31r = 1e-4 时 Γ̄1 < 1e-6·Γ1",
        )

    def check_dark_state(self) -> CheckResult:
        """Δ1 = Δ2 时闭式解严格为 0，数值解小于 1e-10"""
        atom = FIG4_ATOM.with_value("delta2", FIG4_ATOM.delta1)
        worst_closed, worst_numeric = 0.0, 0.0
        for r in (0.3, 1.0, 2.5, 5.0):
            rc = radiative_correction(MirrorConfig(r=r), atom)
            worst_closed = max(worst_closed, abs(p3_closed(atom, rc)))
            worst_numeric = max(worst_numeric, steady_state(build_liouvillian(atom, rc, reference_sign())).p3)
        return CheckResult(
            name="dark_state",
            passed=worst_closed == 0.0 and abs(worst_numeric) < DARK_STATE_TOL,
            max_residual=abs(worst_numeric),
            tolerance=DARK_STATE_TOL,
            detail=f"闭式解最大值 {worst_closed!r}",
        )

    def check_liouvillian_trace(self) -> CheckResult:
        """刘维尔矩阵保迹：对每个基矩阵 tr(L·E) = 0"""
        rng = np.random.default_rng(self.seed + 2)
        worst = 0.0
        for atom, mirror in self._random_atoms(rng, 50):
            rc = radiative_correction(mirror, atom)
            matrix = build_liouvillian(atom, rc, reference_sign()).matrix
            worst = max(worst, float(np.max(np.abs(matrix[0] + matrix[4] + matrix[8]))))
        return CheckResult(
            name="liouvillian_trace",
            passed=worst < 1e-12,
            max_residual=worst,
            tolerance=1e-12,
            detail="50 组随机参数",
        )

    def check_fig4(self) -> CheckResult:
        """I1 与 I2 反相，I2 的局部可见度在 r ≈ 5λ31 处小于 0.15 且随 r 递减"""
        preset = self.simulation.run_preset("fig4")
        summary = preset.summary
        deviation = abs(summary["phase_difference"] - math.pi)
        visibility_error = abs(summary["I1_visibility"] - 1.0)
        local = [v for _, v in local_visibility(preset.sweeps["base"], "I2")]
        decreasing = len(local) >= 2 and all(b < a for a, b in zip(local, local[1:]))
        local_ok = summary.get("I2_local_visibility", math.inf) < 0.15
        return CheckResult(
            name="fig4_anticorrelation",
            passed=deviation < 0.5 and visibility_error < 1e-6 and summary["I2_visibility"] < 0.15
            and local_ok and decreasing,
            max_residual=deviation,
            tolerance=0.5,
            detail=(
                f"相位差 {summary['phase_difference']:.4f} rad，"
                f"I1 可见度 {summary['I1_visibility']:.6f}，I2 可见度 {summary['I2_visibility']:.4f}，"
                f"I2 分窗可见度 {[round(v, 4) for v in local]}"
            ),
        )

    def check_fig5(self) -> CheckResult:
        """Ω1 = Ω2 处调制振幅比 Ω1 = Ω2/2 处小至少 20 倍，两侧相差半个周期"""
        summary = self.simulation.run_preset("fig5").summary
        flip_error = abs(summary["phase_flip"] - math.pi)
        tolerance = 0.05 * 2 * math.pi
        return CheckResult(
            name="fig5_phase_flip",
            passed=summary["amplitude_ratio"] >= 20.0 and flip_error <= tolerance,
            max_residual=flip_error,
            tolerance=tolerance,
            detail=f"振幅比 {summary['amplitude_ratio']:.2f}，相位翻转 {summary['phase_flip']:.4f} rad",
        )

    def check_fig6(self) -> CheckResult:
        """Δ1 扫描时相位连续变化"""
        summary = self.simulation.run_preset("fig6").summary
        return CheckResult(
            name="fig6_phase_continuity",
            passed=summary["max_phase_jump"] <= math.pi / 4,
            max_residual=summary["max_phase_jump"],
            tolerance=math.pi / 4,
            detail="相邻 Δ1 采样点（间隔 0.2 MHz）的一次谐波相位跳变",
        )

    def check_saturation(self) -> CheckResult:
        """饱和点与三倍饱和点的振幅比，软检查"""
        report = self.simulation.saturation_study()
        return CheckResult(
            name="saturation_ratio",
            passed=report.within_expected,
            max_residual=report.ratio,
            soft=True,
            detail=f"Ω_sat = {report.omega_sat:.4g} MHz，比值 {report.ratio:.3g}，期望区间 {list(report.expected_window)}",
        )

    def check_lens(self) -> CheckResult:
        distance = effective_image_distance(LensGeometry(f=12.5, R=250.0))
        return CheckResult(
            name="lens_geometry",
            passed=distance == 625.0,
            max_residual=abs(distance - 625.0),
            tolerance=0.0,
            detail=f"x = {distance!r} μm",
        )

    def check_emission(self) -> CheckResult:
        """同一扫描写出两次字节一致，CSV 读回无损"""
        spec = self.simulation.default_spec(count=200)
        with tempfile.TemporaryDirectory() as tmp:
            outputs = []
            for i in range(2):
                result = self.simulation.run_sweep(spec)
                path = emit(result, "csv", os.path.join(tmp, f"sweep_{i}.csv"))
                with open(path, "rb") as f:
                    outputs.append(f.read())
            parsed = read_csv_columns(os.path.join(tmp, "sweep_0.csv"))
        identical = outputs[0] == outputs[1]
        lossless = parsed == result.columns
        return CheckResult(
            name="emission_determinism",
            passed=identical and lossless,
            detail=f"字节一致 {identical}，往返无损 {lossless}",
        )

    def checks(self) -> List[Tuple[str, Callable[[], CheckResult]]]:
        return [
            ("closed_form_vs_liouvillian", self.check_closed_form),
            ("quadrature_vs_gamma_bar_1", self.check_quadrature),
            ("dicke_equivalence", self.check_dicke),
            ("distance_limits", self.check_limits),
            ("dark_state", self.check_dark_state),
            ("liouvillian_trace", self.check_liouvillian_trace),
            ("fig4_anticorrelation", self.check_fig4),
            ("fig5_phase_flip", self.check_fig5),
            ("fig6_phase_continuity", self.check_fig6),
            ("saturation_ratio", self.check_saturation),
            ("lens_geometry", self.check_lens),
            ("emission_determinism", self.check_emission),
        ]

    def verify_all(self) -> VerificationReport:
        """
        运行全部自检

        返回:
            VerificationReport；任一非软检查失败时 exit_status 为 1
        """
        results = []
        for name, check in self.checks():
            try:
                result = check()
            except MirrorSimError as e:
                result = CheckResult(name=name, passed=False, detail=f"{e.code}: {e.message}")
            level = logging.INFO if result.passed else logging.WARNING
            logger.log(level, "%s: %s (%s)", name, "通过" if result.passed else "失败", result.detail)
            results.append(result)

        passed = all(r.passed or r.soft for r in results)
        return VerificationReport(
            checks=results,
            passed=passed,
            exit_status=EXIT_OK if passed else EXIT_VERIFICATION_FAILED,
        )
