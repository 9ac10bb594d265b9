import concurrent.futures
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from app.core.config import settings
from app.core.errors import FlatCurve, InvalidParameterError
from app.physics.lindblad import build_liouvillian, reference_sign, steady_state
from app.physics.mirror_em import intensity_1, intensity_2, radiative_correction
from app.physics.steady_closed import (
    curve_metrics,
    effective_detunings,
    is_dark_state,
    local_visibility,
    modulation_metrics,
    p3_closed,
    wrap_phase,
)
from app.schemas.params import AtomParams, MirrorConfig
from app.schemas.radiation import Direction, RadiativeCorrection
from app.schemas.steady import ModulationMetrics, SteadyStateSummary
from app.schemas.sweep import UNITS, PresetResult, SaturationReport, SweepResult, SweepSpec

logger = logging.getLogger(__name__)

# 强度列以 1e-2 MHz/sr 为单位
INTENSITY_SCALE = 100.0
CROSS_CHECK_COLUMNS = ("P3_numeric", "P3_residual")

FIG4_ATOM = AtomParams(omega1=10.0, omega2=5.0, delta1=2.0, delta2=0.0, gamma1=15.1, gamma2=5.4)
FIG5_ATOM = AtomParams(omega1=10.0, omega2=10.0, delta1=0.0, delta2=0.1, gamma1=15.1, gamma2=5.4)
FIG5_OMEGA1 = (2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 20.0)
FIG6_ATOM = AtomParams(omega1=1.0, omega2=10.0, delta1=0.2, delta2=0.0, gamma1=15.1, gamma2=5.4)
FIG6_DELTA1 = tuple(round(0.2 * i, 10) for i in range(1, 51))
SATURATION_ATOM = AtomParams(omega1=1.0, omega2=1.0, delta1=0.0, delta2=0.1, gamma1=15.1, gamma2=5.4)
SATURATION_WINDOW = (15.0, 60.0)
# fig4 中 I2 局部可见度的参考位置（λ31）
FIG4_LOCAL_R = 5.0

UNIT_CONVENTION = "angular frequencies in MHz (rad/us); r in units of lambda31; intensities in 1e-2 MHz/sr"


def _label(variable: str, value: float) -> str:
    return f"{variable}_{value:g}"


class SimulationService:
    """
    稳态计算与参数扫描服务

    网格点相互独立，按块提交到线程池，结果按网格下标写回，输出顺序与线程调度无关。
    """

    def __init__(
        self,
        max_workers: Optional[int] = None,
        show_progress: Optional[bool] = None,
        chunk_size: int = 64,
    ):
        self.max_workers = max_workers or settings.MAX_WORKERS
        self.show_progress = settings.SHOW_PROGRESS if show_progress is None else show_progress
        self.chunk_size = max(1, chunk_size)

    def default_spec(self, variable: str = "r", **overrides) -> SweepSpec:
        """用配置中的默认值构造扫描描述"""
        data = {
            "variable": variable,
            "lo": settings.GRID_LO,
            "hi": settings.GRID_HI,
            "count": settings.GRID_N,
            "atom": AtomParams(
                omega1=settings.OMEGA1,
                omega2=settings.OMEGA2,
                delta1=settings.DELTA1,
                delta2=settings.DELTA2,
                gamma1=settings.GAMMA1,
                gamma2=settings.GAMMA2,
            ),
            "mirror": MirrorConfig(r=settings.R, k31=settings.K31),
        }
        data.update({k: v for k, v in overrides.items() if v is not None})
        return SweepSpec(**data)

    def steady_point(
        self,
        atom: AtomParams,
        mirror: MirrorConfig,
        direction_1: Direction = Direction(),
        direction_2: Direction = Direction(),
        cross_check: bool = False,
    ) -> SteadyStateSummary:
        """
        单点稳态

        参数:
            atom: 原子参数
            mirror: 镜面配置
            direction_1: I1 的探测方向
            direction_2: I2 的探测方向
            cross_check: 是否同时求刘维尔矩阵的数值稳态

        返回:
            SteadyStateSummary
        """
        rc = radiative_correction(mirror, atom)
        p3 = p3_closed(atom, rc)
        summary = {
            "atom": atom,
            "mirror": mirror,
            "k31r": mirror.k31r,
            "correction": rc,
            "detunings": effective_detunings(atom, rc),
            "P3": p3,
            "I1": intensity_1(direction_1, p3, mirror, atom) * INTENSITY_SCALE,
            "I2": intensity_2(direction_2, p3, atom) * INTENSITY_SCALE,
            "dark_state": is_dark_state(atom, rc),
        }
        if cross_check:
            sign = reference_sign()
            rho = steady_state(build_liouvillian(atom, rc, sign))
            summary.update(
                P3_numeric=rho.p3,
                P3_residual=abs(rho.p3 - p3),
                populations=list(rho.populations),
                density_matrix=rho.to_dict(),
                hamiltonian_sign=sign,
            )
        return SteadyStateSummary(**summary)

    def _evaluate_point(self, spec: SweepSpec, value: float, sign: Optional[int]) -> Dict[str, float]:
        atom, mirror = spec.point(float(value))
        rc = radiative_correction(mirror, atom)
        p3 = p3_closed(atom, rc)
        row = {"k31r": mirror.k31r}
        outputs = spec.outputs
        if "I1" in outputs:
            row["I1"] = intensity_1(spec.direction_1, p3, mirror, atom) * INTENSITY_SCALE
        if "I2" in outputs:
            row["I2"] = intensity_2(spec.direction_2, p3, atom) * INTENSITY_SCALE
        if "P3" in outputs:
            row["P3"] = p3
        if "gamma_bar_1" in outputs:
            row["gamma_bar_1"] = rc.gamma_bar_1
        if "shift" in outputs:
            row["shift"] = rc.shift
        if sign is not None:
            rho = steady_state(build_liouvillian(atom, rc, sign))
            row["P3_numeric"] = rho.p3
            row["P3_residual"] = abs(rho.p3 - p3)
        return row

    def _evaluate_chunk(self, spec: SweepSpec, values: Sequence[float], sign: Optional[int]) -> List[Dict[str, float]]:
        return [self._evaluate_point(spec, value, sign) for value in values]

    def _metadata(self, spec: SweepSpec, sign: Optional[int]) -> Dict:
        metadata = {
            "tool": settings.PROJECT_NAME,
            "version": settings.VERSION,
            "variable": spec.variable,
            "grid": {"lo": spec.lo, "hi": spec.hi, "count": spec.count},
            "atom": spec.atom.model_dump(),
            "mirror": spec.mirror.model_dump(),
            "direction_1": spec.direction_1.model_dump(),
            "direction_2": spec.direction_2.model_dump(),
            "units": UNIT_CONVENTION,
        }
        if sign is not None:
            metadata["hamiltonian_sign"] = sign
        return metadata

    def run_sweep(self, spec: SweepSpec, cross_check: Optional[bool] = None) -> SweepResult:
        """
        执行一维扫描

        任何一个网格点出错都会中止整个扫描，不返回部分结果。

        参数:
            spec: 扫描描述
            cross_check: 覆盖 spec.cross_check

        返回:
            SweepResult
        """
        cross = spec.cross_check if cross_check is None else cross_check
        sign = reference_sign() if cross else None
        grid = spec.grid()
        n = len(grid)
        rows: List[Optional[Dict[str, float]]] = [None] * n
        chunks = [range(i, min(i + self.chunk_size, n)) for i in range(0, n, self.chunk_size)]

        logger.info("开始扫描 %s ∈ [%g, %g]，共 %d 点", spec.variable, spec.lo, spec.hi, n)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_chunk = {
                executor.submit(self._evaluate_chunk, spec, [grid[i] for i in chunk], sign): chunk
                for chunk in chunks
            }
            with tqdm(total=n, desc=f"扫描 {spec.variable}", disable=not self.show_progress) as bar:
                for future in concurrent.futures.as_completed(future_to_chunk):
                    chunk = future_to_chunk[future]
                    try:
                        values = future.result()
                    except Exception:
                        for pending in future_to_chunk:
                            pending.cancel()
                        logger.error("扫描在 %s = %g 附近失败", spec.variable, grid[chunk.start])
                        raise
                    for index, row in zip(chunk, values):
                        rows[index] = row
                    bar.update(len(chunk))

        names = spec.ordered_outputs() + (list(CROSS_CHECK_COLUMNS) if cross else [])
        columns = {spec.variable: grid.tolist()}
        if spec.variable == "r":
            columns["k31r"] = [row["k31r"] for row in rows]
        for name in names:
            columns[name] = [row[name] for row in rows]

        if cross:
            worst = max(columns["P3_residual"])
            logger.info("数值稳态与闭式解的最大偏差: %.3e", worst)

        return SweepResult(
            variable=spec.variable,
            columns=columns,
            units={name: UNITS[name] for name in columns},
            metadata=self._metadata(spec, sign),
        )

    def _r_spec(self, atom: AtomParams, outputs: Sequence[str], lo: float, hi: float, count: int) -> SweepSpec:
        return SweepSpec(
            variable="r",
            lo=lo,
            hi=hi,
            count=count,
            atom=atom,
            mirror=MirrorConfig(r=lo),
            outputs=list(outputs),
        )

    def _preset_fig4(self, lo, hi, count) -> PresetResult:
        result = self.run_sweep(self._r_spec(FIG4_ATOM, ["I1", "I2", "P3", "gamma_bar_1", "shift"], lo, hi, count))
        metrics = {name: modulation_metrics(result, name) for name in ("I1", "I2", "P3")}
        phase_difference = abs(wrap_phase(metrics["I1"].phase - metrics["I2"].phase))
        summary = {
            "I1_visibility": metrics["I1"].visibility,
            "I2_visibility": metrics["I2"].visibility,
            "phase_difference": phase_difference,
        }
        windows = local_visibility(result, "I2")
        if windows:
            r_near, visibility_near = min(windows, key=lambda w: abs(w[0] - FIG4_LOCAL_R))
            summary.update(I2_local_r=r_near, I2_local_visibility=visibility_near)
        return PresetResult(name="fig4", sweeps={"base": result}, metrics=metrics, summary=summary)

    def _preset_family(
        self,
        name: str,
        base: AtomParams,
        variable: str,
        values: Sequence[float],
        lo,
        hi,
        count,
    ) -> PresetResult:
        sweeps: Dict[str, SweepResult] = {}
        metrics: Dict[str, ModulationMetrics] = {}
        for value in tqdm(values, desc=name, disable=not self.show_progress):
            label = _label(variable, value)
            spec = self._r_spec(base.with_value(variable, value), ["P3", "I1", "I2"], lo, hi, count)
            sweeps[label] = self.run_sweep(spec)
            metrics[label] = modulation_metrics(sweeps[label], "P3")
        return PresetResult(name=name, sweeps=sweeps, metrics=metrics)

    def _preset_fig5(self, lo, hi, count) -> PresetResult:
        result = self._preset_family("fig5", FIG5_ATOM, "omega1", FIG5_OMEGA1, lo, hi, count)
        below = result.metrics[_label("omega1", 5.0)]
        equal = result.metrics[_label("omega1", 10.0)]
        above = result.metrics[_label("omega1", 20.0)]
        result.summary.update(
            visibility_ratio=below.visibility / equal.visibility,
            amplitude_ratio=below.amplitude / equal.amplitude,
            phase_flip=abs(wrap_phase(below.phase - above.phase)),
        )
        return result

    def _preset_fig6(self, lo, hi, count) -> PresetResult:
        result = self._preset_family("fig6", FIG6_ATOM, "delta1", FIG6_DELTA1, lo, hi, count)
        phases = [result.metrics[_label("delta1", v)].phase for v in FIG6_DELTA1]
        jumps = [abs(wrap_phase(b - a)) for a, b in zip(phases, phases[1:])]
        result.summary.update(max_phase_jump=max(jumps), phase_first=phases[0], phase_last=phases[-1])
        return result

    def presets(self) -> Dict[str, Callable[..., PresetResult]]:
        return {"fig4": self._preset_fig4, "fig5": self._preset_fig5, "fig6": self._preset_fig6}

    def run_preset(
        self,
        name: str,
        lo: Optional[float] = None,
        hi: Optional[float] = None,
        count: Optional[int] = None,
    ) -> PresetResult:
        """
        复现图形的预设扫描

        参数:
            name: fig4、fig5 或 fig6
            lo, hi, count: r 网格（λ31 单位），默认取配置

        返回:
            PresetResult
        """
        builders = self.presets()
        if name not in builders:
            raise InvalidParameterError(f"未知的预设: {name}，可选 {', '.join(builders)}")
        logger.info("运行预设 %s", name)
        return builders[name](
            settings.GRID_LO if lo is None else lo,
            settings.GRID_HI if hi is None else hi,
            settings.GRID_N if count is None else count,
        )

    def _p3_amplitude(self, atom: AtomParams, k31r: np.ndarray, corrections: List[RadiativeCorrection]) -> float:
        curve = [p3_closed(atom, rc) for rc in corrections]
        return curve_metrics(k31r, curve).amplitude

    def saturation_study(
        self,
        atom: Optional[AtomParams] = None,
        omega1_grid: Optional[Sequence[float]] = None,
        lo: Optional[float] = None,
        hi: Optional[float] = None,
        count: Optional[int] = None,
    ) -> SaturationReport:
        """
        P3 调制振幅随 Ω1 的饱和行为

        Ω_sat 定义为使 P3(r) 一次谐波振幅最大的 Ω1（对数网格上取最大值后做抛物线细化），
        返回 Ω_sat 与 3·Ω_sat 处振幅之比。

        参数:
            atom: 固定参数，默认 Δ1=0, Δ2=0.1, Ω2=1
            omega1_grid: Ω1 网格，默认在 [Ω2/20, 20·Ω2] 上取 81 个对数等距点
            lo, hi, count: r 网格

        返回:
            SaturationReport
        """
        atom = atom or SATURATION_ATOM
        lo = settings.GRID_LO if lo is None else lo
        hi = settings.GRID_HI if hi is None else hi
        count = settings.GRID_N if count is None else count
        if omega1_grid is None:
            omega1_grid = np.geomspace(atom.omega2 / 20.0, atom.omega2 * 20.0, 81)
        omegas = np.asarray(omega1_grid, dtype=float)
        if omegas.ndim != 1 or len(omegas) < 3 or np.any(omegas <= 0):
            raise InvalidParameterError("Ω1 网格至少需要 3 个正值")

        mirrors = [MirrorConfig(r=float(r)) for r in np.linspace(lo, hi, count)]
        k31r = np.array([m.k31r for m in mirrors])
        corrections = [radiative_correction(m, atom) for m in mirrors]

        amplitudes = [
            self._p3_amplitude(atom.with_value("omega1", float(w)), k31r, corrections)
            for w in tqdm(omegas, desc="饱和研究", disable=not self.show_progress)
        ]
        peak = int(np.argmax(amplitudes))
        if not amplitudes[peak] > 1e-15:
            raise FlatCurve("P3 关于 r 没有可测的调制")

        omega_sat = float(omegas[peak])
        if 0 < peak < len(omegas) - 1:
            x = np.log(omegas[peak - 1 : peak + 2])
            y = np.asarray(amplitudes[peak - 1 : peak + 2])
            curvature = y[0] - 2.0 * y[1] + y[2]
            if curvature < 0:
                omega_sat = float(np.exp(x[1] + 0.5 * (y[0] - y[2]) / curvature * (x[2] - x[1])))

        amplitude_sat = self._p3_amplitude(atom.with_value("omega1", omega_sat), k31r, corrections)
        amplitude_3sat = self._p3_amplitude(atom.with_value("omega1", 3.0 * omega_sat), k31r, corrections)
        if not amplitude_3sat > 0:
            raise FlatCurve("3·Ω_sat 处没有可测的调制")
        ratio = amplitude_sat / amplitude_3sat
        within = SATURATION_WINDOW[0] <= ratio <= SATURATION_WINDOW[1]
        logger.info("Ω_sat = %.4g MHz，振幅比 %.3g", omega_sat, ratio)
        if not within:
            logger.warning("振幅比 %.3g 不在 [%g, %g] 内", ratio, *SATURATION_WINDOW)

        return SaturationReport(
            omega2=atom.omega2,
            omega1_grid=omegas.tolist(),
            amplitudes=[float(a) for a in amplitudes],
            omega_sat=omega_sat,
            amplitude_sat=amplitude_sat,
            amplitude_3sat=amplitude_3sat,
            ratio=ratio,
            expected_window=SATURATION_WINDOW,
            within_expected=within,
        )
