#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
光镊与光腔模块
负责计算质心与扭转模式的频率、零点涨落、色散耦合与相干散射耦合、腔频移动，
以及按目标耦合强度反解腔模腰斑
"""

import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

from scipy import optimize

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from models.ellipsoid import EllipsoidGeometry, Polarizability
from utils.constants import EPSILON_0, HBAR, SPEED_OF_LIGHT
from utils.exceptions import BracketError, ParameterError

logger = logging.getLogger(__name__)

MODE_KINDS = ("torsional", "com")

# 腔模腰斑的二分区间 [m]
WAIST_BRACKET = (1e-6, 1e-3)


def _phase_trig(phase: float) -> Tuple[float, float]:
    """返回 (sin, cos)，在 π/2 的整数倍附近取精确零值"""
    quarter_turns = phase / (math.pi / 2)
    nearest = round(quarter_turns)
    if abs(quarter_turns - nearest) < 1e-12:
        return ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))[nearest % 4]
    return math.sin(phase), math.cos(phase)


@dataclass(frozen=True)
class TweezerParams:
    """光镊参数：焦点功率 [W]、焦点腰斑 [m]、波长 [m]"""

    power: float
    waist: float
    wavelength: float

    def __post_init__(self):
        for name in ("power", "waist", "wavelength"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"光镊参数 {name} 必须为正，实际为 {getattr(self, name)}")

    @property
    def field_amplitude(self) -> float:
        return math.sqrt(4.0 * self.power / (math.pi * EPSILON_0 * SPEED_OF_LIGHT * self.waist ** 2))

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.wavelength


@dataclass(frozen=True)
class CavityParams:
    """光腔参数：腔长 [m]、腔模腰斑 [m]、波长 [m]、粒子处的腔相位 [rad]"""

    length: float
    waist: float
    wavelength: float
    phase: float = 0.0

    def __post_init__(self):
        for name in ("length", "waist", "wavelength"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"光腔参数 {name} 必须为正，实际为 {getattr(self, name)}")

    @property
    def mode_volume(self) -> float:
        return math.pi * self.length * self.waist ** 2 / 4.0

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.wavelength

    def with_waist(self, waist: float) -> "CavityParams":
        return CavityParams(self.length, waist, self.wavelength, self.phase)

    def with_phase(self, phase: float) -> "CavityParams":
        return CavityParams(self.length, self.waist, self.wavelength, phase)


@dataclass(frozen=True)
class ModeParams:
    """单个机械模式的参数，频率均为角频率 [rad/s]"""

    kind: str
    omega_m: float
    g_disp: float
    g_cs: float
    zpf: float
    omega_c_shifted: float
    Delta: float


def _check_kind(kind: str):
    if kind not in MODE_KINDS:
        raise ParameterError(f"未知的模式类型: {kind}，可选 {MODE_KINDS}")


def com_frequency(tweezer: TweezerParams, geom: EllipsoidGeometry, pol: Polarizability) -> float:
    """质心模式频率 ω_y = sqrt(E0² α_a / (m w0²))"""
    return math.sqrt(tweezer.field_amplitude ** 2 * pol.alpha_a / (geom.mass * tweezer.waist ** 2))


def torsional_frequency(tweezer: TweezerParams, geom: EllipsoidGeometry, pol: Polarizability) -> float:
    """
    扭转模式频率 ω_φ = E0 sqrt((α_a − α_b) / (2I))

    Args:
        tweezer: 光镊参数
        geom: 椭球几何
        pol: 主轴极化率

    Returns:
        扭转角频率 [rad/s]
    """
    delta_alpha = pol.alpha_a - pol.alpha_b
    if delta_alpha <= 0:
        raise ParameterError(f"α_a ≤ α_b（差值 {delta_alpha:.3e}），没有扭转回复力矩")
    return tweezer.field_amplitude * math.sqrt(delta_alpha / (2.0 * geom.inertia))


def zero_point(kind: str, m_or_I: float, omega_m: float) -> float:
    """零点涨落 sqrt(ħ / (2 m ω))，扭转模式时 m 换成转动惯量 I"""
    _check_kind(kind)
    if not omega_m > 0:
        raise ParameterError(f"机械频率必须为正，实际为 {omega_m}")
    return math.sqrt(HBAR / (2.0 * m_or_I * omega_m))


def couplings_com(tweezer: TweezerParams, cavity: CavityParams, pol: Polarizability,
                  zpf: float) -> Tuple[float, float]:
    """
    质心模式的色散耦合 g_y 与相干散射耦合 g_sy

    Args:
        tweezer: 光镊参数
        cavity: 光腔参数
        pol: 主轴极化率
        zpf: 质心零点涨落 y0 [m]

    Returns:
        (g_y, g_sy) [rad/s]
    """
    sin_phi, cos_phi = _phase_trig(cavity.phase)
    omega_c, k_c, V_c = cavity.angular_frequency, cavity.wavenumber, cavity.mode_volume
    g_y = pol.alpha_a * omega_c * k_c * zpf * (2.0 * sin_phi * cos_phi) / (2.0 * EPSILON_0 * V_c)
    g_sy = (pol.alpha_a * tweezer.field_amplitude * k_c * zpf * sin_phi
            * math.sqrt(omega_c / (2.0 * HBAR * EPSILON_0 * V_c)))
    return g_y, g_sy


def couplings_torsional(tweezer: TweezerParams, cavity: CavityParams, pol: Polarizability,
                        zpf: float) -> Tuple[float, float]:
    """
    扭转模式的色散耦合 g_φ 与相干散射耦合 g_sφ

    Args:
        tweezer: 光镊参数
        cavity: 光腔参数
        pol: 主轴极化率
        zpf: 扭转零点涨落 φ0 [rad]

    Returns:
        (g_tor, g_cs_tor) [rad/s]
    """
    _, cos_phi = _phase_trig(cavity.phase)
    delta_alpha = pol.alpha_a - pol.alpha_b
    omega_c, V_c = cavity.angular_frequency, cavity.mode_volume
    g_tor = delta_alpha * omega_c * zpf * cos_phi ** 2 / (2.0 * EPSILON_0 * V_c)
    g_cs_tor = (delta_alpha * tweezer.field_amplitude * zpf * cos_phi
                * math.sqrt(omega_c / (8.0 * HBAR * EPSILON_0 * V_c)))
    return g_tor, g_cs_tor


def shifted_cavity_frequency(kind: str, cavity: CavityParams, pol: Polarizability) -> float:
    """粒子引起的腔频移动，α_1、α_2 取为 α_a、α_b"""
    _check_kind(kind)
    _, cos_phi = _phase_trig(cavity.phase)
    V_c = cavity.mode_volume
    if kind == "com":
        shift = pol.alpha_a * cos_phi ** 2 / (2.0 * EPSILON_0 * V_c)
    else:
        shift = (pol.alpha_a + pol.alpha_b) * cos_phi ** 2 / (4.0 * EPSILON_0 * V_c)
    return cavity.angular_frequency * (1.0 - shift)


def mechanical_frequency(kind: str, tweezer: TweezerParams, geom: EllipsoidGeometry,
                         pol: Polarizability) -> float:
    _check_kind(kind)
    if kind == "com":
        return com_frequency(tweezer, geom, pol)
    return torsional_frequency(tweezer, geom, pol)


def mode_couplings(kind: str, tweezer: TweezerParams, cavity: CavityParams,
                   geom: EllipsoidGeometry, pol: Polarizability) -> Tuple[float, float]:
    """按模式类型返回 (g_disp, g_cs)"""
    omega_m = mechanical_frequency(kind, tweezer, geom, pol)
    if kind == "com":
        return couplings_com(tweezer, cavity, pol, zero_point(kind, geom.mass, omega_m))
    return couplings_torsional(tweezer, cavity, pol, zero_point(kind, geom.inertia, omega_m))


def coherent_coupling(kind: str, tweezer: TweezerParams, cavity: CavityParams,
                      geom: EllipsoidGeometry, pol: Polarizability) -> float:
    """相干散射耦合 g_cs [rad/s]"""
    return mode_couplings(kind, tweezer, cavity, geom, pol)[1]


def mode_params(kind: str, tweezer: TweezerParams, cavity: CavityParams, geom: EllipsoidGeometry,
                pol: Polarizability, detuning: Optional[float] = None) -> ModeParams:
    """
    汇总一个机械模式的全部参数

    Args:
        kind: "torsional" 或 "com"
        tweezer: 光镊参数
        cavity: 光腔参数
        geom: 椭球几何
        pol: 主轴极化率
        detuning: 失谐 Δ [rad/s]，为空时取红边带 Δ = ω_m

    Returns:
        模式参数
    """
    _check_kind(kind)
    omega_m = mechanical_frequency(kind, tweezer, geom, pol)
    m_or_I = geom.mass if kind == "com" else geom.inertia
    zpf = zero_point(kind, m_or_I, omega_m)
    if kind == "com":
        g_disp, g_cs = couplings_com(tweezer, cavity, pol, zpf)
    else:
        g_disp, g_cs = couplings_torsional(tweezer, cavity, pol, zpf)
    Delta = omega_m if detuning is None else detuning

    logger.debug(f"{kind} 模式: ω_m/2π={omega_m / (2 * math.pi):.4e} Hz, "
                 f"g_cs/2π={g_cs / (2 * math.pi):.4e} Hz, g_disp/2π={g_disp / (2 * math.pi):.4e} Hz")
    return ModeParams(kind, omega_m, g_disp, g_cs, zpf,
                      shifted_cavity_frequency(kind, cavity, pol), Delta)


def solve_waist_for_target_coupling(target_g: float, kind: str, tweezer: TweezerParams,
                                    cavity: CavityParams, geom: EllipsoidGeometry,
                                    pol: Polarizability,
                                    bracket: Tuple[float, float] = WAIST_BRACKET,
                                    rtol: float = 1e-10) -> float:
    """
    二分求解腔模腰斑，使相干散射耦合等于目标值

    g_cs ∝ V_c^{-1/2} ∝ 1/w_c，在区间内单调递减。

    Args:
        target_g: 目标耦合 [rad/s]
        kind: 模式类型
        tweezer: 光镊参数
        cavity: 光腔参数（腰斑取值被忽略）
        geom: 椭球几何
        pol: 主轴极化率
        bracket: 腰斑搜索区间 [m]
        rtol: 相对容差

    Returns:
        腔模腰斑 w_c [m]
    """
    if not target_g > 0:
        raise ParameterError(f"目标耦合必须为正，实际为 {target_g}")

    def residual(waist: float) -> float:
        return coherent_coupling(kind, tweezer, cavity.with_waist(waist), geom, pol) - target_g

    low, high = bracket
    f_low, f_high = residual(low), residual(high)
    if f_low * f_high > 0:
        reachable = (f_high + target_g, f_low + target_g)
        logger.error(f"目标耦合 {target_g:.4e} rad/s 不在可达范围 [{reachable[0]:.4e}, {reachable[1]:.4e}] 内")
        raise BracketError(f"目标耦合 {target_g:.4e} rad/s 在腰斑区间 [{low:.1e}, {high:.1e}] m 内不可达")

    waist = optimize.bisect(residual, low, high, xtol=1e-30, rtol=rtol, maxiter=400)
    logger.info(f"腔模腰斑拟合完成: w_c = {waist * 1e6:.6f} µm（目标 g/2π = {target_g / (2 * math.pi):.4e} Hz）")
    return waist
