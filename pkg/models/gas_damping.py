#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
残余气体阻尼模块
负责计算扭转与质心运动的气体阻尼率、热声子数和品质因子
"""

import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import gammaln

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from models.ellipsoid import EllipsoidGeometry, eccentricity
from utils.constants import AIR_MOLECULE_MASS, DEFAULT_ACCOMMODATION, HBAR, K_BOLTZMANN
from utils.exceptions import ParameterError

logger = logging.getLogger(__name__)

# 低于该偏心率时形状函数使用级数；闭式解在小 e 处有 O(e⁴) 量级的相消
_SERIES_ECCENTRICITY = 0.1
_SERIES_TERMS = 24


@dataclass(frozen=True)
class GasParams:
    """残余气体参数：压强 [Pa]、气体温度 [K]、分子质量 [kg]、适应系数"""

    pressure: float
    temperature: float
    molecule_mass: float = AIR_MOLECULE_MASS
    accommodation: float = DEFAULT_ACCOMMODATION

    def __post_init__(self):
        if not self.pressure > 0:
            raise ParameterError(f"气体压强必须为正，实际为 {self.pressure}")
        if not self.temperature > 0:
            raise ParameterError(f"气体温度必须为正，实际为 {self.temperature}")
        if not self.molecule_mass > 0:
            raise ParameterError(f"分子质量必须为正，实际为 {self.molecule_mass}")
        if not 0.0 <= self.accommodation <= 1.0:
            raise ParameterError(f"适应系数必须位于 [0, 1]，实际为 {self.accommodation}")

    @property
    def density(self) -> float:
        """气体质量密度 ρ_a = m_a P / (k_B T_a)"""
        return self.molecule_mass * self.pressure / (K_BOLTZMANN * self.temperature)

    @property
    def mean_speed(self) -> float:
        """平均热速度 v̄ = sqrt(8 k_B T_a / (π m_a))"""
        return math.sqrt(8.0 * K_BOLTZMANN * self.temperature / (math.pi * self.molecule_mass))


def _asin_coefficients(n: int) -> np.ndarray:
    """arcsin(e)/e = Σ c_k e^{2k}"""
    k = np.arange(n)
    log_c = (gammaln(2 * k + 1) - k * math.log(4.0) - 2 * gammaln(k + 1)) - np.log(2 * k + 1)
    return np.exp(log_c)


def _sqrt_coefficients(n: int) -> np.ndarray:
    """sqrt(1 − e²) = Σ d_k e^{2k}"""
    d = np.empty(n)
    d[0] = 1.0
    for k in range(1, n):
        d[k] = -d[k - 1] * (0.5 - k + 1) / k
    return d


def _shifted(coefficients: np.ndarray, power: int) -> np.ndarray:
    """系数数组乘以 e^{2·power}"""
    out = np.zeros_like(coefficients)
    out[power:] = coefficients[:len(coefficients) - power]
    return out


def _evaluate_series(coefficients: np.ndarray, e: float, leading_power: int) -> float:
    """计算 Σ coefficients[k] e^{2k} / e^{2·leading_power}，要求前 leading_power 项为零"""
    powers = (e * e) ** np.arange(len(coefficients) - leading_power)
    return float(np.dot(coefficients[leading_power:], powers))


def _bracket_series(n: int = _SERIES_TERMS):
    """f1、f2、f3 与质心阻尼形状项分子的级数系数"""
    c = _asin_coefficients(n)
    d = _sqrt_coefficients(n)
    b1 = c - d + 2.0 * _shifted(d, 1)
    b2 = d + 2.0 * _shifted(d, 1) - c + 4.0 * _shifted(c, 1)
    b3 = 3.0 * d - 2.0 * _shifted(d, 1) + 4.0 * _shifted(c, 1) - 3.0 * c
    product = np.convolve(d, c)[:n]
    h = -product + 2.0 * _shifted(product, 1)
    h[0] += 1.0
    h[1] -= 1.0
    return b1, b2, b3, h


_B1, _B2, _B3, _H = _bracket_series()


def closed_form_shape_functions(e: float) -> Tuple[float, float, float]:
    """按闭式解计算 f1、f2、f3，e 很小时有相消误差"""
    e2 = e * e
    root = math.sqrt(1.0 - e2)
    ratio = math.asin(e) / e
    f1 = 3.0 / (8.0 * e2) * (ratio - (1.0 - 2.0 * e2) * root)
    f2 = 3.0 / (16.0 * e2) * ((1.0 + 2.0 * e2) * root - ratio * (1.0 - 4.0 * e2))
    f3 = 1.0 / (4.0 * e2 * e2) * ((3.0 - 2.0 * e2) * root + ratio * (4.0 * e2 - 3.0))
    return f1, f2, f3


def shape_functions(e: float) -> Tuple[float, float, float]:
    """
    扭转阻尼中的形状函数 f1、f2、f3

    Args:
        e: 偏心率，[0, 1)

    Returns:
        (f1, f2, f3)，球形极限为 (1, 1, 4/15)
    """
    if not 0.0 <= e < 1.0:
        raise ParameterError(f"偏心率必须位于 [0, 1)，实际为 {e}")
    if e < _SERIES_ECCENTRICITY:
        return (3.0 / 8.0 * _evaluate_series(_B1, e, 1),
                3.0 / 16.0 * _evaluate_series(_B2, e, 1),
                0.25 * _evaluate_series(_B3, e, 2))
    return closed_form_shape_functions(e)


def _com_shape_term(e: float) -> float:
    """((1 − e²)/e² + (2e² − 1) sqrt(1 − e²) arcsin(e)/e³)，球形极限 4/3"""
    if e < _SERIES_ECCENTRICITY:
        return _evaluate_series(_H, e, 1)
    e2 = e * e
    return (1.0 - e2) / e2 + (2.0 * e2 - 1.0) * math.sqrt(1.0 - e2) * math.asin(e) / (e2 * e)


def _asin_ratio(e: float) -> float:
    """arcsin(e)/e"""
    if e < 1e-3:
        e2 = e * e
        return 1.0 + e2 / 6.0 + 3.0 * e2 ** 2 / 40.0 + 5.0 * e2 ** 3 / 112.0
    return math.asin(e) / e


def _specular_weight(accommodation: float) -> float:
    return 1.0 - accommodation * (6.0 - math.pi) / 8.0


def torsional_damping(gas: GasParams, geom: EllipsoidGeometry) -> float:
    """
    扭转运动的气体阻尼率 γ_φ [rad/s]

    前因子取量纲自洽的 5ρ_a v̄ a sqrt(1−e²) / (8ρ(a²+b²))。

    Args:
        gas: 残余气体参数
        geom: 长椭球几何

    Returns:
        阻尼率（角频率）
    """
    e = eccentricity(geom)
    f1, f2, f3 = shape_functions(e)
    e2 = e * e
    g_ac = gas.accommodation
    bracket = g_ac * (f1 + (1.0 - e2) * f2) + 3.0 * _specular_weight(g_ac) * e2 * e2 * f3
    prefactor = (5.0 * gas.density * gas.mean_speed * geom.a * math.sqrt(1.0 - e2)
                 / (8.0 * geom.rho * (geom.a ** 2 + geom.b ** 2)))
    gamma = prefactor * bracket
    logger.debug(f"扭转气体阻尼: γ_φ/2π = {gamma / (2 * math.pi):.4e} Hz (P={gas.pressure:.3e} Pa)")
    return gamma


def com_damping(gas: GasParams, geom: EllipsoidGeometry) -> float:
    """
    质心运动（y 方向）的气体阻尼率 γ_y [rad/s]

    Args:
        gas: 残余气体参数
        geom: 长椭球几何

    Returns:
        阻尼率（角频率）
    """
    e = eccentricity(geom)
    e2 = e * e
    root = math.sqrt(1.0 - e2)
    g_ac = gas.accommodation
    bracket = (g_ac / 2.0 * (1.0 - e2 + root * _asin_ratio(e))
               + _specular_weight(g_ac) * _com_shape_term(e))
    gamma = 3.0 * gas.density * gas.mean_speed * geom.a / (8.0 * geom.rho * geom.b ** 2) * bracket
    logger.debug(f"质心气体阻尼: γ_y/2π = {gamma / (2 * math.pi):.4e} Hz (P={gas.pressure:.3e} Pa)")
    return gamma


def thermal_occupation(omega_m: float, temperature: float) -> float:
    """
    Bose 占据数 n̄ = 1 / (exp(ħω/k_BT) − 1)

    Args:
        omega_m: 机械角频率 [rad/s]
        temperature: 热浴温度 [K]

    Returns:
        平均热声子数
    """
    if not omega_m > 0:
        raise ParameterError(f"机械频率必须为正，实际为 {omega_m}")
    if temperature < 0:
        raise ParameterError(f"温度不能为负，实际为 {temperature}")
    if temperature == 0:
        return 0.0
    return 1.0 / np.expm1(HBAR * omega_m / (K_BOLTZMANN * temperature))


def quality_factor(omega_m: float, gamma: float) -> float:
    """品质因子 Q = ω / γ，二者均为角频率"""
    if not gamma > 0:
        raise ParameterError(f"阻尼率必须为正，实际为 {gamma}")
    return omega_m / gamma
