#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
纳米椭球模块
负责计算椭球的去极化因子、主轴极化率、旋转后的极化率张量以及质量与转动惯量
"""

import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from utils.constants import EPSILON_0
from utils.exceptions import ParameterError, QuadratureError

logger = logging.getLogger(__name__)

# 低于该偏心率时 L_a 使用级数展开，避免闭式解 0/0 附近的抵消
_SERIES_ECCENTRICITY = 1e-2
_SERIES_TERMS = 10


@dataclass(frozen=True)
class EllipsoidGeometry:
    """椭球几何：半轴 a ≥ b ≥ c [m] 与材料密度 rho [kg/m³]"""

    a: float
    b: float
    c: float
    rho: float

    def __post_init__(self):
        if not (self.c > 0 and self.b >= self.c and self.a >= self.b):
            raise ParameterError(f"半轴必须满足 a ≥ b ≥ c > 0，实际为 a={self.a}, b={self.b}, c={self.c}")
        if not self.rho > 0:
            raise ParameterError(f"密度必须为正，实际为 {self.rho}")

    @property
    def is_prolate(self) -> bool:
        return math.isclose(self.b, self.c, rel_tol=1e-12)

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.a * self.b * self.c

    @property
    def mass(self) -> float:
        return self.volume * self.rho

    @property
    def inertia(self) -> float:
        return self.mass * (self.a ** 2 + self.b ** 2) / 5.0


@dataclass(frozen=True)
class Polarizability:
    """主轴极化率 [C·m²/V]，绝对介电常数 eps_r [F/m]，去极化因子"""

    alpha_a: float
    alpha_b: float
    alpha_c: float
    eps_r: float
    L_a: float
    L_b: float
    L_c: float

    def tensor(self) -> np.ndarray:
        """椭球坐标系下的对角极化率张量"""
        return np.diag([self.alpha_a, self.alpha_b, self.alpha_c])


def eccentricity(geom: EllipsoidGeometry) -> float:
    """
    计算长椭球（b = c）的偏心率 e = sqrt(1 − b²/a²)

    Args:
        geom: 椭球几何

    Returns:
        偏心率，取值 [0, 1)
    """
    if not geom.is_prolate:
        raise ParameterError(f"偏心率公式只适用于 b = c 的长椭球，实际 b={geom.b}, c={geom.c}")
    return math.sqrt(max(0.0, 1.0 - (geom.b / geom.a) ** 2))


def _prolate_long_axis_factor(e: float) -> float:
    """长椭球长轴去极化因子 L_a"""
    if e < _SERIES_ECCENTRICITY:
        # (1−e²)(1/3 + e²/5 + e⁴/7 + ...)，首两项为 1/3 − 2e²/15
        e2 = e * e
        series = sum(e2 ** k / (2 * k + 3) for k in range(_SERIES_TERMS))
        return (1.0 - e2) * series
    return (1.0 - e ** 2) / e ** 2 * (-1.0 + math.atanh(e) / e)


def depolarization_factor_quadrature(geom: EllipsoidGeometry, axis: int) -> float:
    """
    数值积分计算第 axis 个主轴的去极化因子

    积分变量替换 s = a² tan²u 把 [0, ∞) 映射到 [0, π/2)。

    Args:
        geom: 椭球几何
        axis: 0, 1, 2 分别对应 a, b, c

    Returns:
        去极化因子 L_j
    """
    if axis not in (0, 1, 2):
        raise ParameterError(f"主轴编号必须为 0、1 或 2，实际为 {axis}")

    a, b, c = geom.a, geom.b, geom.c
    j2 = (a, b, c)[axis] ** 2
    a2 = a * a

    def integrand(u: float) -> float:
        t = math.tan(u)
        s = a2 * t * t
        return (a2 * b * c * t / math.cos(u)
                / ((s + j2) * math.sqrt((s + b * b) * (s + c * c))))

    result = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-13,
                            limit=200, full_output=1)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        logger.error(f"去极化因子积分未收敛: axis={axis}, {result[3]}")
        raise QuadratureError("去极化因子积分未收敛", abserr)
    return value


def depolarization_factors(geom: EllipsoidGeometry) -> Tuple[float, float, float]:
    """
    计算三个主轴的去极化因子

    长椭球用闭式解，一般三轴椭球用数值积分。

    Args:
        geom: 椭球几何

    Returns:
        (L_a, L_b, L_c)，三者之和为 1
    """
    if geom.is_prolate:
        e = eccentricity(geom)
        L_a = _prolate_long_axis_factor(e)
        L_b = (1.0 - L_a) / 2.0
        return L_a, L_b, L_b

    factors = tuple(depolarization_factor_quadrature(geom, axis) for axis in range(3))
    total = sum(factors)
    if abs(total - 1.0) > 1e-10:
        logger.warning(f"去极化因子之和偏离 1: {total:.15f}")
    return factors


def axis_polarizabilities(geom: EllipsoidGeometry, relative_permittivity: float) -> Polarizability:
    """
    计算主轴极化率

    Args:
        geom: 椭球几何
        relative_permittivity: 无量纲相对介电常数（如 2.1），内部换算为 ε_r = κ_r ε_0

    Returns:
        极化率对象
    """
    if not relative_permittivity > 0:
        raise ParameterError(f"相对介电常数必须为正，实际为 {relative_permittivity}")

    eps_r = relative_permittivity * EPSILON_0
    factors = depolarization_factors(geom)
    prefactor = 4.0 * math.pi * geom.a * geom.b * geom.c * EPSILON_0 * (eps_r - EPSILON_0)

    alphas = []
    for L in factors:
        denominator = 3.0 * EPSILON_0 + 3.0 * L * (eps_r - EPSILON_0)
        if denominator <= 0:
            raise ParameterError(f"极化率分母非正（L={L:.6f}, 相对介电常数={relative_permittivity}），超出介质模型范围")
        alphas.append(prefactor / denominator)

    return Polarizability(alphas[0], alphas[1], alphas[2], eps_r, *factors)


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """先绕 z′ 转 φ、再绕 y_E 转 θ 的欧拉旋转矩阵"""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    r_y = np.array([[ct, 0.0, -st],
                    [0.0, 1.0, 0.0],
                    [st, 0.0, ct]])
    r_z = np.array([[cp, sp, 0.0],
                    [-sp, cp, 0.0],
                    [0.0, 0.0, 1.0]])
    return r_y @ r_z


def rotated_polarizability(pol: Polarizability, theta: float, phi: float) -> np.ndarray:
    """
    实验坐标系下的极化率张量 α′ = R⁻¹ α R

    Args:
        pol: 主轴极化率
        theta: 欧拉角 θ [rad]
        phi: 欧拉角 φ [rad]

    Returns:
        3×3 对称张量
    """
    R = rotation_matrix(theta, phi)
    rotated = R.T @ pol.tensor() @ R
    return (rotated + rotated.T) / 2.0


def mass_and_inertia(geom: EllipsoidGeometry) -> Tuple[float, float]:
    """返回质量 m [kg] 与绕短轴的转动惯量 I [kg·m²]"""
    return geom.mass, geom.inertia
