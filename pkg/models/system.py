#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
系统组装模块
负责把椭球、光镊、光腔、残余气体与热浴参数组装成单个机械模式的线性模型
"""

import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import Optional

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.dynamics import INTERACTIONS, LinearModel, build_model
from models.ellipsoid import EllipsoidGeometry, Polarizability, axis_polarizabilities
from models.gas_damping import GasParams, com_damping, thermal_occupation, torsional_damping
from models.trap_cavity import MODE_KINDS, CavityParams, ModeParams, TweezerParams, mode_params
from utils.exceptions import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemParams:
    """
    单个悬浮椭球系统的全部物理参数

    kappa、detuning 均为角频率 [rad/s]；detuning 为空时取红边带 Δ = ω_m；
    coupling_ratio 给定时以 g = coupling_ratio·ω_m 覆盖相干散射耦合。
    """

    geometry: EllipsoidGeometry
    relative_permittivity: float
    tweezer: TweezerParams
    cavity: CavityParams
    kappa: float
    gas: GasParams
    kind: str = "torsional"
    bath_temperature: Optional[float] = None
    detuning: Optional[float] = None
    interaction: str = "full"
    coupling_ratio: Optional[float] = None

    def __post_init__(self):
        if self.kind not in MODE_KINDS:
            raise ParameterError(f"未知的模式类型: {self.kind}，可选 {MODE_KINDS}")
        if self.interaction not in INTERACTIONS:
            raise ParameterError(f"未知的相互作用形式: {self.interaction}，可选 {INTERACTIONS}")
        if not self.kappa > 0:
            raise ParameterError(f"腔衰减率 κ 必须为正，实际为 {self.kappa}")
        if self.coupling_ratio is not None and not self.coupling_ratio > 0:
            raise ParameterError(f"耦合比必须为正，实际为 {self.coupling_ratio}")
        if self.bath_temperature is not None and self.bath_temperature < 0:
            raise ParameterError(f"热浴温度不能为负，实际为 {self.bath_temperature}")

    @property
    def temperature(self) -> float:
        """热浴温度，未指定时与气体温度相同"""
        return self.gas.temperature if self.bath_temperature is None else self.bath_temperature

    def with_mode(self, kind: str) -> "SystemParams":
        return replace(self, kind=kind)


@dataclass(frozen=True)
class SystemState:
    """组装结果：极化率、模式参数、机械阻尼、热声子数与线性模型"""

    pol: Polarizability
    mode: ModeParams
    gamma: float
    n_bar: float
    model: LinearModel

    @property
    def coupling(self) -> float:
        return self.model.g

    @property
    def quality_factor(self) -> float:
        return self.mode.omega_m / self.gamma


def evaluate_system(params: SystemParams) -> SystemState:
    """
    计算系统参数对应的线性模型

    Args:
        params: 系统参数

    Returns:
        组装结果
    """
    pol = axis_polarizabilities(params.geometry, params.relative_permittivity)
    mode = mode_params(params.kind, params.tweezer, params.cavity, params.geometry, pol,
                       detuning=params.detuning)
    if params.kind == "torsional":
        gamma = torsional_damping(params.gas, params.geometry)
    else:
        gamma = com_damping(params.gas, params.geometry)
    n_bar = thermal_occupation(mode.omega_m, params.temperature)

    coupling = None
    if params.coupling_ratio is not None:
        coupling = params.coupling_ratio * mode.omega_m
    model = build_model(mode, gamma, n_bar, None, params.kappa, params.interaction, coupling)

    logger.debug(f"系统组装完成: {params.kind}, ω_m/2π={mode.omega_m / (2 * math.pi):.4e} Hz, "
                 f"g/2π={model.g / (2 * math.pi):.4e} Hz, γ/2π={gamma / (2 * math.pi):.4e} Hz, n̄={n_bar:.4e}")
    return SystemState(pol, mode, gamma, n_bar, model)
