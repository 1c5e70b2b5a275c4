#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
纠缠交换模块
负责组装两个远程系统的联合协方差矩阵、光纤与探测器损耗模型、
非理想 Bell 型双零差探测后的条件协方差矩阵以及两个机械模式之间的纠缠
"""

import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.gaussian_tools import (CovMatrix, beam_splitter_symplectic, log_negativity,
                                     select_modes)
from utils.constants import DEFAULT_TRANSMISSIVITY, VACUUM_VARIANCE
from utils.exceptions import MeasurementSingularError, ParameterError

logger = logging.getLogger(__name__)

# 输出协方差矩阵中滤波模式的位置
MODE_CHOICES: Dict[str, int] = {"tms": 1, "bs": 2}
JOINT_LABELS = ("tor_A", "tor_B", "cav_A", "cav_B")


@dataclass(frozen=True)
class SwapSetup:
    """Bell 型探测设置：分束器透射率、两路探测效率、送往测量站的滤波模式"""

    transmissivity: float = DEFAULT_TRANSMISSIVITY
    eta1: float = 1.0
    eta2: float = 1.0
    mode_choice: str = "bs"

    def __post_init__(self):
        if not 0.0 < self.transmissivity < 1.0:
            raise ParameterError(f"透射率必须位于 (0, 1)，实际为 {self.transmissivity}")
        for name in ("eta1", "eta2"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ParameterError(f"探测效率 {name} 必须位于 (0, 1]，实际为 {value}")
        if self.mode_choice not in MODE_CHOICES:
            raise ParameterError(f"未知的滤波模式选择: {self.mode_choice}，可选 {tuple(MODE_CHOICES)}")


@dataclass(frozen=True)
class LossChannel:
    """光纤加探测器的损耗：本征探测效率、光纤衰减 [dB/km]、单臂光纤长度 [km]"""

    eta0: float
    alpha0: float
    length_km: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta0 <= 1.0:
            raise ParameterError(f"本征探测效率必须位于 (0, 1]，实际为 {self.eta0}")
        if self.alpha0 < 0 or self.length_km < 0:
            raise ParameterError("光纤衰减与长度不能为负")


@dataclass(frozen=True)
class JointCM:
    """8×8 联合协方差矩阵，模式顺序 (tor_A, tor_B, cav_A, cav_B)"""

    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        V = np.asarray(self.matrix, dtype=float)
        if V.shape != (8, 8):
            raise ParameterError(f"联合协方差矩阵必须为 8×8，实际形状 {V.shape}")
        object.__setattr__(self, "matrix", V)

    @property
    def E(self) -> np.ndarray:
        """两个机械模式的约化协方差矩阵"""
        return self.matrix[0:4, 0:4]

    @property
    def O(self) -> np.ndarray:
        """两个光学模式的约化协方差矩阵"""
        return self.matrix[4:8, 4:8]

    @property
    def C(self) -> np.ndarray:
        """机械与光学之间的关联块"""
        return self.matrix[0:4, 4:8]

    def as_cov_matrix(self) -> CovMatrix:
        return CovMatrix(self.matrix, JOINT_LABELS)


def joint_cm(out_A: CovMatrix, out_B: CovMatrix, mode_choice: str) -> JointCM:
    """
    由两个独立系统的输出协方差矩阵组装联合协方差矩阵，跨系统块 J = Z = 0

    Args:
        out_A: 系统 A 的 6×6 输出协方差矩阵
        out_B: 系统 B 的 6×6 输出协方差矩阵
        mode_choice: "tms" 或 "bs"

    Returns:
        联合协方差矩阵
    """
    if mode_choice not in MODE_CHOICES:
        raise ParameterError(f"未知的滤波模式选择: {mode_choice}")
    k = MODE_CHOICES[mode_choice]
    pair_A = select_modes(out_A, (0, k)).matrix
    pair_B = select_modes(out_B, (0, k)).matrix

    V = np.zeros((8, 8))
    # 系统 A 占据模式 0（机械）与 2（光学），系统 B 占据 1 与 3
    for pair, (mech, opt) in ((pair_A, (0, 2)), (pair_B, (1, 3))):
        index = [2 * mech, 2 * mech + 1, 2 * opt, 2 * opt + 1]
        V[np.ix_(index, index)] = pair
    return JointCM(V)


def detection_efficiency(chan: LossChannel) -> float:
    """综合效率 η = η0 · 10^{−α0 d / 10}"""
    return chan.eta0 * 10.0 ** (-chan.alpha0 * chan.length_km / 10.0)


def fiber_length_for_efficiency(eta: float, eta0: float, alpha0: float) -> float:
    """
    单臂光纤长度 [km]，使综合效率等于 eta

    Args:
        eta: 目标综合效率
        eta0: 本征探测效率
        alpha0: 光纤衰减 [dB/km]

    Returns:
        光纤长度；eta 超过 eta0 时返回 NaN
    """
    if not 0.0 < eta <= 1.0:
        raise ParameterError(f"效率必须位于 (0, 1]，实际为 {eta}")
    if alpha0 <= 0:
        raise ParameterError(f"光纤衰减必须为正，实际为 {alpha0}")
    if eta > eta0:
        return float("nan")
    return -10.0 / alpha0 * math.log10(eta / eta0)


def separation_for_efficiency(eta: float, eta0: float, alpha0: float) -> float:
    """两个相同光纤臂对应的总间距 [km]"""
    return 2.0 * fiber_length_for_efficiency(eta, eta0, alpha0)


def _measurement_matrices(V_T: JointCM, setup: SwapSetup):
    """Υ 的元素 r1、r2、r3 与 K 块"""
    O = V_T.O
    t = setup.transmissivity
    st = math.sqrt(t * (1.0 - t))
    a1, a2, a3 = O[0, 0], O[1, 1], O[0, 1]
    b1, b2, b3 = O[2, 2], O[3, 3], O[2, 3]
    z1, z3, z4, z2 = O[0, 2], O[0, 3], O[1, 2], O[1, 3]
    noise1 = (1.0 - setup.eta1) / setup.eta1 * VACUUM_VARIANCE
    noise2 = (1.0 - setup.eta2) / setup.eta2 * VACUUM_VARIANCE

    r1 = (1.0 - t) * a1 + t * b1 - 2.0 * st * z1 + noise1
    r2 = (1.0 - t) * b2 + t * a2 + 2.0 * st * z2 + noise2
    r3 = st * (b3 - a3) - (1.0 - t) * z3 + t * z4

    K11 = np.array([[(1.0 - t) * r2, st * r3], [st * r3, t * r1]])
    K22 = np.array([[t * r2, -st * r3], [-st * r3, (1.0 - t) * r1]])
    K12 = np.array([[-st * r2, (1.0 - t) * r3], [-t * r3, st * r1]])
    return (r1, r2, r3), {(0, 0): K11, (1, 1): K22, (0, 1): K12, (1, 0): K12.T}


def conditioned_cm(V_T: JointCM, setup: SwapSetup) -> CovMatrix:
    """
    Bell 型测量后两个机械模式的条件协方差矩阵
    V_F = E − (1/det Υ) Σ_ij C_i K_ij C_jᵀ

    测量量为 sqrt(1−T) x_A − sqrt(T) x_B（效率 η1）与 −sqrt(T) p_A − sqrt(1−T) p_B（效率 η2）；
    探测噪声项 (1−η)/η 按真空方差 1/2 缩放。

    Args:
        V_T: 联合协方差矩阵
        setup: 探测设置

    Returns:
        4×4 协方差矩阵
    """
    (r1, r2, r3), K = _measurement_matrices(V_T, setup)
    det_upsilon = r1 * r2 - r3 ** 2
    if not det_upsilon > 0:
        logger.error(f"测量噪声矩阵退化: det Υ = {det_upsilon:.3e}")
        raise MeasurementSingularError(f"det Υ = {det_upsilon:.3e} ≤ 0，测量退化")

    C = V_T.C
    blocks = (C[:, 0:2], C[:, 2:4])
    correction = np.zeros((4, 4))
    for (i, j), K_ij in K.items():
        correction += blocks[i] @ K_ij @ blocks[j].T
    V_F = V_T.E - correction / det_upsilon
    return CovMatrix((V_F + V_F.T) / 2.0, ("tor_A", "tor_B"))


def conditioned_cm_oracle(V_T: JointCM, setup: SwapSetup) -> CovMatrix:
    """
    独立校验路径：分束器辛变换、真空辅助模的损耗、理想零差条件化

    对 "−" 端口测 x、"+" 端口测 p，条件化用 Schur 补与伪逆。
    """
    S = np.eye(8)
    S[4:8, 4:8] = beam_splitter_symplectic(setup.transmissivity)
    V = S @ V_T.matrix @ S.T

    # 损耗：V → η V + (1 − η)/2
    scale = np.ones(8)
    scale[4:6] = math.sqrt(setup.eta1)
    scale[6:8] = math.sqrt(setup.eta2)
    V = V * scale[:, None] * scale[None, :]
    V[4:6, 4:6] += (1.0 - setup.eta1) * VACUUM_VARIANCE * np.eye(2)
    V[6:8, 6:8] += (1.0 - setup.eta2) * VACUUM_VARIANCE * np.eye(2)

    projector = np.diag([1.0, 0.0, 0.0, 1.0])
    V_mm = V[4:8, 4:8]
    V_rm = V[0:4, 4:8]
    reduced = projector @ V_mm @ projector
    if np.linalg.matrix_rank(reduced, tol=1e-14 * max(1.0, np.max(np.abs(reduced)))) < 2:
        raise MeasurementSingularError("测量量的协方差矩阵退化")
    V_F = V[0:4, 0:4] - V_rm @ np.linalg.pinv(reduced) @ V_rm.T
    return CovMatrix((V_F + V_F.T) / 2.0, ("tor_A", "tor_B"))


def swap_entanglement(out_A: CovMatrix, out_B: CovMatrix, setup: SwapSetup) -> float:
    """
    纠缠交换后两个机械模式的对数负性

    Args:
        out_A: 系统 A 的输出协方差矩阵
        out_B: 系统 B 的输出协方差矩阵
        setup: 探测设置

    Returns:
        En
    """
    V_F = conditioned_cm(joint_cm(out_A, out_B, setup.mode_choice), setup)
    return log_negativity(V_F)
