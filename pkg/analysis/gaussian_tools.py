#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
高斯态工具模块
负责协方差矩阵的模式选取、辛本征值、物理性判断、部分转置与对数负性，
并提供测试和不变量检查使用的标准高斯态与辛变换
"""

import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from utils.constants import VACUUM_VARIANCE
from utils.exceptions import NumericalError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CovMatrix:
    """2N×2N 正交分量协方差矩阵，排列为 (x1, p1, x2, p2, ...)"""

    matrix: np.ndarray = field(compare=False)
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        V = np.asarray(self.matrix, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
            raise ParameterError(f"协方差矩阵必须是 2N×2N 方阵，实际形状 {V.shape}")
        object.__setattr__(self, "matrix", V)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"mode{i}" for i in range(V.shape[0] // 2)))
        elif len(self.labels) != V.shape[0] // 2:
            raise ParameterError(f"模式标签数 {len(self.labels)} 与矩阵维度 {V.shape} 不符")

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """第 i 与第 j 个模式之间的 2×2 块"""
        return self.matrix[2 * i:2 * i + 2, 2 * j:2 * j + 2]


def _as_array(V) -> np.ndarray:
    return V.matrix if isinstance(V, CovMatrix) else np.asarray(V, dtype=float)


def symplectic_form(n_modes: int) -> np.ndarray:
    """辛形式 Ω = ⊕ [[0, 1], [−1, 0]]"""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def select_modes(V: CovMatrix, idx: Sequence[int]) -> CovMatrix:
    """
    选取若干模式的约化协方差矩阵（高斯态的部分迹）

    Args:
        V: 协方差矩阵
        idx: 模式编号，保持给定顺序

    Returns:
        子协方差矩阵
    """
    idx = list(idx)
    if len(set(idx)) != len(idx):
        raise IndexError(f"模式编号重复: {idx}")
    for i in idx:
        if not 0 <= i < V.n_modes:
            raise IndexError(f"模式编号 {i} 超出范围 [0, {V.n_modes})")
    rows = [r for i in idx for r in (2 * i, 2 * i + 1)]
    return CovMatrix(V.matrix[np.ix_(rows, rows)], tuple(V.labels[i] for i in idx))


def symplectic_eigenvalues(V) -> np.ndarray:
    """
    辛本征值：iΩV 本征值的模，每个二重简并，返回 N 个升序正数

    Args:
        V: 对称正定协方差矩阵

    Returns:
        升序排列的辛本征值
    """
    M = _as_array(V)
    try:
        np.linalg.cholesky((M + M.T) / 2.0)
    except np.linalg.LinAlgError:
        raise ParameterError("协方差矩阵不是正定矩阵")
    n = M.shape[0] // 2
    eigenvalues = np.linalg.eigvals(1j * symplectic_form(n) @ M)
    # iΩV 的本征值为 ±ν 成对出现
    positive = np.sort(eigenvalues.real)[n:]
    negative = -np.sort(eigenvalues.real)[:n][::-1]
    mismatch = np.max(np.abs(positive - negative))
    if mismatch > 1e-9 * max(1.0, np.max(positive)):
        logger.warning(f"辛本征值配对偏差 {mismatch:.3e}")
    return (positive + negative) / 2.0


def is_physical(V, v_vac: float = VACUUM_VARIANCE, tol: float = 1e-9) -> bool:
    """所有辛本征值不小于真空方差（容差 tol）时返回 True"""
    M = _as_array(V)
    if not np.allclose(M, M.T, rtol=1e-9, atol=1e-12 * max(1.0, np.max(np.abs(M)))):
        return False
    try:
        nu = symplectic_eigenvalues(M)
    except ParameterError:
        return False
    return bool(np.min(nu) >= v_vac - tol)


def partial_transpose(V, mode: int = 1) -> np.ndarray:
    """部分转置：翻转第 mode 个模式的动量符号"""
    M = _as_array(V).copy()
    flip = np.ones(M.shape[0])
    flip[2 * mode + 1] = -1.0
    return M * flip[:, None] * flip[None, :]


def _pair_blocks(V) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    M = _as_array(V)
    if M.shape != (4, 4):
        raise ParameterError(f"对数负性需要 4×4 的两模协方差矩阵，实际形状 {M.shape}")
    return M[0:2, 0:2], M[2:4, 2:4], M[0:2, 2:4]


def smallest_pt_eigenvalue(V) -> float:
    """
    部分转置后的最小辛本征值 η⁻

    η⁻² = (Σ − sqrt(Σ² − 4 det V)) / 2 改写为 2 det V / (Σ + sqrt(Σ² − 4 det V))，
    其中 Σ = det A1 + det A2 − 2 det A3。

    Args:
        V: 4×4 两模协方差矩阵

    Returns:
        η⁻
    """
    A1, A2, A3 = _pair_blocks(V)
    sigma = np.linalg.det(A1) + np.linalg.det(A2) - 2.0 * np.linalg.det(A3)
    det_v = np.linalg.det(_as_array(V))
    discriminant = sigma ** 2 - 4.0 * det_v
    if discriminant < 0:
        if discriminant < -1e-12 * max(1.0, sigma ** 2):
            logger.error(f"对数负性判别式为负: {discriminant:.3e}（Σ={sigma:.3e}）")
            raise NumericalError(f"对数负性判别式为负 {discriminant:.3e}，矩阵病态或非物理")
        discriminant = 0.0
    if det_v <= 0:
        raise NumericalError(f"协方差矩阵行列式非正: {det_v:.3e}")
    return math.sqrt(2.0 * det_v / (sigma + math.sqrt(discriminant)))


def log_negativity(V) -> float:
    """
    对数负性 En = max(0, −ln 2η⁻)

    Args:
        V: 4×4 两模协方差矩阵（真空方差 1/2）

    Returns:
        En ≥ 0
    """
    eta_minus = smallest_pt_eigenvalue(V)
    return max(0.0, -math.log(2.0 * eta_minus))


def vacuum_cm(n_modes: int) -> np.ndarray:
    return VACUUM_VARIANCE * np.eye(2 * n_modes)


def thermal_cm(n_bar: Sequence[float]) -> np.ndarray:
    """各模式热态的直积，方差 (2n̄+1)/2"""
    return np.diag(np.repeat([(2.0 * n + 1.0) * VACUUM_VARIANCE for n in n_bar], 2))


def two_mode_squeezed_vacuum_cm(r: float) -> np.ndarray:
    """双模压缩真空态，A1 = A2 = cosh(2r)/2·I，A3 = sinh(2r)/2·diag(1, −1)"""
    ch, sh = math.cosh(2.0 * r) * VACUUM_VARIANCE, math.sinh(2.0 * r) * VACUUM_VARIANCE
    V = np.zeros((4, 4))
    V[0:2, 0:2] = ch * np.eye(2)
    V[2:4, 2:4] = ch * np.eye(2)
    V[0:2, 2:4] = sh * np.diag([1.0, -1.0])
    V[2:4, 0:2] = V[0:2, 2:4].T
    return V


def beam_splitter_symplectic(transmissivity: float) -> np.ndarray:
    """
    两模分束器的辛矩阵

    输出 1 = sqrt(1−T)·模式1 − sqrt(T)·模式2，输出 2 = sqrt(T)·模式1 + sqrt(1−T)·模式2，
    x 与 p 分别按同一正交变换。
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ParameterError(f"透射率必须位于 [0, 1]，实际为 {transmissivity}")
    t, r = math.sqrt(transmissivity), math.sqrt(1.0 - transmissivity)
    return np.kron(np.array([[r, -t], [t, r]]), np.eye(2))


def local_symplectic(angles: Sequence[float], squeezings: Sequence[float]) -> np.ndarray:
    """各模式的局域辛变换：旋转后单模压缩"""
    blocks = []
    for theta, r in zip(angles, squeezings):
        rotation = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
        blocks.append(np.diag([math.exp(-r), math.exp(r)]) @ rotation)
    n = len(blocks)
    S = np.zeros((2 * n, 2 * n))
    for i, block in enumerate(blocks):
        S[2 * i:2 * i + 2, 2 * i:2 * i + 2] = block
    return S


def _passive_symplectic(n_modes: int, rng: np.random.Generator) -> np.ndarray:
    """由随机酉矩阵得到的正交辛矩阵（x、p 交错排列）"""
    U = unitary_group.rvs(n_modes, random_state=rng) if n_modes > 1 else np.exp(
        2j * math.pi * rng.random()) * np.ones((1, 1))
    S_xxpp = np.block([[U.real, -U.imag], [U.imag, U.real]])
    order = [k for i in range(n_modes) for k in (i, i + n_modes)]
    return S_xxpp[np.ix_(order, order)]


def random_symplectic(n_modes: int, rng: Optional[np.random.Generator] = None,
                      max_squeezing: float = 1.0) -> np.ndarray:
    """Bloch–Messiah 形式的随机辛矩阵 O1·diag(e^{-r}, e^{r})·O2"""
    rng = np.random.default_rng() if rng is None else rng
    squeezing = rng.uniform(0.0, max_squeezing, n_modes)
    K = np.diag(np.exp(np.repeat(squeezing, 2) * np.tile([-1.0, 1.0], n_modes)))
    return _passive_symplectic(n_modes, rng) @ K @ _passive_symplectic(n_modes, rng)


def random_physical_cm(n_modes: int, rng: Optional[np.random.Generator] = None,
                       max_squeezing: float = 1.0, max_thermal: float = 2.0) -> np.ndarray:
    """随机物理协方差矩阵 S·diag(ν)·Sᵀ，ν ≥ 1/2"""
    rng = np.random.default_rng() if rng is None else rng
    nu = VACUUM_VARIANCE + rng.uniform(0.0, max_thermal, n_modes)
    S = random_symplectic(n_modes, rng, max_squeezing)
    V = S @ np.diag(np.repeat(nu, 2)) @ S.T
    return (V + V.T) / 2.0
