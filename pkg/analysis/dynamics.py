#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
线性化 Langevin 动力学模块
负责构造漂移矩阵与扩散矩阵、判断稳定性、求解稳态腔内协方差矩阵，
并提供 Euler–Maruyama 随机模拟作为慢速校验
"""

import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.gaussian_tools import CovMatrix
from models.trap_cavity import ModeParams
from utils.constants import STABILITY_MARGIN
from utils.exceptions import InstabilityError, ParameterError

logger = logging.getLogger(__name__)

INTERACTIONS = ("full", "beam_splitter", "two_mode_squeezing")

# 正交分量排列 (Q, P, X, Y)：先机械后光学
INTRACAVITY_LABELS = ("mechanical", "cavity")


@dataclass(frozen=True)
class LinearModel:
    """单个机械模式与单个腔模的线性 Langevin 系统，速率均为角频率"""

    omega_m: float
    gamma: float
    g: float
    Delta: float
    kappa: float
    n_bar: float
    interaction: str = "full"
    A: np.ndarray = field(default=None, compare=False, repr=False)
    D: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.kappa > 0:
            raise ParameterError(f"腔衰减率 κ 必须为正，实际为 {self.kappa}")
        if self.gamma < 0:
            raise ParameterError(f"机械阻尼 γ 不能为负，实际为 {self.gamma}")
        if self.n_bar < 0:
            raise ParameterError(f"热声子数不能为负，实际为 {self.n_bar}")
        if self.interaction not in INTERACTIONS:
            raise ParameterError(f"未知的相互作用形式: {self.interaction}，可选 {INTERACTIONS}")
        object.__setattr__(self, "A", drift_matrix(self.omega_m, self.gamma, self.g, self.Delta,
                                                   self.kappa, self.interaction))
        object.__setattr__(self, "D", diffusion_matrix(self.gamma, self.n_bar, self.kappa))


def drift_matrix(omega_m: float, gamma: float, g: float, Delta: float, kappa: float,
                 interaction: str = "full") -> np.ndarray:
    """
    漂移矩阵 A

    full 形式为
        [−γ/2,  ω_m,   0,    0  ]
        [−ω_m, −γ/2,  2g,    0  ]
        [  0,    0,  −κ/2,   Δ  ]
        [ 2g,    0,   −Δ,  −κ/2 ]
    beam_splitter 与 two_mode_squeezing 只保留相应的一半耦合项，二者之和等于 full。
    """
    A = np.array([[-gamma / 2.0, omega_m, 0.0, 0.0],
                  [-omega_m, -gamma / 2.0, 0.0, 0.0],
                  [0.0, 0.0, -kappa / 2.0, Delta],
                  [0.0, 0.0, -Delta, -kappa / 2.0]])
    if interaction == "full":
        A[1, 2] = 2.0 * g
        A[3, 0] = 2.0 * g
    elif interaction == "beam_splitter":
        A[0, 3], A[1, 2], A[2, 1], A[3, 0] = -g, g, -g, g
    elif interaction == "two_mode_squeezing":
        A[0, 3], A[1, 2], A[2, 1], A[3, 0] = g, g, g, g
    else:
        raise ParameterError(f"未知的相互作用形式: {interaction}")
    return A


def diffusion_matrix(gamma: float, n_bar: float, kappa: float) -> np.ndarray:
    """扩散矩阵 D = diag(γ(2n̄+1)/2, γ(2n̄+1)/2, κ/2, κ/2)"""
    mech = gamma * (2.0 * n_bar + 1.0) / 2.0
    return np.diag([mech, mech, kappa / 2.0, kappa / 2.0])


def make_linear_model(omega_m: float, g: float, gamma: float, n_bar: float, Delta: float,
                      kappa: float, interaction: str = "full") -> LinearModel:
    return LinearModel(omega_m, gamma, g, Delta, kappa, n_bar, interaction)


def build_model(mode: ModeParams, gamma: float, n_bar: float, Delta: Optional[float],
                kappa: float, interaction: str = "full",
                coupling: Optional[float] = None) -> LinearModel:
    """
    由模式参数构造线性模型

    Args:
        mode: 机械模式参数
        gamma: 机械阻尼率 [rad/s]
        n_bar: 热声子数
        Delta: 失谐 [rad/s]，为空时使用 mode.Delta（默认红边带 Δ = ω_m）
        kappa: 腔衰减率 [rad/s]
        interaction: 相互作用形式
        coupling: 覆盖耦合强度 [rad/s]，为空时使用相干散射耦合 g_cs

    Returns:
        线性模型
    """
    g = mode.g_cs if coupling is None else coupling
    Delta = mode.Delta if Delta is None else Delta
    return LinearModel(mode.omega_m, gamma, g, Delta, kappa, n_bar, interaction)


def is_stable(model: LinearModel) -> bool:
    """漂移矩阵所有本征值实部小于 −1e-12·max|A| 时为稳定"""
    eigenvalues = np.linalg.eigvals(model.A)
    threshold = -STABILITY_MARGIN * np.max(np.abs(model.A))
    return bool(np.all(eigenvalues.real < threshold))


def lyapunov_residual(model: LinearModel, V: np.ndarray) -> float:
    """相对残差 ‖AV + VAᵀ + D‖ / ‖D‖"""
    residual = model.A @ V + V @ model.A.T + model.D
    return float(np.linalg.norm(residual) / np.linalg.norm(model.D))


def solve_lyapunov(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    """
    Kronecker 向量化求解 AV + VAᵀ + D = 0

    先按 max|A| 归一化，解不变。
    """
    n = A.shape[0]
    scale = np.max(np.abs(A))
    A_s, D_s = A / scale, D / scale
    identity = np.eye(n)
    operator = np.kron(identity, A_s) + np.kron(A_s, identity)
    vec_v = np.linalg.solve(operator, -D_s.reshape(-1, order="F"))
    V = vec_v.reshape((n, n), order="F")
    return (V + V.T) / 2.0


def steady_state_cm(model: LinearModel) -> CovMatrix:
    """
    稳态腔内协方差矩阵

    Args:
        model: 稳定的线性模型

    Returns:
        4×4 协方差矩阵，排列 (Q, P, X, Y)
    """
    if not is_stable(model):
        eigenvalues = np.linalg.eigvals(model.A)
        logger.error(f"线性模型不稳定，最大本征值实部 {np.max(eigenvalues.real):.4e}")
        raise InstabilityError(f"线性模型不稳定（最大本征值实部 {np.max(eigenvalues.real):.4e} rad/s），不存在稳态")

    V = solve_lyapunov(model.A, model.D)
    residual = lyapunov_residual(model, V)
    if residual > 1e-12:
        logger.warning(f"Lyapunov 方程相对残差 {residual:.3e} 高于 1e-12")
    return CovMatrix(V, INTRACAVITY_LABELS)


def simulate_langevin(model: LinearModel, dt: float, n_steps: int, n_traj: int = 2000,
                      seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Euler–Maruyama 系综模拟线性 Langevin 方程，返回末时刻的样本协方差

    du = A u dt + sqrt(D) dW，初态为零，n_steps·dt 应远大于弛豫时间。

    Args:
        model: 线性模型
        dt: 时间步长 [s]
        n_steps: 步数
        n_traj: 轨迹数
        seed: 随机种子

    Returns:
        (样本协方差, 各元素的 Monte-Carlo 标准误差)
    """
    rng = np.random.default_rng(seed)
    noise_scale = np.sqrt(np.diag(model.D) * dt)
    propagator = np.eye(4) + model.A * dt
    u = np.zeros((n_traj, 4))
    for _ in range(n_steps):
        u = u @ propagator.T + rng.standard_normal((n_traj, 4)) * noise_scale

    V = u.T @ u / n_traj
    diag = np.diag(V)
    stderr = np.sqrt((np.outer(diag, diag) + V ** 2) / n_traj)
    logger.debug(f"Euler–Maruyama 模拟完成: {n_traj} 条轨迹, {n_steps} 步")
    return V, stderr
