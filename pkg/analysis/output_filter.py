#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
输出场时间模式滤波模块
负责滤波核及其频谱、输入输出传递矩阵，以及 (机械, TMS 滤波模式, BS 滤波模式)
的 6×6 稳态输出协方差矩阵

约定:
    傅里叶变换 f̃(ω) = ∫ f(t) e^{iωt} dt；
    两个滤波模式都只收集 t 之前输出的光，a_f(t) = ∫_{s≤t} k(t − s) a_out(s) ds，
    k(τ) = sqrt(2Γ) e^{−Γτ} e^{−iω_s τ}；TMS 模式取 ω_s = −ω_m（Stokes 边带），
    BS 模式取 ω_s = +ω_m（anti-Stokes 边带）。后期的输出光与 t 时刻的机械模式不对易，不能进入联合态。
    两个模式的核有重叠，对称正交化后才是互相独立的玻色模式。
"""

import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy import integrate

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.dynamics import LinearModel, is_stable, steady_state_cm
from analysis.gaussian_tools import CovMatrix, is_physical, log_negativity, select_modes, symplectic_eigenvalues
from utils.constants import VACUUM_VARIANCE
from utils.exceptions import InstabilityError, ParameterError, QuadratureError, UnphysicalStateError

logger = logging.getLogger(__name__)

FILTER_KINDS = ("tms", "bs")
OUTPUT_LABELS = ("mechanical", "tms", "bs")

# 机械块与腔内稳态解的允许相对偏差
MECHANICAL_BLOCK_TOLERANCE = 1e-5


@dataclass(frozen=True)
class FilterSpec:
    """指数型时间模式滤波器：类型、宽度 Γ [rad/s]、中心频率 [rad/s]"""

    kind: str
    Gamma: float
    omega_center: float

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ParameterError(f"未知的滤波类型: {self.kind}，可选 {FILTER_KINDS}")
        if not self.Gamma > 0:
            raise ParameterError(f"滤波宽度 Γ 必须为正，实际为 {self.Gamma}")


def filter_kernel(spec: FilterSpec, t):
    """
    时域滤波核

    TMS: sqrt(2Γ) e^{Γt} e^{−iω_c t}（t ≤ 0），BS: sqrt(2Γ) e^{−Γt} e^{iω_c t}（t ≥ 0），
    其余时刻为零，L² 范数为 1。
    """
    t = np.asarray(t, dtype=float)
    amplitude = math.sqrt(2.0 * spec.Gamma)
    if spec.kind == "tms":
        support = t <= 0
        values = amplitude * np.exp(spec.Gamma * np.minimum(t, 0.0) - 1j * spec.omega_center * t)
    else:
        support = t >= 0
        values = amplitude * np.exp(-spec.Gamma * np.maximum(t, 0.0) + 1j * spec.omega_center * t)
    return np.where(support, values, 0.0)


def filter_spectrum(spec: FilterSpec, omega):
    """
    滤波核的傅里叶变换

    TMS: sqrt(2Γ) / (Γ + i(ω − ω_c))，BS: sqrt(2Γ) / (Γ − i(ω + ω_c))。
    """
    omega = np.asarray(omega, dtype=float)
    amplitude = math.sqrt(2.0 * spec.Gamma)
    if spec.kind == "tms":
        return amplitude / (spec.Gamma + 1j * (omega - spec.omega_center))
    return amplitude / (spec.Gamma - 1j * (omega + spec.omega_center))


def sideband_frequency(spec: FilterSpec) -> float:
    """滤波模式选出的边带频率：TMS 为 −ω_c，BS 为 +ω_c"""
    return -spec.omega_center if spec.kind == "tms" else spec.omega_center


def field_response(spec: FilterSpec, omega):
    """
    滤波模式对输出场的因果响应 sqrt(2Γ) / (Γ − i(ω − ω_s))

    TMS 的响应等于 F̃_t(−ω)，BS 的响应等于 conj F̃_b(−ω)，二者都只在 ω_s 附近有峰。
    """
    spectrum = filter_spectrum(spec, -np.asarray(omega, dtype=float))
    return spectrum if spec.kind == "tms" else np.conj(spectrum)


def mode_overlap(first: FilterSpec, second: FilterSpec) -> complex:
    """两个滤波模式的对易子 [a_1, a_2†] = ∫ k_1(τ) conj k_2(τ) dτ"""
    total = first.Gamma + second.Gamma
    detuning = sideband_frequency(first) - sideband_frequency(second)
    return 2.0 * math.sqrt(first.Gamma * second.Gamma) / complex(total, detuning)


def orthonormal_mixing(tms: FilterSpec, bs: FilterSpec) -> np.ndarray:
    """
    对称正交化矩阵 W = S^{-1/2}，S 为两个滤波模式的对易子矩阵

    a'_i = Σ_j W_ij a_j 满足 [a'_i, a'_j†] = δ_ij；重叠为零时 W 为单位阵。

    Args:
        tms: TMS 滤波器
        bs: BS 滤波器

    Returns:
        2×2 复矩阵
    """
    overlap = mode_overlap(tms, bs)
    S = np.array([[1.0, overlap], [np.conj(overlap), 1.0]])
    weights, U = np.linalg.eigh(S)
    if np.min(weights) < 1e-12:
        logger.error(f"两个滤波模式线性相关（重叠 |S| = {abs(overlap):.6f}）")
        raise ParameterError("TMS 与 BS 滤波模式线性相关，无法构成独立模式（ω_c 过小或 Γ 过大）")
    return (U * weights ** -0.5) @ U.conj().T


def _rotation_block(G_plus: complex, G_minus_conj: complex) -> np.ndarray:
    c = (G_plus + G_minus_conj) / 2.0
    s = (G_plus - G_minus_conj) / 2j
    return np.array([[c, -s], [s, c]])


def quadrature_block(spec: FilterSpec, omega: float) -> np.ndarray:
    """
    单个滤波模式在正交分量上的 2×2 传递块 [[c, −s], [s, c]]

    c = (G(ω) + conj G(−ω)) / 2，s = (G(ω) − conj G(−ω)) / (2i)，G 为 field_response。
    """
    return _rotation_block(complex(field_response(spec, omega)),
                           complex(np.conj(field_response(spec, -omega))))


def filter_matrix(omega: float, tms: FilterSpec, bs: FilterSpec,
                  mixing: Optional[np.ndarray] = None) -> np.ndarray:
    """
    6×6 滤波矩阵 T(ω) = blockdiag(I₂, B_tms(ω), B_bs(ω))

    B 由正交化后的模式响应 G'_i(ω) = Σ_j W_ij G_j(ω) 构成。
    """
    if mixing is None:
        mixing = orthonormal_mixing(tms, bs)
    plus = mixing @ np.array([complex(field_response(tms, omega)), complex(field_response(bs, omega))])
    minus = mixing @ np.array([complex(field_response(tms, -omega)), complex(field_response(bs, -omega))])
    T = np.zeros((6, 6), dtype=complex)
    T[0:2, 0:2] = np.eye(2)
    T[2:4, 2:4] = _rotation_block(plus[0], np.conj(minus[0]))
    T[4:6, 4:6] = _rotation_block(plus[1], np.conj(minus[1]))
    return T


def transfer_S(omega: float, model: LinearModel, kappa: Optional[float] = None) -> np.ndarray:
    """
    6×4 传递矩阵 S(ω) = C M(ω) + P，M(ω) = (iωI + A)⁻¹

    第 1–2 行为机械分量，第 3–4 与 5–6 行是由 a_out = sqrt(κ) a − a_in 得到的两份输出场。

    Args:
        omega: 角频率 [rad/s]
        model: 线性模型
        kappa: 腔衰减率，默认取 model.kappa

    Returns:
        复矩阵
    """
    kappa = model.kappa if kappa is None else kappa
    root = math.sqrt(kappa)
    C = np.zeros((6, 4))
    C[0, 0] = C[1, 1] = 1.0
    C[2, 2] = C[3, 3] = C[4, 2] = C[5, 3] = root
    P = np.zeros((6, 4))
    P[2, 2] = P[3, 3] = P[4, 2] = P[5, 3] = 1.0 / root
    try:
        M = np.linalg.inv(1j * omega * np.eye(4) + model.A)
    except np.linalg.LinAlgError:
        logger.error(f"iωI + A 在 ω={omega:.4e} 处奇异")
        raise InstabilityError(f"iωI + A 在 ω={omega:.4e} rad/s 处奇异，模型可能不稳定")
    return C @ M + P


def integration_window(model: LinearModel, Gamma: float) -> float:
    """主积分窗口 W = 10·max(κ, |Δ| + ω_m) + 40Γ"""
    return 10.0 * max(model.kappa, abs(model.Delta) + model.omega_m) + 40.0 * Gamma


def _integration_breakpoints(model: LinearModel, window: float) -> List[float]:
    """窗口内的积分断点：漂移矩阵本征频率与机械频率"""
    eigen_frequencies = np.abs(np.linalg.eigvals(model.A).imag)
    candidates = list(eigen_frequencies) + [model.omega_m, abs(model.Delta)]
    return sorted({float(p) for p in candidates if 0 < p < window})


def output_cm(model: LinearModel, Gamma: float, tol: float = 1e-6) -> CovMatrix:
    """
    稳态输出协方差矩阵 V_out = (1/2π) ∫ T S D S† T† dω

    被积函数 Hermitian 且关于 ω 共轭对称，只需在 [0, ∞) 上积分实部再除以 π。

    Args:
        model: 稳定的线性模型
        Gamma: 滤波宽度 [rad/s]
        tol: 积分相对容差

    Returns:
        6×6 协方差矩阵，模式顺序 (mechanical, tms, bs)
    """
    if not is_stable(model):
        logger.error("输出协方差矩阵要求稳定的线性模型")
        raise InstabilityError("线性模型不稳定，输出稳态不存在")

    tms = FilterSpec("tms", Gamma, model.omega_m)
    bs = FilterSpec("bs", Gamma, model.omega_m)
    mixing = orthonormal_mixing(tms, bs)
    logger.debug(f"滤波模式重叠 |[a_tms, a_bs†]| = {abs(mode_overlap(tms, bs)):.4e}")
    D = model.D

    def integrand(omega: float) -> np.ndarray:
        h = filter_matrix(omega, tms, bs, mixing) @ transfer_S(omega, model)
        return (h @ D @ h.conj().T).real.ravel()

    window = integration_window(model, Gamma)
    points = _integration_breakpoints(model, window)
    finite, finite_err, finite_info = integrate.quad_vec(
        integrand, 0.0, window, epsrel=tol, epsabs=1e-14, norm="max",
        points=points or None, limit=20000, full_output=True)
    tail, tail_err, tail_info = integrate.quad_vec(
        integrand, window, np.inf, epsrel=tol, epsabs=1e-14, norm="max",
        limit=20000, full_output=True)
    for part, info, err in (("有限区间", finite_info, finite_err), ("尾部", tail_info, tail_err)):
        if info.status != 0:
            logger.error(f"输出协方差积分（{part}）未收敛: {info.message}")
            raise QuadratureError(f"输出协方差积分（{part}）未收敛: {info.message}", float(err))

    V = ((finite + tail) / math.pi).reshape(6, 6)
    V = (V + V.T) / 2.0
    logger.debug(f"输出协方差积分完成: 函数求值 {finite_info.neval + tail_info.neval} 次，"
                 f"误差估计 {max(finite_err, tail_err):.3e}")

    _check_mechanical_block(model, V, tol)

    nu = symplectic_eigenvalues(V)
    if np.min(nu) < VACUUM_VARIANCE - 1e-6:
        logger.error(f"输出协方差矩阵非物理: 最小辛本征值 {np.min(nu):.8f}")
        raise UnphysicalStateError(f"输出协方差矩阵非物理（最小辛本征值 {np.min(nu):.8f} < 1/2）")
    return CovMatrix(V, OUTPUT_LABELS)


def _check_mechanical_block(model: LinearModel, V: np.ndarray, tol: float):
    """输出协方差的机械块应与腔内稳态解的机械块一致，偏差上限取 max(1e-5, tol)"""
    reference = steady_state_cm(model).matrix[0:2, 0:2]
    deviation = np.max(np.abs(V[0:2, 0:2] - reference)) / np.max(np.abs(reference))
    if deviation > max(MECHANICAL_BLOCK_TOLERANCE, tol):
        logger.error(f"输出协方差机械块与 Lyapunov 解的相对偏差 {deviation:.3e}")
        raise QuadratureError(f"输出协方差机械块与腔内稳态解不一致（相对偏差 {deviation:.3e}）", deviation)


def output_entanglement(out: CovMatrix) -> Dict[str, float]:
    """输出协方差中三对模式的对数负性"""
    if not is_physical(out, tol=1e-6):
        logger.warning("计算纠缠时输出协方差矩阵不满足物理性")
    return {
        "tms_tor": log_negativity(select_modes(out, (0, 1))),
        "bs_tor": log_negativity(select_modes(out, (0, 2))),
        "tms_bs": log_negativity(select_modes(out, (1, 2))),
    }
