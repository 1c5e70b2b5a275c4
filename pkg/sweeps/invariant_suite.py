#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
不变量检查模块
负责运行快速的数值自检：退极化因子、极化率相似变换、功率标度指数、
Lyapunov 残差、双模压缩真空的对数负性、部分转置等价性、
Bell 型测量闭式解与独立条件化路径的一致性、零耦合输出为真空
"""

import logging
import math
import os
import sys
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.bell_swap import JointCM, SwapSetup, conditioned_cm, conditioned_cm_oracle
from analysis.dynamics import LinearModel, is_stable, lyapunov_residual, steady_state_cm
from analysis.gaussian_tools import (log_negativity, partial_transpose, random_physical_cm,
                                     smallest_pt_eigenvalue, symplectic_eigenvalues,
                                     two_mode_squeezed_vacuum_cm)
from analysis.output_filter import output_cm
from models.ellipsoid import (EllipsoidGeometry, axis_polarizabilities, depolarization_factor_quadrature,
                              depolarization_factors, rotated_polarizability)
from models.trap_cavity import CavityParams, TweezerParams, mode_params
from utils.constants import VACUUM_VARIANCE

logger = logging.getLogger(__name__)

# 标度检查使用的参考粒子与光场
_REFERENCE_GEOMETRY = EllipsoidGeometry(100e-9, 50e-9, 50e-9, 2200.0)
_REFERENCE_PERMITTIVITY = 2.1
_REFERENCE_CAVITY = CavityParams(1e-3, 15.7e-6, 1550e-9, 0.0)


def _check_depolarization(rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(20):
        b = rng.uniform(20e-9, 100e-9)
        geom = EllipsoidGeometry(b * rng.uniform(1.0, 4.0), b, b, 2200.0)
        closed = depolarization_factors(geom)
        for axis in range(3):
            numeric = depolarization_factor_quadrature(geom, axis)
            worst = max(worst, abs(numeric - closed[axis]) / closed[axis])
    return worst


def _check_polarizability_similarity(rng: np.random.Generator) -> float:
    pol = axis_polarizabilities(EllipsoidGeometry(120e-9, 60e-9, 40e-9, 2200.0), _REFERENCE_PERMITTIVITY)
    reference = np.sort([pol.alpha_a, pol.alpha_b, pol.alpha_c])
    worst = 0.0
    for _ in range(20):
        rotated = rotated_polarizability(pol, rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        eigenvalues = np.sort(np.linalg.eigvalsh(rotated))
        worst = max(worst, float(np.max(np.abs(eigenvalues - reference) / reference)))
    return worst


def _check_scaling(rng: np.random.Generator) -> float:
    """功率 1e-3..1 W 上 log-log 拟合斜率与 1/2、1/4 的最大偏差"""
    powers = np.geomspace(1e-3, 1.0, 20)
    pol = axis_polarizabilities(_REFERENCE_GEOMETRY, _REFERENCE_PERMITTIVITY)
    worst = 0.0
    for kind, cavity in (("torsional", _REFERENCE_CAVITY), ("com", _REFERENCE_CAVITY.with_phase(math.pi / 2))):
        modes = [mode_params(kind, TweezerParams(p, 1e-6, 1550e-9), cavity, _REFERENCE_GEOMETRY, pol)
                 for p in powers]
        omega_slope = np.polyfit(np.log(powers), np.log([m.omega_m for m in modes]), 1)[0]
        coupling_slope = np.polyfit(np.log(powers), np.log([m.g_cs for m in modes]), 1)[0]
        worst = max(worst, abs(omega_slope - 0.5), abs(coupling_slope - 0.25))
    return worst


def random_stable_model(rng: np.random.Generator) -> LinearModel:
    """无量纲单位（ω_m = 1）下的随机稳定模型"""
    while True:
        model = LinearModel(omega_m=1.0, gamma=rng.uniform(1e-2, 0.5), g=rng.uniform(0.0, 0.4),
                            Delta=rng.uniform(0.5, 1.5), kappa=rng.uniform(0.5, 3.0),
                            n_bar=rng.uniform(0.0, 10.0))
        if is_stable(model):
            return model


def _check_lyapunov(rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(100):
        model = random_stable_model(rng)
        worst = max(worst, lyapunov_residual(model, steady_state_cm(model).matrix))
    return worst


def _check_tmsv(rng: np.random.Generator) -> float:
    return max(abs(log_negativity(two_mode_squeezed_vacuum_cm(r)) - 2.0 * r)
               for r in np.linspace(0.1, 2.0, 20))


def _check_partial_transpose(rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(100):
        V = random_physical_cm(2, rng)
        direct = float(np.min(symplectic_eigenvalues(partial_transpose(V))))
        worst = max(worst, abs(smallest_pt_eigenvalue(V) - direct) / direct)
    return worst


def _check_bell_formula(rng: np.random.Generator) -> float:
    worst = 0.0
    for eta in (1.0, 0.9, 0.8, 0.5):
        setup = SwapSetup(rng.uniform(0.2, 0.8), eta, eta)
        for _ in range(25):
            V_T = JointCM(random_physical_cm(4, rng, max_squeezing=0.7))
            closed = conditioned_cm(V_T, setup).matrix
            oracle = conditioned_cm_oracle(V_T, setup).matrix
            worst = max(worst, float(np.max(np.abs(closed - oracle)) / np.max(np.abs(oracle))))
    return worst


def _check_vacuum_output(rng: np.random.Generator) -> float:
    model = LinearModel(omega_m=1.0, gamma=0.1, g=0.0, Delta=1.0, kappa=1.0, n_bar=0.0)
    V = output_cm(model, 0.2, tol=1e-10).matrix
    return float(np.max(np.abs(V - VACUUM_VARIANCE * np.eye(6))))


INVARIANT_CHECKS: List[Tuple[str, Callable[[np.random.Generator], float], float]] = [
    ("depolarization_closed_vs_quadrature", _check_depolarization, 1e-8),
    ("polarizability_similarity", _check_polarizability_similarity, 1e-12),
    ("power_scaling_exponents", _check_scaling, 1e-6),
    ("lyapunov_residual", _check_lyapunov, 1e-12),
    ("tmsv_log_negativity", _check_tmsv, 1e-9),
    ("partial_transpose_equivalence", _check_partial_transpose, 1e-9),
    ("bell_closed_form_vs_conditioning", _check_bell_formula, 1e-9),
    ("zero_coupling_output_vacuum", _check_vacuum_output, 1e-8),
]


def run_invariant_suite(seed: int = 0) -> pd.DataFrame:
    """
    运行全部不变量检查

    Args:
        seed: 随机种子，各检查使用同一个生成器依次抽样

    Returns:
        DataFrame，列为 check、value、tolerance、passed
    """
    rng = np.random.default_rng(seed)
    records = []
    for name, check, tolerance in INVARIANT_CHECKS:
        value = check(rng)
        passed = bool(value <= tolerance)
        log = logger.info if passed else logger.error
        log(f"不变量检查 {name}: {value:.3e}（容差 {tolerance:.0e}）{'通过' if passed else '失败'}")
        records.append({"check": name, "value": value, "tolerance": tolerance, "passed": passed})
    return pd.DataFrame.from_records(records, columns=["check", "value", "tolerance", "passed"])
