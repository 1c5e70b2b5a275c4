#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
场景运行模块
负责注册复现场景、展开扫描轴、在进程池中并行计算扫描点，并按扫描顺序汇总结果表
"""

import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.bell_swap import SwapSetup, separation_for_efficiency, swap_entanglement
from analysis.dynamics import is_stable
from analysis.gaussian_tools import CovMatrix
from analysis.output_filter import output_cm, output_entanglement
from models.ellipsoid import axis_polarizabilities
from models.system import SystemParams, SystemState, evaluate_system
from models.trap_cavity import ModeParams, mode_params
from sweeps.result_table import ResultTable
from utils.config_loader import ScenarioConfig, SweepAxis, apply_override, build_config
from utils.exceptions import ConfigError, LevitoSimError

logger = logging.getLogger(__name__)

# 弱耦合场景的默认耦合比 g = 0.04 ω_m
WEAK_COUPLING_RATIO = 0.04

ENTANGLEMENT_COLUMNS = ["En_tms_tor", "En_bs_tor", "En_tms_bs"]
SWAP_CHOICES = ("bs", "tms")

_GAMMA_SWEEP = SweepAxis("filter.gamma_rad_s", 1e3, 1e7, 25, "log")


def _hz(omega: float) -> float:
    return omega / (2.0 * math.pi)


@dataclass(frozen=True)
class Scenario:
    """复现场景：默认扫描轴、列声明与单点计算函数"""

    name: str
    description: str
    default_sweep: Optional[SweepAxis]
    columns: Callable[[ScenarioConfig], List[str]]
    evaluate: Callable[[ScenarioConfig], Dict[str, Optional[float]]]


def _mode(params: SystemParams, kind: str) -> ModeParams:
    pol = axis_polarizabilities(params.geometry, params.relative_permittivity)
    return mode_params(kind, params.tweezer, params.cavity, params.geometry, pol, detuning=params.detuning)


def _steady_output(params: SystemParams, gamma_f: float,
                   quad_tol: float) -> Tuple[SystemState, Optional[CovMatrix]]:
    """线性模型稳定时返回输出协方差矩阵，否则为 None"""
    state = evaluate_system(params)
    if not is_stable(state.model):
        logger.info(f"线性模型不稳定（g/2π={_hz(state.coupling):.4e} Hz），该点纠缠列留空")
        return state, None
    return state, output_cm(state.model, gamma_f, tol=quad_tol)


def _swap_value(out: Optional[CovMatrix], setup: SwapSetup) -> Optional[float]:
    """两个相同系统之间的纠缠交换"""
    if out is None:
        return None
    return swap_entanglement(out, out, setup)


# ---------------------------------------------------------------- fig2 / figS2

def _coupling_columns(config: ScenarioConfig) -> List[str]:
    return ["g_s_phi_2pi_hz", "g_s_y_2pi_hz", "g_phi_2pi_hz", "g_y_2pi_hz"]


def _fig2_columns(config: ScenarioConfig) -> List[str]:
    return ["omega_phi_2pi_hz", "omega_y_2pi_hz"] + _coupling_columns(config) + ["ratio_phi", "ratio_y"]


def _coupling_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    torsional = _mode(config.system, "torsional")
    com = _mode(config.com_system, "com")
    return {
        "omega_phi_2pi_hz": _hz(torsional.omega_m),
        "omega_y_2pi_hz": _hz(com.omega_m),
        "g_s_phi_2pi_hz": _hz(torsional.g_cs),
        "g_s_y_2pi_hz": _hz(com.g_cs),
        "g_phi_2pi_hz": _hz(torsional.g_disp),
        "g_y_2pi_hz": _hz(com.g_disp),
        "ratio_phi": torsional.g_cs / torsional.omega_m,
        "ratio_y": com.g_cs / com.omega_m,
    }


def _fig2_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    return _coupling_point(config)


def _figs2_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    row = _coupling_point(config)
    return {name: row[name] for name in _coupling_columns(config)}


# ---------------------------------------------------------------- fig3a / figS3

def _single_columns(config: ScenarioConfig) -> List[str]:
    return ["omega_m_2pi_hz", "g_2pi_hz", "stable"] + ENTANGLEMENT_COLUMNS


def _single_row(params: SystemParams, config: ScenarioConfig) -> Dict[str, Optional[float]]:
    state, out = _steady_output(params, config.filter_gamma, config.numerics.quad_tol)
    row: Dict[str, Optional[float]] = {
        "omega_m_2pi_hz": _hz(state.mode.omega_m),
        "g_2pi_hz": _hz(state.coupling),
        "stable": float(out is not None),
    }
    if out is not None:
        values = output_entanglement(out)
        row.update({"En_tms_tor": values["tms_tor"], "En_bs_tor": values["bs_tor"],
                    "En_tms_bs": values["tms_bs"]})
    return row


def _fig3a_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    return _single_row(config.system, config)


def _figs3_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    params = config.system
    if params.coupling_ratio is None:
        params = replace(params, coupling_ratio=WEAK_COUPLING_RATIO)
    return _single_row(params, config)


# ---------------------------------------------------------------- fig3b

def _fig3b_columns(config: ScenarioConfig) -> List[str]:
    return ["stable"] + [f"En_swap_{choice}" for choice in SWAP_CHOICES]


def _fig3b_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    _, out = _steady_output(config.system, config.filter_gamma, config.numerics.quad_tol)
    row: Dict[str, Optional[float]] = {"stable": float(out is not None)}
    for choice in SWAP_CHOICES:
        setup = replace(config.swap.setup, mode_choice=choice)
        row[f"En_swap_{choice}"] = _swap_value(out, setup)
    return row


# ---------------------------------------------------------------- fig4a

def _fig4a_pressures(config: ScenarioConfig) -> Tuple[float, ...]:
    return config.fig4a_pressures or (config.system.gas.pressure,)


def _fig4a_columns(config: ScenarioConfig) -> List[str]:
    columns = []
    for pressure in _fig4a_pressures(config):
        columns += [f"stable_P{pressure:g}_pa", f"En_swap_P{pressure:g}_pa"]
    return columns


def _fig4a_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    row: Dict[str, Optional[float]] = {}
    for pressure in _fig4a_pressures(config):
        params = replace(config.system, gas=replace(config.system.gas, pressure=pressure))
        _, out = _steady_output(params, config.filter_gamma, config.numerics.quad_tol)
        row[f"stable_P{pressure:g}_pa"] = float(out is not None)
        row[f"En_swap_P{pressure:g}_pa"] = _swap_value(out, config.swap.setup)
    return row


# ---------------------------------------------------------------- fig4b

def _fig4b_columns(config: ScenarioConfig) -> List[str]:
    return ["stable", "En_swap", "separation_km"]


def _fig4b_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    _, out = _steady_output(config.system, config.filter_gamma, config.numerics.quad_tol)
    setup = config.swap.setup
    return {
        "stable": float(out is not None),
        "En_swap": _swap_value(out, setup),
        # η 高于本征探测效率时没有对应的光纤长度，输出为空
        "separation_km": separation_for_efficiency(setup.eta1, config.swap.eta0, config.swap.alpha0),
    }


# ---------------------------------------------------------------- custom

def _custom_columns(config: ScenarioConfig) -> List[str]:
    return (["omega_m_2pi_hz", "g_2pi_hz", "gamma_2pi_hz", "n_bar", "stable"] + ENTANGLEMENT_COLUMNS
            + [f"En_swap_{choice}" for choice in SWAP_CHOICES])


def _custom_point(config: ScenarioConfig) -> Dict[str, Optional[float]]:
    state, out = _steady_output(config.system, config.filter_gamma, config.numerics.quad_tol)
    row: Dict[str, Optional[float]] = {
        "omega_m_2pi_hz": _hz(state.mode.omega_m),
        "g_2pi_hz": _hz(state.coupling),
        "gamma_2pi_hz": _hz(state.gamma),
        "n_bar": state.n_bar,
        "stable": float(out is not None),
    }
    if out is not None:
        values = output_entanglement(out)
        row.update({"En_tms_tor": values["tms_tor"], "En_bs_tor": values["bs_tor"],
                    "En_tms_bs": values["tms_bs"]})
    for choice in SWAP_CHOICES:
        row[f"En_swap_{choice}"] = _swap_value(out, replace(config.swap.setup, mode_choice=choice))
    return row


SCENARIOS: Dict[str, Scenario] = {
    "fig2": Scenario("fig2", "频率、相干散射耦合及耦合比随光镊功率的变化",
                     SweepAxis("system.tweezer.power_w", 1e-3, 1.0, 20, "log"), _fig2_columns, _fig2_point),
    "fig3a": Scenario("fig3a", "单系统三对模式的输出纠缠随滤波宽度的变化",
                      _GAMMA_SWEEP, _single_columns, _fig3a_point),
    "fig3b": Scenario("fig3b", "BS/TMS 模式纠缠交换后的机械纠缠随滤波宽度的变化",
                      _GAMMA_SWEEP, _fig3b_columns, _fig3b_point),
    "fig4a": Scenario("fig4a", "纠缠交换结果随热浴温度的变化（每个气压一列）",
                      SweepAxis("system.mode.bath_temperature_k", 0.0, 300.0, 16, "linear"),
                      _fig4a_columns, _fig4a_point),
    "fig4b": Scenario("fig4b", "纠缠交换结果随探测效率的变化及对应光纤间距",
                      SweepAxis("swap.eta", 0.5, 1.0, 26, "linear"), _fig4b_columns, _fig4b_point),
    "figS2": Scenario("figS2", "耦合强度随腔相位的变化",
                      SweepAxis("system.cavity.phase_pi", 0.0, 1.0, 21, "linear"),
                      _coupling_columns, _figs2_point),
    "figS3": Scenario("figS3", "弱耦合（g = 0.04 ω_m）下的输出纠缠随滤波宽度的变化",
                      _GAMMA_SWEEP, _single_columns, _figs3_point),
    "custom": Scenario("custom", "按 sweep 段扫描任意键，输出全部量", None, _custom_columns, _custom_point),
}


def _evaluate_point(task: Tuple[str, Dict[str, Any], Optional[str], str, float]) -> Dict[str, Optional[float]]:
    """进程池中计算单个扫描点；各点之间不共享状态"""
    name, raw, path, key, value = task
    config = build_config(apply_override(raw, key, value), path=path)
    row = SCENARIOS[name].evaluate(config)
    row[key] = value
    return row


def resolve_jobs(jobs: Optional[int], config: Optional[ScenarioConfig] = None) -> int:
    """并行数：命令行 > LEVITOSIM_JOBS > numerics.jobs > CPU 数"""
    if jobs is None:
        env_jobs = os.environ.get("LEVITOSIM_JOBS")
        if env_jobs:
            try:
                jobs = int(env_jobs)
            except ValueError:
                raise ConfigError("LEVITOSIM_JOBS", f"应为正整数，实际为 {env_jobs!r}")
    if jobs is None and config is not None:
        jobs = config.numerics.jobs
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ConfigError("jobs", f"并行数必须为正整数，实际为 {jobs}")
    return jobs


class ScenarioRunner:
    """场景运行器，负责展开扫描轴并汇总结果"""

    def __init__(self, config: ScenarioConfig, jobs: Optional[int] = None):
        """
        初始化场景运行器

        Args:
            config: 已校验的配置
            jobs: 并行进程数，为空时按 resolve_jobs 的顺序决定
        """
        self.config = config
        self.jobs = resolve_jobs(jobs, config)

    def sweep_axis(self, name: str) -> SweepAxis:
        """场景的扫描轴：scenarios.<name>.sweep 优先，custom 使用顶层 sweep"""
        scenario = self._scenario(name)
        if name in self.config.scenario_sweeps:
            return self.config.scenario_sweeps[name]
        if name == "custom":
            if self.config.sweep is None:
                raise ConfigError("sweep", "custom 场景需要顶层 sweep 配置段")
            return self.config.sweep
        return scenario.default_sweep

    def _scenario(self, name: str) -> Scenario:
        if name not in SCENARIOS:
            logger.error(f"未知场景: {name}")
            raise ConfigError("scenario", f"未知场景 {name!r}，可选 {tuple(SCENARIOS)}")
        return SCENARIOS[name]

    def run(self, name: str) -> ResultTable:
        """
        运行场景

        Args:
            name: 场景名

        Returns:
            结果表，首列为扫描轴
        """
        scenario = self._scenario(name)
        axis = self.sweep_axis(name)
        values = [float(v) for v in axis.values()]
        table = ResultTable([axis.key] + scenario.columns(self.config))
        tasks = [(name, self.config.raw, self.config.path, axis.key, value) for value in values]

        workers = min(self.jobs, len(tasks))
        logger.info(f"开始运行场景 {name}: {scenario.description}，扫描 {axis.key} 共 {len(values)} 点，"
                    f"并行数 {workers}")
        if workers <= 1:
            for task in tasks:
                with _sweep_point(axis.key, task[4]):
                    table.add_row(_evaluate_point(task))
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = [executor.submit(_evaluate_point, task) for task in tasks]
                # 按扫描顺序汇总
                for task, future in zip(tasks, futures):
                    with _sweep_point(axis.key, task[4]):
                        table.add_row(future.result())
        logger.info(f"场景 {name} 完成，共 {len(table)} 行")
        return table


@contextmanager
def _sweep_point(key: str, value: float):
    """把扫描点信息附加到计算错误上"""
    try:
        yield
    except LevitoSimError as e:
        logger.error(f"扫描点 {key}={value:.6g} 计算失败: {e}")
        raise e.annotate(f"{key}={value:.6g}")


def run_scenario(name: str, config: ScenarioConfig, jobs: Optional[int] = None) -> ResultTable:
    """运行一个命名场景"""
    return ScenarioRunner(config, jobs).run(name)
