#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置加载模块
负责读取 YAML 配置、按键路径校验、Hz→rad/s 单位换算、默认值填充、
腔模腰斑拟合以及扫描点的参数覆盖
"""

import copy
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import yaml

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from analysis.bell_swap import MODE_CHOICES, SwapSetup
from models.ellipsoid import EllipsoidGeometry, axis_polarizabilities
from models.gas_damping import GasParams
from models.system import SystemParams
from models.trap_cavity import CavityParams, TweezerParams, solve_waist_for_target_coupling
from utils.constants import (AIR_MOLECULE_MASS, DEFAULT_ACCOMMODATION, DEFAULT_GAS_TEMPERATURE,
                             DEFAULT_TRANSMISSIVITY)
from utils.exceptions import ConfigError, ParameterError

logger = logging.getLogger(__name__)

# 同一物理量的不同写法，设置其中一个时删除其余
_ALTERNATIVE_KEYS = (
    ("waist_um", "target_coupling_hz", "target_coupling_rad_s"),
    ("kappa_hz", "kappa_rad_s"),
    ("detuning_hz", "detuning_rad_s"),
    ("gamma_hz", "gamma_rad_s"),
    ("phase_rad", "phase_pi"),
)

# 设置左侧键时覆盖右侧的细分键
_SUPERSEDES = {"eta": ("eta1", "eta2")}

SWEEP_SECTIONS = ("system", "com_system", "filter", "swap")
SWEEP_SCALES = ("linear", "log")

DEFAULT_QUAD_TOL = 1e-6
DEFAULT_ETA0 = 0.98
DEFAULT_ALPHA0_DB_KM = 0.14
# 纠缠交换滤波宽度 Γ [rad/s]
DEFAULT_FILTER_GAMMA = 1.5e5


@dataclass(frozen=True)
class SweepAxis:
    """扫描轴：点分键路径、范围、点数与刻度"""

    key: str
    minimum: float
    maximum: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.minimum])
        if self.scale == "log":
            return np.geomspace(self.minimum, self.maximum, self.points)
        return np.linspace(self.minimum, self.maximum, self.points)


@dataclass(frozen=True)
class SwapConfig:
    """Bell 型探测设置与光纤损耗模型参数"""

    setup: SwapSetup
    eta0: float = DEFAULT_ETA0
    alpha0: float = DEFAULT_ALPHA0_DB_KM


@dataclass(frozen=True)
class NumericsConfig:
    quad_tol: float = DEFAULT_QUAD_TOL
    jobs: Optional[int] = None


@dataclass(frozen=True)
class ScenarioConfig:
    """完整校验后的配置；raw 保存拟合腰斑之后的原始字典，用于扫描点覆盖"""

    raw: Dict[str, Any] = field(compare=False, repr=False)
    system: SystemParams
    com_system: SystemParams
    filter_gamma: float
    swap: SwapConfig
    sweep: Optional[SweepAxis]
    scenario_sweeps: Dict[str, SweepAxis]
    fig4a_pressures: Tuple[float, ...]
    numerics: NumericsConfig
    logging: Dict[str, Any]
    path: Optional[str] = None

    def with_override(self, key: str, value: float) -> "ScenarioConfig":
        """返回某个点分键被替换后的新配置；腰斑已写回 raw，只有覆盖目标耦合时才重新拟合"""
        return build_config(apply_override(self.raw, key, value), path=self.path)


def _path(*parts: str) -> str:
    return ".".join(p for p in parts if p)


def _section(raw: Dict[str, Any], key: str, path: str, required: bool = True) -> Dict[str, Any]:
    value = raw.get(key)
    if value is None:
        if required:
            raise ConfigError(_path(path, key), "缺少配置段")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(_path(path, key), f"应为映射，实际为 {type(value).__name__}")
    return value


def _number(section: Dict[str, Any], key: str, path: str, default: Any = None,
            positive: bool = False, non_negative: bool = False) -> Optional[float]:
    """读取数值字段，缺失且无默认值时报错"""
    key_path = _path(path, key)
    if key not in section or section[key] is None:
        if default is None:
            raise ConfigError(key_path, "缺少必需的键")
        return default
    value = section[key]
    if isinstance(value, str):
        # YAML 1.1 把不带小数点或指数符号的 1e5 解析为字符串
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(key_path, f"应为数值，实际为 {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key_path, f"应为数值，实际为 {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key_path, f"取值必须有限，实际为 {value}")
    if positive and not value > 0:
        raise ConfigError(key_path, f"取值必须为正，实际为 {value}")
    if non_negative and value < 0:
        raise ConfigError(key_path, f"取值不能为负，实际为 {value}")
    return value


def _rate(section: Dict[str, Any], name: str, path: str, required: bool = True,
          positive: bool = True) -> Optional[float]:
    """
    读取速率：<name>_hz 为 ω/2π，乘以 2π；<name>_rad_s 为角频率

    Returns:
        角频率 [rad/s]，可选且缺失时为 None
    """
    hz_key, rad_key = f"{name}_hz", f"{name}_rad_s"
    if hz_key in section and rad_key in section:
        raise ConfigError(_path(path, hz_key), f"{hz_key} 与 {rad_key} 只能给出一个")
    if hz_key in section:
        return 2.0 * math.pi * _number(section, hz_key, path, positive=positive)
    if rad_key in section:
        return _number(section, rad_key, path, positive=positive)
    if required:
        raise ConfigError(_path(path, hz_key), f"缺少必需的键（{hz_key} 或 {rad_key}）")
    return None


def _phase(section: Dict[str, Any], path: str) -> float:
    if "phase_pi" in section and "phase_rad" in section:
        raise ConfigError(_path(path, "phase_pi"), "phase_pi 与 phase_rad 只能给出一个")
    if "phase_pi" in section:
        return math.pi * _number(section, "phase_pi", path)
    return _number(section, "phase_rad", path, default=0.0)


def deep_merge(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    """递归合并，overlay 优先；overlay 给出某个写法时删除 base 中的同义键"""
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            _drop_alternatives(merged, key)
            merged[key] = copy.deepcopy(value)
    return merged


def _drop_alternatives(section: Dict[str, Any], key: str):
    for group in _ALTERNATIVE_KEYS:
        if key in group:
            for other in group:
                if other != key:
                    section.pop(other, None)
    for other in _SUPERSEDES.get(key, ()):
        section.pop(other, None)


def apply_override(raw: Dict[str, Any], key: str, value: float) -> Dict[str, Any]:
    """
    在原始配置字典的副本上设置点分键

    system.* 的覆盖同时作用于已合并的 com_system。

    Args:
        raw: 原始配置字典
        key: 点分键路径，如 system.tweezer.power_w
        value: 新取值

    Returns:
        新字典
    """
    parts = key.split(".")
    if len(parts) < 2 or parts[0] not in SWEEP_SECTIONS:
        raise ConfigError(key, f"扫描键必须位于 {SWEEP_SECTIONS} 之一")
    updated = copy.deepcopy(raw)
    targets = [parts[0]]
    if parts[0] == "system" and "com_system" in updated:
        targets.append("com_system")
    for root in targets:
        node = updated.setdefault(root, {})
        for part in parts[1:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(key, f"{part} 不是配置段")
            node = child
        _drop_alternatives(node, parts[-1])
        node[parts[-1]] = float(value)
    return updated


def _parse_geometry(section: Dict[str, Any], path: str) -> Tuple[EllipsoidGeometry, float]:
    geometry = _section(section, "geometry", path)
    gpath = _path(path, "geometry")
    a = _number(geometry, "a_nm", gpath, positive=True) * 1e-9
    b = _number(geometry, "b_nm", gpath, positive=True) * 1e-9
    c = _number(geometry, "c_nm", gpath, positive=True) * 1e-9 if "c_nm" in geometry else b
    rho = _number(geometry, "density_kg_m3", gpath, positive=True)
    permittivity = _number(geometry, "relative_permittivity", gpath, positive=True)
    try:
        return EllipsoidGeometry(a, b, c, rho), permittivity
    except ParameterError as e:
        raise ConfigError(gpath, str(e))


def _parse_tweezer(section: Dict[str, Any], path: str) -> TweezerParams:
    tweezer = _section(section, "tweezer", path)
    tpath = _path(path, "tweezer")
    return TweezerParams(_number(tweezer, "power_w", tpath, positive=True),
                         _number(tweezer, "waist_um", tpath, positive=True) * 1e-6,
                         _number(tweezer, "wavelength_nm", tpath, positive=True) * 1e-9)


def _cavity_without_waist(section: Dict[str, Any], path: str, tweezer: TweezerParams) -> CavityParams:
    cavity = _section(section, "cavity", path)
    cpath = _path(path, "cavity")
    wavelength = _number(cavity, "wavelength_nm", cpath, default=tweezer.wavelength * 1e9, positive=True)
    # 腰斑占位，随后由 waist_um 或拟合结果替换
    return CavityParams(_number(cavity, "length_mm", cpath, positive=True) * 1e-3, 1e-5,
                        wavelength * 1e-9, _phase(cavity, cpath))


def _mode_kind(section: Dict[str, Any], path: str, default: str) -> str:
    mode = _section(section, "mode", path, required=False)
    kind = mode.get("kind", default)
    if kind not in ("torsional", "com"):
        raise ConfigError(_path(path, "mode", "kind"), f"未知的模式类型 {kind!r}")
    return kind


def fit_cavity_waist(section: Dict[str, Any], path: str, target: Optional[float] = None,
                     default_kind: str = "torsional") -> float:
    """
    拟合腔模腰斑，使相干散射耦合等于目标值

    Args:
        section: system 或 com_system 配置段
        path: 配置段的键路径
        target: 目标耦合 [rad/s]，为空时读取 cavity.target_coupling_*
        default_kind: mode.kind 缺省时的模式类型

    Returns:
        腔模腰斑 [m]
    """
    geom, permittivity = _parse_geometry(section, path)
    tweezer = _parse_tweezer(section, path)
    cavity = _cavity_without_waist(section, path, tweezer)
    kind = _mode_kind(section, path, default_kind)
    if target is None:
        target = _rate(_section(section, "cavity", path), "target_coupling", _path(path, "cavity"))
    pol = axis_polarizabilities(geom, permittivity)
    return solve_waist_for_target_coupling(target, kind, tweezer, cavity, geom, pol)


def _fit_section_waist(section: Dict[str, Any], path: str, default_kind: str):
    """target_coupling_* 存在时拟合腰斑并以 waist_um 写回"""
    cavity = _section(section, "cavity", path)
    if "waist_um" in cavity:
        return
    if "target_coupling_hz" not in cavity and "target_coupling_rad_s" not in cavity:
        raise ConfigError(_path(path, "cavity", "waist_um"),
                          "缺少必需的键（waist_um 或 target_coupling_hz）")
    waist = fit_cavity_waist(section, path, default_kind=default_kind)
    _drop_alternatives(cavity, "waist_um")
    cavity["waist_um"] = waist * 1e6
    logger.info(f"{path}: 按目标耦合拟合腔模腰斑 w_c = {waist * 1e6:.6f} µm")


def _parse_system(section: Dict[str, Any], path: str, default_kind: str) -> SystemParams:
    geom, permittivity = _parse_geometry(section, path)
    tweezer = _parse_tweezer(section, path)
    cavity_section = _section(section, "cavity", path)
    cpath = _path(path, "cavity")
    cavity = _cavity_without_waist(section, path, tweezer).with_waist(
        _number(cavity_section, "waist_um", cpath, positive=True) * 1e-6)
    kappa = _rate(cavity_section, "kappa", cpath)
    detuning = _rate(cavity_section, "detuning", cpath, required=False, positive=False)

    gas_section = _section(section, "gas", path)
    gpath = _path(path, "gas")
    gas = GasParams(_number(gas_section, "pressure_pa", gpath, positive=True),
                    _number(gas_section, "temperature_k", gpath, default=DEFAULT_GAS_TEMPERATURE, positive=True),
                    _number(gas_section, "molecule_mass_kg", gpath, default=AIR_MOLECULE_MASS, positive=True),
                    _number(gas_section, "accommodation", gpath, default=DEFAULT_ACCOMMODATION, non_negative=True))

    mode = _section(section, "mode", path, required=False)
    mpath = _path(path, "mode")
    bath = _number(mode, "bath_temperature_k", mpath, default=gas.temperature, non_negative=True)
    ratio = mode.get("coupling_ratio")
    if ratio is not None:
        ratio = _number(mode, "coupling_ratio", mpath, positive=True)
    interaction = mode.get("interaction", "full")
    try:
        return SystemParams(geom, permittivity, tweezer, cavity, kappa, gas,
                            kind=_mode_kind(section, path, default_kind), bath_temperature=bath,
                            detuning=detuning, interaction=interaction, coupling_ratio=ratio)
    except ParameterError as e:
        raise ConfigError(path, str(e))


def _parse_sweep(section: Dict[str, Any], path: str) -> SweepAxis:
    key = section.get("key")
    if not isinstance(key, str) or key.split(".")[0] not in SWEEP_SECTIONS:
        raise ConfigError(_path(path, "key"), f"扫描键必须是 {SWEEP_SECTIONS} 下的点分路径，实际为 {key!r}")
    scale = section.get("scale", "linear")
    if scale not in SWEEP_SCALES:
        raise ConfigError(_path(path, "scale"), f"刻度必须是 {SWEEP_SCALES} 之一，实际为 {scale!r}")
    minimum = _number(section, "min", path, positive=scale == "log")
    maximum = _number(section, "max", path, positive=scale == "log")
    points = section.get("points")
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        raise ConfigError(_path(path, "points"), f"点数必须是正整数，实际为 {points!r}")
    if points > 1 and not maximum > minimum:
        raise ConfigError(_path(path, "max"), f"max 必须大于 min（{minimum} ≥ {maximum}）")
    return SweepAxis(key, minimum, maximum, points, scale)


def _parse_swap(raw: Dict[str, Any]) -> SwapConfig:
    swap = _section(raw, "swap", "", required=False)
    eta = _number(swap, "eta", "swap", default=1.0, positive=True)
    mode_choice = swap.get("mode_choice", "bs")
    if mode_choice not in MODE_CHOICES:
        raise ConfigError("swap.mode_choice", f"必须是 {tuple(MODE_CHOICES)} 之一，实际为 {mode_choice!r}")
    try:
        setup = SwapSetup(_number(swap, "transmissivity", "swap", default=DEFAULT_TRANSMISSIVITY, positive=True),
                          _number(swap, "eta1", "swap", default=eta, positive=True),
                          _number(swap, "eta2", "swap", default=eta, positive=True),
                          mode_choice)
    except ParameterError as e:
        raise ConfigError("swap", str(e))
    return SwapConfig(setup,
                      _number(swap, "eta0", "swap", default=DEFAULT_ETA0, positive=True),
                      _number(swap, "alpha0_db_km", "swap", default=DEFAULT_ALPHA0_DB_KM, positive=True))


def _parse_numerics(raw: Dict[str, Any]) -> NumericsConfig:
    numerics = _section(raw, "numerics", "", required=False)
    jobs = numerics.get("jobs")
    if jobs is not None and (isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1):
        raise ConfigError("numerics.jobs", f"并行数必须是正整数，实际为 {jobs!r}")
    return NumericsConfig(_number(numerics, "quad_tol", "numerics", default=DEFAULT_QUAD_TOL, positive=True), jobs)


def _load_system_section(raw: Dict[str, Any], name: str, default_kind: str) -> SystemParams:
    """拟合（如需要）并解析一个系统配置段；物理参数错误转换为带键路径的配置错误"""
    try:
        _fit_section_waist(raw[name], name, default_kind)
        return _parse_system(raw[name], name, default_kind)
    except ParameterError as e:
        raise ConfigError(name, str(e))


def build_config(raw: Dict[str, Any], path: Optional[str] = None) -> ScenarioConfig:
    """
    由原始字典构建完整校验后的配置

    cavity 中没有 waist_um 时按 target_coupling 拟合一次并写回 raw，
    之后的扫描点沿用该腰斑。

    Args:
        raw: yaml.safe_load 的结果
        path: 配置文件路径（仅用于日志）

    Returns:
        配置对象
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "配置文件顶层必须是映射")
    raw = copy.deepcopy(raw)
    system_raw = _section(raw, "system", "")
    if "com_system" in raw:
        # 在拟合前合并，使 com_system 自己的 target_coupling 生效
        overlay = copy.deepcopy(_section(raw, "com_system", ""))
        overlay.setdefault("mode", {}).setdefault("kind", "com")
        raw["com_system"] = deep_merge(system_raw, overlay)

    system = _load_system_section(raw, "system", "torsional")
    if "com_system" in raw:
        com_system = _load_system_section(raw, "com_system", "com")
    else:
        com_system = system.with_mode("com")

    filter_section = _section(raw, "filter", "", required=False)
    filter_gamma = _rate(filter_section, "gamma", "filter", required=False)
    if filter_gamma is None:
        filter_gamma = DEFAULT_FILTER_GAMMA

    sweep = None
    if raw.get("sweep") is not None:
        sweep = _parse_sweep(_section(raw, "sweep", ""), "sweep")

    scenario_sweeps: Dict[str, SweepAxis] = {}
    pressures: Tuple[float, ...] = ()
    scenarios = _section(raw, "scenarios", "", required=False)
    for name, scenario in scenarios.items():
        spath = _path("scenarios", name)
        if not isinstance(scenario, dict):
            raise ConfigError(spath, "应为映射")
        if scenario.get("sweep") is not None:
            scenario_sweeps[name] = _parse_sweep(scenario["sweep"], _path(spath, "sweep"))
        if name == "fig4a" and "pressures_pa" in scenario:
            values = scenario["pressures_pa"]
            if not isinstance(values, list) or not values:
                raise ConfigError(_path(spath, "pressures_pa"), "应为非空数值列表")
            pressures = tuple(_number({"p": v}, "p", _path(spath, "pressures_pa"), positive=True) for v in values)

    return ScenarioConfig(raw=raw, system=system, com_system=com_system, filter_gamma=filter_gamma,
                          swap=_parse_swap(raw), sweep=sweep, scenario_sweeps=scenario_sweeps,
                          fig4a_pressures=pressures, numerics=_parse_numerics(raw),
                          logging=dict(_section(raw, "logging", "", required=False)), path=path)


def read_raw_config(path: str) -> Dict[str, Any]:
    """读取 YAML 配置文件"""
    try:
        with open(path, 'r', encoding='utf-8') as file:
            raw = yaml.safe_load(file)
    except FileNotFoundError:
        logger.error(f"配置文件不存在: {path}")
        raise ConfigError("<file>", f"配置文件不存在: {path}")
    except yaml.YAMLError as e:
        logger.error(f"解析配置文件失败: {e}")
        raise ConfigError("<file>", f"无法解析 YAML: {e}")
    return raw if raw is not None else {}


def load_config(path: str) -> ScenarioConfig:
    """
    加载并校验配置文件

    Args:
        path: YAML 配置文件路径

    Returns:
        配置对象
    """
    config = build_config(read_raw_config(path), path=path)
    logger.info(f"已加载配置文件: {path}")
    return config
