#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
测试用配置
提供最小可用配置字典和写出临时 YAML 文件的工具
"""

import copy
import os
from typing import Any, Dict

import yaml

_MINIMAL_CONFIG: Dict[str, Any] = {
    "system": {
        "geometry": {"a_nm": 100, "b_nm": 50, "density_kg_m3": 2200, "relative_permittivity": 2.1},
        "tweezer": {"power_w": 0.01, "waist_um": 1.0, "wavelength_nm": 1550},
        "cavity": {"length_mm": 1.0, "waist_um": 15.7, "kappa_hz": 500000},
        "gas": {"pressure_pa": 1.0e-4},
    },
}


def minimal_raw_config() -> Dict[str, Any]:
    """扭转模式、参考几何、腰斑直接给定的最小配置"""
    return copy.deepcopy(_MINIMAL_CONFIG)


def write_config(raw: Dict[str, Any], directory: str, name: str = "config.yaml") -> str:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as file:
        yaml.safe_dump(raw, file, allow_unicode=True, sort_keys=False)
    return path
