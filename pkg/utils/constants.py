#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
物理常数与全局约定
"""

from scipy import constants as _sc

HBAR = _sc.hbar
EPSILON_0 = _sc.epsilon_0
SPEED_OF_LIGHT = _sc.c
K_BOLTZMANN = _sc.k

# 真空噪声方差（有效正交分量 x=(a+a†)/√2）
VACUUM_VARIANCE = 0.5

# 空气分子平均质量 [kg]
AIR_MOLECULE_MASS = 4.81e-26

# 默认参数
DEFAULT_ACCOMMODATION = 0.9
DEFAULT_GAS_TEMPERATURE = 300.0
DEFAULT_TRANSMISSIVITY = 0.5

# 稳定性判据的相对裕量
STABILITY_MARGIN = 1e-12
