#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
异常定义模块
定义模拟器使用的错误层级，命令行根据类型映射退出码
"""

from typing import Optional


class LevitoSimError(Exception):
    """模拟器所有错误的基类，扫描中出错时附带扫描点"""

    sweep_point: Optional[str] = None

    def annotate(self, point: str) -> "LevitoSimError":
        self.sweep_point = point
        return self

    def __str__(self):
        message = super().__str__()
        return f"[{self.sweep_point}] {message}" if self.sweep_point else message


class ConfigError(LevitoSimError):
    """配置错误（缺少键、单位错误、取值范围错误），退出码 2"""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        self.message = message
        super().__init__(f"{key_path}: {message}")

    def __reduce__(self):
        # 进程池返回异常时需要按两个参数重建
        return (self.__class__, (self.key_path, self.message), self.__dict__)


class ParameterError(LevitoSimError, ValueError):
    """物理参数不合法（如 a < b、介电常数导致分母非正），退出码 2"""


class NumericalError(LevitoSimError):
    """数值计算错误，退出码 3"""


class QuadratureError(NumericalError):
    """数值积分未收敛"""

    def __init__(self, message: str, estimate: Optional[float] = None):
        self.estimate = estimate
        if estimate is not None:
            message = f"{message}（误差估计 {estimate:.3e}）"
        super().__init__(message)

    def __reduce__(self):
        return (self.__class__, (self.args[0],), self.__dict__)


class InstabilityError(NumericalError):
    """线性模型不稳定，不存在稳态"""


class BracketError(NumericalError):
    """二分求解的区间两端同号，目标不可达"""


class MeasurementSingularError(NumericalError):
    """Bell 型测量的噪声矩阵退化（det Υ ≤ 0）"""


class UnphysicalStateError(NumericalError):
    """协方差矩阵违反不确定性关系"""
