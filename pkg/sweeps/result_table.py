#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
结果表模块
负责按列声明顺序收集扫描结果并输出确定性的 CSV 文件
"""

import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from utils.exceptions import NumericalError, ParameterError

logger = logging.getLogger(__name__)

# 17 位有效数字保证浮点数往返解析逐位一致
FLOAT_FORMAT = "%.17g"


@dataclass
class ResultTable:
    """有序列名（带单位后缀）与数值行；None 表示未定义（输出为空单元格）"""

    columns: List[str]
    rows: List[Dict[str, Optional[float]]] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise ParameterError(f"列名重复: {self.columns}")

    def add_row(self, row: Dict[str, Optional[float]]):
        """
        追加一行，缺失的列记为 None

        Args:
            row: 列名到数值的映射，NaN 视为未定义
        """
        unknown = set(row) - set(self.columns)
        if unknown:
            raise ParameterError(f"未声明的列: {sorted(unknown)}")
        clean: Dict[str, Optional[float]] = {}
        for name in self.columns:
            value = row.get(name)
            if value is not None:
                value = float(value)
                if math.isnan(value):
                    value = None
                elif math.isinf(value):
                    logger.error(f"列 {name} 出现无穷值")
                    raise NumericalError(f"列 {name} 出现无穷值，拒绝写入结果表")
            clean[name] = value
        self.rows.append(clean)

    def extend(self, rows: Sequence[Dict[str, Optional[float]]]):
        for row in rows:
            self.add_row(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> List[Optional[float]]:
        return [row[name] for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        """转换为 pandas DataFrame，未定义值为 NaN"""
        if not self.rows:
            return pd.DataFrame(columns=self.columns, dtype=float)
        return pd.DataFrame.from_records(self.rows, columns=self.columns).astype(float)


def emit_csv(table: ResultTable, path: str):
    """
    输出 CSV：表头为列名，浮点数 17 位有效数字，未定义值为空单元格

    Args:
        table: 结果表
        path: 输出文件路径
    """
    out_dir = os.path.dirname(path)
    if out_dir and not os.path.exists(out_dir):
        os.makedirs(out_dir)
    table.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="",
                            lineterminator="\n", encoding="utf-8")
    logger.info(f"已写出 {len(table)} 行结果到 {path}")
