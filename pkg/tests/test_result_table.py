#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
结果表模块测试
"""

import math
import os
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from sweeps.result_table import ResultTable, emit_csv
from utils.exceptions import NumericalError, ParameterError


class TestResultTable(unittest.TestCase):
    """结果表"""

    def test_duplicate_columns(self):
        with self.assertRaises(ParameterError):
            ResultTable(["x", "y", "x"])

    def test_unknown_column(self):
        table = ResultTable(["x"])
        with self.assertRaises(ParameterError):
            table.add_row({"x": 1.0, "z": 2.0})

    def test_missing_and_nan_become_none(self):
        table = ResultTable(["x", "y", "z"])
        table.add_row({"x": 1.0, "y": float("nan")})
        self.assertEqual(table.rows[0], {"x": 1.0, "y": None, "z": None})

    def test_infinity_rejected(self):
        table = ResultTable(["x"])
        with self.assertRaises(NumericalError):
            table.add_row({"x": math.inf})

    def test_column_and_frame(self):
        table = ResultTable(["b", "a"])
        table.extend([{"a": 1.0, "b": 2.0}, {"a": 3.0}])
        self.assertEqual(len(table), 2)
        self.assertEqual(table.column("b"), [2.0, None])
        frame = table.to_frame()
        self.assertEqual(list(frame.columns), ["b", "a"])
        self.assertTrue(np.isnan(frame.loc[1, "b"]))

    def test_empty_frame(self):
        frame = ResultTable(["x", "y"]).to_frame()
        self.assertEqual(list(frame.columns), ["x", "y"])
        self.assertEqual(len(frame), 0)


class TestEmitCSV(unittest.TestCase):
    """CSV 输出"""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)

    def read_text(self, path):
        with open(path, "r", encoding="utf-8") as file:
            return file.read()

    def test_header_only(self):
        path = os.path.join(self.directory.name, "empty.csv")
        emit_csv(ResultTable(["power_w", "omega_phi_2pi_hz"]), path)
        self.assertEqual(self.read_text(path), "power_w,omega_phi_2pi_hz\n")

    def test_creates_directory(self):
        path = os.path.join(self.directory.name, "nested", "out", "table.csv")
        emit_csv(ResultTable(["x"]), path)
        self.assertTrue(os.path.exists(path))

    def test_bit_exact_round_trip(self):
        rng = np.random.default_rng(0)
        values = list(rng.uniform(-1, 1, 20) * 10.0 ** rng.integers(-30, 30, 20)) + [0.1, 1.0 / 3.0, 5e-324]
        table = ResultTable(["v"])
        table.extend([{"v": v} for v in values])
        path = os.path.join(self.directory.name, "values.csv")
        emit_csv(table, path)
        parsed = pd.read_csv(path, float_precision="round_trip")["v"].tolist()
        self.assertEqual(parsed, [float(v) for v in values])

    def test_undefined_cells_are_empty(self):
        table = ResultTable(["x", "En_swap"])
        table.add_row({"x": 1.0, "En_swap": None})
        table.add_row({"x": 2.0, "En_swap": 0.5})
        path = os.path.join(self.directory.name, "gaps.csv")
        emit_csv(table, path)
        self.assertEqual(self.read_text(path), "x,En_swap\n1,\n2,0.5\n")

    def test_deterministic_bytes(self):
        table = ResultTable(["x", "y"])
        table.extend([{"x": 0.1 * k, "y": math.sqrt(k)} for k in range(10)])
        first = os.path.join(self.directory.name, "first.csv")
        second = os.path.join(self.directory.name, "second.csv")
        emit_csv(table, first)
        emit_csv(table, second)
        with open(first, "rb") as a, open(second, "rb") as b:
            self.assertEqual(a.read(), b.read())


if __name__ == '__main__':
    unittest.main()
