#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置加载模块测试
"""

import math
import os
import sys
import tempfile
import unittest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from tests.fixtures import minimal_raw_config, write_config
from utils.config_loader import (DEFAULT_FILTER_GAMMA, apply_override, build_config, deep_merge, load_config,
                                 read_raw_config)
from utils.exceptions import ConfigError

TWO_PI = 2.0 * math.pi
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class TestValidation(unittest.TestCase):
    """缺失键与非法取值"""

    def assert_config_error(self, raw, key_path):
        with self.assertRaises(ConfigError) as context:
            build_config(raw)
        self.assertEqual(context.exception.key_path, key_path)

    def test_missing_kappa(self):
        raw = minimal_raw_config()
        del raw["system"]["cavity"]["kappa_hz"]
        self.assert_config_error(raw, "system.cavity.kappa_hz")

    def test_missing_section(self):
        raw = minimal_raw_config()
        del raw["system"]["gas"]
        self.assert_config_error(raw, "system.gas")

    def test_negative_pressure(self):
        raw = minimal_raw_config()
        raw["system"]["gas"]["pressure_pa"] = -1.0
        self.assert_config_error(raw, "system.gas.pressure_pa")

    def test_non_numeric(self):
        raw = minimal_raw_config()
        raw["system"]["tweezer"]["power_w"] = "ten milliwatts"
        self.assert_config_error(raw, "system.tweezer.power_w")

    def test_conflicting_units(self):
        raw = minimal_raw_config()
        raw["system"]["cavity"]["kappa_rad_s"] = 3.0e6
        self.assert_config_error(raw, "system.cavity.kappa_hz")

    def test_missing_waist_and_target(self):
        raw = minimal_raw_config()
        del raw["system"]["cavity"]["waist_um"]
        self.assert_config_error(raw, "system.cavity.waist_um")

    def test_invalid_geometry(self):
        raw = minimal_raw_config()
        raw["system"]["geometry"]["a_nm"] = 40
        self.assert_config_error(raw, "system.geometry")

    def test_unknown_interaction(self):
        raw = minimal_raw_config()
        raw["system"]["mode"] = {"interaction": "quadratic"}
        self.assert_config_error(raw, "system")

    def test_invalid_swap(self):
        raw = minimal_raw_config()
        raw["swap"] = {"transmissivity": 1.0}
        self.assert_config_error(raw, "swap")
        raw["swap"] = {"mode_choice": "both"}
        self.assert_config_error(raw, "swap.mode_choice")

    def test_invalid_sweep(self):
        raw = minimal_raw_config()
        raw["sweep"] = {"key": "system.cavity.kappa_hz", "min": 0.0, "max": 1e6, "points": 5, "scale": "log"}
        self.assert_config_error(raw, "sweep.min")
        raw["sweep"] = {"key": "gas.pressure_pa", "min": 1.0, "max": 2.0, "points": 5}
        self.assert_config_error(raw, "sweep.key")
        raw["sweep"] = {"key": "swap.eta", "min": 1.0, "max": 0.5, "points": 5}
        self.assert_config_error(raw, "sweep.max")
        raw["sweep"] = {"key": "swap.eta", "min": 0.5, "max": 1.0, "points": 2.5}
        self.assert_config_error(raw, "sweep.points")

    def test_error_message_contains_key_path(self):
        raw = minimal_raw_config()
        del raw["system"]["cavity"]["kappa_hz"]
        with self.assertRaises(ConfigError) as context:
            build_config(raw)
        self.assertIn("system.cavity.kappa_hz", str(context.exception))


class TestDefaults(unittest.TestCase):
    """默认值与单位换算"""

    @classmethod
    def setUpClass(cls):
        cls.config = build_config(minimal_raw_config())

    def test_unit_conversion(self):
        system = self.config.system
        self.assertAlmostEqual(system.kappa, TWO_PI * 5e5, places=6)
        self.assertAlmostEqual(system.cavity.waist, 15.7e-6, places=15)
        self.assertAlmostEqual(system.geometry.a, 100e-9, places=20)
        self.assertEqual(system.geometry.c, system.geometry.b)
        self.assertAlmostEqual(system.cavity.wavelength, 1550e-9, places=20)

    def test_defaults(self):
        config = self.config
        self.assertEqual(config.system.gas.temperature, 300.0)
        self.assertEqual(config.system.gas.accommodation, 0.9)
        self.assertEqual(config.system.temperature, 300.0)
        self.assertEqual(config.system.kind, "torsional")
        self.assertIsNone(config.system.detuning)
        self.assertEqual(config.system.cavity.phase, 0.0)
        self.assertEqual(config.filter_gamma, DEFAULT_FILTER_GAMMA)
        self.assertEqual(config.swap.setup.transmissivity, 0.5)
        self.assertEqual(config.swap.setup.mode_choice, "bs")
        self.assertEqual((config.swap.eta0, config.swap.alpha0), (0.98, 0.14))
        self.assertEqual(config.numerics.quad_tol, 1e-6)
        self.assertIsNone(config.sweep)
        self.assertEqual(config.fig4a_pressures, ())
        self.assertEqual(config.com_system.kind, "com")

    def test_phase_in_units_of_pi(self):
        raw = minimal_raw_config()
        raw["system"]["cavity"]["phase_pi"] = 0.5
        self.assertAlmostEqual(build_config(raw).system.cavity.phase, math.pi / 2, places=15)

    def test_negative_detuning(self):
        raw = minimal_raw_config()
        raw["system"]["cavity"]["detuning_hz"] = -1.2e5
        self.assertAlmostEqual(build_config(raw).system.detuning, -TWO_PI * 1.2e5, places=6)

    def test_eta_fills_both_arms(self):
        raw = minimal_raw_config()
        raw["swap"] = {"eta": 0.8}
        setup = build_config(raw).swap.setup
        self.assertEqual((setup.eta1, setup.eta2), (0.8, 0.8))
        raw["swap"] = {"eta": 0.8, "eta2": 0.6}
        setup = build_config(raw).swap.setup
        self.assertEqual((setup.eta1, setup.eta2), (0.8, 0.6))


class TestWaistFit(unittest.TestCase):
    """目标耦合拟合与写回"""

    @classmethod
    def setUpClass(cls):
        raw = minimal_raw_config()
        del raw["system"]["cavity"]["waist_um"]
        raw["system"]["cavity"]["target_coupling_hz"] = 53000
        cls.config = build_config(raw)

    def test_waist_written_back(self):
        cavity = self.config.raw["system"]["cavity"]
        self.assertNotIn("target_coupling_hz", cavity)
        self.assertGreater(cavity["waist_um"], 10.0)
        self.assertLess(cavity["waist_um"], 25.0)
        self.assertAlmostEqual(self.config.system.cavity.waist * 1e6, cavity["waist_um"], places=9)

    def test_override_keeps_waist(self):
        updated = self.config.with_override("system.tweezer.power_w", 0.04)
        self.assertEqual(updated.system.cavity.waist, self.config.system.cavity.waist)
        self.assertEqual(updated.system.tweezer.power, 0.04)

    def test_override_of_target_refits(self):
        updated = self.config.with_override("system.cavity.target_coupling_hz", 26500)
        self.assertAlmostEqual(updated.system.cavity.waist / self.config.system.cavity.waist, 2.0, places=6)

    def test_unreachable_target(self):
        raw = minimal_raw_config()
        del raw["system"]["cavity"]["waist_um"]
        raw["system"]["cavity"]["target_coupling_hz"] = 1e12
        with self.assertRaises(Exception) as context:
            build_config(raw)
        self.assertNotIsInstance(context.exception, ConfigError)


class TestOverrides(unittest.TestCase):
    """合并与扫描覆盖"""

    def test_deep_merge_drops_alternatives(self):
        base = {"cavity": {"kappa_hz": 5e5, "waist_um": 15.0, "length_mm": 1.0}}
        merged = deep_merge(base, {"cavity": {"kappa_rad_s": 1e6, "target_coupling_hz": 4e4}})
        self.assertEqual(merged["cavity"], {"length_mm": 1.0, "kappa_rad_s": 1e6, "target_coupling_hz": 4e4})
        self.assertIn("kappa_hz", base["cavity"])

    def test_override_propagates_to_com_system(self):
        raw = minimal_raw_config()
        raw["com_system"] = {"tweezer": {"power_w": 0.41}}
        config = build_config(raw)
        self.assertEqual(config.com_system.tweezer.power, 0.41)
        updated = config.with_override("system.tweezer.power_w", 0.2)
        self.assertEqual(updated.system.tweezer.power, 0.2)
        self.assertEqual(updated.com_system.tweezer.power, 0.2)

    def test_eta_override_supersedes_arms(self):
        raw = minimal_raw_config()
        raw["swap"] = {"eta1": 0.9, "eta2": 0.7}
        updated = apply_override(raw, "swap.eta", 0.6)
        self.assertEqual(updated["swap"], {"eta": 0.6})
        self.assertEqual(raw["swap"], {"eta1": 0.9, "eta2": 0.7})

    def test_override_rejects_unknown_section(self):
        with self.assertRaises(ConfigError):
            apply_override(minimal_raw_config(), "numerics.quad_tol", 1e-8)

    def test_com_system_overlay(self):
        raw = minimal_raw_config()
        raw["com_system"] = {"geometry": {"a_nm": 150, "b_nm": 60}, "tweezer": {"power_w": 0.41},
                             "cavity": {"length_mm": 10.0, "phase_pi": 0.5, "waist_um": 98.0}}
        config = build_config(raw)
        self.assertEqual(config.com_system.kind, "com")
        self.assertAlmostEqual(config.com_system.geometry.a, 150e-9, places=20)
        self.assertAlmostEqual(config.com_system.geometry.c, 60e-9, places=20)
        self.assertEqual(config.com_system.kappa, config.system.kappa)
        self.assertEqual(config.system.kind, "torsional")


class TestFiles(unittest.TestCase):
    """文件读取"""

    def test_missing_file(self):
        with self.assertRaises(ConfigError) as context:
            read_raw_config("/nonexistent/levitosim.yaml")
        self.assertEqual(context.exception.key_path, "<file>")

    def test_invalid_yaml(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "broken.yaml")
            with open(path, "w", encoding="utf-8") as file:
                file.write("system: [unclosed\n")
            with self.assertRaises(ConfigError):
                load_config(path)

    def test_round_trip_through_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = write_config(minimal_raw_config(), directory)
            config = load_config(path)
        self.assertEqual(config.path, path)
        self.assertAlmostEqual(config.system.kappa, TWO_PI * 5e5, places=6)

    def test_shipped_configs_load(self):
        config = load_config(os.path.join(PROJECT_ROOT, "config", "config.yaml"))
        self.assertEqual(config.fig4a_pressures, (1e-4, 1e-3, 1e-2))
        self.assertEqual(config.sweep.key, "system.cavity.kappa_hz")
        self.assertAlmostEqual(config.system.cavity.waist * 1e6, 15.7, delta=0.5)
        self.assertGreater(config.com_system.cavity.waist * 1e6, 50.0)
        template = load_config(os.path.join(PROJECT_ROOT, "config", "config_template.yaml"))
        self.assertEqual(template.system.kind, "torsional")


if __name__ == '__main__':
    unittest.main()
