#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
输出场滤波模块测试
"""

import math
import os
import sys
import unittest
from unittest import mock

import numpy as np
from scipy import integrate

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis.dynamics import make_linear_model, steady_state_cm
from analysis.gaussian_tools import CovMatrix, is_physical, select_modes
from analysis.output_filter import (FilterSpec, field_response, filter_kernel, filter_matrix, filter_spectrum,
                                    mode_overlap, orthonormal_mixing, output_cm, output_entanglement,
                                    quadrature_block, sideband_frequency, transfer_S)
from utils.exceptions import InstabilityError, ParameterError, QuadratureError


class TestFilterKernel(unittest.TestCase):
    """滤波核与频谱"""

    def test_validation(self):
        with self.assertRaises(ParameterError):
            FilterSpec("stokes", 1.0, 1.0)
        with self.assertRaises(ParameterError):
            FilterSpec("tms", 0.0, 1.0)

    def test_unit_norm(self):
        for kind, (lower, upper) in (("tms", (-np.inf, 0.0)), ("bs", (0.0, np.inf))):
            spec = FilterSpec(kind, 0.7, 3.0)
            norm, _ = integrate.quad(lambda t: abs(complex(filter_kernel(spec, t))) ** 2, lower, upper)
            self.assertAlmostEqual(norm, 1.0, places=8)

    def test_causal_support(self):
        tms = FilterSpec("tms", 1.0, 2.0)
        bs = FilterSpec("bs", 1.0, 2.0)
        self.assertEqual(complex(filter_kernel(tms, 0.5)), 0.0)
        self.assertEqual(complex(filter_kernel(bs, -0.5)), 0.0)
        values = filter_kernel(bs, np.array([-1.0, 0.0, 1.0]))
        self.assertEqual(values.shape, (3,))
        self.assertAlmostEqual(abs(values[1]), math.sqrt(2.0), places=12)

    def test_spectrum_matches_fourier_transform(self):
        for kind, (lower, upper) in (("tms", (-60.0, 0.0)), ("bs", (0.0, 60.0))):
            spec = FilterSpec(kind, 0.5, 3.0)
            for omega in (-3.0, -1.0, 0.0, 2.0, 3.0):
                real, _ = integrate.quad(lambda t: (filter_kernel(spec, t) * np.exp(1j * omega * t)).real,
                                         lower, upper, limit=400, epsabs=1e-12)
                imag, _ = integrate.quad(lambda t: (filter_kernel(spec, t) * np.exp(1j * omega * t)).imag,
                                         lower, upper, limit=400, epsabs=1e-12)
                expected = complex(filter_spectrum(spec, omega))
                self.assertAlmostEqual(abs(complex(real, imag) - expected), 0.0, places=7)

    def test_response_peaks(self):
        Gamma, center = 0.2, 5.0
        peak = math.sqrt(2.0 / Gamma)
        tms = FilterSpec("tms", Gamma, center)
        bs = FilterSpec("bs", Gamma, center)
        self.assertAlmostEqual(abs(complex(field_response(tms, -center))), peak, places=10)
        self.assertAlmostEqual(abs(complex(field_response(bs, center))), peak, places=10)
        self.assertLess(abs(complex(field_response(tms, center))), 0.05 * peak)
        self.assertLess(abs(complex(field_response(bs, -center))), 0.05 * peak)

    def test_quadrature_block_structure(self):
        block = quadrature_block(FilterSpec("bs", 0.3, 1.0), 0.8)
        np.testing.assert_allclose(block[0, 0], block[1, 1])
        np.testing.assert_allclose(block[0, 1], -block[1, 0])

    def test_spectrum_unit_power(self):
        for kind in ("tms", "bs"):
            spec = FilterSpec(kind, 0.4, 3.0)
            center = spec.omega_center if kind == "tms" else -spec.omega_center
            power = lambda w: abs(complex(filter_spectrum(spec, w))) ** 2
            lower, _ = integrate.quad(power, -np.inf, center, limit=400)
            upper, _ = integrate.quad(power, center, np.inf, limit=400)
            self.assertAlmostEqual((lower + upper) / (2.0 * math.pi), 1.0, places=8)

    def test_response_is_transform_of_past_light_kernel(self):
        for kind in ("tms", "bs"):
            spec = FilterSpec(kind, 0.5, 3.0)
            side = sideband_frequency(spec)
            kernel = lambda tau, w: (math.sqrt(2.0 * spec.Gamma) * np.exp(-spec.Gamma * tau)
                                     * np.exp(-1j * side * tau) * np.exp(1j * w * tau))
            for omega in (-3.0, -1.0, 0.0, 2.0, 3.0):
                real, _ = integrate.quad(lambda tau: kernel(tau, omega).real, 0.0, 60.0, limit=400, epsabs=1e-12)
                imag, _ = integrate.quad(lambda tau: kernel(tau, omega).imag, 0.0, 60.0, limit=400, epsabs=1e-12)
                expected = complex(field_response(spec, omega))
                self.assertAlmostEqual(abs(complex(real, imag) - expected), 0.0, places=7)
        self.assertEqual(sideband_frequency(FilterSpec("tms", 0.5, 3.0)), -3.0)
        self.assertEqual(sideband_frequency(FilterSpec("bs", 0.5, 3.0)), 3.0)


class TestModeOrthogonalization(unittest.TestCase):
    """TMS 与 BS 滤波模式的重叠与正交化"""

    def setUp(self):
        self.tms = FilterSpec("tms", 0.5, 3.0)
        self.bs = FilterSpec("bs", 0.5, 3.0)

    def test_overlap(self):
        self.assertAlmostEqual(mode_overlap(self.tms, self.tms), 1.0, places=14)
        self.assertAlmostEqual(abs(mode_overlap(self.tms, self.bs) - 0.5 / complex(0.5, -3.0)), 0.0, places=14)
        integrand = lambda tau: (2.0 * 0.5 * np.exp(-2.0 * 0.5 * tau) * np.exp(1j * 6.0 * tau))
        real, _ = integrate.quad(lambda tau: integrand(tau).real, 0.0, 60.0, limit=400, epsabs=1e-12)
        imag, _ = integrate.quad(lambda tau: integrand(tau).imag, 0.0, 60.0, limit=400, epsabs=1e-12)
        self.assertAlmostEqual(abs(complex(real, imag) - mode_overlap(self.tms, self.bs)), 0.0, places=8)

    def test_mixing_orthonormalizes_overlap(self):
        W = orthonormal_mixing(self.tms, self.bs)
        o = mode_overlap(self.tms, self.bs)
        S = np.array([[1.0, o], [np.conj(o), 1.0]])
        np.testing.assert_allclose(W @ S @ W.conj().T, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(W, W.conj().T, atol=1e-14)

    def test_mixed_responses_are_orthonormal(self):
        W = orthonormal_mixing(self.tms, self.bs)

        def gram(i, j, part):
            def integrand(w):
                responses = W @ np.array([complex(field_response(self.tms, w)), complex(field_response(self.bs, w))])
                value = responses[i] * np.conj(responses[j])
                return value.real if part == "real" else value.imag
            total = 0.0
            for lower, upper in ((-np.inf, -3.0), (-3.0, 0.0), (0.0, 3.0), (3.0, np.inf)):
                total += integrate.quad(integrand, lower, upper, limit=400)[0]
            return total / (2.0 * math.pi)

        for i in range(2):
            for j in range(2):
                self.assertAlmostEqual(gram(i, j, "real"), 1.0 if i == j else 0.0, places=6)
                self.assertAlmostEqual(gram(i, j, "imag"), 0.0, places=6)

    def test_well_separated_modes_need_no_mixing(self):
        W = orthonormal_mixing(FilterSpec("tms", 1e-3, 1e3), FilterSpec("bs", 1e-3, 1e3))
        np.testing.assert_allclose(W, np.eye(2), atol=1e-5)

    def test_coincident_modes_rejected(self):
        with self.assertRaises(ParameterError):
            orthonormal_mixing(FilterSpec("tms", 1.0, 0.0), FilterSpec("bs", 1.0, 0.0))

    def test_filter_matrix_blocks(self):
        T = filter_matrix(0.8, self.tms, self.bs)
        np.testing.assert_allclose(T[0:2, 0:2], np.eye(2), atol=0)
        np.testing.assert_allclose(T[0:2, 2:6], np.zeros((2, 4)), atol=0)
        for k in (2, 4):
            block = T[k:k + 2, k:k + 2]
            np.testing.assert_allclose(block[0, 0], block[1, 1])
            np.testing.assert_allclose(block[0, 1], -block[1, 0])
        no_mixing = filter_matrix(0.8, self.tms, self.bs, mixing=np.eye(2))
        np.testing.assert_allclose(no_mixing[2:4, 2:4], quadrature_block(self.tms, 0.8), atol=1e-14)
        np.testing.assert_allclose(no_mixing[4:6, 4:6], quadrature_block(self.bs, 0.8), atol=1e-14)


class TestTransfer(unittest.TestCase):
    """输入输出传递矩阵"""

    def test_conjugate_symmetry(self):
        model = make_linear_model(1.0, 0.2, 0.1, 3.0, 1.0, 0.7)
        for omega in (0.3, 1.0, 2.5):
            np.testing.assert_allclose(transfer_S(-omega, model), np.conj(transfer_S(omega, model)), atol=1e-12)

    def test_decoupling_at_vanishing_kappa(self):
        kappa = 1e-8
        model = make_linear_model(1.0, 0.2, 0.1, 0.0, 1.0, kappa)
        S = transfer_S(3.0, model)
        reflected = np.hstack([np.zeros((2, 2)), np.eye(2)])
        np.testing.assert_allclose(math.sqrt(kappa) * S[2:4], reflected, atol=1e-6)
        np.testing.assert_allclose(S[2:4], S[4:6])

    def test_transfer_at_high_frequency(self):
        model = make_linear_model(1.0, 0.2, 0.1, 0.0, 1.0, 1.0)
        S = transfer_S(1e8, model)
        np.testing.assert_allclose(S[2:4], np.hstack([np.zeros((2, 2)), np.eye(2)]), atol=1e-6)
        np.testing.assert_allclose(S[0:2], np.zeros((2, 4)), atol=1e-6)


class TestOutputCovariance(unittest.TestCase):
    """稳态输出协方差"""

    @classmethod
    def setUpClass(cls):
        cls.model = make_linear_model(1.0, 0.2, 1e-3, 10.0, 1.0, 1.0)
        cls.out = output_cm(cls.model, 0.1, tol=1e-8)

    def test_vacuum_at_zero_coupling(self):
        model = make_linear_model(1.0, 0.0, 0.1, 0.0, 1.0, 1.0)
        out = output_cm(model, 0.2, tol=1e-10)
        np.testing.assert_allclose(out.matrix, 0.5 * np.eye(6), atol=1e-8)
        self.assertEqual(out.labels, ("mechanical", "tms", "bs"))

    def test_mechanical_block(self):
        reference = steady_state_cm(self.model).matrix[0:2, 0:2]
        np.testing.assert_allclose(self.out.matrix[0:2, 0:2], reference, rtol=1e-5,
                                   atol=1e-5 * np.max(np.abs(reference)))

    def test_physical(self):
        np.testing.assert_allclose(self.out.matrix, self.out.matrix.T, atol=0)
        self.assertTrue(is_physical(self.out, tol=1e-6))
        for pair in ((0, 1), (0, 2), (1, 2)):
            self.assertTrue(is_physical(select_modes(self.out, pair), tol=1e-6))

    def test_beam_splitter_output_is_physical(self):
        model = make_linear_model(1.0, 0.3, 0.05, 5.0, 1.0, 0.5, "beam_splitter")
        out = output_cm(model, 0.2, tol=1e-8)
        self.assertTrue(is_physical(out, tol=1e-6))
        self.assertTrue(is_physical(select_modes(out, (0, 2)), tol=1e-6))

    def test_mechanical_block_mismatch_raises(self):
        model = make_linear_model(1.0, 0.0, 0.1, 0.0, 1.0, 1.0)
        mismatched = CovMatrix(np.eye(4), ("mechanical", "cavity"))
        with mock.patch("analysis.output_filter.steady_state_cm", return_value=mismatched):
            with self.assertRaises(QuadratureError) as caught:
                output_cm(model, 0.2, tol=1e-8)
        self.assertAlmostEqual(caught.exception.estimate, 0.5, places=6)

    def test_entanglement_keys(self):
        values = output_entanglement(self.out)
        self.assertEqual(set(values), {"tms_tor", "bs_tor", "tms_bs"})
        for value in values.values():
            self.assertGreaterEqual(value, 0.0)
            self.assertTrue(math.isfinite(value))

    def test_unstable_model(self):
        with self.assertRaises(InstabilityError):
            output_cm(make_linear_model(1.0, 0.6, 0.01, 0.0, -1.0, 0.1), 0.1)


if __name__ == '__main__':
    unittest.main()
