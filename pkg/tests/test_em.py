import math
import numpy as np
import pytest

from scipy.integrate import solve_ivp
from linear.em import (
  b_propagate, em_eigenvalues, em_lambda1_expansion, em_matrix, em_profile, em_propagate, em_quartic_coeffs,
  em_state, em_vector, profile_coefficients, profile_discrepancy, transversality_residual, transverse_matrix,
)
from linear.evolution import helmholtz_split
from linear.fluid import richardson_fourth_order
from linear.modes import random_mode
from util.errors import ZeroWavenumber

def random_em_state(params, rng, k_mag):
  direction = rng.standard_normal(3)
  k_vec = k_mag * direction / np.linalg.norm(direction)
  _, _, em0 = helmholtz_split(random_mode(params, k_vec, rng))
  return em0

@pytest.mark.parametrize('k_mag', [0.01, 0.5, 7.0])
def test_quartic_is_transverse_char_poly(params, mass_ratio_params, k_mag):
  for p in (params, mass_ratio_params):
    coeffs = em_quartic_coeffs(p, k_mag)
    assert np.allclose(np.poly(transverse_matrix(p, k_mag)), coeffs, rtol=1e-12, atol=1e-12 * np.max(np.abs(coeffs)))

def test_unit_spectrum_factors(params):
  # unit parameters: (l + 1)(l^3 + l^2 + (8 pi + k^2) l + k^2)
  k = 0.3
  eigenvalues = em_eigenvalues(params, k)
  expected = np.concatenate([[-1.0], np.roots([1.0, 1.0, 8 * math.pi + k ** 2, k ** 2])])
  for lam in expected:
    assert np.min(np.abs(eigenvalues - lam)) < 1e-10
  assert eigenvalues[0].real == pytest.approx(-params['mu2'] * k ** 2, rel=0.05)

def test_lambda1_expansion(params, mass_ratio_params):
  second, fourth = em_lambda1_expansion(params)
  a = -1 / (8 * math.pi)
  assert second == pytest.approx(a)
  assert fourth == pytest.approx(-(a ** 2 + a) / (8 * math.pi), rel=1e-12)
  for p in (params, mass_ratio_params):
    second, fourth = em_lambda1_expansion(p)
    extrapolated = richardson_fourth_order(lambda k: em_eigenvalues(p, k)[0], second)
    assert extrapolated == pytest.approx(fourth, rel=1e-2)

def test_b_propagate_matches_matrix_exponential(params, rng):
  times = np.linspace(0, 100, 21)
  for _ in range(50):
    em0 = random_em_state(params, rng, math.exp(rng.uniform(math.log(1e-2), math.log(10.0))))
    scale = np.linalg.norm(em_vector(em0))
    closed = b_propagate(params, em0, times)
    for t, b in zip(times, closed):
      assert np.linalg.norm(b - em_propagate(params, em0, t)['b']) < 1e-8 * scale

def test_em_propagate_matches_ode(mass_ratio_params, rng):
  em0 = random_em_state(mass_ratio_params, rng, 0.8)
  mat = em_matrix(mass_ratio_params, em0['k_vec'])
  y0 = em_vector(em0)
  oracle = solve_ivp(lambda _, y: mat @ y, (0, 2.0), y0, method='DOP853', rtol=1e-12, atol=1e-14)
  exact = em_vector(em_propagate(mass_ratio_params, em0, 2.0))
  assert np.linalg.norm(exact - oracle.y[:, -1]) <= 1e-7 * np.linalg.norm(y0)

def test_transversality_is_preserved(params, rng):
  em0 = random_em_state(params, rng, 1.3)
  assert transversality_residual(em0) < 1e-12
  assert transversality_residual(em_propagate(params, em0, 5.0)) < 1e-10

def test_zero_wavenumber(params):
  with pytest.raises(ZeroWavenumber):
    em_matrix(params, np.zeros(3))
  with pytest.raises(ZeroWavenumber):
    em_eigenvalues(params, 0.0)

def test_profile_conventions(params, mass_ratio_params):
  assert profile_discrepancy(params)['relative_gap'] == pytest.approx(0.0, abs=1e-15)
  report = profile_discrepancy(mass_ratio_params)
  assert report['relative_gap'] > 0.5
  e_bar = profile_coefficients(mass_ratio_params)[2]
  assert report['balance_darcy'] <= 1e-12 * mass_ratio_params['e_charge'] * abs(e_bar)
  assert report['balance_literal'] > 1e-3 * abs(e_bar)
  with pytest.raises(ValueError):
    profile_coefficients(params, 'other')

def test_em_profile_starts_at_data(params):
  b0 = np.array([1.0, 2.0, 0.0])
  k_vec = np.array([0.0, 0.0, 0.5])
  u_i, u_e, e_bar, b_bar = em_profile(params, b0, k_vec, 0.0)
  assert np.allclose(b_bar, b0)
  assert np.allclose(u_i, -u_e)
  _, _, _, later = em_profile(params, b0, k_vec, 10.0)
  assert np.allclose(later, math.exp(-params['mu2'] * 0.25 * 10.0) * b0)

def fixed_em_state(k_mag):
  """Transverse data in the x-y plane with k along z."""
  vec = np.array([1.0, 0.5, 0.0, -0.3, 0.8, 0.0, 0.2, -0.4, 0.0, 0.7, 0.1, 0.0], dtype=complex)
  return em_state(vec, np.array([0.0, 0.0, k_mag]))

def transverse_energy(params, state):
  kinetic = (
    params['m_i'] * np.linalg.norm(state['u_i_perp']) ** 2 + params['m_e'] * np.linalg.norm(state['u_e_perp']) ** 2
  )
  return kinetic + (np.linalg.norm(state['e_perp']) ** 2 + np.linalg.norm(state['b']) ** 2) / (4 * math.pi)

def test_transverse_energy_dissipation(params, rng):
  em0 = random_em_state(params, rng, 0.7)
  t, h = 1.3, 1e-5
  ahead, behind = (transverse_energy(params, em_propagate(params, em0, t + s)) for s in (h, -h))
  rate = (ahead - behind) / (2 * h)
  state = em_propagate(params, em0, t)
  expected = -2 * (
    params['m_i'] * params['nu_i'] * np.linalg.norm(state['u_i_perp']) ** 2
    + params['m_e'] * params['nu_e'] * np.linalg.norm(state['u_e_perp']) ** 2
  )
  assert rate == pytest.approx(expected, abs=1e-8 * transverse_energy(params, em0))

def test_em_semigroup(params, rng):
  em0 = random_em_state(params, rng, 0.4)
  twice = em_propagate(params, em_propagate(params, em0, 0.8), 1.2)
  once = em_propagate(params, em0, 2.0)
  scale = np.linalg.norm(em_vector(em0))
  assert np.allclose(em_vector(twice), em_vector(once), rtol=1e-8, atol=1e-8 * scale)

def test_profile_errors_are_quadratic_at_low_frequency(params):
  t = 40.0
  errors = []
  for k in (0.02, 0.01):
    state0 = fixed_em_state(k)
    exact = em_propagate(params, state0, t)
    u_i_bar, _, e_bar, _ = em_profile(params, state0['b'], state0['k_vec'], t)
    errors.append((np.linalg.norm(exact['u_i_perp'] - u_i_bar), np.linalg.norm(exact['e_perp'] - e_bar)))
  assert errors[0][0] / errors[1][0] == pytest.approx(4.0, rel=0.1)
  assert errors[0][1] / errors[1][1] == pytest.approx(4.0, rel=0.1)
