import math
import numpy as np
import pytest

from scipy.integrate import solve_ivp
from plasma.params import relaxation_cubic, sigma_roots
from linear.fluid import (
  fluid_char_coeffs, fluid_eigenvalues, fluid_eigenvalues_path, fluid_matrix, fluid_profile, fluid_propagate,
  fluid_spectrum, fluid_state, fluid_vector, e_parallel, gauss_residual, lambda1_fourth_from_quartic,
  lambda1_fourth_ratio, low_frequency_radius, richardson_fourth_order,
)
from util.errors import ZeroWavenumber

def unit_roots(k):
  """Unit parameters split into a sum mode l^2 + l + k^2 and a difference mode l^2 + l + k^2 + 8 pi."""
  return np.array([
    (-1 + np.sqrt(complex(1 - 4 * k ** 2))) / 2,
    (-1 - np.sqrt(complex(1 - 4 * k ** 2))) / 2,
    (-1 + np.sqrt(complex(1 - 4 * k ** 2 - 32 * math.pi))) / 2,
    (-1 - np.sqrt(complex(1 - 4 * k ** 2 - 32 * math.pi))) / 2,
  ])

@pytest.mark.parametrize('k_mag', [0.05, 0.3, 2.0])
def test_char_poly_matches_matrix(params, mass_ratio_params, k_mag):
  for p in (params, mass_ratio_params):
    coeffs = fluid_char_coeffs(p, k_mag)
    assert np.allclose(np.poly(fluid_matrix(p, k_mag)), coeffs, rtol=1e-12, atol=1e-12 * np.max(np.abs(coeffs)))

def test_unit_eigenvalues_closed_form(params):
  k = 0.2
  eigenvalues = fluid_eigenvalues(params, k)
  expected = unit_roots(k)
  assert eigenvalues[0] == pytest.approx(expected[0], abs=1e-13)
  for lam in expected[1:]:
    assert np.min(np.abs(eigenvalues - lam)) < 1e-12

def test_small_k_branches_follow_cubic(params, mass_ratio_params):
  for p in (params, mass_ratio_params):
    eigenvalues = fluid_eigenvalues(p, 1e-4)
    sigma = sigma_roots(relaxation_cubic(p))['sigma']
    assert np.max(np.abs(eigenvalues[1:] - sigma)) < 1e-6
    assert eigenvalues[0] == pytest.approx(-p['mu1'] * 1e-8, rel=1e-6)

def test_path_labels_lambda1(params):
  k_values = np.array([0.4, 1e-3, 0.1])
  path = fluid_eigenvalues_path(params, k_values)
  assert path[:, 0] == pytest.approx(np.array([unit_roots(k)[0] for k in k_values]), abs=1e-12)

def test_fourth_order_coefficient(params, mass_ratio_params):
  expansion = lambda1_fourth_ratio(params)
  assert expansion['fourth_ratio'] == pytest.approx(-1.0, rel=1e-14)
  assert expansion['fourth_order'] == pytest.approx(-1.0, rel=1e-14)
  for p in (params, mass_ratio_params):
    closed = lambda1_fourth_ratio(p)['fourth_order']
    assert lambda1_fourth_from_quartic(p) == pytest.approx(closed, rel=1e-10)
    extrapolated = richardson_fourth_order(lambda k: fluid_eigenvalues(p, k)[0], -p['mu1'])
    assert extrapolated == pytest.approx(closed, rel=1e-2)

def test_projection_algebra(params, mass_ratio_params):
  for p, k in ((params, 0.3), (params, 3.0), (mass_ratio_params, 0.05)):
    spectrum = fluid_spectrum(p, k)
    proj = spectrum['projections']
    a = fluid_matrix(p, k)
    assert np.max(np.abs(proj.sum(axis=0) - np.eye(4))) < 1e-9
    for j, lam in enumerate(spectrum['eigenvalues']):
      scale = max(1.0, np.max(np.abs(proj[j])))
      assert np.max(np.abs(proj[j] @ proj[j] - proj[j])) < 1e-9 * scale ** 2
      assert np.max(np.abs(a @ proj[j] - lam * proj[j])) < 1e-9 * scale * max(1.0, np.max(np.abs(a)))

@pytest.mark.parametrize('k_mag', [0.1, 0.7, 4.0])
def test_propagator_matches_ode(mass_ratio_params, rng, k_mag):
  p = mass_ratio_params
  vec0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
  t = 3.0
  a = fluid_matrix(p, k_mag)
  oracle = solve_ivp(lambda _, y: a @ y, (0, t), vec0, method='DOP853', rtol=1e-12, atol=1e-14)
  exact = fluid_vector(fluid_propagate(p, fluid_state(vec0, k_mag), t))
  assert np.linalg.norm(exact - oracle.y[:, -1]) <= 1e-7 * np.linalg.norm(vec0)

def test_zero_wavenumber_rejected(params):
  with pytest.raises(ZeroWavenumber):
    fluid_matrix(params, 0.0)
  with pytest.raises(ZeroWavenumber):
    fluid_eigenvalues_path(params, [0.1, 0.0])

def test_gauss_and_profile(params):
  state = fluid_state([1.0, 0.5, 0.0, 0.0], 0.2)
  e_par = e_parallel(params, state['rho_i'], state['rho_e'], 0.2)
  assert gauss_residual(params, state, e_par) < 1e-14
  rho_bar, u_bar, e_bar = fluid_profile(params, state, 0.0)
  assert rho_bar == pytest.approx(0.75)
  assert u_bar == pytest.approx(-1j * 0.2 * 0.75)
  assert e_bar == 0

def test_low_frequency_radius_unit(params):
  # lambda_1 meets the other sum-mode root at |k| = 1/2; half of min |sigma| = 1/2 is reached at sqrt(3)/4
  r0 = low_frequency_radius(params)
  assert 0.42 < r0 <= math.sqrt(3) / 4

def test_propagator_semigroup(params, mass_ratio_params):
  for p in (params, mass_ratio_params):
    for k in (0.2, 2.0):
      state0 = fluid_state([1.0, 0.5 + 0.2j, -0.3j, 0.4], k)
      twice = fluid_propagate(p, fluid_propagate(p, state0, 0.7), 1.3)
      once = fluid_propagate(p, state0, 2.0)
      scale = np.linalg.norm(fluid_vector(state0))
      assert np.allclose(fluid_vector(twice), fluid_vector(once), rtol=1e-8, atol=1e-8 * scale)
