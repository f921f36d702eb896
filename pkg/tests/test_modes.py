import math
import numpy as np
import pytest

from scipy.integrate import solve_ivp
from scipy.linalg import expm
from linear.evolution import evolve_zero_mode, helmholtz_split, mode_propagate, recombine
from linear.modes import (
  base_weights, constraint_rows, full_matrix, gauss_residuals, pack_state, random_mode, unpack_state, weighted_norm_sq,
)
from util.errors import ConstraintViolation, ZeroWavenumber

def test_full_matrix_preserves_constraints(mass_ratio_params, rng):
  k_vec = rng.standard_normal(3)
  product = constraint_rows(mass_ratio_params, k_vec) @ full_matrix(mass_ratio_params, k_vec)
  assert np.max(np.abs(product)) < 1e-12

def test_random_mode_is_gauss_consistent(params, rng):
  state = random_mode(params, np.array([0.3, -0.1, 2.0]), rng)
  residual_e, residual_b = gauss_residuals(params, state)
  assert residual_e < 1e-12 and residual_b < 1e-12
  zero = random_mode(params, np.zeros(3), rng)
  assert zero['rho_i'] == zero['rho_e']

def test_pack_layout(params, rng):
  state = random_mode(params, np.array([0.0, 0.0, 1.0]), rng)
  vec = pack_state(state)
  assert vec.shape == (14,)
  assert np.array_equal(pack_state(unpack_state(vec, state['k_vec'])), vec)
  assert weighted_norm_sq(params, state) == pytest.approx(float(np.sum(base_weights(params) * np.abs(vec) ** 2)))
  assert base_weights(params)[8] == pytest.approx(1 / (4 * math.pi))

def test_helmholtz_split_recombines(params, rng):
  state = random_mode(params, np.array([1.0, 2.0, -0.5]), rng)
  fluid, e_par, em = helmholtz_split(state)
  back = pack_state(recombine(fluid, e_par, em))
  assert np.allclose(back, pack_state(state), atol=1e-13)
  with pytest.raises(ZeroWavenumber):
    helmholtz_split(random_mode(params, np.zeros(3), rng))

@pytest.mark.parametrize('k_vec', [[0.0, 0.0, 0.05], [0.6, -0.8, 0.3], [3.0, 1.0, 2.0]])
def test_mode_propagate_matches_ode(mass_ratio_params, rng, k_vec):
  k_vec = np.array(k_vec)
  state0 = random_mode(mass_ratio_params, k_vec, rng)
  x0 = pack_state(state0)
  mat = full_matrix(mass_ratio_params, k_vec)
  t = 2.5
  oracle = solve_ivp(lambda _, y: mat @ y, (0, t), x0, method='DOP853', rtol=1e-12, atol=1e-14)
  exact = pack_state(mode_propagate(mass_ratio_params, state0, t))
  assert np.linalg.norm(exact - oracle.y[:, -1]) <= 1e-7 * np.linalg.norm(x0)

def test_mode_propagate_matches_expm(params, rng):
  k_vec = np.array([0.2, 0.9, -0.4])
  state0 = random_mode(params, k_vec, rng)
  for t in (0.0, 1.0, 20.0):
    expected = expm(t * full_matrix(params, k_vec)) @ pack_state(state0)
    assert np.allclose(pack_state(mode_propagate(params, state0, t)), expected, rtol=1e-9, atol=1e-11)

def test_zero_mode(params, rng):
  state0 = random_mode(params, np.zeros(3), rng)
  t = 1.5
  expected = expm(t * full_matrix(params, np.zeros(3))) @ pack_state(state0)
  out = evolve_zero_mode(params, state0, t)
  assert np.allclose(pack_state(out), expected, atol=1e-12)
  assert np.array_equal(out['b_field'], state0['b_field'])
  state0['rho_e'] = state0['rho_i'] + 1.0
  with pytest.raises(ConstraintViolation):
    evolve_zero_mode(params, state0, t)
