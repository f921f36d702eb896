import math
import numpy as np
import pytest

from linear.evolution import (
  diffusion_profiles, empty_field, field_difference, gaussian_grid_field, grid_gauss_residuals, l2_norm,
  linear_evolve, mode_propagate, norm_series, projection_extract, random_grid_field, reality_residual, wavevectors,
)
from linear.modes import B_FIELD, N_COMPONENTS, RHO_I, pack_state, unpack_state

GRID = 8
BOX = 20.0

@pytest.fixture
def field0(params, rng):
  return random_grid_field(params, GRID, BOX, 1e-2, rng)

def test_random_field_is_real_and_constrained(params, field0):
  assert reality_residual(field0) < 1e-14
  gauss_e, gauss_b = grid_gauss_residuals(params, field0)
  scale = l2_norm(field0)
  assert gauss_e < 1e-12 * scale and gauss_b < 1e-12 * scale
  assert np.all(field0['modes'][RHO_I, 0, 0, 0] == 0)

def test_parseval_norm_of_gaussian():
  width = 1.5
  field = gaussian_grid_field(16, BOX, width)
  x = (np.arange(16) - 8) * BOX / 16
  xx, yy, zz = np.meshgrid(x, x, x, indexing='ij')
  values = np.exp(-(xx ** 2 + yy ** 2 + zz ** 2) / (2 * width ** 2))
  direct = math.sqrt(np.sum(values ** 2) * (BOX / 16) ** 3)
  assert l2_norm(field) == pytest.approx(direct, rel=1e-12)
  assert l2_norm(field, 'P1i') == pytest.approx(direct, rel=1e-12)
  assert l2_norm(field, 'P4') == 0.0

def test_linear_evolve_matches_mode_propagate(params, field0):
  t = 2.0
  out = linear_evolve(params, field0, t, num_threads=2)
  k, _ = wavevectors(GRID, BOX)
  for idx in [(0, 0, 0), (1, 0, 0), (1, 2, 0), (7, 3, 5), (4, 4, 1)]:
    sel = (slice(None),) + idx
    state0 = unpack_state(field0['modes'][sel], k[sel])
    expected = pack_state(mode_propagate(params, state0, t))
    assert np.allclose(out['modes'][sel], expected, rtol=1e-9, atol=1e-12 * np.max(np.abs(field0['modes'])))

def test_linear_evolve_keeps_structure(params, field0):
  out = linear_evolve(params, field0, 5.0)
  scale = l2_norm(field0)
  assert reality_residual(out) < 1e-10
  gauss_e, gauss_b = grid_gauss_residuals(params, out)
  assert gauss_e < 1e-10 * scale and gauss_b < 1e-10 * scale

def test_profiles_at_zero_time(params):
  field = empty_field(GRID, BOX)
  field['modes'][RHO_I] = np.fft.fftn(np.ones((GRID,) * 3))
  profile = diffusion_profiles(params, field, 0.0)
  assert np.allclose(projection_extract(profile, 'P1i'), 0.5 * field['modes'][RHO_I])
  assert np.allclose(projection_extract(profile, 'P1e'), 0.5 * field['modes'][RHO_I])
  gap = field_difference(field, profile)
  assert l2_norm(gap, 'P4') == 0.0
  with pytest.raises(ValueError):
    projection_extract(profile, 'P9')

def test_profiles_follow_heat_kernel(params, field0):
  t = 3.0
  k, _ = wavevectors(GRID, BOX)
  k2 = np.sum(k ** 2, axis=0)
  profile = diffusion_profiles(params, field0, t)
  expected = np.exp(-params['mu2'] * k2 * t) * field0['modes'][B_FIELD]
  assert np.allclose(profile['modes'][B_FIELD], expected)

def test_norm_series_decreases(params, field0):
  series = norm_series(params, field0, [0.0, 1.0, 50.0], [None, 'P4'])
  assert series.shape == (3, 2)
  assert series[2, 0] < series[0, 0]
  assert series[2, 1] < series[0, 1]
  gaps = norm_series(params, field0, [0.0, 1.0], ['P1i'], profiles=True)
  assert gaps.shape == (2, 1)
  assert field0['modes'].shape == (N_COMPONENTS, GRID, GRID, GRID)
