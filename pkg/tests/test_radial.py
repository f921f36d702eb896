import math
import numpy as np
import pytest

from linear.em import transverse_propagator
from linear.fluid import fluid_propagate, fluid_state, fluid_vector
from linear.radial import (
  decay_quadrature, integrate, radial_data, radial_evolve, radial_norm, radial_profiles, radial_quadrature,
  radial_series,
)
from util.fitting import decay_fit

T_MIN, T_MAX = 100.0, 1e4

def test_quadrature_is_exact_on_polynomials():
  quad = radial_quadrature(8.0)
  assert np.sum(quad['weights'] * quad['nodes'] ** 2) == pytest.approx(8.0 ** 3 / 3, rel=1e-13)
  assert np.all(np.diff(quad['nodes']) > 0)
  assert integrate(quad, np.ones_like(quad['nodes'])) == pytest.approx(4 * math.pi * 8.0 ** 3 / 3 / (2 * math.pi) ** 3)

def test_norm_of_gaussian_monopole(params):
  width = 0.3
  quad = radial_quadrature(40.0)
  field = radial_data(params, quad, { 'rho_i': 1.0, 'rho_e': 0.0, 'u_i': 0.0, 'u_e': 0.0, 'e_perp': 0.0, 'b': 0.0 }, width)
  expected = math.sqrt(1 / (8 * math.pi ** 1.5 * width ** 3))
  assert radial_norm(field, 'P1i') == pytest.approx(expected, rel=1e-10)
  assert radial_norm(field, 'P1e') == 0.0

def test_evolution_matches_mode_propagators(params):
  quad = radial_quadrature(10.0, nodes=64)
  field0 = radial_data(params, quad)
  t = 4.0
  field = radial_evolve(params, field0, t)
  for j in (0, 17, 40, 63):
    k = quad['nodes'][j]
    for h in range(2):
      state0 = fluid_state(field0['longitudinal'][h, :4, j], k)
      expected = fluid_vector(fluid_propagate(params, state0, t))
      assert np.allclose(field['longitudinal'][h, :4, j], expected, rtol=1e-9, atol=1e-13)
    trans = transverse_propagator(params, k, [t])[0]
    for p in range(2):
      assert np.allclose(field['transverse'][p, :, j], trans @ field0['transverse'][p, :, j], rtol=1e-9, atol=1e-13)

def test_gauss_law_is_carried(params):
  quad = radial_quadrature(10.0, nodes=64)
  field = radial_evolve(params, radial_data(params, quad), 2.0)
  k = quad['nodes']
  e = params['e_charge']
  x = field['longitudinal'][0]
  assert np.max(np.abs(1j * k * x[4] - 4 * math.pi * e * (x[0] - x[1]))) < 1e-12

def test_profiles_at_zero_time(params):
  quad = radial_quadrature(10.0, nodes=64)
  field0 = radial_data(params, quad, { 'rho_i': 1.0, 'rho_e': 0.5 })
  profile = radial_profiles(params, field0, 0.0)
  assert np.allclose(profile['transverse'][:, 3], field0['transverse'][:, 3])
  assert np.allclose(profile['longitudinal'][0, 0], 0.75 * field0['longitudinal'][0, 0])

def _fitted(params, field0, quantities):
  times = np.geomspace(T_MIN, T_MAX, 40)
  series = radial_series(params, field0, times, quantities)
  return { name: decay_fit(times, series[:, j], (T_MIN, T_MAX))['exponent'] for j, name in enumerate(quantities) }

def test_decay_rates_of_gaussian_data(params):
  field0 = radial_data(params, decay_quadrature(params, T_MIN))
  exponents = _fitted(params, field0, {
    'norm': ('solution', None),
    'rho_i_gap': ('gap', 'P1i'),
    'rho_e_gap': ('gap', 'P1e'),
    'b_gap': ('gap', 'P4'),
    'u_i_gap': ('gap', 'P2i'),
    'e_gap': ('gap', 'P3'),
  })
  assert exponents['norm'] == pytest.approx(-0.75, abs=0.05)
  assert exponents['rho_i_gap'] == pytest.approx(-1.25, abs=0.05)
  assert exponents['rho_e_gap'] == pytest.approx(-1.25, abs=0.05)
  assert exponents['b_gap'] == pytest.approx(-1.25, abs=0.05)
  assert exponents['u_i_gap'] == pytest.approx(-1.75, abs=0.05)
  assert exponents['e_gap'] == pytest.approx(-1.75, abs=0.05)

def test_default_data_is_charge_neutral(params):
  quad = radial_quadrature(10.0, nodes=64)
  field0 = radial_data(params, quad)
  assert np.array_equal(field0['longitudinal'][0, 0], field0['longitudinal'][0, 1])
  assert np.all(field0['longitudinal'][0, 4] == 0)

def test_special_data_decays_faster(params):
  quad = decay_quadrature(params, T_MIN)
  special = radial_data(params, quad, { 'f_i': 1.0, 'f_e': 0.5 }, special=True)
  generic = radial_data(params, quad, { 'rho_i': 1.0, 'rho_e': 1.0 })
  quantities = { 'rho_i': ('solution', 'P1i') }
  gain = _fitted(params, generic, quantities)['rho_i'] - _fitted(params, special, quantities)['rho_i']
  assert gain >= 0.4
