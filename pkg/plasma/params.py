import argparse
import json
import math
import numpy as np

from typing import TypedDict
from util.errors import DegenerateSpectrum, NonPositiveParameter, UnknownKey
from util.roots import polish_roots, polynomial_roots

PARAM_NAMES = ['m_i', 'm_e', 'T_i', 'T_e', 'nu_i', 'nu_e', 'e_charge', 'c_light']
CONFIG_ALIASES = { 'e': 'e_charge', 'c': 'c_light' }
DEGENERACY_TOLERANCE = 1e-12

THREE_REAL_DISTINCT = 'ThreeRealDistinct'
ONE_REAL_PLUS_PAIR = 'OneRealPlusConjugatePair'
DEGENERATE = 'Degenerate'

class PlasmaParams(TypedDict):
  m_i: float
  m_e: float
  T_i: float
  T_e: float
  nu_i: float
  nu_e: float
  e_charge: float
  c_light: float
  mu1: float
  mu2: float

class RelaxationCubic(TypedDict):
  c2: float
  c1: float
  c0: float
  discriminant: float
  branch: str

class SigmaRoots(TypedDict):
  sigma: np.ndarray

def unit_params():
  return validate({ name: 1.0 for name in PARAM_NAMES })

def validate(raw):
  record = {}
  for key, value in raw.items():
    name = CONFIG_ALIASES.get(key, key)
    if name in ('mu1', 'mu2'):
      continue
    if name not in PARAM_NAMES:
      raise UnknownKey(f'unknown parameter: {key}')
    record[name] = value

  for name in PARAM_NAMES:
    value = record.get(name)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
      raise NonPositiveParameter(name, value)
    if not math.isfinite(value) or value <= 0:
      raise NonPositiveParameter(name, value)
    record[name] = float(value)

  friction = record['m_i'] * record['nu_i'] + record['m_e'] * record['nu_e']
  record['mu1'] = (record['T_i'] + record['T_e']) / friction
  record['mu2'] = (
    record['c_light'] ** 2 * record['m_i'] * record['nu_i'] * record['m_e'] * record['nu_e']
    / (4 * math.pi * record['e_charge'] ** 2 * friction)
  )
  return PlasmaParams(**record)

def as_config(params):
  """Parameter record with the config-file key names, for output headers."""
  out = {}
  for name in PARAM_NAMES:
    key = next((k for k, v in CONFIG_ALIASES.items() if v == name), name)
    out[key] = params[name]
  return out

def friction_sum(params):
  return params['m_i'] * params['nu_i'] + params['m_e'] * params['nu_e']

def mass_weights(params):
  s = friction_sum(params)
  return params['m_i'] * params['nu_i'] / s, params['m_e'] * params['nu_e'] / s

def plasma_frequency_sq(params):
  e2 = params['e_charge'] ** 2
  return 4 * math.pi * e2 / params['m_i'], 4 * math.pi * e2 / params['m_e']

def classify_cubic(c2, c1, c0):
  terms = np.array([
    18 * c2 * c1 * c0,
    -4 * c2 ** 3 * c0,
    c2 ** 2 * c1 ** 2,
    -4 * c1 ** 3,
    -27 * c0 ** 2,
  ])
  discriminant = float(terms.sum())
  scale = float(np.max(np.abs(terms)))
  if abs(discriminant) <= DEGENERACY_TOLERANCE * scale:
    branch = DEGENERATE
  elif discriminant > 0:
    branch = THREE_REAL_DISTINCT
  else:
    branch = ONE_REAL_PLUS_PAIR
  return RelaxationCubic(c2=float(c2), c1=float(c1), c0=float(c0), discriminant=discriminant, branch=branch)

def relaxation_cubic(params):
  wi, we = plasma_frequency_sq(params)
  nu_i, nu_e = params['nu_i'], params['nu_e']
  c2 = nu_i + nu_e
  c1 = nu_i * nu_e + wi + we
  c0 = wi * nu_e + we * nu_i
  return classify_cubic(c2, c1, c0)

def cubic_value(cubic, lam):
  return np.polyval([1.0, cubic['c2'], cubic['c1'], cubic['c0']], lam)

def cubic_residual(cubic, lam):
  """|g(lam)| relative to the largest term of g at lam."""
  lam = np.asarray(lam, dtype=complex)
  value = np.abs(cubic_value(cubic, lam))
  scale = np.maximum.reduce([
    np.abs(lam) ** 3,
    abs(cubic['c2']) * np.abs(lam) ** 2,
    abs(cubic['c1']) * np.abs(lam),
    np.full(lam.shape, abs(cubic['c0'])),
  ])
  return value / scale

def sigma_roots(cubic):
  """Roots of the relaxation cubic, real root first.

  Args:
    cubic: RelaxationCubic from relaxation_cubic or classify_cubic.

  Returns:
    SigmaRoots with three complex roots. For the one-real branch the real root
    comes first with its imaginary part cleared, followed by the pair ordered by
    increasing imaginary part; three real roots are sorted in decreasing order.
  """
  if cubic['branch'] == DEGENERATE:
    raise DegenerateSpectrum(
      f'relaxation cubic has a repeated root (discriminant {cubic["discriminant"]:.3e})'
    )
  coeffs = [1.0, cubic['c2'], cubic['c1'], cubic['c0']]
  roots = polish_roots(coeffs, polynomial_roots(coeffs))

  if cubic['branch'] == ONE_REAL_PLUS_PAIR:
    real_idx = int(np.argmin(np.abs(roots.imag)))
    real_root = complex(roots[real_idx].real, 0.0)
    pair = np.delete(roots, real_idx)
    pair = pair[np.argsort(pair.imag)]
    ordered = np.array([real_root, pair[0], pair[1]], dtype=complex)
  else:
    ordered = np.sort(roots.real)[::-1].astype(complex)
  return SigmaRoots(sigma=ordered)

def real_sigma(params):
  return sigma_roots(relaxation_cubic(params))['sigma'][0].real

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-p', '--params', type=str, help='JSON file with a parameter record')
  args = parser.parse_args()

  if args.params:
    with open(args.params, 'r') as f:
      params = validate(json.load(f))
  else:
    params = unit_params()
  cubic = relaxation_cubic(params)
  print(f'mu1 = {params["mu1"]:.17g}')
  print(f'mu2 = {params["mu2"]:.17g}')
  print(f'cubic: c2={cubic["c2"]:.17g} c1={cubic["c1"]:.17g} c0={cubic["c0"]:.17g}')
  print(f'discriminant = {cubic["discriminant"]:.17g} ({cubic["branch"]})')
  for s in sigma_roots(cubic)['sigma']:
    print(f'sigma = {s.real:.17g} {s.imag:+.17g}i')
