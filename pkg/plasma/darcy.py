import argparse
import numpy as np

from tqdm import tqdm
from typing import TypedDict
from plasma.params import friction_sum, unit_params, validate, PARAM_NAMES
from util.errors import SingularSum

SPECIES = ('i', 'e')

class MobilityMatrix(TypedDict):
  entries: np.ndarray
  species: str
  b_mag: float

class DarcyMaps(TypedDict):
  g_matrix: np.ndarray
  u_map: np.ndarray
  e_map: np.ndarray
  n_background: float

def _species(params, species):
  if species not in SPECIES:
    raise ValueError(f'species must be one of {SPECIES}, got {species!r}')
  m = params['m_' + species]
  nu = params['nu_' + species]
  q = params['e_charge'] if species == 'i' else -params['e_charge']
  return m, nu, q

def _damping(params, b_mag, species):
  m, nu, _ = _species(params, species)
  return (m * nu) ** 2 + (params['e_charge'] * b_mag / params['c_light']) ** 2

def mobility(params, b_mag, species):
  if b_mag < 0:
    raise ValueError(f'b_mag must be >= 0, got {b_mag}')
  m, nu, q = _species(params, species)
  damping = _damping(params, b_mag, species)
  lorentz = q * b_mag / params['c_light']
  entries = np.array([[m * nu, lorentz], [-lorentz, m * nu]]) / damping
  return MobilityMatrix(entries=entries, species=species, b_mag=float(b_mag))

def response_matrix(params, b_mag, species):
  """The perpendicular block of A_alpha scaled by 1/n (friction plus Lorentz)."""
  m, nu, q = _species(params, species)
  lorentz = q * b_mag / params['c_light']
  return np.array([[-m * nu, lorentz], [-lorentz, -m * nu]])

def mobility_sum(params, b_mag):
  """K_i + K_e with the off-diagonal assembled free of cancellation."""
  ki = mobility(params, b_mag, 'i')['entries']
  ke = mobility(params, b_mag, 'e')['entries']
  ci = _damping(params, b_mag, 'i')
  ce = _damping(params, b_mag, 'e')
  mi_nu = params['m_i'] * params['nu_i']
  me_nu = params['m_e'] * params['nu_e']
  lorentz = params['e_charge'] * b_mag / params['c_light']
  # C_e - C_i factors as a difference of squares of the friction terms
  off = lorentz * (me_nu - mi_nu) * (me_nu + mi_nu) / (ci * ce)
  diag = ki[0, 0] + ke[0, 0]
  return np.array([[diag, off], [-off, diag]])

def _sandwich(params, b_mag):
  ki = mobility(params, b_mag, 'i')['entries']
  ke = mobility(params, b_mag, 'e')['entries']
  m = mobility_sum(params, b_mag)
  if abs(np.linalg.det(m)) == 0 or not np.all(np.isfinite(m)):
    raise SingularSum(f'K_i + K_e is singular at |B| = {b_mag}')
  left = ke @ np.linalg.solve(m, ki)
  right = ki @ np.linalg.solve(m, ke)
  return left, right

def sandwich_identity_residual(params, b_mag):
  """Max-norm distance of both sandwich products from (m_i nu_i + m_e nu_e)^-1 I.

  The residual is returned relative to 1/(m_i nu_i + m_e nu_e).
  """
  left, right = _sandwich(params, b_mag)
  s = friction_sum(params)
  target = np.eye(2) / s
  residual = max(np.max(np.abs(left - target)), np.max(np.abs(right - target)))
  return float(residual * s)

def coefficient_g(params, n, b_mag):
  if n <= 0:
    raise ValueError(f'density must be > 0, got {n}')
  left, right = _sandwich(params, b_mag)
  return -(params['T_i'] / n) * left - (params['T_e'] / n) * right

def parallel_electric_coefficient(params):
  """E_3 response to d_3 n (per unit density), independent of |B|."""
  s = friction_sum(params)
  return (
    params['T_i'] * params['m_e'] * params['nu_e'] - params['T_e'] * params['m_i'] * params['nu_i']
  ) / (params['e_charge'] * s)

def darcy_maps(params, n, b_mag):
  g = coefficient_g(params, n, b_mag)
  e = params['e_charge']

  u_map = np.zeros((3, 3))
  u_map[:2, :2] = n * g
  u_map[2, 2] = -params['mu1']

  # E_perp from the ion momentum balance with u_perp = n G grad n
  e_map = np.zeros((3, 3))
  a_i = response_matrix(params, b_mag, 'i')
  e_map[:2, :2] = (params['T_i'] * np.eye(2) - a_i @ (n * g)) / e
  e_map[2, 2] = parallel_electric_coefficient(params)
  return DarcyMaps(g_matrix=g, u_map=u_map, e_map=e_map, n_background=float(n))

def random_params(rng, spread=2.0):
  """Parameter record log-uniform in [10^-spread, 10^spread] per field."""
  raw = { name: float(10 ** rng.uniform(-spread, spread)) for name in PARAM_NAMES }
  return validate(raw)

def darcy_check(params, b_values, draws=0, density=1.0, rng=None, spread=2.0, verbose=False):
  """Residuals of the Darcy identities for params and for random draws.

  Returns a list of dicts, one per (parameter set, |B|) pair, parameter set 0
  being params itself.
  """
  sets = [params]
  if draws:
    rng = rng if rng is not None else np.random.default_rng(0)
    sets += [random_params(rng, spread) for _ in range(draws)]

  rows = []
  for idx, p in enumerate(tqdm(sets, disable=not verbose)):
    for b in b_values:
      maps = darcy_maps(p, density, b)
      scale = p['mu1'] / density
      g_res = np.max(np.abs(maps['g_matrix'] + scale * np.eye(2))) / scale
      u_res = np.max(np.abs(maps['u_map'] + p['mu1'] * np.eye(3))) / p['mu1']
      off = maps['e_map'] - np.diag(np.diag(maps['e_map']))
      skew_res = np.max(np.abs(off + off.T)) / max(1.0, np.max(np.abs(off)))
      diag = np.diag(maps['e_map'])
      diag_res = np.max(np.abs(diag - diag[2])) / max(1.0, abs(diag[2]))
      rows.append({
        'draw': idx,
        'b_mag': float(b),
        'sandwich_residual': sandwich_identity_residual(p, b),
        'g_residual': float(g_res),
        'u_map_residual': float(u_res),
        'e_skew_residual': float(skew_res),
        'e_diagonal_residual': float(diag_res),
      })
  return rows

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-b', '--b_mag', type=float, default=1.0)
  parser.add_argument('-n', '--density', type=float, default=1.0)
  args = parser.parse_args()

  params = unit_params()
  maps = darcy_maps(params, args.density, args.b_mag)
  print('G =\n', maps['g_matrix'])
  print('u_map =\n', maps['u_map'])
  print('e_map =\n', maps['e_map'])
  print('sandwich residual =', sandwich_identity_residual(params, args.b_mag))
