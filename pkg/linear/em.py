import argparse
import math
import numpy as np

from scipy.linalg import expm
from typing import TypedDict
from plasma.params import friction_sum, plasma_frequency_sq, relaxation_cubic, sigma_roots, unit_params
from linear.fluid import K_REF, check_separation
from util.errors import DegenerateSpectrum, ZeroWavenumber
from util.roots import continue_roots, min_separation

CONVENTIONS = ('darcy', 'literal')

class ModeEmState(TypedDict):
  u_i_perp: np.ndarray
  u_e_perp: np.ndarray
  e_perp: np.ndarray
  b: np.ndarray
  k_vec: np.ndarray

class EmSpectrum(TypedDict):
  eigenvalues: np.ndarray
  vandermonde_coeffs: np.ndarray
  k_mag: float

def cross_matrix(a):
  """Matrix of v -> a x v."""
  a = np.asarray(a)
  return np.array([
    [0, -a[2], a[1]],
    [a[2], 0, -a[0]],
    [-a[1], a[0], 0],
  ], dtype=complex)

def em_vector(state):
  return np.concatenate([
    np.asarray(state['u_i_perp'], dtype=complex),
    np.asarray(state['u_e_perp'], dtype=complex),
    np.asarray(state['e_perp'], dtype=complex),
    np.asarray(state['b'], dtype=complex),
  ])

def em_state(vec, k_vec):
  vec = np.asarray(vec, dtype=complex)
  return ModeEmState(
    u_i_perp=vec[0:3].copy(), u_e_perp=vec[3:6].copy(), e_perp=vec[6:9].copy(), b=vec[9:12].copy(),
    k_vec=np.asarray(k_vec, dtype=float),
  )

def _k_mag(k_vec):
  k = float(np.linalg.norm(k_vec))
  if k == 0:
    raise ZeroWavenumber('transverse subsystem needs |k| > 0')
  return k

def transversality_residual(state):
  k_vec = np.asarray(state['k_vec'], dtype=float)
  k = _k_mag(k_vec)
  worst = 0.0
  for name in ('u_i_perp', 'u_e_perp', 'e_perp', 'b'):
    v = np.asarray(state[name], dtype=complex)
    size = np.linalg.norm(v)
    if size > 0:
      worst = max(worst, abs(k_vec @ v) / (k * size))
  return worst

def em_quartic_coeffs(params, k_mag):
  cubic = relaxation_cubic(params)
  c2_light = params['c_light'] ** 2
  x = k_mag ** 2
  return np.array([
    1.0,
    cubic['c2'],
    cubic['c1'] + c2_light * x,
    cubic['c0'] + c2_light * cubic['c2'] * x,
    params['nu_i'] * params['nu_e'] * c2_light * x,
  ])

def _em_anchors(params):
  sigma = sigma_roots(relaxation_cubic(params))['sigma']
  return lambda k: np.concatenate([[-params['mu2'] * k ** 2], sigma])

def em_eigenvalues_path(params, k_values):
  k_values = np.atleast_1d(np.asarray(k_values, dtype=float))
  if np.any(k_values <= 0):
    raise ZeroWavenumber()
  return continue_roots(lambda k: em_quartic_coeffs(params, k), _em_anchors(params), k_values, K_REF)

def em_eigenvalues(params, k_mag):
  if k_mag <= 0:
    raise ZeroWavenumber()
  eigenvalues = em_eigenvalues_path(params, [k_mag])[0]
  check_separation(eigenvalues, k_mag)
  return eigenvalues

def em_lambda1_expansion(params):
  """(second, fourth) order coefficients of lambda_1 in |k|^2 for the B quartic."""
  cubic = relaxation_cubic(params)
  mu2 = params['mu2']
  c2_light = params['c_light'] ** 2
  fourth = -(cubic['c1'] * mu2 ** 2 - c2_light * cubic['c2'] * mu2) / cubic['c0']
  return -mu2, float(fourth)

def b_initial_derivatives(params, state0):
  """(B, B', B'', B''') at t = 0 from the transverse initial state, shape (4, 3)."""
  k_vec = np.asarray(state0['k_vec'], dtype=float)
  k2 = float(k_vec @ k_vec)
  curl = cross_matrix(1j * k_vec)
  c = params['c_light']
  e = params['e_charge']
  wi, we = plasma_frequency_sq(params)
  b0 = np.asarray(state0['b'], dtype=complex)
  e0 = np.asarray(state0['e_perp'], dtype=complex)
  ui0 = np.asarray(state0['u_i_perp'], dtype=complex)
  ue0 = np.asarray(state0['u_e_perp'], dtype=complex)

  d1 = -c * curl @ e0
  d2 = -c ** 2 * k2 * b0 + 4 * math.pi * c * e * (curl @ ui0 - curl @ ue0)
  d3 = (
    (c ** 2 * k2 + wi + we) * c * curl @ e0
    - 4 * math.pi * c * e * params['nu_i'] * curl @ ui0
    + 4 * math.pi * c * e * params['nu_e'] * curl @ ue0
  )
  return np.array([b0, d1, d2, d3])

def vandermonde_solve(eigenvalues, rhs):
  eigenvalues = np.asarray(eigenvalues, dtype=complex)
  gap = min_separation(eigenvalues)
  if gap < 1e-8 * (1 + np.max(np.abs(eigenvalues))):
    raise DegenerateSpectrum(f'Vandermonde system singular, eigenvalue gap {gap:.3e}')
  mat = np.vander(eigenvalues, len(eigenvalues), increasing=True).T
  return np.linalg.solve(mat, np.asarray(rhs, dtype=complex))

def em_spectrum(params, state0):
  k = _k_mag(state0['k_vec'])
  eigenvalues = em_eigenvalues(params, k)
  coeffs = vandermonde_solve(eigenvalues, b_initial_derivatives(params, state0))
  return EmSpectrum(eigenvalues=eigenvalues, vandermonde_coeffs=coeffs, k_mag=k)

def b_propagate(params, state0, t):
  """B(t) = sum_j c_j exp(lambda_j t); t may be a scalar or an array of times."""
  spectrum = em_spectrum(params, state0)
  times = np.asarray(t, dtype=float)
  phases = np.exp(np.multiply.outer(times, spectrum['eigenvalues']))
  return phases @ spectrum['vandermonde_coeffs']

def em_matrix(params, k_vec):
  k_vec = np.asarray(k_vec, dtype=float)
  _k_mag(k_vec)
  e = params['e_charge']
  c = params['c_light']
  eye = np.eye(3)
  curl = cross_matrix(1j * k_vec)
  mat = np.zeros((12, 12), dtype=complex)
  mat[0:3, 0:3] = -params['nu_i'] * eye
  mat[0:3, 6:9] = (e / params['m_i']) * eye
  mat[3:6, 3:6] = -params['nu_e'] * eye
  mat[3:6, 6:9] = -(e / params['m_e']) * eye
  mat[6:9, 0:3] = -4 * math.pi * e * eye
  mat[6:9, 3:6] = 4 * math.pi * e * eye
  mat[6:9, 9:12] = c * curl
  mat[9:12, 6:9] = -c * curl
  return mat

def em_propagate(params, state0, t):
  mat = em_matrix(params, state0['k_vec'])
  return em_state(expm(t * mat) @ em_vector(state0), state0['k_vec'])

def transverse_matrix(params, k_mag):
  """Generator on (u_i, u_e, E, ik x B / |k|) for one transverse polarization.

  The same 4x4 block acts on every Cartesian component of the transverse
  fields; at |k| = 0 the last slot holds B itself, which stays constant.
  """
  e = params['e_charge']
  ck = params['c_light'] * k_mag
  return np.array([
    [-params['nu_i'], 0.0, e / params['m_i'], 0.0],
    [0.0, -params['nu_e'], -e / params['m_e'], 0.0],
    [-4 * math.pi * e, 4 * math.pi * e, 0.0, ck],
    [0.0, 0.0, -ck, 0.0],
  ])

def transverse_propagator(params, k_mag, times):
  """exp(t M(|k|)) for each t, shape (len(times), 4, 4)."""
  times = np.atleast_1d(np.asarray(times, dtype=float))
  mat = transverse_matrix(params, k_mag)
  return expm(times[:, None, None] * mat[None, :, :])

def profile_coefficients(params, convention='darcy'):
  """Multipliers of ik x B_bar giving (u_i_bar, u_e_bar, E_bar)."""
  if convention not in CONVENTIONS:
    raise ValueError(f'convention must be one of {CONVENTIONS}, got {convention!r}')
  c = params['c_light']
  e = params['e_charge']
  s = friction_sum(params)
  mi_nu = params['m_i'] * params['nu_i']
  me_nu = params['m_e'] * params['nu_e']
  u_i = c / (4 * math.pi * e) * me_nu / s
  if convention == 'darcy':
    u_e = -c / (4 * math.pi * e) * mi_nu / s
  else:
    u_e = -c / (4 * math.pi * e) * me_nu / s
  e_bar = c / (4 * math.pi * e ** 2) * mi_nu * me_nu / s
  return u_i, u_e, e_bar

def em_profile(params, b0, k_vec, t, convention='darcy'):
  k_vec = np.asarray(k_vec, dtype=float)
  b_bar = np.exp(-params['mu2'] * float(k_vec @ k_vec) * t) * np.asarray(b0, dtype=complex)
  curl_b = cross_matrix(1j * k_vec) @ b_bar
  u_i, u_e, e_bar = profile_coefficients(params, convention)
  return u_i * curl_b, u_e * curl_b, e_bar * curl_b, b_bar

def profile_discrepancy(params):
  """Compare the electron profile coefficient under both conventions.

  Both conventions agree on the ion velocity and on E_bar; the electron
  velocity coefficients agree only when m_i nu_i = m_e nu_e.
  """
  _, darcy_e, _ = profile_coefficients(params, 'darcy')
  _, literal_e, _ = profile_coefficients(params, 'literal')
  e = params['e_charge']
  me_nu = params['m_e'] * params['nu_e']
  _, _, e_bar = profile_coefficients(params, 'darcy')
  return {
    'u_e_darcy': darcy_e,
    'u_e_literal': literal_e,
    'relative_gap': abs(darcy_e - literal_e) / abs(darcy_e),
    # electron momentum balance e E_bar + m_e nu_e u_e_bar under each reading
    'balance_darcy': abs(e * e_bar + me_nu * darcy_e),
    'balance_literal': abs(e * e_bar + me_nu * literal_e),
  }

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-k', '--k_mag', type=float, default=0.1)
  args = parser.parse_args()

  params = unit_params()
  for lam in em_eigenvalues(params, args.k_mag):
    print(f'lambda = {lam.real:.17g} {lam.imag:+.17g}i')
  second, fourth = em_lambda1_expansion(params)
  print(f'lambda_1 = {second:.17g} k^2 + {fourth:.17g} k^4 + ...')
  print(profile_discrepancy(params))
