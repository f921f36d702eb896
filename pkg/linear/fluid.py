import argparse
import math
import numpy as np

from scipy.linalg import matrix_balance
from typing import TypedDict
from plasma.params import friction_sum, mass_weights, plasma_frequency_sq, relaxation_cubic, sigma_roots, unit_params
from plasma.darcy import parallel_electric_coefficient
from util.errors import DegenerateSpectrum, ZeroWavenumber
from util.roots import continue_roots, min_separation, polish_roots, polynomial_roots

K_REF = 1e-6
DEGENERACY_TOLERANCE = 1e-8
RADIUS_SCAN = (1e-4, 1e3, 600)

class ModeFluidState(TypedDict):
  rho_i: complex
  rho_e: complex
  s_i: complex
  s_e: complex
  k_mag: float

class FluidSpectrum(TypedDict):
  eigenvalues: np.ndarray
  projections: np.ndarray
  k_mag: float

class Lambda1Expansion(TypedDict):
  second_order: float
  fourth_ratio: float
  fourth_order: float

def fluid_vector(state):
  return np.array([state['rho_i'], state['rho_e'], state['s_i'], state['s_e']], dtype=complex)

def fluid_state(vec, k_mag):
  vec = np.asarray(vec, dtype=complex)
  return ModeFluidState(
    rho_i=complex(vec[0]), rho_e=complex(vec[1]), s_i=complex(vec[2]), s_e=complex(vec[3]),
    k_mag=float(k_mag),
  )

def _require_positive(k_mag):
  if k_mag <= 0:
    raise ZeroWavenumber(f'longitudinal subsystem needs |k| > 0, got {k_mag}')

def fluid_matrix(params, k_mag):
  _require_positive(k_mag)
  wi, we = plasma_frequency_sq(params)
  ik = 1j * k_mag
  coupling = 1j / k_mag
  mat = np.zeros((4, 4), dtype=complex)
  mat[0, 2] = -ik
  mat[1, 3] = -ik
  mat[2, 0] = -(params['T_i'] / params['m_i']) * ik - wi * coupling
  mat[2, 1] = wi * coupling
  mat[2, 2] = -params['nu_i']
  mat[3, 0] = we * coupling
  mat[3, 1] = -(params['T_e'] / params['m_e']) * ik - we * coupling
  mat[3, 3] = -params['nu_e']
  return mat

def quartic_terms(params):
  """Coefficients of the k^2-dependence of the longitudinal quartic."""
  m_i, m_e, T_i, T_e = params['m_i'], params['m_e'], params['T_i'], params['T_e']
  e2 = params['e_charge'] ** 2
  return {
    'b2': T_i / m_i + T_e / m_e,
    'b1': T_i * params['nu_e'] / m_i + T_e * params['nu_i'] / m_e,
    'b0': 4 * math.pi * e2 * (T_i + T_e) / (m_i * m_e),
    'd0': T_i * T_e / (m_i * m_e),
  }

def fluid_char_coeffs(params, k_mag):
  """Quartic det(lambda I - A) with highest degree first."""
  _require_positive(k_mag)
  return _quartic_at(params)(k_mag)

def _quartic_at(params):
  cubic = relaxation_cubic(params)
  terms = quartic_terms(params)

  def coeffs_at(k):
    x = k ** 2
    return np.array([
      1.0, cubic['c2'], cubic['c1'] + terms['b2'] * x, cubic['c0'] + terms['b1'] * x,
      terms['b0'] * x + terms['d0'] * x ** 2,
    ])
  return coeffs_at

def _fluid_anchors(params):
  sigma = sigma_roots(relaxation_cubic(params))['sigma']
  return lambda k: np.concatenate([[-params['mu1'] * k ** 2], sigma])

def check_separation(eigenvalues, k_mag):
  gap = min_separation(eigenvalues)
  if gap < DEGENERACY_TOLERANCE * (1 + np.max(np.abs(eigenvalues))):
    raise DegenerateSpectrum(f'eigenvalues coincide to {gap:.3e} at |k| = {k_mag:.6g}')

def fluid_eigenvalues_path(params, k_values):
  """Branch-labeled eigenvalues over many wavenumbers, rows follow k_values."""
  k_values = np.atleast_1d(np.asarray(k_values, dtype=float))
  if np.any(k_values <= 0):
    raise ZeroWavenumber()
  return continue_roots(_quartic_at(params), _fluid_anchors(params), k_values, K_REF)

def fluid_eigenvalues(params, k_mag):
  """The four roots of the quartic, lambda_1 first.

  lambda_1 is the branch that tends to 0 with k; the others tend to the roots of
  the relaxation cubic in the order sigma_roots returns them.
  """
  _require_positive(k_mag)
  eigenvalues = fluid_eigenvalues_path(params, [k_mag])[0]
  check_separation(eigenvalues, k_mag)
  return eigenvalues

def fluid_roots(params, k_mag):
  """Unlabeled, polished roots of the quartic."""
  coeffs = fluid_char_coeffs(params, k_mag)
  return polish_roots(coeffs, polynomial_roots(coeffs))

def lambda1_fourth_ratio(params):
  m_i, m_e, T_i, T_e = params['m_i'], params['m_e'], params['T_i'], params['T_e']
  nu_i, nu_e = params['nu_i'], params['nu_e']
  four_pi_e2 = 4 * math.pi * params['e_charge'] ** 2
  s = friction_sum(params)
  h = s / (T_i + T_e)
  ratio = -(
    m_i * nu_i * m_e * nu_e + four_pi_e2 * (m_i + m_e)
    - (T_i * m_e * nu_e + T_e * m_i * nu_i) * h
    + T_i * T_e * h ** 2
  ) / (four_pi_e2 * s)
  mu1 = params['mu1']
  return Lambda1Expansion(second_order=-mu1, fourth_ratio=float(ratio), fourth_order=float(ratio * mu1 ** 2))

def lambda1_fourth_from_quartic(params):
  """Fourth-order coefficient of lambda_1 from the quartic coefficients."""
  cubic = relaxation_cubic(params)
  terms = quartic_terms(params)
  mu1 = params['mu1']
  return -(cubic['c1'] * mu1 ** 2 - terms['b1'] * mu1 + terms['d0']) / cubic['c0']

def spectral_projections(matrix, eigenvalues):
  """Eigenprojections P_j = prod_{l != j} (A - lambda_l I) / (lambda_j - lambda_l).

  The products are formed on the balanced matrix T^-1 A T and mapped back, so
  entries of very different size (small or large |k|) do not cancel.
  """
  eigenvalues = np.asarray(eigenvalues, dtype=complex)
  n = len(eigenvalues)
  gap = min_separation(eigenvalues)
  if gap < DEGENERACY_TOLERANCE * (1 + np.max(np.abs(eigenvalues))):
    raise DegenerateSpectrum(f'eigenvalues coincide to {gap:.3e}')

  balanced, (scale, _) = matrix_balance(matrix, permute=False, separate=True)
  eye = np.eye(n, dtype=complex)
  projections = np.zeros((n, n, n), dtype=complex)
  for j in range(n):
    p = eye.copy()
    for l in range(n):
      if l == j:
        continue
      p = p @ (balanced - eigenvalues[l] * eye) / (eigenvalues[j] - eigenvalues[l])
    projections[j] = scale[:, None] * p / scale[None, :]
  return projections

def fluid_spectrum(params, k_mag):
  eigenvalues = fluid_eigenvalues(params, k_mag)
  projections = spectral_projections(fluid_matrix(params, k_mag), eigenvalues)
  return FluidSpectrum(eigenvalues=eigenvalues, projections=projections, k_mag=float(k_mag))

def propagator_from_spectrum(eigenvalues, projections, times):
  """sum_j exp(lambda_j t) P_j for each t, shape (len(times), n, n)."""
  times = np.atleast_1d(np.asarray(times, dtype=float))
  phases = np.exp(np.outer(times, eigenvalues))
  return np.einsum('tj,jab->tab', phases, projections)

def fluid_propagator(params, k_mag, times):
  eigenvalues = fluid_roots(params, k_mag)
  projections = spectral_projections(fluid_matrix(params, k_mag), eigenvalues)
  return propagator_from_spectrum(eigenvalues, projections, times)

def fluid_propagate(params, state0, t):
  vec = fluid_vector(state0)
  prop = fluid_propagator(params, state0['k_mag'], [t])[0]
  return fluid_state(prop @ vec, state0['k_mag'])

def e_parallel(params, rho_i, rho_e, k_mag):
  """Longitudinal E amplitude along k/|k| fixed by Gauss's law."""
  _require_positive(k_mag)
  return -4j * math.pi * params['e_charge'] * (np.asarray(rho_i) - np.asarray(rho_e)) / k_mag

def gauss_residual(params, state, e_par):
  """|ik.E - 4 pi e (rho_i - rho_e)| in the scalar longitudinal convention."""
  k = state['k_mag']
  return abs(1j * k * e_par - 4 * math.pi * params['e_charge'] * (state['rho_i'] - state['rho_e']))

def fluid_profile(params, state0, t):
  """Diffusion-wave profile (rho_bar, u_bar, E_bar) of the longitudinal part."""
  k = state0['k_mag']
  w_i, w_e = mass_weights(params)
  mu1 = params['mu1']
  rho_bar = np.exp(-mu1 * k ** 2 * t) * (w_i * state0['rho_i'] + w_e * state0['rho_e'])
  u_bar = -mu1 * 1j * k * rho_bar
  e_bar = parallel_electric_coefficient(params) * 1j * k * rho_bar
  return complex(rho_bar), complex(u_bar), complex(e_bar)

def low_frequency_radius(params, subsystem='fluid', scan=RADIUS_SCAN):
  """Largest |k| up to which lambda_1 stays separated from the other branches.

  The separation threshold is half the smallest |sigma_j|; the scan is geometric
  from scan[0] to scan[1] and the first failure ends the low-frequency region.
  """
  if subsystem == 'fluid':
    k_values = np.geomspace(scan[0], scan[1], scan[2])
    eigenvalues = fluid_eigenvalues_path(params, k_values)
  elif subsystem == 'em':
    from linear.em import em_eigenvalues_path
    k_values = np.geomspace(scan[0], scan[1], scan[2])
    eigenvalues = em_eigenvalues_path(params, k_values)
  else:
    raise ValueError(f'subsystem must be fluid or em, got {subsystem!r}')

  sigma = sigma_roots(relaxation_cubic(params))['sigma']
  threshold = 0.5 * np.min(np.abs(sigma))
  gaps = np.min(np.abs(eigenvalues[:, 1:] - eigenvalues[:, :1]), axis=1)
  failed = np.where(gaps <= threshold)[0]
  if len(failed) == 0:
    return float(k_values[-1])
  if failed[0] == 0:
    return float(k_values[0])
  return float(k_values[failed[0] - 1])

def richardson_fourth_order(lambda_at, second_order, k0=1e-2, levels=7):
  """Extrapolate (lambda(k) - second_order k^2) / k^4 to k = 0.

  Samples k = k0 2^-j for j < levels; the error in h = k^2 shrinks by 4 per level.
  """
  ks = k0 * 0.5 ** np.arange(levels)
  table = [np.array([(lambda_at(k) - second_order * k ** 2).real / k ** 4 for k in ks])]
  for level in range(1, levels):
    prev = table[-1]
    factor = 4.0 ** level
    table.append((factor * prev[1:] - prev[:-1]) / (factor - 1))
  return float(table[-1][-1])

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-k', '--k_mag', type=float, default=0.1)
  args = parser.parse_args()

  params = unit_params()
  for lam in fluid_eigenvalues(params, args.k_mag):
    print(f'lambda = {lam.real:.17g} {lam.imag:+.17g}i')
  expansion = lambda1_fourth_ratio(params)
  print(f'lambda_1 fourth-order ratio = {expansion["fourth_ratio"]:.17g}')
  print(f'r0 = {low_frequency_radius(params):.6g}')
