"""Second-order exponential time differencing on the Fourier grid.

One step of size h from U with nonlinear term N:

  a   = exp(hL) U + h phi1(hL) N(U)
  U+  = a + h phi2(hL) (N(a) - N(U))

exp(hL), phi1 and phi2 are exact per |k| shell: the longitudinal block acts on
(rho_i, rho_e, s_i, s_e, E along k) and the transverse block on
(u_i, u_e, E, ik x B / |k|) per Cartesian component. All three come from one
matrix exponential of an augmented generator.
"""
import concurrent.futures
import math
import numpy as np

from scipy.linalg import expm
from tqdm import tqdm
from typing import TypedDict
from linear.em import transverse_matrix
from linear.evolution import DEFAULT_THREADS, empty_field, shell_index, wavevectors
from linear.modes import B_FIELD, E_FIELD, N_COMPONENTS, RHO_E, RHO_I, U_E, U_I
from nonlinear.fields import dealias_mask
from nonlinear.sources import source_modes
from util.errors import StepTooLarge

CFL_FACTOR = 0.5

class StepOperators(TypedDict):
  dt: float
  grid_size: int
  box_length: float
  k: np.ndarray
  inverse: np.ndarray
  longitudinal: np.ndarray
  transverse: np.ndarray
  mask: np.ndarray

def longitudinal_matrix(params, k_mag):
  """Generator on (rho_i, rho_e, s_i, s_e, E along k), E not tied to Gauss's law."""
  e = params['e_charge']
  ik = 1j * k_mag
  return np.array([
    [0, 0, -ik, 0, 0],
    [0, 0, 0, -ik, 0],
    [-params['T_i'] / params['m_i'] * ik, 0, -params['nu_i'], 0, e / params['m_i']],
    [0, -params['T_e'] / params['m_e'] * ik, 0, -params['nu_e'], -e / params['m_e']],
    [0, 0, -4 * math.pi * e, 4 * math.pi * e, 0],
  ], dtype=complex)

def phi_blocks(generator, dt):
  """(exp(hA), h phi1(hA), h phi2(hA)) from exp([[hA, I, 0], [0, 0, I], [0, 0, 0]])."""
  n = generator.shape[0]
  aug = np.zeros((3 * n, 3 * n), dtype=complex)
  aug[:n, :n] = dt * generator
  aug[:n, n:2 * n] = np.eye(n)
  aug[n:2 * n, 2 * n:] = np.eye(n)
  big = expm(aug)
  return np.stack([big[:n, :n], dt * big[:n, n:2 * n], dt * big[:n, 2 * n:]])

def cfl_limit(params, grid_size, box_length):
  k_max = 2 * math.pi / box_length * (grid_size // 2) * math.sqrt(3)
  return CFL_FACTOR / max(params['nu_i'], params['nu_e'], params['c_light'] * k_max)

def _shell_blocks(params, kappa, dt):
  trans = phi_blocks(transverse_matrix(params, kappa), dt)
  if kappa == 0:
    return np.zeros((3, 5, 5), dtype=complex), trans
  return phi_blocks(longitudinal_matrix(params, kappa), dt), trans

def prepare_step(params, grid_size, box_length, dt, num_threads=DEFAULT_THREADS, verbose=False):
  limit = cfl_limit(params, grid_size, box_length)
  if dt <= 0 or dt > limit:
    raise StepTooLarge(f'dt = {dt:g} must lie in (0, {limit:.6g}]')
  k, shells, inverse = shell_index(grid_size, box_length)
  kappas = 2 * math.pi / box_length * np.sqrt(shells.astype(float))
  longitudinal = np.zeros((len(shells), 3, 5, 5), dtype=complex)
  transverse = np.zeros((len(shells), 3, 4, 4), dtype=complex)
  with concurrent.futures.ThreadPoolExecutor(max_workers=num_threads) as executor:
    futures = {executor.submit(_shell_blocks, params, kappas[idx], dt): idx for idx in range(len(shells))}
    for future in tqdm(concurrent.futures.as_completed(futures), total=len(futures), disable=not verbose):
      idx = futures[future]
      longitudinal[idx], transverse[idx] = future.result()
  return StepOperators(
    dt=float(dt), grid_size=int(grid_size), box_length=float(box_length), k=k, inverse=inverse,
    longitudinal=longitudinal, transverse=transverse, mask=dealias_mask(grid_size),
  )

def apply_block(ops, which, modes):
  """Apply exp(hL) (which=0), h phi1(hL) (1) or h phi2(hL) (2) to (14, N, N, N) coefficients."""
  n = ops['grid_size']
  flat = modes.reshape(N_COMPONENTS, -1)
  k = ops['k'].reshape(3, -1)
  inv = ops['inverse'].ravel()
  k_mag = np.sqrt(np.sum(k ** 2, axis=0))
  safe = np.where(k_mag > 0, k_mag, 1.0)
  k_hat = k / safe
  scalar = (1.0, ops['dt'], 0.5 * ops['dt'])[which]

  u_i, u_e = flat[U_I], flat[U_E]
  e_field, b_field = flat[E_FIELD], flat[B_FIELD]
  s_i = np.sum(k_hat * u_i, axis=0)
  s_e = np.sum(k_hat * u_e, axis=0)
  e_par = np.sum(k_hat * e_field, axis=0)
  b_par = np.sum(k_hat * b_field, axis=0)

  long_in = np.stack([flat[RHO_I], flat[RHO_E], s_i, s_e, e_par])
  long_out = np.einsum('mab,bm->am', ops['longitudinal'][inv, which], long_in)
  curl_b = 1j * np.cross(k, b_field, axis=0) / safe
  trans_in = np.stack([u_i - s_i * k_hat, u_e - s_e * k_hat, e_field - e_par * k_hat, curl_b])
  trans_out = np.einsum('mab,bcm->acm', ops['transverse'][inv, which], trans_in)

  out = np.empty_like(flat)
  out[RHO_I] = long_out[0]
  out[RHO_E] = long_out[1]
  out[U_I] = long_out[2] * k_hat + trans_out[0]
  out[U_E] = long_out[3] * k_hat + trans_out[1]
  out[E_FIELD] = long_out[4] * k_hat + trans_out[2]
  out[B_FIELD] = 1j * np.cross(k, trans_out[3], axis=0) / safe + scalar * b_par * k_hat

  # the k = 0 mode sits at flat index 0: densities are frozen, the rest is componentwise
  zero_block = ops['transverse'][inv[0], which]
  out[RHO_I, 0] = scalar * flat[RHO_I, 0]
  out[RHO_E, 0] = scalar * flat[RHO_E, 0]
  zero_in = np.stack([u_i[:, 0], u_e[:, 0], e_field[:, 0], b_field[:, 0]])
  zero_out = zero_block @ zero_in
  out[U_I, 0], out[U_E, 0], out[E_FIELD, 0], out[B_FIELD, 0] = zero_out
  return out.reshape(N_COMPONENTS, n, n, n)

def _with_modes(ops, modes):
  field = empty_field(ops['grid_size'], ops['box_length'])
  field['modes'] = modes
  return field

def step_mild(params, ops, field, sources=True):
  """One ETD2RK step; with sources=False it is the exact linear propagator."""
  u = field['modes']
  linear = apply_block(ops, 0, u)
  if not sources:
    return _with_modes(ops, linear)
  nu = source_modes(params, field, ops['mask'])
  a = linear + apply_block(ops, 1, nu)
  na = source_modes(params, _with_modes(ops, a), ops['mask'])
  return _with_modes(ops, a + apply_block(ops, 2, na - nu))

def linear_rhs(params, field):
  """L U evaluated mode by mode on a grid field."""
  k, _ = wavevectors(field['grid_size'], field['box_length'])
  modes = field['modes']
  ik = 1j * k
  e = params['e_charge']
  c = params['c_light']
  out = np.zeros_like(modes)
  out[RHO_I] = -np.sum(ik * modes[U_I], axis=0)
  out[RHO_E] = -np.sum(ik * modes[U_E], axis=0)
  out[U_I] = -params['T_i'] / params['m_i'] * ik * modes[RHO_I] - params['nu_i'] * modes[U_I] + e / params['m_i'] * modes[E_FIELD]
  out[U_E] = -params['T_e'] / params['m_e'] * ik * modes[RHO_E] - params['nu_e'] * modes[U_E] - e / params['m_e'] * modes[E_FIELD]
  out[E_FIELD] = -4 * math.pi * e * (modes[U_I] - modes[U_E]) + c * np.cross(ik, modes[B_FIELD], axis=0)
  out[B_FIELD] = -c * np.cross(ik, modes[E_FIELD], axis=0)
  return out

def full_rhs(params, field, mask=None, sources=True):
  rhs = linear_rhs(params, field)
  if sources:
    rhs = rhs + source_modes(params, field, mask)
  return rhs
