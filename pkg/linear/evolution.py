import argparse
import concurrent.futures
import math
import numpy as np

from scipy.linalg import expm
from tqdm import tqdm
from typing import TypedDict
from plasma.darcy import parallel_electric_coefficient
from plasma.params import mass_weights, unit_params
from linear.em import em_propagate, em_state, profile_coefficients, transverse_propagator
from linear.fluid import e_parallel, fluid_propagate, fluid_propagator, fluid_state
from linear.modes import (
  B_FIELD, E_FIELD, N_COMPONENTS, RHO_E, RHO_I, U_E, U_I, full_matrix, ModeFullState, unpack_state,
)
from util.errors import ConstraintViolation, DegenerateSpectrum, ZeroWavenumber

DEFAULT_THREADS = 4
NEUTRALITY_TOLERANCE = 1e-12

SELECTORS = {
  'P1i': [RHO_I],
  'P1e': [RHO_E],
  'P2i': list(range(14))[U_I],
  'P2e': list(range(14))[U_E],
  'P3': list(range(14))[E_FIELD],
  'P4': list(range(14))[B_FIELD],
}

class GridField(TypedDict):
  modes: np.ndarray
  box_length: float
  grid_size: int

def helmholtz_split(state):
  """Longitudinal (fluid state, E along k_hat) and transverse parts of a mode."""
  k_vec = np.asarray(state['k_vec'], dtype=float)
  k = float(np.linalg.norm(k_vec))
  if k == 0:
    raise ZeroWavenumber('Helmholtz split needs |k| > 0')
  k_hat = k_vec / k
  u_i = np.asarray(state['u_i'], dtype=complex)
  u_e = np.asarray(state['u_e'], dtype=complex)
  e_field = np.asarray(state['e_field'], dtype=complex)
  b_field = np.asarray(state['b_field'], dtype=complex)

  s_i, s_e, e_par = k_hat @ u_i, k_hat @ u_e, k_hat @ e_field
  fluid = fluid_state([state['rho_i'], state['rho_e'], s_i, s_e], k)
  em = em_state(np.concatenate([
    u_i - s_i * k_hat, u_e - s_e * k_hat, e_field - e_par * k_hat, b_field,
  ]), k_vec)
  return fluid, complex(e_par), em

def recombine(fluid, e_par, em):
  k_vec = np.asarray(em['k_vec'], dtype=float)
  k_hat = k_vec / np.linalg.norm(k_vec)
  return ModeFullState(
    rho_i=fluid['rho_i'], rho_e=fluid['rho_e'],
    u_i=fluid['s_i'] * k_hat + em['u_i_perp'],
    u_e=fluid['s_e'] * k_hat + em['u_e_perp'],
    e_field=e_par * k_hat + em['e_perp'],
    b_field=np.asarray(em['b'], dtype=complex),
    k_vec=k_vec,
  )

def zero_mode_matrix(params):
  """Generator of (u_i, u_e, E) at k = 0."""
  mat = full_matrix(params, np.zeros(3))
  return mat[2:11, 2:11]

def evolve_zero_mode(params, state0, t):
  if abs(state0['rho_i'] - state0['rho_e']) > NEUTRALITY_TOLERANCE * (1 + abs(state0['rho_i'])):
    raise ConstraintViolation('zero mode must carry rho_i = rho_e')
  vec = np.concatenate([state0['u_i'], state0['u_e'], state0['e_field']]).astype(complex)
  out = expm(t * zero_mode_matrix(params)) @ vec
  return ModeFullState(
    rho_i=complex(state0['rho_i']), rho_e=complex(state0['rho_e']),
    u_i=out[0:3], u_e=out[3:6], e_field=out[6:9],
    b_field=np.asarray(state0['b_field'], dtype=complex).copy(),
    k_vec=np.zeros(3),
  )

def mode_propagate(params, state0, t):
  """Exact linear evolution of one Fourier mode.

  The longitudinal part goes through the fluid propagator, the transverse part
  through the electromagnetic one. E along k is rebuilt from the evolved
  densities plus the Gauss residual of state0, which the flow conserves.
  """
  k = float(np.linalg.norm(state0['k_vec']))
  if k == 0:
    return evolve_zero_mode(params, state0, t)
  fluid0, e_par0, em0 = helmholtz_split(state0)
  residual = e_par0 - e_parallel(params, fluid0['rho_i'], fluid0['rho_e'], k)
  fluid = fluid_propagate(params, fluid0, t)
  em = em_propagate(params, em0, t)
  e_par = e_parallel(params, fluid['rho_i'], fluid['rho_e'], k) + residual
  return recombine(fluid, complex(e_par), em)

def wavevectors(grid_size, box_length):
  """Wavevectors (3, N, N, N) and integer squared lengths (N, N, N)."""
  n = np.fft.fftfreq(grid_size, d=1.0 / grid_size).round().astype(int)
  nx, ny, nz = np.meshgrid(n, n, n, indexing='ij')
  scale = 2 * math.pi / box_length
  k = scale * np.stack([nx, ny, nz]).astype(float)
  return k, nx ** 2 + ny ** 2 + nz ** 2

def nyquist_mask(grid_size):
  """True where no index sits on the Nyquist plane of an even grid."""
  keep = np.ones(grid_size, dtype=bool)
  if grid_size % 2 == 0:
    keep[grid_size // 2] = False
  return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

def empty_field(grid_size, box_length):
  return GridField(
    modes=np.zeros((N_COMPONENTS, grid_size, grid_size, grid_size), dtype=complex),
    box_length=float(box_length),
    grid_size=int(grid_size),
  )

def mirrored(a):
  """a evaluated at -k on the FFT lattice, over the last three axes."""
  out = np.flip(a, axis=(-3, -2, -1))
  return np.roll(out, 1, axis=(-3, -2, -1))

def reality_residual(field):
  modes = field['modes']
  scale = max(1.0, float(np.max(np.abs(modes))))
  return float(np.max(np.abs(mirrored(modes) - np.conj(modes)))) / scale

def parseval_weight(field):
  return field['box_length'] ** 3 / field['grid_size'] ** 6

def l2_norm(field, selector=None):
  """L2 norm of a grid field or of a radial field (dispatch on the input)."""
  if 'quadrature' in field:
    from linear.radial import radial_norm
    return radial_norm(field, selector)
  modes = field['modes']
  if selector is not None:
    modes = modes[SELECTORS[selector]]
  return float(np.sqrt(parseval_weight(field) * np.sum(np.abs(modes) ** 2)))

def gradient_norm(field, selector=None):
  k, _ = wavevectors(field['grid_size'], field['box_length'])
  k2 = np.sum(k ** 2, axis=0)
  modes = field['modes'] if selector is None else field['modes'][SELECTORS[selector]]
  return float(np.sqrt(parseval_weight(field) * np.sum(k2 * np.abs(modes) ** 2)))

def grid_gauss_residuals(params, field):
  """L2 norms of div E - 4 pi e (rho_i - rho_e) and div B."""
  k, _ = wavevectors(field['grid_size'], field['box_length'])
  modes = field['modes']
  div_e = 1j * np.sum(k * modes[E_FIELD], axis=0)
  charge = 4 * math.pi * params['e_charge'] * (modes[RHO_I] - modes[RHO_E])
  div_b = 1j * np.sum(k * modes[B_FIELD], axis=0)
  w = parseval_weight(field)
  return (
    float(np.sqrt(w * np.sum(np.abs(div_e - charge) ** 2))),
    float(np.sqrt(w * np.sum(np.abs(div_b) ** 2))),
  )

def projection_extract(field, selector):
  if selector not in SELECTORS:
    raise ValueError(f'selector must be one of {sorted(SELECTORS)}, got {selector!r}')
  return field['modes'][SELECTORS[selector]].copy()

def _shell_propagators(params, kappa, t):
  try:
    fluid = fluid_propagator(params, kappa, [t])[0]
  except DegenerateSpectrum:
    return None, transverse_propagator(params, kappa, [t])[0]
  return fluid, transverse_propagator(params, kappa, [t])[0]

def apply_shell(params, modes, k_vecs, fluid_prop, transverse_prop):
  """Evolve the modes of one |k| shell; modes is (14, M), k_vecs is (3, M)."""
  kappa = np.linalg.norm(k_vecs[:, 0])
  k_hat = k_vecs / kappa
  u_i, u_e = modes[U_I], modes[U_E]
  e_field, b_field = modes[E_FIELD], modes[B_FIELD]
  s_i = np.sum(k_hat * u_i, axis=0)
  s_e = np.sum(k_hat * u_e, axis=0)
  e_par = np.sum(k_hat * e_field, axis=0)
  b_par = np.sum(k_hat * b_field, axis=0)
  residual = e_par - e_parallel(params, modes[RHO_I], modes[RHO_E], kappa)

  long_in = np.stack([modes[RHO_I], modes[RHO_E], s_i, s_e])
  long_out = fluid_prop @ long_in

  # transverse slots per Cartesian component: (u_i, u_e, E, ik x B / |k|)
  curl_b = 1j * np.cross(k_vecs, b_field, axis=0) / kappa
  trans_in = np.stack([u_i - s_i * k_hat, u_e - s_e * k_hat, e_field - e_par * k_hat, curl_b])
  trans_out = np.einsum('ab,bcm->acm', transverse_prop, trans_in)

  out = np.empty_like(modes)
  out[RHO_I] = long_out[0]
  out[RHO_E] = long_out[1]
  out[U_I] = long_out[2] * k_hat + trans_out[0]
  out[U_E] = long_out[3] * k_hat + trans_out[1]
  e_par_out = e_parallel(params, long_out[0], long_out[1], kappa) + residual
  out[E_FIELD] = e_par_out * k_hat + trans_out[2]
  out[B_FIELD] = 1j * np.cross(k_vecs, trans_out[3], axis=0) / kappa + b_par * k_hat
  return out

def shell_index(grid_size, box_length):
  k, n2 = wavevectors(grid_size, box_length)
  shells, inverse = np.unique(n2.ravel(), return_inverse=True)
  return k, shells, inverse.reshape(n2.shape)

def linear_evolve(params, field0, t, num_threads=DEFAULT_THREADS, verbose=False):
  """Exact linear evolution of a grid field, one |k| shell at a time."""
  n = field0['grid_size']
  L = field0['box_length']
  k, shells, inverse = shell_index(n, L)
  modes0 = field0['modes']
  out = empty_field(n, L)

  zero = (0, 0, 0)
  zero_state = unpack_state(modes0[(slice(None),) + zero], np.zeros(3))
  zero_out = evolve_zero_mode(params, zero_state, t)
  for name, idx in (('rho_i', RHO_I), ('rho_e', RHO_E)):
    out['modes'][(idx,) + zero] = zero_out[name]
  out['modes'][(U_I,) + zero] = zero_out['u_i']
  out['modes'][(U_E,) + zero] = zero_out['u_e']
  out['modes'][(E_FIELD,) + zero] = zero_out['e_field']
  out['modes'][(B_FIELD,) + zero] = zero_out['b_field']

  kappas = 2 * math.pi / L * np.sqrt(shells.astype(float))
  nonzero = [idx for idx in range(len(shells)) if shells[idx] > 0]
  props = {}
  with concurrent.futures.ThreadPoolExecutor(max_workers=num_threads) as executor:
    futures = {executor.submit(_shell_propagators, params, kappas[idx], t): idx for idx in nonzero}
    for future in tqdm(concurrent.futures.as_completed(futures), total=len(futures), disable=not verbose):
      props[futures[future]] = future.result()

  failed = [idx for idx in nonzero if props[idx][0] is None]
  if failed:
    where = ', '.join(f'|n|^2={shells[idx]} (|k|={kappas[idx]:.6g})' for idx in failed[:5])
    raise DegenerateSpectrum(f'degenerate longitudinal spectrum on {len(failed)} shell(s): {where}')

  flat = modes0.reshape(N_COMPONENTS, -1)
  flat_k = k.reshape(3, -1)
  flat_out = out['modes'].reshape(N_COMPONENTS, -1)
  members = inverse.ravel()
  order = np.argsort(members, kind='stable')
  bounds = np.searchsorted(members[order], np.arange(len(shells) + 1))
  for idx in nonzero:
    sel = order[bounds[idx]:bounds[idx + 1]]
    fluid_prop, transverse_prop = props[idx]
    flat_out[:, sel] = apply_shell(params, flat[:, sel], flat_k[:, sel], fluid_prop, transverse_prop)
  return out

def diffusion_profiles(params, field0, t, convention='darcy'):
  """Heat-kernel profiles (n_bar, u_bar, E_bar, B_bar) of a grid field."""
  n = field0['grid_size']
  k, _ = wavevectors(n, field0['box_length'])
  k2 = np.sum(k ** 2, axis=0)
  modes0 = field0['modes']
  w_i, w_e = mass_weights(params)
  mu1, mu2 = params['mu1'], params['mu2']

  n_bar = np.exp(-mu1 * k2 * t) * (w_i * modes0[RHO_I] + w_e * modes0[RHO_E])
  b_bar = np.exp(-mu2 * k2 * t) * modes0[B_FIELD]
  grad_n = 1j * k * n_bar
  curl_b = 1j * np.cross(k, b_bar, axis=0)
  u_i_c, u_e_c, e_c = profile_coefficients(params, convention)
  e_par_c = parallel_electric_coefficient(params)

  out = empty_field(n, field0['box_length'])
  out['modes'][RHO_I] = n_bar
  out['modes'][RHO_E] = n_bar
  out['modes'][U_I] = -mu1 * grad_n + u_i_c * curl_b
  out['modes'][U_E] = -mu1 * grad_n + u_e_c * curl_b
  out['modes'][E_FIELD] = e_par_c * grad_n + e_c * curl_b
  out['modes'][B_FIELD] = b_bar
  return out

def field_difference(a, b):
  out = empty_field(a['grid_size'], a['box_length'])
  out['modes'] = a['modes'] - b['modes']
  return out

def _smooth_noise(rng, grid_size, box_length, width):
  """FFT coefficients of a Gaussian-filtered real random field with max |value| = 1."""
  k, _ = wavevectors(grid_size, box_length)
  k2 = np.sum(k ** 2, axis=0)
  coeffs = np.fft.fftn(rng.standard_normal((grid_size,) * 3))
  coeffs = coeffs * np.exp(-0.5 * width ** 2 * k2) * nyquist_mask(grid_size)
  return coeffs / np.max(np.abs(np.fft.ifftn(coeffs).real))

def enforce_constraints(params, field):
  """Project B onto divergence-free fields, set E along k from Gauss's law and
  clear the zero mode of the densities, E and B."""
  k, _ = wavevectors(field['grid_size'], field['box_length'])
  k2 = np.sum(k ** 2, axis=0)
  safe = np.where(k2 > 0, k2, 1.0)
  modes = field['modes']
  b = modes[B_FIELD]
  modes[B_FIELD] = b - k * np.sum(k * b, axis=0) / safe
  e_field = modes[E_FIELD]
  e_perp = e_field - k * np.sum(k * e_field, axis=0) / safe
  charge = 4 * math.pi * params['e_charge'] * (modes[RHO_I] - modes[RHO_E])
  modes[E_FIELD] = e_perp - 1j * k * charge / safe
  for idx in (RHO_I, RHO_E) + tuple(range(8, 14)):
    modes[idx][0, 0, 0] = 0.0
  return field

def random_grid_field(params, grid_size, box_length, amplitude, rng, width=1.0):
  """Smooth real random perturbation satisfying both Gauss constraints."""
  field = empty_field(grid_size, box_length)
  for idx in range(N_COMPONENTS):
    field['modes'][idx] = amplitude * _smooth_noise(rng, grid_size, box_length, width)
  return enforce_constraints(params, field)

def gaussian_grid_field(grid_size, box_length, width=1.0, component=RHO_I):
  """Isotropic Gaussian exp(-|x|^2 / (2 width^2)) in one component, centred in the box."""
  x = (np.arange(grid_size) - grid_size // 2) * box_length / grid_size
  xx, yy, zz = np.meshgrid(x, x, x, indexing='ij')
  values = np.exp(-(xx ** 2 + yy ** 2 + zz ** 2) / (2 * width ** 2))
  field = empty_field(grid_size, box_length)
  field['modes'][component] = np.fft.fftn(values)
  return field

def norm_series(params, field0, times, selectors, profiles=False, convention='darcy', verbose=False):
  """Norms of the evolved grid field (or of its gap to the profiles) over time."""
  rows = []
  for t in tqdm(times, disable=not verbose):
    field = linear_evolve(params, field0, t)
    if profiles:
      field = field_difference(field, diffusion_profiles(params, field0, t, convention))
    rows.append([l2_norm(field, s) for s in selectors])
  return np.array(rows)

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-n', '--grid_size', type=int, default=16)
  parser.add_argument('-L', '--box_length', type=float, default=20.0)
  parser.add_argument('-t', '--time', type=float, default=1.0)
  parser.add_argument('-s', '--seed', type=int, default=0)
  parser.add_argument('-v', '--verbose', action='store_true')
  args = parser.parse_args()

  params = unit_params()
  field0 = random_grid_field(params, args.grid_size, args.box_length, 1e-2, np.random.default_rng(args.seed))
  field = linear_evolve(params, field0, args.time, verbose=args.verbose)
  print(f'|U(0)| = {l2_norm(field0):.6e}')
  print(f'|U(t)| = {l2_norm(field):.6e}')
  print('Gauss residuals:', grid_gauss_residuals(params, field))
  print(f'reality residual: {reality_residual(field):.3e}')
