"""Frequency-weighted Lyapunov functional of the linearized system.

For one Fourier mode the functional is a Hermitian quadratic form
E(x) = x^H H(k) x on the 14 packed components. Its time derivative along the
linear flow is x^H (H A + A^H H) x, so both the equivalence to the plain
energy and the admissible decay rate are generalized eigenvalue problems,
restricted to the subspace where the Gauss constraints hold.
"""
import argparse
import concurrent.futures
import math
import numpy as np

from scipy.linalg import eigh, null_space
from tqdm import tqdm
from typing import TypedDict
from plasma.params import unit_params
from linear.em import cross_matrix
from linear.evolution import mode_propagate
from linear.modes import (
  B_FIELD, E_FIELD, N_COMPONENTS, RHO_E, RHO_I, U_E, U_I,
  base_weights, constraint_rows, full_matrix, gauss_residuals, pack_state, random_mode, unpack_state,
)
from util.errors import ConstraintViolation, WeightSearchFailed
from util.fitting import largest_admissible

DEFAULT_KAPPA2 = 0.1
KAPPA1_RANGE = (1e-8, 1.0)
MAX_EQUIVALENCE = 10.0
PROBE_K = np.logspace(-2, 2, 13)
GAUSS_TOLERANCE = 1e-9
MONOTONE_TOLERANCE = 1e-8
DEFAULT_THREADS = 4

class LyapunovWeights(TypedDict):
  kappa1: float
  kappa2: float

class DecayReport(TypedDict):
  k_mag: float
  lambda_hat: float
  exact_rate: float
  monotone: bool
  equivalence_ratio: float
  energies: np.ndarray
  derivatives: np.ndarray

def slot_matrix(index, k_vec=None):
  """3 x 14 selection matrix for a vector slot, or ik times a density slot."""
  sel = np.zeros((3, N_COMPONENTS), dtype=complex)
  if isinstance(index, slice):
    sel[:, index] = np.eye(3)
  else:
    sel[:, index] = 1j * np.asarray(k_vec, dtype=float)
  return sel

def real_form(coef, f, g):
  """Matrix of x -> coef Re((F x)^H (G x))."""
  return 0.5 * coef * (f.conj().T @ g + g.conj().T @ f)

def energy_matrix(params, weights, k_vec):
  k_vec = np.asarray(k_vec, dtype=float)
  k2 = float(k_vec @ k_vec)
  kappa1, kappa2 = weights['kappa1'], weights['kappa2']
  h = np.diag(base_weights(params)).astype(complex)
  e = params['e_charge']
  field = slot_matrix(E_FIELD)
  for rho, u, m, q, temp in (
    (RHO_I, U_I, params['m_i'], e, params['T_i']),
    (RHO_E, U_E, params['m_e'], -e, params['T_e']),
  ):
    velocity = slot_matrix(u)
    h += real_form(kappa1 * m / (1 + k2), slot_matrix(rho, k_vec), velocity)
    h += real_form(-kappa1 * k2 * 4 * math.pi * m * q / (temp * (1 + k2) ** 2), field, velocity)
  curl_b = -cross_matrix(1j * k_vec) @ slot_matrix(B_FIELD)
  h += real_form(kappa1 * kappa2 / (1 + k2) ** 2, curl_b, field)
  return h

def mode_energy(params, state, weights):
  x = pack_state(state)
  h = energy_matrix(params, weights, state['k_vec'])
  return float(np.real(np.conj(x) @ h @ x))

def rate_factor(k_mag):
  return k_mag ** 2 / (1 + k_mag ** 2) ** 2

def constrained_rate(params, h, k_vec, norm=None):
  """Lowest eigenvalue of -(H A + A^H H) relative to `norm` (H when None) on Gauss-consistent states.

  Returns -inf when `norm` is not positive on that subspace.
  """
  k_vec = np.asarray(k_vec, dtype=float)
  norm = h if norm is None else norm
  a = full_matrix(params, k_vec)
  z = null_space(constraint_rows(params, k_vec))
  d = z.conj().T @ -(h @ a + a.conj().T @ h) @ z
  nz = z.conj().T @ norm @ z
  nz = 0.5 * (nz + nz.conj().T)
  d = 0.5 * (d + d.conj().T)
  if np.linalg.eigvalsh(nz)[0] <= 0:
    return -math.inf
  return float(eigh(d, nz, eigvals_only=True)[0])

def admissible_rate(params, weights, k_vec):
  """Largest lam with dE/dt <= -lam |k|^2 / (1+|k|^2)^2 E on Gauss-consistent states."""
  k_vec = np.asarray(k_vec, dtype=float)
  k_mag = float(np.linalg.norm(k_vec))
  lowest = constrained_rate(params, energy_matrix(params, weights, k_vec), k_vec)
  if k_mag == 0:
    return math.inf if lowest >= -1e-12 else -math.inf
  return lowest / rate_factor(k_mag)

def equivalence_bounds(params, weights, k_vec):
  """(a, b) with a |x|_w^2 <= E(x) <= b |x|_w^2 on all of C^14."""
  h = energy_matrix(params, weights, k_vec)
  values = eigh(0.5 * (h + h.conj().T), np.diag(base_weights(params)), eigvals_only=True)
  return float(values[0]), float(values[-1])

def equivalence_ratio(params, weights, k_vec):
  a, b = equivalence_bounds(params, weights, k_vec)
  if a <= 0:
    return math.inf
  return max(b, 1.0 / a)

def default_kappa2(params):
  limit = 0.5 * 4 * math.pi * params['e_charge'] ** 2 * (1 / params['T_i'] + 1 / params['T_e']) / params['c_light']
  return min(DEFAULT_KAPPA2, limit)

def weights_pass(params, weights, k_values=PROBE_K):
  for k in k_values:
    k_vec = np.array([k, 0.0, 0.0])
    if equivalence_ratio(params, weights, k_vec) > MAX_EQUIVALENCE:
      return False
    if not admissible_rate(params, weights, k_vec) > 0:
      return False
  return True

def select_weights(params, k_values=PROBE_K, verbose=False):
  """kappa2 fixed, kappa1 half the largest passing value found by log-bisection."""
  kappa2 = default_kappa2(params)

  def passes(kappa1):
    return weights_pass(params, LyapunovWeights(kappa1=kappa1, kappa2=kappa2), k_values)

  best = largest_admissible(passes, KAPPA1_RANGE[0], KAPPA1_RANGE[1], verbose=verbose)
  if best is None:
    raise WeightSearchFailed(f'no kappa1 in [{KAPPA1_RANGE[0]:g}, {KAPPA1_RANGE[1]:g}) passes with kappa2 = {kappa2:g}')
  kappa1 = 0.5 * best if passes(0.5 * best) else best
  weights = LyapunovWeights(kappa1=kappa1, kappa2=kappa2)
  if verbose:
    print(f'kappa1 = {weights["kappa1"]:.6e}, kappa2 = {weights["kappa2"]:.6e}')
  return weights

def _energy_at(params, h, state0, t):
  x = pack_state(mode_propagate(params, state0, t))
  return float(np.real(np.conj(x) @ h @ x))

def energy_derivative(params, h, state0, t):
  """Richardson-extrapolated central difference of E along the exact trajectory."""
  step = 1e-4 * (1 + abs(t))

  def central(s):
    return (_energy_at(params, h, state0, t + s) - _energy_at(params, h, state0, t - s)) / (2 * s)

  return (4 * central(0.5 * step) - central(step)) / 3

def lyapunov_decay_check(params, weights, k_vec, state0, t_grid):
  """Evolve state0 exactly and test dE/dt + lam |k|^2/(1+|k|^2)^2 E <= 0 on t_grid.

  lambda_hat is the largest lam admitted by every sampled time; it is NaN at
  k = 0 where the rate factor vanishes.
  """
  k_vec = np.asarray(k_vec, dtype=float)
  state0 = unpack_state(pack_state(state0), k_vec)
  scale = 1 + float(np.max(np.abs(pack_state(state0)))) * (1 + float(np.linalg.norm(k_vec)))
  residual_e, residual_b = gauss_residuals(params, state0)
  if max(residual_e, residual_b) > GAUSS_TOLERANCE * scale:
    raise ConstraintViolation(f'Gauss residuals ({residual_e:.3e}, {residual_b:.3e}) exceed tolerance')

  h = energy_matrix(params, weights, k_vec)
  t_grid = np.asarray(t_grid, dtype=float)
  energies = np.array([_energy_at(params, h, state0, t) for t in t_grid])
  derivatives = np.array([energy_derivative(params, h, state0, t) for t in t_grid])
  k_mag = float(np.linalg.norm(k_vec))
  monotone = bool(np.all(derivatives <= MONOTONE_TOLERANCE * np.abs(energies)))

  if k_mag == 0:
    lambda_hat = math.nan
  else:
    live = energies > 0
    ratios = -derivatives[live] / (rate_factor(k_mag) * energies[live])
    lambda_hat = float(np.min(ratios)) if len(ratios) else math.inf
  return DecayReport(
    k_mag=k_mag,
    lambda_hat=lambda_hat,
    exact_rate=admissible_rate(params, weights, k_vec),
    monotone=monotone,
    equivalence_ratio=equivalence_ratio(params, weights, k_vec),
    energies=energies,
    derivatives=derivatives,
  )

def sampled_equivalence(params, weights, rng, draws=10000, k_range=(1e-2, 1e2)):
  """Extreme values of E / |x|_w^2 over random Gauss-consistent modes."""
  lo, hi = math.inf, 0.0
  w = base_weights(params)
  for _ in range(draws):
    direction = rng.standard_normal(3)
    k_mag = math.exp(rng.uniform(math.log(k_range[0]), math.log(k_range[1])))
    state = random_mode(params, k_mag * direction / np.linalg.norm(direction), rng)
    x = pack_state(state)
    ratio = mode_energy(params, state, weights) / float(np.sum(w * np.abs(x) ** 2))
    lo, hi = min(lo, ratio), max(hi, ratio)
  return lo, hi

def pointwise_bound(params, weights, k_values, times, rng, draws=4):
  """Check |U(t,k)| <= C exp(-lam |k|^2 t / (1+|k|^2)^2) |U(0,k)| on samples.

  E decays at the smallest exact admissible rate over k_values, so |U| decays
  at half of it; C^2 is the equivalence constant ratio times the spread of
  the base weights.
  """
  w = base_weights(params)
  rates, spreads = [], []
  for k in k_values:
    k_vec = np.array([0.0, 0.0, k])
    a, b = equivalence_bounds(params, weights, k_vec)
    rates.append(admissible_rate(params, weights, k_vec))
    spreads.append(b / a)
  rate = 0.5 * float(min(rates))
  constant = math.sqrt(max(spreads) * w.max() / w.min())
  worst = 0.0
  for k in k_values:
    for _ in range(draws):
      state0 = random_mode(params, np.array([0.0, 0.0, k]), rng)
      size0 = np.linalg.norm(pack_state(state0))
      for t in times:
        size = np.linalg.norm(pack_state(mode_propagate(params, state0, t)))
        envelope = math.exp(-rate * rate_factor(k) * t)
        worst = max(worst, size / (envelope * size0))
  return { 'constant': constant, 'rate': rate, 'worst_ratio': worst, 'holds': worst <= constant }

def lyapunov_scan(params, weights, k_values, rng, t_grid, num_threads=DEFAULT_THREADS, verbose=False):
  """Decay reports for one random mode per |k|, collected in k order."""
  states = [random_mode(params, np.array([k, 0.0, 0.0]), rng) for k in k_values]
  reports = [None] * len(states)
  with concurrent.futures.ThreadPoolExecutor(max_workers=num_threads) as executor:
    futures = {
      executor.submit(lyapunov_decay_check, params, weights, state['k_vec'], state, t_grid): i
      for i, state in enumerate(states)
    }
    for future in tqdm(concurrent.futures.as_completed(futures), total=len(futures), disable=not verbose):
      reports[futures[future]] = future.result()
  return reports

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-s', '--seed', type=int, default=0)
  parser.add_argument('-v', '--verbose', action='store_true')
  args = parser.parse_args()

  params = unit_params()
  weights = select_weights(params, verbose=args.verbose)
  rng = np.random.default_rng(args.seed)
  for report in lyapunov_scan(params, weights, [0.1, 1.0, 10.0], rng, np.linspace(0, 5, 11)):
    print(f'k = {report["k_mag"]:g}: lambda_hat = {report["lambda_hat"]:.6e}, '
          f'exact = {report["exact_rate"]:.6e}, ratio = {report["equivalence_ratio"]:.3f}')
