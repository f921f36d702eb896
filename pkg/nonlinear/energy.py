"""N-th order energy and dissipation functionals of the nonlinear system.

All sums over derivatives run over multi-indices l with |l| in a range, so in
Fourier variables they become weights sum_l prod_j k_j^(2 l_j). Terms with a
density weight (T / (1 + rho) and m (1 + rho)) are integrated in real space;
the cross terms are quadratic and go through Parseval.
"""
import itertools
import math
import numpy as np

from scipy.linalg import eigh
from typing import TypedDict
from linear.em import cross_matrix
from linear.evolution import parseval_weight
from linear.lyapunov import constrained_rate, real_form, slot_matrix
from linear.modes import B_FIELD, E_FIELD, N_COMPONENTS, RHO_E, RHO_I, U_E, U_I, base_weights
from nonlinear.fields import cell_volume, grid_wavevectors, l1_norm, physical
from util.errors import WeightSearchFailed
from util.fitting import largest_admissible

DEFAULT_ORDER = 3
SCALE_RANGE = (1e-6, 1.0)
MAX_EQUIVALENCE = 10.0
PROBE_K = np.logspace(-2, 1, 10)
DATA_ORDER_SHIFT = 6

class EnergyKappas(TypedDict):
  kappa1: float
  kappa2: float
  kappa3: float

class EnergyReport(TypedDict):
  e_n: float
  d_n: float
  e_n_high: float
  d_n_high: float
  kappas: EnergyKappas
  sobolev_order: int

def zero_kappas():
  return EnergyKappas(kappa1=0.0, kappa2=0.0, kappa3=0.0)

def kappas_from_scale(s):
  """kappa1 = s, kappa2 = s^2, kappa3 = s^(5/2), so kappa2^(3/2) << kappa3 << kappa2 << kappa1."""
  return EnergyKappas(kappa1=s, kappa2=s ** 2, kappa3=s ** 2.5)

def multi_indices(lo, hi):
  return [l for l in itertools.product(range(hi + 1), repeat=3) if lo <= sum(l) <= hi]

def multi_index_weight(k, lo, hi):
  """sum over lo <= |l| <= hi of prod_j k_j^(2 l_j); k has a leading axis of 3."""
  k2 = np.asarray(k, dtype=float) ** 2
  total = np.zeros(k2.shape[1:])
  for l in multi_indices(lo, hi):
    total = total + k2[0] ** l[0] * k2[1] ** l[1] * k2[2] ** l[2]
  return total

def _species(params):
  e = params['e_charge']
  return (
    (RHO_I, U_I, params['m_i'], params['T_i'], e),
    (RHO_E, U_E, params['m_e'], params['T_e'], -e),
  )

def _parseval(field, weight, a, b=None):
  """Re sum_k weight a conj(b) times the Parseval factor; sums over leading axes."""
  b = a if b is None else b
  return float(parseval_weight(field) * np.sum(weight * np.real(a * np.conj(b))))

def _density_weighted(params, field, lo, hi, linearized=False):
  """(sum T/(1+rho) |d^l rho|^2, sum m (1+rho) |d^l u|^2) over lo <= |l| <= hi."""
  k = grid_wavevectors(field)
  modes = field['modes']
  if linearized:
    weight = multi_index_weight(k, lo, hi)
    dens = sum(temp * _parseval(field, weight, modes[rho]) for rho, _, _, temp, _ in _species(params))
    vel = sum(m * _parseval(field, weight, modes[u]) for _, u, m, _, _ in _species(params))
    return dens, vel

  volume = cell_volume(field)
  ik = 1j * k
  dens, vel = 0.0, 0.0
  for rho_idx, u_idx, m, temp, _ in _species(params):
    n = 1 + physical(modes[rho_idx])
    for l in multi_indices(lo, hi):
      symbol = ik[0] ** l[0] * ik[1] ** l[1] * ik[2] ** l[2]
      d_rho = physical(symbol * modes[rho_idx])
      d_u = physical(symbol * modes[u_idx])
      dens += temp * volume * float(np.sum(d_rho ** 2 / n))
      vel += m * volume * float(np.sum(n * d_u ** 2))
  return dens, vel

def _cross_terms(params, field, kappas, lo, hi):
  k = grid_wavevectors(field)
  modes = field['modes']
  ik = 1j * k
  w1 = multi_index_weight(k, lo, hi - 1)
  w3 = multi_index_weight(k, lo, hi - 2)
  total = 0.0
  for rho, u, m, temp, q in _species(params):
    total += kappas['kappa1'] * m * _parseval(field, w1, modes[u], ik * modes[rho])
    total += kappas['kappa2'] * m * _parseval(field, w1, modes[u], -q / temp * modes[E_FIELD])
  curl_b = np.cross(ik, modes[B_FIELD], axis=0)
  total -= kappas['kappa3'] * _parseval(field, w3, modes[E_FIELD], curl_b)
  return total

def sobolev_norm_sq(params, field, order, lo=0):
  """sum_alpha (T |rho|^2 + m |u|^2) + |[E, B]|^2 / (4 pi) in the multi-index H^order norm."""
  weight = multi_index_weight(grid_wavevectors(field), lo, order)
  w = base_weights(params)
  modes = field['modes']
  return sum(w[idx] * _parseval(field, weight, modes[idx]) for idx in range(N_COMPONENTS))

def sobolev_energy(params, field, order=DEFAULT_ORDER, kappas=None, linearized=False):
  kappas = zero_kappas() if kappas is None else kappas
  k = grid_wavevectors(field)
  k2 = np.sum(k ** 2, axis=0)
  modes = field['modes']
  em = np.concatenate([modes[E_FIELD], modes[B_FIELD]])
  field_weight = 1 / (4 * math.pi)

  dens, vel = _density_weighted(params, field, 0, order, linearized)
  dens_h, vel_h = _density_weighted(params, field, 1, order, linearized)

  e_n = dens + vel + field_weight * _parseval(field, multi_index_weight(k, 0, order), em)
  e_n += _cross_terms(params, field, kappas, 0, order)
  e_n_high = dens_h + vel_h + field_weight * _parseval(field, k2 * multi_index_weight(k, 0, order - 1), em)
  e_n_high += _cross_terms(params, field, kappas, 1, order)

  rho_pair = np.stack([modes[RHO_I], modes[RHO_E]])
  d_n = (
    vel
    + _parseval(field, k2 * multi_index_weight(k, 0, order - 1), rho_pair)
    + _parseval(field, k2 * multi_index_weight(k, 0, order - 2), em)
    + _parseval(field, 1.0, modes[E_FIELD])
  )
  d_n_high = (
    vel_h
    + _parseval(field, k2 ** 2 * multi_index_weight(k, 0, order - 2), rho_pair)
    + _parseval(field, k2 ** 2 * multi_index_weight(k, 0, order - 3), em)
    + _parseval(field, k2, modes[E_FIELD])
  )
  return EnergyReport(
    e_n=e_n, d_n=d_n, e_n_high=e_n_high, d_n_high=d_n_high, kappas=kappas, sobolev_order=int(order),
  )

def data_size(field, order):
  """||U||_{H^order} + ||U||_{L^1} summed over all components."""
  weight = multi_index_weight(grid_wavevectors(field), 0, order)
  return math.sqrt(_parseval(field, weight, field['modes'])) + l1_norm(field)

def data_order(order, grid_size):
  return min(order + DATA_ORDER_SHIFT, grid_size // 2)

def energy_form(params, kappas, k_vec, order=DEFAULT_ORDER):
  """Hermitian 14 x 14 form of the linearized E_N at one wavevector."""
  k_vec = np.asarray(k_vec, dtype=float)
  k_col = k_vec[:, None]
  w_n = float(multi_index_weight(k_col, 0, order)[0])
  w_1 = float(multi_index_weight(k_col, 0, order - 1)[0])
  w_2 = float(multi_index_weight(k_col, 0, order - 2)[0])
  h = np.diag(w_n * base_weights(params)).astype(complex)
  field = slot_matrix(E_FIELD)
  for rho, u, m, temp, q in _species(params):
    velocity = slot_matrix(u)
    h += real_form(kappas['kappa1'] * m * w_1, slot_matrix(rho, k_vec), velocity)
    h += real_form(-kappas['kappa2'] * m * q / temp * w_1, field, velocity)
  curl_b = cross_matrix(1j * k_vec) @ slot_matrix(B_FIELD)
  h += real_form(-kappas['kappa3'] * w_2, curl_b, field)
  return h

def probe_vectors(k_values=PROBE_K):
  diagonal = np.ones(3) / math.sqrt(3)
  return [k * d for k in k_values for d in (np.array([1.0, 0.0, 0.0]), diagonal)]

def energy_weights_pass(params, kappas, order=DEFAULT_ORDER, k_values=PROBE_K):
  w = base_weights(params)
  for k_vec in probe_vectors(k_values):
    h = energy_form(params, kappas, k_vec, order)
    sobolev = float(multi_index_weight(k_vec[:, None], 0, order)[0]) * w
    values = eigh(0.5 * (h + h.conj().T), np.diag(sobolev), eigvals_only=True)
    if values[0] <= 0 or max(values[-1], 1 / values[0]) > MAX_EQUIVALENCE:
      return False
    if not constrained_rate(params, h, k_vec) > 0:
      return False
  return True

def select_energy_weights(params, order=DEFAULT_ORDER, k_values=PROBE_K, verbose=False):
  def passes(s):
    return energy_weights_pass(params, kappas_from_scale(s), order, k_values)

  best = largest_admissible(passes, SCALE_RANGE[0], SCALE_RANGE[1], verbose=verbose)
  if best is None:
    raise WeightSearchFailed(f'no energy weight scale in [{SCALE_RANGE[0]:g}, {SCALE_RANGE[1]:g}) passes')
  s = 0.5 * best if passes(0.5 * best) else best
  if verbose:
    print(f'energy weight scale s = {s:.6e}')
  return kappas_from_scale(s)

def dissipation_form(params, k_vec, order=DEFAULT_ORDER):
  """Diagonal 14 x 14 form of the linearized D_N at one wavevector."""
  k_col = np.asarray(k_vec, dtype=float)[:, None]
  k2 = float(np.sum(k_col ** 2))
  w_n = float(multi_index_weight(k_col, 0, order)[0])
  w_1 = float(multi_index_weight(k_col, 0, order - 1)[0])
  w_2 = float(multi_index_weight(k_col, 0, order - 2)[0])
  d = np.zeros(N_COMPONENTS)
  d[RHO_I] = k2 * w_1
  d[RHO_E] = k2 * w_1
  d[U_I] = params['m_i'] * w_n
  d[U_E] = params['m_e'] * w_n
  d[E_FIELD] = k2 * w_2 + 1.0
  d[B_FIELD] = k2 * w_2
  return np.diag(d).astype(complex)

def linearized_energy_rate(params, kappas, order=DEFAULT_ORDER, k_values=PROBE_K):
  """Largest lam with -dE_N/dt >= lam D_N for the linearized flow at the probe wavevectors."""
  return min(
    constrained_rate(params, energy_form(params, kappas, k_vec, order), k_vec, dissipation_form(params, k_vec, order))
    for k_vec in probe_vectors(k_values)
  )

def fit_energy_inequality(e_n, d_n, e_dot, lam):
  """Fit dE/dt + lam D <= c (E^(1/2) + E) D on recorded samples for a given lam.

  c is the smallest constant that makes every sample satisfy the inequality.
  lambda_observed is the smallest -dE/dt / D over samples with D > 0.
  """
  e_n, d_n, e_dot = (np.asarray(a, dtype=float) for a in (e_n, d_n, e_dot))
  excess = np.maximum(e_dot + lam * d_n, 0.0)
  scale = (np.sqrt(np.maximum(e_n, 0.0)) + e_n) * d_n
  with np.errstate(divide='ignore', invalid='ignore'):
    ratios = np.where(excess > 0, excess / scale, 0.0)
  c_hat = float(np.max(ratios)) if ratios.size else 0.0
  live = d_n > 0
  observed = float(np.min(-e_dot[live] / d_n[live])) if np.any(live) else math.nan
  return {
    'lambda_hat': float(lam),
    'c_hat': c_hat,
    'lambda_observed': observed,
    'holds': bool(lam > 0 and np.isfinite(c_hat)),
  }
