"""Isotropic linear evolution on a radial Gauss-Legendre quadrature.

A radial field holds, per quadrature node |k|, the longitudinal variables
(rho_i, rho_e, s_i, s_e, E along k) for a monopole harmonic and a cos(theta)
harmonic, and the transverse variables (u_i, u_e, E, ik x B / |k|) for the two
polarizations tau and k_hat x tau, both carrying a sin(theta) factor. Data
built from radial amplitudes times a constant direction e_z falls into exactly
these harmonics, and the linear flow keeps them separate.
"""
import math
import numpy as np

from scipy.linalg import expm
from tqdm import tqdm
from typing import TypedDict
from plasma.darcy import parallel_electric_coefficient
from plasma.params import mass_weights
from linear.em import em_quartic_coeffs, profile_coefficients, transverse_matrix
from linear.fluid import fluid_char_coeffs, fluid_matrix, spectral_projections
from util.errors import DegenerateSpectrum
from util.roots import polish_roots, polynomial_roots

DEFAULT_NODES = 512
DEFAULT_PANELS = 8
DEFAULT_WIDTH = 0.3

# angular averages of 1, cos^2 and sin^2 over the sphere
HARMONIC_WEIGHTS = (1.0, 1.0 / 3.0)
TRANSVERSE_WEIGHT = 2.0 / 3.0

LONG_SLOTS = { 'P1i': [0], 'P1e': [1], 'P2i': [2], 'P2e': [3], 'P3': [4], 'P4': [] }
TRANS_SLOTS = { 'P1i': [], 'P1e': [], 'P2i': [0], 'P2e': [1], 'P3': [2], 'P4': [3] }

# charge-neutral densities, small enough that the velocity-driven gaps lead on
# late-time windows
DEFAULT_AMPLITUDES = {
  'rho_i': 0.005,
  'rho_e': 0.005,
  'u_i': 0.3,
  'u_e': -0.2,
  'e_perp': 0.2,
  'b': 1.0,
  'f_i': 0.0,
  'f_e': 0.0,
}

class RadialQuadrature(TypedDict):
  nodes: np.ndarray
  weights: np.ndarray
  k_max: float

class RadialField(TypedDict):
  quadrature: RadialQuadrature
  longitudinal: np.ndarray
  transverse: np.ndarray

def radial_quadrature(k_max, nodes=DEFAULT_NODES, panels=DEFAULT_PANELS):
  """Composite Gauss-Legendre rule on [0, k_max].

  Panel edges are 0, k_max 2^-(panels-1), ..., k_max / 2, k_max, so that nodes
  crowd toward k = 0 where late-time integrands concentrate.
  """
  per_panel = nodes // panels
  x, w = np.polynomial.legendre.leggauss(per_panel)
  edges = np.concatenate([[0.0], k_max * 0.5 ** np.arange(panels - 1, -1, -1)])
  k_nodes, k_weights = [], []
  for a, b in zip(edges[:-1], edges[1:]):
    k_nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
    k_weights.append(0.5 * (b - a) * w)
  return RadialQuadrature(
    nodes=np.concatenate(k_nodes), weights=np.concatenate(k_weights), k_max=float(k_max),
  )

def decay_quadrature(params, t_min, nodes=DEFAULT_NODES, panels=DEFAULT_PANELS):
  mu_min = min(params['mu1'], params['mu2'])
  return radial_quadrature(16.0 / math.sqrt(mu_min * t_min), nodes, panels)

def integrate(quadrature, values):
  """(2 pi)^-3 times the integral of an isotropic density over R^3."""
  k = quadrature['nodes']
  return float(np.sum(quadrature['weights'] * 4 * math.pi * k ** 2 * values) / (2 * math.pi) ** 3)

def radial_data(params, quadrature, amplitudes=None, width=DEFAULT_WIDTH, special=False):
  """Isotropic initial data with envelope g(k) = exp(-width^2 k^2 / 2).

  Velocities and transverse E, B are g times constant vectors along e_z. With
  special=False the densities are monopoles g rho_alpha; with special=True
  they are divergences of fluxes f_alpha g e_z, E carries the matching
  4 pi sum q_alpha f_alpha g e_z and B vanishes.
  """
  amp = dict(DEFAULT_AMPLITUDES)
  amp.update(amplitudes or {})
  k = quadrature['nodes']
  g = np.exp(-0.5 * width ** 2 * k ** 2)
  e = params['e_charge']
  n = len(k)
  longitudinal = np.zeros((2, 5, n), dtype=complex)
  transverse = np.zeros((2, 4, n), dtype=complex)

  if special:
    flux = 4 * math.pi * e * (amp['f_i'] - amp['f_e']) * g
    longitudinal[1, 0] = 1j * k * amp['f_i'] * g
    longitudinal[1, 1] = 1j * k * amp['f_e'] * g
    longitudinal[1, 4] = flux
    transverse[0, 2] = amp['e_perp'] * g + flux
  else:
    longitudinal[0, 0] = amp['rho_i'] * g
    longitudinal[0, 1] = amp['rho_e'] * g
    longitudinal[0, 4] = -4j * math.pi * e * (longitudinal[0, 0] - longitudinal[0, 1]) / k
    transverse[0, 2] = amp['e_perp'] * g
    # B = b g (e_z - cos(theta) k_hat) becomes ik x B / |k| = i b g sin(theta) (k_hat x tau)
    transverse[1, 3] = 1j * amp['b'] * g

  longitudinal[1, 2] = amp['u_i'] * g
  longitudinal[1, 3] = amp['u_e'] * g
  transverse[0, 0] = amp['u_i'] * g
  transverse[0, 1] = amp['u_e'] * g
  return RadialField(quadrature=quadrature, longitudinal=longitudinal, transverse=transverse)

def _spectral_or_none(matrix, coeffs):
  roots = polish_roots(coeffs, polynomial_roots(coeffs))
  try:
    return roots, spectral_projections(matrix, roots)
  except DegenerateSpectrum:
    return None

def radial_propagators(params, quadrature, verbose=False):
  """Per-node spectral data of the longitudinal and transverse generators.

  Nodes where a spectrum is too close to degenerate keep the generator itself
  and are exponentiated directly at each time.
  """
  nodes = quadrature['nodes']
  fluid, trans = [], []
  for k in tqdm(nodes, disable=not verbose):
    a = fluid_matrix(params, k)
    decomp = _spectral_or_none(a, fluid_char_coeffs(params, k))
    fluid.append(decomp if decomp is not None else a)
    m = transverse_matrix(params, k)
    decomp = _spectral_or_none(m, em_quartic_coeffs(params, k))
    trans.append(decomp if decomp is not None else m)
  return { 'fluid': fluid, 'transverse': trans }

def _propagate_block(entry, t):
  if isinstance(entry, tuple):
    roots, projections = entry
    return np.einsum('j,jab->ab', np.exp(roots * t), projections)
  return expm(t * entry)

def radial_evolve(params, field0, t, propagators=None):
  quadrature = field0['quadrature']
  if propagators is None:
    propagators = radial_propagators(params, quadrature)
  k = quadrature['nodes']
  fluid = np.array([_propagate_block(entry, t) for entry in propagators['fluid']])
  trans = np.array([_propagate_block(entry, t) for entry in propagators['transverse']])

  longitudinal = np.zeros_like(field0['longitudinal'])
  transverse = np.zeros_like(field0['transverse'])
  e = params['e_charge']
  for h in range(2):
    x0 = field0['longitudinal'][h]
    residual = x0[4] + 4j * math.pi * e * (x0[0] - x0[1]) / k
    x = np.einsum('nab,bn->an', fluid, x0[:4])
    longitudinal[h, :4] = x
    longitudinal[h, 4] = -4j * math.pi * e * (x[0] - x[1]) / k + residual
    transverse[h] = np.einsum('nab,bn->an', trans, field0['transverse'][h])
  return RadialField(quadrature=quadrature, longitudinal=longitudinal, transverse=transverse)

def radial_profiles(params, field0, t, convention='darcy'):
  """Diffusion-wave profiles of a radial field, in the same harmonic layout."""
  quadrature = field0['quadrature']
  k = quadrature['nodes']
  w_i, w_e = mass_weights(params)
  mu1, mu2 = params['mu1'], params['mu2']
  e_par_c = parallel_electric_coefficient(params)
  u_i_c, u_e_c, e_c = profile_coefficients(params, convention)

  longitudinal = np.zeros_like(field0['longitudinal'])
  for h in range(2):
    x0 = field0['longitudinal'][h]
    n_bar = np.exp(-mu1 * k ** 2 * t) * (w_i * x0[0] + w_e * x0[1])
    longitudinal[h, 0] = n_bar
    longitudinal[h, 1] = n_bar
    longitudinal[h, 2] = -mu1 * 1j * k * n_bar
    longitudinal[h, 3] = -mu1 * 1j * k * n_bar
    longitudinal[h, 4] = e_par_c * 1j * k * n_bar

  transverse = np.zeros_like(field0['transverse'])
  for p in range(2):
    b_bar = np.exp(-mu2 * k ** 2 * t) * field0['transverse'][p, 3]
    # ik x B_bar has |k| times the reduced B slot
    transverse[p, 0] = u_i_c * k * b_bar
    transverse[p, 1] = u_e_c * k * b_bar
    transverse[p, 2] = e_c * k * b_bar
    transverse[p, 3] = b_bar
  return RadialField(quadrature=quadrature, longitudinal=longitudinal, transverse=transverse)

def radial_difference(a, b):
  return RadialField(
    quadrature=a['quadrature'],
    longitudinal=a['longitudinal'] - b['longitudinal'],
    transverse=a['transverse'] - b['transverse'],
  )

def radial_norm(field, selector=None):
  """L2 norm over R^3 of the selected components (all components when None)."""
  if selector is None:
    long_slots, trans_slots = list(range(5)), list(range(4))
  else:
    long_slots, trans_slots = LONG_SLOTS[selector], TRANS_SLOTS[selector]
  density = np.zeros(len(field['quadrature']['nodes']))
  for h, weight in enumerate(HARMONIC_WEIGHTS):
    for slot in long_slots:
      density += weight * np.abs(field['longitudinal'][h, slot]) ** 2
  for p in range(2):
    for slot in trans_slots:
      density += TRANSVERSE_WEIGHT * np.abs(field['transverse'][p, slot]) ** 2
  return math.sqrt(integrate(field['quadrature'], density))

def radial_series(params, field0, times, quantities, convention='darcy', verbose=False):
  """Norm time series of the evolved field, its profiles and their gap.

  quantities maps a column name to (kind, selector), kind one of 'solution',
  'profile' or 'gap'. Returns an array (len(times), len(quantities)).
  """
  propagators = radial_propagators(params, field0['quadrature'], verbose=verbose)
  out = np.zeros((len(times), len(quantities)))
  for row, t in enumerate(tqdm(times, disable=not verbose)):
    field = radial_evolve(params, field0, t, propagators)
    profile = radial_profiles(params, field0, t, convention)
    fields = { 'solution': field, 'profile': profile, 'gap': radial_difference(field, profile) }
    for col, (kind, selector) in enumerate(quantities.values()):
      out[row, col] = radial_norm(fields[kind], selector)
  return out
