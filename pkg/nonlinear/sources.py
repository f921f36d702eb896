"""Nonlinear source terms of the perturbation system around the neutral state.

With n_alpha = 1 + rho_alpha and isothermal pressure p_alpha = T_alpha n_alpha:

  f_alpha  = -rho_alpha u_alpha                        (g1_alpha = div f_alpha)
  g2_alpha = -m_alpha u_alpha . grad u_alpha
             + T_alpha (1 - 1 / (1 + rho_alpha)) grad rho_alpha
             + q_alpha u_alpha x B / c
  g3       = -4 pi sum_alpha q_alpha rho_alpha u_alpha = 4 pi sum_alpha q_alpha f_alpha

Products are formed in real space from 2/3-truncated inputs, derivatives are
spectral, and every output is truncated again.
"""
import math
import numpy as np

from typing import TypedDict
from linear.modes import B_FIELD, E_FIELD, N_COMPONENTS, RHO_E, RHO_I, U_E, U_I
from nonlinear.fields import PhysicalField, check_vacuum, dealias_mask, divergence, gradient, grid_wavevectors, physical, spectral

class SourceTriple(TypedDict):
  f_i: np.ndarray
  f_e: np.ndarray
  g1_i: np.ndarray
  g1_e: np.ndarray
  g2_i: np.ndarray
  g2_e: np.ndarray
  g3: np.ndarray

def _species(params):
  e = params['e_charge']
  return (
    ('i', RHO_I, U_I, params['m_i'], params['T_i'], e),
    ('e', RHO_E, U_E, params['m_e'], params['T_e'], -e),
  )

def _spectral_sources(params, field, mask=None):
  """(f_hat, g2_hat) per species and g3_hat, all truncated."""
  n = field['grid_size']
  if mask is None:
    mask = dealias_mask(n)
  k = grid_wavevectors(field)
  coeffs = field['modes'] * mask
  values = physical(coeffs)
  check_vacuum(PhysicalField(values=values, box_length=field['box_length'], grid_size=n))
  b_field = values[B_FIELD]
  c = params['c_light']

  fluxes, forces = {}, {}
  g3 = np.zeros((3, n, n, n), dtype=complex)
  for name, rho_idx, u_idx, m, temp, q in _species(params):
    rho = values[rho_idx]
    u = values[u_idx]
    grad_rho = physical(gradient(coeffs[rho_idx], k))
    # grad_u[j, i] = d_i u_j
    grad_u = np.stack([physical(gradient(coeffs[u_idx][j], k)) for j in range(3)])
    advection = np.einsum('i...,ji...->j...', u, grad_u)
    pressure = temp * (1 - 1 / (1 + rho)) * grad_rho
    lorentz = q / c * np.cross(u, b_field, axis=0)

    f_hat = spectral(-rho * u) * mask
    fluxes[name] = f_hat
    forces[name] = spectral(-m * advection + pressure + lorentz) * mask
    g3 += 4 * math.pi * q * f_hat
  return fluxes, forces, g3

def nonlinear_sources(params, field, mask=None):
  """Real-space source fields of a spectral GridField."""
  k = grid_wavevectors(field)
  fluxes, forces, g3 = _spectral_sources(params, field, mask)
  return SourceTriple(
    f_i=physical(fluxes['i']),
    f_e=physical(fluxes['e']),
    g1_i=physical(divergence(fluxes['i'], k)),
    g1_e=physical(divergence(fluxes['e'], k)),
    g2_i=physical(forces['i']),
    g2_e=physical(forces['e']),
    g3=physical(g3),
  )

def source_modes(params, field, mask=None):
  """Spectral right-hand side N(U) = [div f_alpha, g2_alpha / m_alpha, g3, 0]."""
  n = field['grid_size']
  k = grid_wavevectors(field)
  fluxes, forces, g3 = _spectral_sources(params, field, mask)
  out = np.zeros((N_COMPONENTS, n, n, n), dtype=complex)
  out[RHO_I] = divergence(fluxes['i'], k)
  out[RHO_E] = divergence(fluxes['e'], k)
  out[U_I] = forces['i'] / params['m_i']
  out[U_E] = forces['e'] / params['m_e']
  out[E_FIELD] = g3
  return out
