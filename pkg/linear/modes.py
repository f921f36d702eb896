import math
import numpy as np

from typing import TypedDict
from linear.em import cross_matrix

# component layout of the full unknown
RHO_I = 0
RHO_E = 1
U_I = slice(2, 5)
U_E = slice(5, 8)
E_FIELD = slice(8, 11)
B_FIELD = slice(11, 14)
N_COMPONENTS = 14

class ModeFullState(TypedDict):
  rho_i: complex
  rho_e: complex
  u_i: np.ndarray
  u_e: np.ndarray
  e_field: np.ndarray
  b_field: np.ndarray
  k_vec: np.ndarray

def pack_state(state):
  vec = np.zeros(N_COMPONENTS, dtype=complex)
  vec[RHO_I] = state['rho_i']
  vec[RHO_E] = state['rho_e']
  vec[U_I] = state['u_i']
  vec[U_E] = state['u_e']
  vec[E_FIELD] = state['e_field']
  vec[B_FIELD] = state['b_field']
  return vec

def unpack_state(vec, k_vec):
  vec = np.asarray(vec, dtype=complex)
  return ModeFullState(
    rho_i=complex(vec[RHO_I]), rho_e=complex(vec[RHO_E]),
    u_i=vec[U_I].copy(), u_e=vec[U_E].copy(),
    e_field=vec[E_FIELD].copy(), b_field=vec[B_FIELD].copy(),
    k_vec=np.asarray(k_vec, dtype=float),
  )

def full_matrix(params, k_vec):
  """Symbol of the linearized system on the 14 components, valid at k = 0 too."""
  k_vec = np.asarray(k_vec, dtype=float)
  e = params['e_charge']
  c = params['c_light']
  ik = 1j * k_vec
  eye = np.eye(3)
  curl = cross_matrix(ik)
  mat = np.zeros((N_COMPONENTS, N_COMPONENTS), dtype=complex)
  mat[RHO_I, U_I] = -ik
  mat[RHO_E, U_E] = -ik
  mat[U_I, RHO_I] = -(params['T_i'] / params['m_i']) * ik
  mat[U_I, U_I] = -params['nu_i'] * eye
  mat[U_I, E_FIELD] = (e / params['m_i']) * eye
  mat[U_E, RHO_E] = -(params['T_e'] / params['m_e']) * ik
  mat[U_E, U_E] = -params['nu_e'] * eye
  mat[U_E, E_FIELD] = -(e / params['m_e']) * eye
  mat[E_FIELD, U_I] = -4 * math.pi * e * eye
  mat[E_FIELD, U_E] = 4 * math.pi * e * eye
  mat[E_FIELD, B_FIELD] = c * curl
  mat[B_FIELD, E_FIELD] = -c * curl
  return mat

def constraint_rows(params, k_vec):
  """Rows C with C x = (ik.E - 4 pi e (rho_i - rho_e), k.B)."""
  k_vec = np.asarray(k_vec, dtype=float)
  e = params['e_charge']
  rows = np.zeros((2, N_COMPONENTS), dtype=complex)
  rows[0, RHO_I] = -4 * math.pi * e
  rows[0, RHO_E] = 4 * math.pi * e
  rows[0, E_FIELD] = 1j * k_vec
  rows[1, B_FIELD] = k_vec
  return rows

def gauss_residuals(params, state):
  vec = pack_state(state)
  res = constraint_rows(params, state['k_vec']) @ vec
  return abs(res[0]), abs(res[1])

def weighted_norm_sq(params, state):
  """sum_alpha (T |rho|^2 + m |u|^2) + (|E|^2 + |B|^2) / (4 pi)."""
  vec = pack_state(state)
  return float(np.sum(base_weights(params) * np.abs(vec) ** 2))

def base_weights(params):
  w = np.zeros(N_COMPONENTS)
  w[RHO_I] = params['T_i']
  w[RHO_E] = params['T_e']
  w[U_I] = params['m_i']
  w[U_E] = params['m_e']
  w[E_FIELD] = 1 / (4 * math.pi)
  w[B_FIELD] = 1 / (4 * math.pi)
  return w

def random_mode(params, k_vec, rng, scale=1.0):
  """Random complex state satisfying both Gauss constraints."""
  k_vec = np.asarray(k_vec, dtype=float)

  def draw(shape=()):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

  k = float(np.linalg.norm(k_vec))
  rho_i, rho_e = draw(), draw()
  b = draw(3)
  e_field = draw(3)
  if k > 0:
    k_hat = k_vec / k
    b = b - k_hat * (k_hat @ b)
    e_perp = e_field - k_hat * (k_hat @ e_field)
    e_par = -4j * math.pi * params['e_charge'] * (rho_i - rho_e) / k
    e_field = e_perp + e_par * k_hat
  else:
    rho_e = rho_i
  return ModeFullState(
    rho_i=complex(rho_i), rho_e=complex(rho_e), u_i=draw(3), u_e=draw(3),
    e_field=e_field, b_field=b, k_vec=k_vec,
  )
