import numpy as np

from typing import TypedDict
from linear.evolution import empty_field, wavevectors
from linear.modes import N_COMPONENTS, RHO_E, RHO_I
from util.errors import VacuumReached

class PhysicalField(TypedDict):
  values: np.ndarray
  box_length: float
  grid_size: int

def dealias_mask(grid_size):
  """2/3 rule: keep modes with every |n_j| < N/3."""
  n = np.abs(np.fft.fftfreq(grid_size, d=1.0 / grid_size))
  keep = n < grid_size / 3.0
  return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

def to_physical(field):
  values = np.fft.ifftn(field['modes'], axes=(-3, -2, -1)).real
  return PhysicalField(values=values, box_length=field['box_length'], grid_size=field['grid_size'])

def to_spectral(physical):
  field = empty_field(physical['grid_size'], physical['box_length'])
  field['modes'] = np.fft.fftn(physical['values'], axes=(-3, -2, -1))
  return field

def spectral(values):
  return np.fft.fftn(values, axes=(-3, -2, -1))

def physical(coeffs):
  return np.fft.ifftn(coeffs, axes=(-3, -2, -1)).real

def round_trip_error(physical_field):
  back = to_physical(to_spectral(physical_field))
  scale = max(1.0, float(np.max(np.abs(physical_field['values']))))
  return float(np.max(np.abs(back['values'] - physical_field['values']))) / scale

def cell_volume(field):
  return (field['box_length'] / field['grid_size']) ** 3

def min_density(physical_field):
  """Smallest 1 + rho over both species and all grid points."""
  values = physical_field['values']
  return float(min(np.min(1 + values[RHO_I]), np.min(1 + values[RHO_E])))

def check_vacuum(physical_field):
  lowest = min_density(physical_field)
  if lowest <= 0:
    raise VacuumReached(f'1 + rho reached {lowest:.6g}')
  return lowest

def l1_norm(field):
  """Sum over components of the L1 norm in real space."""
  values = to_physical(field)['values']
  assert values.shape[0] == N_COMPONENTS
  return float(np.sum(np.abs(values)) * cell_volume(field))

def gradient(coeffs, k):
  """Spectral gradient of a scalar coefficient array, shape (3, N, N, N)."""
  return 1j * k * coeffs[None]

def divergence(coeffs, k):
  return 1j * np.sum(k * coeffs, axis=0)

def grid_wavevectors(field):
  k, _ = wavevectors(field['grid_size'], field['box_length'])
  return k
