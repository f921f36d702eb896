import numpy as np

from scipy.optimize import linear_sum_assignment

DEFAULT_POLISH_STEPS = 2
DEFAULT_PATH_RATIO = 1.25

def companion_matrix(coeffs):
  coeffs = np.asarray(coeffs, dtype=complex)
  coeffs = coeffs / coeffs[0]
  n = len(coeffs) - 1
  mat = np.zeros((n, n), dtype=complex)
  mat[0, :] = -coeffs[1:]
  mat[1:, :-1] = np.eye(n - 1)
  return mat

def polynomial_roots(coeffs):
  """Eigenvalues of the companion matrix; coeffs are highest degree first."""
  return np.linalg.eigvals(companion_matrix(coeffs))

def polish_roots(coeffs, roots, steps=DEFAULT_POLISH_STEPS):
  coeffs = np.asarray(coeffs, dtype=complex)
  deriv = np.polyder(coeffs)
  roots = np.array(roots, dtype=complex)
  for _ in range(steps):
    value = np.polyval(coeffs, roots)
    slope = np.polyval(deriv, roots)
    ok = slope != 0
    candidate = roots.copy()
    candidate[ok] = roots[ok] - value[ok] / slope[ok]
    # keep a Newton step only when it lowers |p|
    better = np.abs(np.polyval(coeffs, candidate)) < np.abs(value)
    roots = np.where(better, candidate, roots)
  return roots

def match_roots(reference, roots):
  """Reorder roots so that roots[j] is the one closest to reference[j]."""
  reference = np.asarray(reference)
  roots = np.asarray(roots)
  cost = np.abs(reference[:, None] - roots[None, :])
  _, cols = linear_sum_assignment(cost)
  return roots[cols]

def geometric_path(start, stop, ratio=DEFAULT_PATH_RATIO):
  if start == stop:
    return np.array([stop])
  steps = int(np.ceil(abs(np.log(stop / start)) / np.log(ratio)))
  return np.geomspace(start, stop, max(steps, 1) + 1)

def continue_roots(coeffs_at, anchors_at, k_values, k_ref, ratio=DEFAULT_PATH_RATIO):
  """Label polynomial roots along |k| by continuation from a reference point.

  Args:
    coeffs_at: callable |k| -> polynomial coefficients (highest degree first).
    anchors_at: callable |k| -> approximate labeled roots valid near k_ref.
    k_values: target wavenumber magnitudes, any order.
    k_ref: small wavenumber where anchors_at identifies the branches.
    ratio: largest ratio between consecutive path points.

  Returns:
    array (len(k_values), degree) of polished roots, column j following branch j.
  """
  k_values = np.atleast_1d(np.asarray(k_values, dtype=float))
  degree = len(coeffs_at(k_ref)) - 1
  out = np.zeros((len(k_values), degree), dtype=complex)

  def solve(k):
    c = coeffs_at(k)
    return polish_roots(c, polynomial_roots(c))

  for direction in (1, -1):
    if direction == 1:
      targets = np.where(k_values >= k_ref)[0]
    else:
      targets = np.where(k_values < k_ref)[0]
    if len(targets) == 0:
      continue
    order = targets[np.argsort(direction * k_values[targets])]
    current_k = k_ref
    current = match_roots(anchors_at(k_ref), solve(k_ref))
    for idx in order:
      k = k_values[idx]
      for point in geometric_path(current_k, k, ratio)[1:]:
        current = match_roots(current, solve(point))
      current_k = k
      out[idx] = current
  return out

def min_separation(roots):
  roots = np.asarray(roots)
  gaps = np.abs(roots[:, None] - roots[None, :])
  gaps[np.diag_indices(len(roots))] = np.inf
  return float(gaps.min())
