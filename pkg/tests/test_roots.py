import numpy as np
import pytest

from util.roots import companion_matrix, continue_roots, geometric_path, match_roots, min_separation, polish_roots, polynomial_roots

def test_polynomial_roots_of_known_quartic():
  coeffs = np.poly([-1.0, -2.0, -3.0, -4.0])
  roots = polish_roots(coeffs, polynomial_roots(coeffs))
  assert np.sort(roots.real) == pytest.approx(np.array([-4.0, -3.0, -2.0, -1.0]), abs=1e-12)
  assert np.max(np.abs(roots.imag)) < 1e-12

def test_companion_matrix_is_monic():
  mat = companion_matrix([2.0, 4.0, 6.0])
  assert mat[0].tolist() == [-2.0, -3.0]
  assert mat[1].tolist() == [1.0, 0.0]

def test_match_roots_follows_reference():
  reference = np.array([1.0, 2.0 + 1j, -3.0])
  assert match_roots(reference, np.array([-2.9, 1.1, 2.0 + 0.9j])).tolist() == [1.1, 2.0 + 0.9j, -2.9]

def test_geometric_path_endpoints():
  path = geometric_path(1e-6, 1.0)
  assert path[0] == pytest.approx(1e-6)
  assert path[-1] == pytest.approx(1.0)
  assert np.max(path[1:] / path[:-1]) <= 1.25 + 1e-12
  assert geometric_path(2.0, 2.0).tolist() == [2.0]

def test_continue_roots_keeps_branch_labels():
  def coeffs_at(k):
    return np.poly([-0.1 * k ** 2, -1.0, -2.0 + 0.5j, -2.0 - 0.5j])

  def anchors_at(k):
    return np.array([-0.1 * k ** 2, -1.0, -2.0 + 0.5j, -2.0 - 0.5j])

  k_values = np.array([2.0, 1e-4, 0.5, 1e-8])
  roots = continue_roots(coeffs_at, anchors_at, k_values, 1e-6)
  assert roots[:, 0] == pytest.approx(-0.1 * k_values ** 2, abs=1e-12)
  assert roots[:, 2] == pytest.approx(np.full(4, -2.0 + 0.5j), abs=1e-10)

def test_min_separation():
  assert min_separation(np.array([0.0, 1.0, 3.0])) == 1.0
