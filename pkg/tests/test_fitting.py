import math
import numpy as np
import pytest

from util.errors import InsufficientSamples, NonPositiveSample
from util.fitting import decay_fit, fit_bound_constants, largest_admissible

def test_decay_fit_recovers_power_law():
  times = np.geomspace(100, 1e4, 40)
  fit = decay_fit(times, 3.0 * (1 + times) ** -0.75, (100, 1e4))
  assert fit['exponent'] == pytest.approx(-0.75, abs=1e-12)
  assert fit['amplitude'] == pytest.approx(3.0, rel=1e-10)
  assert fit['residual'] < 1e-10
  assert fit['samples'] == 40

def test_decay_fit_window_and_samples():
  times = np.geomspace(1, 1e4, 40)
  with pytest.raises(InsufficientSamples):
    decay_fit(times, (1 + times) ** -1.0, (5e3, 1e4))
  values = (1 + times) ** -1.0
  values[-1] = 0.0
  with pytest.raises(NonPositiveSample):
    decay_fit(times, values)
  assert NonPositiveSample('x').exit_code == 2
  assert InsufficientSamples('x').exit_code == 1

def test_fit_bound_constants_exponential():
  t = np.linspace(0, 10, 51)
  errors = 2 * np.exp(-0.5 * t)
  fit = fit_bound_constants(errors, lambda rate: np.exp(-rate * t), np.linspace(0.1, 1.0, 10))
  assert fit['rate'] == pytest.approx(0.7)
  assert fit['constant'] == pytest.approx(2 * math.exp(2.0), rel=1e-12)
  assert np.all(errors <= fit['constant'] * np.exp(-fit['rate'] * t) * (1 + 1e-12))

def test_largest_admissible_bisects_in_log():
  best = largest_admissible(lambda x: x < 0.37, 1e-8, 1.0)
  assert best < 0.37
  assert best == pytest.approx(0.37, rel=1e-6)
  assert largest_admissible(lambda x: x < 3e-5, 1e-8, 1.0) == pytest.approx(3e-5, rel=1e-6)
  assert largest_admissible(lambda x: False, 1e-8, 1.0) is None
