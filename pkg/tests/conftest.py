import json
import numpy as np
import pytest

from plasma.params import unit_params, validate

UNIT_CONFIG_PARAMS = { 'm_i': 1, 'm_e': 1, 'T_i': 1, 'T_e': 1, 'nu_i': 1, 'nu_e': 1, 'e': 1, 'c': 1 }

@pytest.fixture
def params():
  return unit_params()

@pytest.fixture
def mass_ratio_params():
  """Electron-ion mass ratio 1/1836 with the remaining parameters at 1."""
  return validate({ 'm_i': 1.0, 'm_e': 1 / 1836, 'T_i': 1.0, 'T_e': 1.0, 'nu_i': 1.0, 'nu_e': 1.0, 'e': 1.0, 'c': 1.0 })

@pytest.fixture
def rng():
  return np.random.default_rng(12345)

@pytest.fixture
def config_text():
  """Builds indented JSON config text for an experiment with unit parameters."""
  def build(experiment, options=None, seed=0, **extra):
    payload = { 'experiment': experiment, 'params': dict(UNIT_CONFIG_PARAMS), 'seed': seed }
    if options:
      payload['options'] = options
    payload.update(extra)
    return json.dumps(payload, indent=2)
  return build
