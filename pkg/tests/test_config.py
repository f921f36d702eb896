import json
import pytest

from experiments.config import EXPERIMENTS, default_options, line_of, parse_config
from util.errors import MissingKey, NonPositiveParameter, TypeMismatch, UnknownKey

def test_minimal_config_gets_defaults(config_text):
  config = parse_config(config_text('fluid-spectrum'))
  assert config['experiment'] == 'fluid-spectrum'
  assert config['out'] == '-' and config['seed'] == 0
  assert config['options'] == default_options('fluid-spectrum')
  assert config['params']['e_charge'] == 1.0 and config['params']['c_light'] == 1.0

def test_every_experiment_parses(config_text):
  for experiment in EXPERIMENTS:
    assert parse_config(config_text(experiment))['experiment'] == experiment

def test_options_override_defaults(config_text):
  config = parse_config(config_text('linear-decay', { 'backend': 'grid', 'width': 1, 'nodes': 64 }))
  assert config['options']['backend'] == 'grid'
  assert config['options']['width'] == 1.0 and isinstance(config['options']['width'], float)
  assert config['options']['nodes'] == 64

def test_missing_experiment():
  text = json.dumps({ 'params': { 'm_i': 1 } })
  with pytest.raises(MissingKey):
    parse_config(text)

def test_missing_parameter(config_text):
  payload = json.loads(config_text('darcy-check'))
  del payload['params']['nu_e']
  with pytest.raises(MissingKey, match='nu_e'):
    parse_config(json.dumps(payload, indent=2))

def test_unknown_keys_report_their_line(config_text):
  text = config_text('darcy-check', colour='blue')
  with pytest.raises(UnknownKey) as info:
    parse_config(text)
  assert info.value.line == line_of(text, 'colour') > 1
  assert f'(line {info.value.line})' in str(info.value)
  with pytest.raises(UnknownKey):
    parse_config(config_text('darcy-check', { 'resolution': 3 }))

def test_bad_option_values(config_text):
  with pytest.raises(TypeMismatch):
    parse_config(config_text('nonlinear-run', { 'grid_size': -4 }))
  with pytest.raises(TypeMismatch):
    parse_config(config_text('nonlinear-run', { 'dt': 0 }))
  with pytest.raises(TypeMismatch):
    parse_config(config_text('nonlinear-run', { 'sources': 'yes' }))
  with pytest.raises(TypeMismatch):
    parse_config(config_text('nonlinear-run', { 'kappa_scale': -0.1 }))
  with pytest.raises(TypeMismatch):
    parse_config(config_text('profile-convergence', { 'convention': 'other' }))
  with pytest.raises(TypeMismatch):
    parse_config(config_text('fluid-spectrum', seed=-1))
  with pytest.raises(TypeMismatch):
    parse_config(config_text('no-such-experiment'))

def test_bad_parameter_reports_line(config_text):
  payload = json.loads(config_text('darcy-check'))
  payload['params']['T_e'] = -1.0
  text = json.dumps(payload, indent=2)
  with pytest.raises(NonPositiveParameter) as info:
    parse_config(text)
  assert info.value.name == 'T_e'
  assert info.value.line == line_of(text, 'T_e')

def test_invalid_json():
  with pytest.raises(TypeMismatch) as info:
    parse_config('{\n  "experiment": "darcy-check",\n  oops\n}')
  assert info.value.line == 3
  assert info.value.exit_code == 1
