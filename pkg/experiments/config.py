import argparse
import json
import math

from typing import TypedDict
from plasma.params import CONFIG_ALIASES, PARAM_NAMES, PlasmaParams, validate
from util.errors import MissingKey, NonPositiveParameter, TypeMismatch, UnknownKey

DEFAULT_OUT = '-'
DEFAULT_SEED = 0
TOP_LEVEL_KEYS = ('experiment', 'params', 'options', 'out', 'seed')

# option name -> (type, default, must be positive)
_DECAY_WINDOW = {
  'nodes': (int, 512, True),
  'width': (float, 0.3, True),
  't_min': (float, 100.0, True),
  't_max': (float, 1e4, True),
  't_count': (int, 40, True),
  'convention': (str, 'darcy', False),
}

OPTION_SCHEMA = {
  'darcy-check': {
    'draws': (int, 100, False),
    'b_values': (list, [0.0, 1.0, 1000.0], False),
    'density': (float, 1.0, True),
    'spread': (float, 2.0, True),
  },
  'fluid-spectrum': {
    'k_min': (float, 1e-4, True),
    'k_max': (float, 1e2, True),
    'k_count': (int, 31, True),
    'richardson_k0': (float, 1e-2, True),
    'levels': (int, 7, True),
    'envelope_times': (int, 21, True),
  },
  'em-spectrum': {
    'k_min': (float, 1e-4, True),
    'k_max': (float, 1e2, True),
    'k_count': (int, 31, True),
    'richardson_k0': (float, 1e-2, True),
    'levels': (int, 7, True),
  },
  'em-error': {
    'modes': (int, 50, True),
    'k_min': (float, 1e-2, True),
    'k_max': (float, 1e1, True),
    't_max': (float, 100.0, True),
    't_count': (int, 21, True),
  },
  'lyapunov-check': {
    'k_min': (float, 1e-2, True),
    'k_max': (float, 1e2, True),
    'k_count': (int, 25, True),
    't_max': (float, 5.0, True),
    't_count': (int, 11, True),
    'draws': (int, 1000, False),
  },
  'linear-decay': dict(_DECAY_WINDOW, backend=(str, 'radial', False), grid_size=(int, 16, True), box_length=(float, 20.0, True)),
  'profile-convergence': dict(_DECAY_WINDOW),
  'special-data': dict(_DECAY_WINDOW, f_i=(float, 1.0, False), f_e=(float, 0.5, False)),
  'nonlinear-run': {
    'grid_size': (int, 16, True),
    'box_length': (float, 20.0, True),
    'epsilon': (float, 1e-3, True),
    't_end': (float, 20.0, True),
    'dt': (float, 0.05, True),
    'sobolev_order': (int, 3, True),
    'record_every': (int, 10, True),
    'width': (float, 2.0, True),
    'sources': (bool, True, False),
    'kappa_scale': (float, 0.0, False),
  },
}

CHOICES = {
  'convention': ('darcy', 'literal'),
  'backend': ('radial', 'grid'),
}

EXPERIMENTS = list(OPTION_SCHEMA)

class ExperimentConfig(TypedDict):
  experiment: str
  params: PlasmaParams
  options: dict
  out: str
  seed: int

def line_of(text, key):
  """1-based line of the first occurrence of "key" in the config text, or None."""
  needle = f'"{key}"'
  for idx, line in enumerate(text.splitlines()):
    if needle in line:
      return idx + 1
  return None

def _is_number(value):
  return isinstance(value, (int, float)) and not isinstance(value, bool)

def _check_option(name, value, entry, line):
  kind, _, positive = entry
  if kind is float:
    ok = _is_number(value) and math.isfinite(value)
  elif kind is int:
    ok = isinstance(value, int) and not isinstance(value, bool)
  elif kind is list:
    ok = isinstance(value, list) and all(_is_number(v) and math.isfinite(v) for v in value)
  else:
    ok = isinstance(value, kind)
  if not ok:
    raise TypeMismatch(f'option {name} must be of type {kind.__name__}, got {value!r}', line=line)
  if kind is int and value < 0:
    raise TypeMismatch(f'option {name} must be >= 0, got {value!r}', line=line)
  if positive and value <= 0:
    raise TypeMismatch(f'option {name} must be > 0, got {value!r}', line=line)
  if name in CHOICES and value not in CHOICES[name]:
    raise TypeMismatch(f'option {name} must be one of {CHOICES[name]}, got {value!r}', line=line)
  return float(value) if kind is float else value

def default_options(experiment):
  return { name: entry[1] for name, entry in OPTION_SCHEMA[experiment].items() }

def parse_params(raw, text=''):
  if not isinstance(raw, dict):
    raise TypeMismatch('params must be an object', line=line_of(text, 'params'))
  for key in raw:
    if CONFIG_ALIASES.get(key, key) not in PARAM_NAMES:
      raise UnknownKey(f'unknown parameter: {key}', line=line_of(text, key))
  for name in PARAM_NAMES:
    key = next((k for k, v in CONFIG_ALIASES.items() if v == name), name)
    if key not in raw and name not in raw:
      raise MissingKey(f'missing parameter: {key}', line=line_of(text, 'params'))
  try:
    return validate(raw)
  except NonPositiveParameter as err:
    key = next((k for k, v in CONFIG_ALIASES.items() if v == err.name), err.name)
    value = raw.get(key, raw.get(err.name))
    raise NonPositiveParameter(err.name, value, line=line_of(text, key)) from err

def parse_config(text):
  """Validated ExperimentConfig from JSON text; errors carry the offending line."""
  try:
    raw = json.loads(text)
  except json.JSONDecodeError as err:
    raise TypeMismatch(f'invalid JSON: {err.msg}', line=err.lineno) from err
  if not isinstance(raw, dict):
    raise TypeMismatch('config must be a JSON object', line=1)

  for key in raw:
    if key not in TOP_LEVEL_KEYS:
      raise UnknownKey(f'unknown key: {key}', line=line_of(text, key))
  for key in ('experiment', 'params'):
    if key not in raw:
      raise MissingKey(f'missing key: {key}')

  experiment = raw['experiment']
  if experiment not in OPTION_SCHEMA:
    raise TypeMismatch(
      f'experiment must be one of {", ".join(EXPERIMENTS)}, got {experiment!r}', line=line_of(text, 'experiment'),
    )
  params = parse_params(raw['params'], text)

  schema = OPTION_SCHEMA[experiment]
  given = raw.get('options', {})
  if not isinstance(given, dict):
    raise TypeMismatch('options must be an object', line=line_of(text, 'options'))
  options = default_options(experiment)
  for name, value in given.items():
    if name not in schema:
      raise UnknownKey(f'unknown option for {experiment}: {name}', line=line_of(text, name))
    options[name] = _check_option(name, value, schema[name], line_of(text, name))
  if options.get('kappa_scale', 0.0) < 0:
    value = options['kappa_scale']
    raise TypeMismatch(f'option kappa_scale must be >= 0, got {value!r}', line=line_of(text, 'kappa_scale'))

  out = raw.get('out', DEFAULT_OUT)
  if not isinstance(out, str) or not out:
    raise TypeMismatch(f'out must be a non-empty string, got {out!r}', line=line_of(text, 'out'))
  seed = raw.get('seed', DEFAULT_SEED)
  if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
    raise TypeMismatch(f'seed must be a non-negative integer, got {seed!r}', line=line_of(text, 'seed'))

  return ExperimentConfig(experiment=experiment, params=params, options=options, out=out, seed=seed)

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('config', type=str)
  args = parser.parse_args()

  with open(args.config, 'r') as f:
    config = parse_config(f.read())
  print(json.dumps({ k: v for k, v in config.items() if k != 'params' }, indent=2))
