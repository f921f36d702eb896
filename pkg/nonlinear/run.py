import argparse
import numpy as np

from tqdm import tqdm
from plasma.params import unit_params
from linear.evolution import (
  DEFAULT_THREADS, diffusion_profiles, empty_field, field_difference, gradient_norm, grid_gauss_residuals, l2_norm,
  random_grid_field,
)
from nonlinear.energy import (
  DEFAULT_ORDER, data_order, data_size, fit_energy_inequality, kappas_from_scale, linearized_energy_rate,
  select_energy_weights, sobolev_energy, sobolev_norm_sq,
)
from nonlinear.fields import min_density, to_physical
from nonlinear.stepper import full_rhs, prepare_step, step_mild
from util.errors import StepRejected

DEFAULT_GRID_SIZE = 16
DEFAULT_BOX_LENGTH = 20.0
DEFAULT_EPSILON = 1e-3
DEFAULT_T_END = 20.0
DEFAULT_DT = 0.05
DEFAULT_RECORD_EVERY = 10
DEFAULT_WIDTH = 2.0
# 0 selects the energy weights by search
DEFAULT_KAPPA_SCALE = 0.0
BLOWUP_FACTOR = 10.0
FD_STEP = 1e-5

COLUMNS = [
  't', 'norm', 'grad_norm', 'e_n', 'd_n', 'e_n_high', 'd_n_high', 'e_n_dot', 'sobolev_sq',
  'gauss_e', 'gauss_b', 'gap_linear', 'gap_profile', 'min_density',
]

def default_options():
  return {
    'grid_size': DEFAULT_GRID_SIZE,
    'box_length': DEFAULT_BOX_LENGTH,
    'epsilon': DEFAULT_EPSILON,
    't_end': DEFAULT_T_END,
    'dt': DEFAULT_DT,
    'sobolev_order': DEFAULT_ORDER,
    'record_every': DEFAULT_RECORD_EVERY,
    'width': DEFAULT_WIDTH,
    'sources': True,
    'kappa_scale': DEFAULT_KAPPA_SCALE,
  }

def energy_rate(params, field, order, kappas, mask):
  """Central difference of E_N along the right-hand side of the system."""
  rhs = full_rhs(params, field, mask)
  shifted = []
  for sign in (1, -1):
    moved = empty_field(field['grid_size'], field['box_length'])
    moved['modes'] = field['modes'] + sign * FD_STEP * rhs
    shifted.append(sobolev_energy(params, moved, order, kappas)['e_n'])
  return (shifted[0] - shifted[1]) / (2 * FD_STEP)

def initial_field(params, options, rng):
  return random_grid_field(
    params, options['grid_size'], options['box_length'], options['epsilon'], rng, options['width'],
  )

def evolve(params, field0, options, kappas=None, num_threads=DEFAULT_THREADS, verbose=False):
  """Integrate field0 to t_end, returning the recorded rows and the final field."""
  ops = prepare_step(params, options['grid_size'], options['box_length'], options['dt'], num_threads)
  order = options['sobolev_order']
  steps = int(round(options['t_end'] / options['dt']))
  field = field0
  linear = field0
  norm0 = l2_norm(field0)
  rows = []

  def record(t):
    report = sobolev_energy(params, field, order, kappas)
    gauss_e, gauss_b = grid_gauss_residuals(params, field)
    rows.append([
      t, l2_norm(field), gradient_norm(field), report['e_n'], report['d_n'], report['e_n_high'],
      report['d_n_high'],
      energy_rate(params, field, order, kappas, ops['mask']) if options['sources'] else np.nan,
      sobolev_norm_sq(params, field, order), gauss_e, gauss_b,
      l2_norm(field_difference(field, linear)),
      l2_norm(field_difference(field, diffusion_profiles(params, field0, t))),
      min_density(to_physical(field)),
    ])

  record(0.0)
  for step in tqdm(range(1, steps + 1), disable=not verbose):
    field = step_mild(params, ops, field, sources=options['sources'])
    linear = step_mild(params, ops, linear, sources=False)
    norm = l2_norm(field)
    if not np.isfinite(norm) or norm > BLOWUP_FACTOR * max(norm0, np.finfo(float).tiny):
      raise StepRejected(f'norm {norm:.3e} exceeds {BLOWUP_FACTOR:g} x initial {norm0:.3e} at step {step}')
    if step % options['record_every'] == 0 or step == steps:
      record(step * options['dt'])
  return np.array(rows), field

def run_nonlinear(params, options=None, rng=None, verbose=False, num_threads=DEFAULT_THREADS):
  """Small-data run with energy weights, data size and the fitted energy inequality."""
  opts = default_options()
  opts.update(options or {})
  rng = np.random.default_rng(0) if rng is None else rng
  field0 = initial_field(params, opts, rng)
  if opts['kappa_scale'] > 0:
    kappas = kappas_from_scale(opts['kappa_scale'])
  else:
    kappas = select_energy_weights(params, opts['sobolev_order'], verbose=verbose)
  rows, field = evolve(params, field0, opts, kappas, num_threads, verbose)
  fit = None
  if opts['sources']:
    lam = linearized_energy_rate(params, kappas, opts['sobolev_order'])
    fit = fit_energy_inequality(
      rows[:, COLUMNS.index('e_n')], rows[:, COLUMNS.index('d_n')], rows[:, COLUMNS.index('e_n_dot')], lam,
    )
  m = data_order(opts['sobolev_order'], opts['grid_size'])
  return {
    'columns': COLUMNS,
    'rows': rows,
    'kappas': kappas,
    'data_order': m,
    'data_size': data_size(field0, m),
    'energy_fit': fit,
    'final': field,
  }

if __name__ == '__main__':
  parser = argparse.ArgumentParser()
  parser.add_argument('-n', '--grid_size', type=int, default=DEFAULT_GRID_SIZE)
  parser.add_argument('-e', '--epsilon', type=float, default=DEFAULT_EPSILON)
  parser.add_argument('-t', '--t_end', type=float, default=2.0)
  parser.add_argument('-s', '--seed', type=int, default=0)
  parser.add_argument('-v', '--verbose', action='store_true')
  args = parser.parse_args()

  result = run_nonlinear(
    unit_params(),
    { 'grid_size': args.grid_size, 'epsilon': args.epsilon, 't_end': args.t_end },
    np.random.default_rng(args.seed),
    verbose=args.verbose,
  )
  print(', '.join(result['columns']))
  for row in result['rows']:
    print(', '.join(f'{v:.6e}' for v in row))
  print('energy fit:', result['energy_fit'])
