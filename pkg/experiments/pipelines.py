"""One pipeline per experiment, each returning (columns, rows, fits)."""
import math
import numpy as np

from scipy.linalg import expm
from plasma.darcy import darcy_check
from plasma.params import as_config, relaxation_cubic, sigma_roots
from linear.em import (
  b_propagate, em_eigenvalues, em_eigenvalues_path, em_lambda1_expansion, em_profile, em_propagate, em_vector,
  profile_discrepancy,
)
from linear.evolution import DEFAULT_THREADS, helmholtz_split, norm_series, random_grid_field
from linear.fluid import (
  fluid_eigenvalues, fluid_eigenvalues_path, fluid_matrix, fluid_profile, fluid_propagator, fluid_state,
  lambda1_fourth_from_quartic, lambda1_fourth_ratio, low_frequency_radius, richardson_fourth_order,
)
from linear.lyapunov import lyapunov_scan, pointwise_bound, sampled_equivalence, select_weights
from linear.modes import random_mode
from linear.radial import decay_quadrature, radial_data, radial_series
from nonlinear.run import run_nonlinear
from util import ResultTable
from util.fitting import decay_fit, fit_bound_constants

ENVELOPE_RATES = np.geomspace(1e-3, 1e1, 41)
POINTWISE_K = (1e-2, 1e-1, 1.0, 1e1)
LOW_FREQUENCY_K_MIN = 1e-3
LOW_FREQUENCY_T_MAX = 1e3
GENERIC_DENSITY = 1.0

DECAY_QUANTITIES = {
  'norm': ('solution', None),
  'rho_i_gap': ('gap', 'P1i'),
  'rho_e_gap': ('gap', 'P1e'),
  'u_i_gap': ('gap', 'P2i'),
  'u_e_gap': ('gap', 'P2e'),
  'e_gap': ('gap', 'P3'),
  'b_gap': ('gap', 'P4'),
}

PROFILE_QUANTITIES = {
  'rho_i': ('solution', 'P1i'),
  'n_bar': ('profile', 'P1i'),
  'rho_i_gap': ('gap', 'P1i'),
  'b': ('solution', 'P4'),
  'b_bar': ('profile', 'P4'),
  'b_gap': ('gap', 'P4'),
  'u_i_bar': ('profile', 'P2i'),
  'u_i_gap': ('gap', 'P2i'),
  'e_bar': ('profile', 'P3'),
  'e_gap': ('gap', 'P3'),
}

SPECIAL_QUANTITIES = {
  'rho_i': ('solution', 'P1i'),
  'rho_e': ('solution', 'P1e'),
}

SELECTORS_BY_NAME = { name: selector for name, (_, selector) in DECAY_QUANTITIES.items() }

EM_ERROR_COLUMNS = [
  'mode', 'k', 't', 'gap', 'b_error', 'b_bound', 'u_error', 'u_bound', 'e_error', 'e_bound', 'low_frequency',
]

def _plain(value):
  """JSON-ready copy with numpy scalars and arrays turned into Python values."""
  if isinstance(value, dict):
    return { str(k): _plain(v) for k, v in value.items() }
  if isinstance(value, (list, tuple, np.ndarray)):
    return [_plain(v) for v in value]
  if isinstance(value, (bool, np.bool_)):
    return bool(value)
  if isinstance(value, (int, np.integer)):
    return int(value)
  if isinstance(value, (float, np.floating)):
    return float(value)
  if isinstance(value, complex):
    return [value.real, value.imag]
  return value

def _decay_exponents(times, series, names, window):
  fits = {}
  for j, name in enumerate(names):
    fit = decay_fit(times, series[:, j], window)
    fits[f'{name}_exponent'] = fit['exponent']
    fits[f'{name}_residual'] = fit['residual']
  return fits

def darcy_pipeline(params, options, rng, num_threads, verbose):
  rows = darcy_check(
    params, options['b_values'], options['draws'], options['density'], rng, options['spread'], verbose=verbose,
  )
  columns = ['draw', 'b_mag', 'sandwich_residual', 'g_residual', 'u_map_residual', 'e_skew_residual', 'e_diagonal_residual']
  fits = { f'max_{name}': max(row[name] for row in rows) for name in columns[2:] }
  return columns, [[row[name] for name in columns] for row in rows], fits

def _spectrum_columns():
  columns = ['k']
  for j in range(1, 5):
    columns += [f'lambda{j}_re', f'lambda{j}_im']
  return columns + ['lambda1_fourth_scaled']

def _spectrum_rows(k_values, eigenvalues, diffusivity):
  rows = []
  for k, lams in zip(k_values, eigenvalues):
    row = [float(k)]
    for lam in lams:
      row += [float(lam.real), float(lam.imag)]
    row.append(float((lams[0].real + diffusivity * k ** 2) / k ** 4))
    rows.append(row)
  return rows

def _cubic_fits(params):
  cubic = relaxation_cubic(params)
  sigma = sigma_roots(cubic)['sigma']
  return {
    'cubic_branch': cubic['branch'],
    'cubic_discriminant': cubic['discriminant'],
    'sigma_re': [s.real for s in sigma],
    'sigma_im': [s.imag for s in sigma],
  }

def high_frequency_envelope(params, r0, samples):
  """Fit |exp(tA(k))| <= C exp(-lam t / |k|^2) on |k| in [max(r0, 1), 10 max(r0, 1)]."""
  k_lo = max(r0, 1.0)
  k_values = np.geomspace(k_lo, 10 * k_lo, 5)
  fractions = np.linspace(0.0, 10.0, samples)
  errors = np.zeros((len(k_values), samples))
  exponents = np.zeros((len(k_values), samples))
  for a, k in enumerate(k_values):
    times = fractions * k ** 2
    mat = fluid_matrix(params, k)
    for b, t in enumerate(times):
      errors[a, b] = np.linalg.norm(expm(t * mat), 2)
    exponents[a] = times / k ** 2
  return fit_bound_constants(errors, lambda rate: np.exp(-rate * exponents), ENVELOPE_RATES)

def low_frequency_envelope(k, t):
  """rate -> |k| exp(-rate |k|^2 t) + exp(-rate t) on sample grids k, t."""
  return lambda rate: k * np.exp(-rate * k ** 2 * t) + np.exp(-rate * t)

def transverse_envelope(k, t):
  """rate -> |k|^2 exp(-rate |k|^2 t) + exp(-rate t) on sample grids k, t."""
  return lambda rate: k ** 2 * np.exp(-rate * k ** 2 * t) + np.exp(-rate * t)

def density_error_fit(params, r0, samples, rng, count=6):
  """Fit |rho_alpha(t) - rho_bar(t)| <= C (|k| e^(-lam |k|^2 t) + e^(-lam t)) |U_par0| for |k| <= r0."""
  k_values = np.geomspace(min(LOW_FREQUENCY_K_MIN, r0), r0, count)
  times = np.linspace(0.0, LOW_FREQUENCY_T_MAX, samples)
  errors = np.zeros((count, samples))
  for a, k in enumerate(k_values):
    vec = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    state0 = fluid_state(vec, k)
    for b, (t, prop) in enumerate(zip(times, fluid_propagator(params, k, times))):
      out = prop @ vec
      rho_bar = fluid_profile(params, state0, t)[0]
      errors[a, b] = max(abs(out[0] - rho_bar), abs(out[1] - rho_bar)) / np.linalg.norm(vec)
  kk, tt = np.meshgrid(k_values, times, indexing='ij')
  return fit_bound_constants(errors, low_frequency_envelope(kk, tt), ENVELOPE_RATES)

def fluid_spectrum_pipeline(params, options, rng, num_threads, verbose):
  k_values = np.geomspace(options['k_min'], options['k_max'], options['k_count'])
  eigenvalues = fluid_eigenvalues_path(params, k_values)
  expansion = lambda1_fourth_ratio(params)
  richardson = richardson_fourth_order(
    lambda k: fluid_eigenvalues(params, k)[0], -params['mu1'], options['richardson_k0'], options['levels'],
  )
  r0 = low_frequency_radius(params, 'fluid')
  envelope = high_frequency_envelope(params, r0, options['envelope_times'])
  density = density_error_fit(params, r0, options['envelope_times'], rng)
  fits = {
    'mu1': params['mu1'],
    'fourth_ratio': expansion['fourth_ratio'],
    'fourth_order': expansion['fourth_order'],
    'fourth_order_quartic': lambda1_fourth_from_quartic(params),
    'fourth_order_richardson': richardson,
    'richardson_relative_gap': abs(richardson - expansion['fourth_order']) / abs(expansion['fourth_order']),
    'r0': r0,
    'high_frequency_constant': envelope['constant'],
    'high_frequency_rate': envelope['rate'],
    'density_error_constant': density['constant'],
    'density_error_rate': density['rate'],
  }
  fits.update(_cubic_fits(params))
  return _spectrum_columns(), _spectrum_rows(k_values, eigenvalues, params['mu1']), fits

def em_spectrum_pipeline(params, options, rng, num_threads, verbose):
  k_values = np.geomspace(options['k_min'], options['k_max'], options['k_count'])
  eigenvalues = em_eigenvalues_path(params, k_values)
  _, fourth = em_lambda1_expansion(params)
  richardson = richardson_fourth_order(
    lambda k: em_eigenvalues(params, k)[0], -params['mu2'], options['richardson_k0'], options['levels'],
  )
  discrepancy = profile_discrepancy(params)
  fits = {
    'mu2': params['mu2'],
    'fourth_order': fourth,
    'fourth_order_richardson': richardson,
    'richardson_relative_gap': abs(richardson - fourth) / max(abs(fourth), np.finfo(float).tiny),
    'r0': low_frequency_radius(params, 'em'),
    'profile_relative_gap': discrepancy['relative_gap'],
  }
  fits.update(_cubic_fits(params))
  return _spectrum_columns(), _spectrum_rows(k_values, eigenvalues, params['mu2']), fits

def em_error_pipeline(params, options, rng, num_threads, verbose):
  """Vandermonde B(t) against the matrix exponential, and profile errors of (u, E, B) on random modes."""
  times = np.linspace(0.0, options['t_max'], options['t_count'])
  log_lo, log_hi = math.log(options['k_min']), math.log(options['k_max'])
  r0 = low_frequency_radius(params, 'em')
  samples = []
  for mode in range(options['modes']):
    direction = rng.standard_normal(3)
    k_vec = math.exp(rng.uniform(log_lo, log_hi)) * direction / np.linalg.norm(direction)
    k_mag = float(np.linalg.norm(k_vec))
    _, _, em0 = helmholtz_split(random_mode(params, k_vec, rng))
    scale = np.linalg.norm(em_vector(em0))
    closed = b_propagate(params, em0, times)
    for t, b in zip(times, closed):
      exact = em_propagate(params, em0, t)
      u_i_bar, u_e_bar, e_bar, b_bar = em_profile(params, em0['b'], k_vec, t)
      u_error = max(np.linalg.norm(exact['u_i_perp'] - u_i_bar), np.linalg.norm(exact['u_e_perp'] - u_e_bar))
      samples.append({
        'mode': mode, 'k': k_mag, 't': float(t),
        'gap': float(np.linalg.norm(b - exact['b']) / scale),
        'b_error': float(np.linalg.norm(exact['b'] - b_bar) / scale),
        'u_error': float(u_error / scale),
        'e_error': float(np.linalg.norm(exact['e_perp'] - e_bar) / scale),
        'low_frequency': k_mag <= r0,
      })

  low = [s for s in samples if s['low_frequency']]
  k_low = np.array([s['k'] for s in low])
  t_low = np.array([s['t'] for s in low])
  fits = {
    'max_gap': max(s['gap'] for s in samples) if samples else 0.0,
    'r0': r0,
    'bound_samples': len(low),
  }
  for name, envelope in (('b', low_frequency_envelope), ('u', transverse_envelope), ('e', transverse_envelope)):
    bound = fit_bound_constants([s[f'{name}_error'] for s in low], envelope(k_low, t_low), ENVELOPE_RATES)
    fits[f'{name}_bound_constant'] = bound['constant']
    fits[f'{name}_bound_rate'] = bound['rate']
    for s in samples:
      s[f'{name}_bound'] = bound['constant'] * float(envelope(s['k'], s['t'])(bound['rate']))
  rows = [[s[col] for col in EM_ERROR_COLUMNS] for s in samples]
  return list(EM_ERROR_COLUMNS), rows, fits

def lyapunov_pipeline(params, options, rng, num_threads, verbose):
  weights = select_weights(params, verbose=verbose)
  k_values = np.geomspace(options['k_min'], options['k_max'], options['k_count'])
  t_grid = np.linspace(0.0, options['t_max'], options['t_count'])
  reports = lyapunov_scan(params, weights, k_values, rng, t_grid, num_threads, verbose)
  rows = [
    [r['k_mag'], r['lambda_hat'], r['exact_rate'], r['equivalence_ratio'], bool(r['monotone'])]
    for r in reports
  ]
  fits = {
    'kappa1': weights['kappa1'],
    'kappa2': weights['kappa2'],
    'min_lambda_hat': min(r['lambda_hat'] for r in reports),
    'min_exact_rate': min(r['exact_rate'] for r in reports),
    'max_equivalence_ratio': max(r['equivalence_ratio'] for r in reports),
    'all_monotone': all(r['monotone'] for r in reports),
  }
  if options['draws']:
    lo, hi = sampled_equivalence(params, weights, rng, options['draws'], (options['k_min'], options['k_max']))
    fits['sampled_equivalence'] = [lo, hi]
  fits['pointwise_bound'] = pointwise_bound(params, weights, POINTWISE_K, t_grid, rng)
  return ['k', 'lambda_hat', 'exact_rate', 'equivalence_ratio', 'monotone'], rows, fits

def _radial_run(params, options, quantities, field0=None, verbose=False):
  times = np.geomspace(options['t_min'], options['t_max'], options['t_count'])
  if field0 is None:
    quadrature = decay_quadrature(params, options['t_min'], options['nodes'])
    field0 = radial_data(params, quadrature, width=options['width'])
  series = radial_series(params, field0, times, quantities, options['convention'], verbose)
  return times, series

def _grid_decay(params, options, rng, verbose):
  field0 = random_grid_field(params, options['grid_size'], options['box_length'], 1.0, rng, options['width'])
  times = np.geomspace(options['t_min'], options['t_max'], options['t_count'])
  solution = norm_series(params, field0, times, [None], verbose=verbose)
  gaps = norm_series(
    params, field0, times, [SELECTORS_BY_NAME[name] for name in list(DECAY_QUANTITIES)[1:]], profiles=True,
    convention=options['convention'], verbose=verbose,
  )
  return times, np.hstack([solution, gaps])

def linear_decay_pipeline(params, options, rng, num_threads, verbose):
  """Norm and profile-gap decay; fitted exponents only for the radial back end."""
  names = list(DECAY_QUANTITIES)
  window = (options['t_min'], options['t_max'])
  if options['backend'] == 'grid':
    times, series = _grid_decay(params, options, rng, verbose)
    fits = { 'backend': 'grid' }
  else:
    times, series = _radial_run(params, options, DECAY_QUANTITIES, verbose=verbose)
    fits = { 'backend': 'radial' }
    fits.update(_decay_exponents(times, series, names, window))
  rows = [[float(t)] + list(map(float, row)) for t, row in zip(times, series)]
  return ['t'] + names, rows, fits

def profile_pipeline(params, options, rng, num_threads, verbose):
  names = list(PROFILE_QUANTITIES)
  times, series = _radial_run(params, options, PROFILE_QUANTITIES, verbose=verbose)
  fits = _decay_exponents(times, series, names, (options['t_min'], options['t_max']))
  fits['convention'] = options['convention']
  fits.update(profile_discrepancy(params))
  rows = [[float(t)] + list(map(float, row)) for t, row in zip(times, series)]
  return ['t'] + names, rows, fits

def special_pipeline(params, options, rng, num_threads, verbose):
  """Divergence-form data against charge-neutral generic data with the same envelope."""
  quadrature = decay_quadrature(params, options['t_min'], options['nodes'])
  special = radial_data(
    params, quadrature, { 'f_i': options['f_i'], 'f_e': options['f_e'] }, options['width'], special=True,
  )
  generic = radial_data(
    params, quadrature, { 'rho_i': GENERIC_DENSITY, 'rho_e': GENERIC_DENSITY }, options['width'],
  )
  times, special_series = _radial_run(params, options, SPECIAL_QUANTITIES, special, verbose)
  _, generic_series = _radial_run(params, options, SPECIAL_QUANTITIES, generic, verbose)
  series = np.hstack([special_series, generic_series])
  names = ['special_rho_i', 'special_rho_e', 'generic_rho_i', 'generic_rho_e']
  fits = _decay_exponents(times, series, names, (options['t_min'], options['t_max']))
  fits['extra_decay_i'] = fits['generic_rho_i_exponent'] - fits['special_rho_i_exponent']
  fits['extra_decay_e'] = fits['generic_rho_e_exponent'] - fits['special_rho_e_exponent']
  rows = [[float(t)] + list(map(float, row)) for t, row in zip(times, series)]
  return ['t'] + names, rows, fits

def nonlinear_pipeline(params, options, rng, num_threads, verbose):
  result = run_nonlinear(params, options, rng, verbose, num_threads)
  columns = result['columns']
  rows = result['rows']
  fits = {
    'kappas': result['kappas'],
    'data_order': result['data_order'],
    'data_size': result['data_size'],
    'energy_fit': result['energy_fit'],
    'max_gauss_e': float(np.max(rows[:, columns.index('gauss_e')])),
    'max_gauss_b': float(np.max(rows[:, columns.index('gauss_b')])),
    'min_density': float(np.min(rows[:, columns.index('min_density')])),
  }
  return columns, [list(map(float, row)) for row in rows], fits

PIPELINES = {
  'darcy-check': darcy_pipeline,
  'fluid-spectrum': fluid_spectrum_pipeline,
  'em-spectrum': em_spectrum_pipeline,
  'em-error': em_error_pipeline,
  'lyapunov-check': lyapunov_pipeline,
  'linear-decay': linear_decay_pipeline,
  'profile-convergence': profile_pipeline,
  'special-data': special_pipeline,
  'nonlinear-run': nonlinear_pipeline,
}

def run_experiment(config, num_threads=DEFAULT_THREADS, verbose=False):
  """Run the configured experiment; the same config and seed give the same table."""
  rng = np.random.default_rng(config['seed'])
  params = config['params']
  columns, rows, fits = PIPELINES[config['experiment']](params, config['options'], rng, num_threads, verbose)
  header = {
    'experiment': config['experiment'],
    'params': as_config(params),
    'seed': config['seed'],
    'config': _plain({
      'experiment': config['experiment'],
      'params': as_config(params),
      'options': config['options'],
      'seed': config['seed'],
    }),
  }
  return ResultTable(columns=columns, rows=rows, header=header, fits=_plain(fits))
