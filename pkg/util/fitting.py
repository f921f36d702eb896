import math
import numpy as np

from tqdm import tqdm
from typing import TypedDict
from util.errors import InsufficientSamples, NonPositiveSample

MIN_SAMPLES = 10
DEFAULT_CONSTANT_SLACK = 10.0
DEFAULT_SEARCH_STEPS = 30

class DecayFit(TypedDict):
  exponent: float
  amplitude: float
  residual: float
  window: tuple
  samples: int
  rate_constant: float

class BoundFit(TypedDict):
  constant: float
  rate: float

def decay_fit(times, values, window=None):
  """Least-squares fit of values ~ A (1+t)^p on a time window.

  Args:
    times: sample times, t >= 0.
    values: positive sampled quantity, same length as times.
    window: (t_lo, t_hi) inclusive, or None for all samples.

  Returns:
    DecayFit with exponent p, amplitude A and the largest relative deviation of
    the samples from the fitted law.
  """
  times = np.asarray(times, dtype=float)
  values = np.asarray(values, dtype=float)
  if window is None:
    window = (float(times.min()), float(times.max()))
  mask = (times >= window[0]) & (times <= window[1])
  t, v = times[mask], values[mask]
  if len(t) < MIN_SAMPLES:
    raise InsufficientSamples(f'need >= {MIN_SAMPLES} samples in window {window}, got {len(t)}')
  bad = ~(np.isfinite(v) & (v > 0))
  if np.any(bad):
    raise NonPositiveSample(f'non-positive or non-finite sample at t = {t[bad][0]:.6g}')

  x = np.log1p(t)
  y = np.log(v)
  slope, intercept = np.polyfit(x, y, 1)
  model = np.exp(intercept + slope * x)
  residual = float(np.max(np.abs(v / model - 1.0)))
  return DecayFit(
    exponent=float(slope),
    amplitude=float(np.exp(intercept)),
    residual=residual,
    window=(float(window[0]), float(window[1])),
    samples=int(len(t)),
    rate_constant=0.0,
  )

def fit_bound_constants(errors, envelope, rates, slack=DEFAULT_CONSTANT_SLACK):
  """Constant C and rate lam such that errors <= C * envelope(lam) on all samples.

  For each candidate rate the smallest admissible constant is the largest
  ratio errors / envelope(rate). The fit keeps the largest rate whose constant
  stays within `slack` times the constant at the smallest rate.

  Args:
    errors: array of non-negative sampled errors.
    envelope: callable rate -> array broadcastable to errors, strictly positive.
    rates: increasing candidate rates, all > 0.
  """
  errors = np.asarray(errors, dtype=float)
  rates = np.sort(np.asarray(rates, dtype=float))
  constants = []
  for rate in rates:
    env = np.broadcast_to(envelope(rate), errors.shape)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
      ratio = np.where(errors > 0, errors / env, 0.0)
    constants.append(float(np.max(ratio)) if ratio.size else 0.0)
  constants = np.array(constants)

  ceiling = slack * max(constants[0], np.finfo(float).tiny)
  admissible = np.where(np.isfinite(constants) & (constants <= ceiling))[0]
  best = admissible[-1] if len(admissible) else 0
  constant = constants[best]
  return BoundFit(constant=float(constant), rate=float(rates[best]))

def largest_admissible(predicate, lo, hi, steps=DEFAULT_SEARCH_STEPS, verbose=False):
  """Largest x in [lo, hi) with predicate(x) true, or None.

  Scans down from hi by decades to the first passing value, then bisects in
  log x between it and the failing decade above.
  """
  upper = hi
  x = hi / 10
  found = None
  while x >= lo:
    if predicate(x):
      found = x
      break
    upper = x
    x /= 10
  if found is None:
    if not predicate(lo):
      return None
    found = lo
  a, b = math.log(found), math.log(upper)
  for _ in tqdm(range(steps), disable=not verbose):
    mid = 0.5 * (a + b)
    if predicate(math.exp(mid)):
      a = mid
    else:
      b = mid
  return math.exp(a)
