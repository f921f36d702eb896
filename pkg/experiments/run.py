import argparse
import sys

from experiments.config import EXPERIMENTS, parse_config
from experiments.pipelines import run_experiment
from linear.evolution import DEFAULT_THREADS
from util import emit
from util.errors import IoFailure, LabError, TypeMismatch

def load_config(path):
  try:
    with open(path, 'r') as f:
      return parse_config(f.read())
  except OSError as err:
    raise IoFailure(f'cannot read {path}: {err.strerror}') from err

def run(experiment, config_path, out=None, seed=None, num_threads=DEFAULT_THREADS, verbose=False):
  config = load_config(config_path)
  if config['experiment'] != experiment:
    raise TypeMismatch(f'config {config_path} is for {config["experiment"]}, not {experiment}')
  if out is not None:
    config['out'] = out
  if seed is not None:
    if seed < 0:
      raise TypeMismatch(f'seed must be a non-negative integer, got {seed}')
    config['seed'] = seed
  if verbose:
    print(f'running {experiment} with seed {config["seed"]}', file=sys.stderr)
  table = run_experiment(config, num_threads, verbose)
  emit(table, config['out'])
  if verbose and config['out'] != '-':
    print(f'wrote {len(table["rows"])} rows to {config["out"]}', file=sys.stderr)
  return table

def main(argv=None):
  parser = argparse.ArgumentParser(prog='euler-maxwell-lab')
  parser.add_argument('experiment', choices=EXPERIMENTS)
  parser.add_argument('--config', type=str, required=True)
  parser.add_argument('-o', '--out', type=str, default=None)
  parser.add_argument('-s', '--seed', type=int, default=None)
  parser.add_argument('-c', '--num_threads', type=int, default=DEFAULT_THREADS)
  parser.add_argument('-v', '--verbose', action='store_true')
  args = parser.parse_args(argv)

  try:
    run(args.experiment, args.config, args.out, args.seed, args.num_threads, args.verbose)
  except LabError as err:
    print(f'error: {err}', file=sys.stderr)
    return err.exit_code
  return 0

if __name__ == '__main__':
  sys.exit(main())
