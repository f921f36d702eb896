import csv
import json
import sys

from typing import TypedDict
from util.errors import IoFailure

VERSION = '0.1'
FLOAT_FORMAT = '%.17g'

class ResultTable(TypedDict):
  columns: list
  rows: list
  header: dict
  fits: dict

def _cell(value):
  if isinstance(value, bool):
    return str(value).lower()
  if isinstance(value, (int, str)):
    return str(value)
  return FLOAT_FORMAT % float(value)

def header_lines(table):
  """'#'-prefixed provenance lines: experiment, params, seed, version, config and fits."""
  header = table['header']
  lines = [f'# experiment: {header["experiment"]}']
  lines.append('# params: ' + json.dumps(header['params'], sort_keys=True))
  lines.append(f'# seed: {header["seed"]}')
  lines.append(f'# version: {VERSION}')
  lines.append('# config: ' + json.dumps(header['config'], sort_keys=True))
  if table['fits']:
    lines.append('# fits: ' + json.dumps(table['fits'], sort_keys=True))
  return lines

def write_table(table, out_file):
  for line in header_lines(table):
    out_file.write(line + '\n')
  writer = csv.writer(out_file, quoting=csv.QUOTE_MINIMAL, lineterminator='\n')
  writer.writerow(table['columns'])
  for row in table['rows']:
    assert len(row) == len(table['columns'])
    writer.writerow([_cell(v) for v in row])

def emit(table, path):
  """Write a ResultTable as CSV; path '-' writes to stdout."""
  if path == '-':
    write_table(table, sys.stdout)
    return
  try:
    with open(path, 'w', newline='') as out_file:
      write_table(table, out_file)
  except OSError as err:
    raise IoFailure(f'cannot write {path}: {err.strerror}') from err

def read_table(path):
  """Read an emitted CSV back: (header dict, columns, rows of floats)."""
  header = {}
  try:
    with open(path, newline='') as csvfile:
      lines = csvfile.read().splitlines()
  except OSError as err:
    raise IoFailure(f'cannot read {path}: {err.strerror}') from err

  body = []
  for line in lines:
    if line.startswith('# '):
      key, _, value = line[2:].partition(': ')
      header[key] = value
    else:
      body.append(line)
  for key in ('params', 'config', 'fits'):
    if key in header:
      header[key] = json.loads(header[key])

  reader = csv.reader(body)
  columns = next(reader, [])
  rows = [[_parse(v) for v in row] for row in reader]
  return header, columns, rows

def _parse(value):
  if value in ('true', 'false'):
    return value == 'true'
  return float(value)
