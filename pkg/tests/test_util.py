import json
import pytest

from util import VERSION, ResultTable, emit, header_lines, read_table
from util.errors import IoFailure

def make_table(rows):
  params = { 'm_i': 1.0, 'm_e': 1.0, 'T_i': 1.0, 'T_e': 1.0, 'nu_i': 1.0, 'nu_e': 1.0, 'e': 1.0, 'c': 1.0 }
  return ResultTable(
    columns=['k', 'value', 'monotone'],
    rows=rows,
    header={
      'experiment': 'lyapunov-check',
      'params': params,
      'seed': 3,
      'config': { 'experiment': 'lyapunov-check', 'params': params, 'options': {}, 'seed': 3 },
    },
    fits={ 'rate': 0.25 },
  )

def test_emit_and_read_back(tmp_path):
  path = tmp_path / 'out.csv'
  emit(make_table([[0.1, 1 / 3, True], [2, -1e-300, False]]), str(path))
  header, columns, rows = read_table(str(path))
  assert columns == ['k', 'value', 'monotone']
  assert rows == [[0.1, 1 / 3, True], [2.0, -1e-300, False]]
  assert header['experiment'] == 'lyapunov-check'
  assert header['version'] == VERSION
  assert header['seed'] == '3'
  assert header['fits'] == { 'rate': 0.25 }
  assert len(header['params']) == 8

def test_empty_table_has_header_only(tmp_path):
  path = tmp_path / 'empty.csv'
  emit(make_table([]), str(path))
  text = path.read_text()
  assert text.splitlines()[-1] == 'k,value,monotone'
  _, columns, rows = read_table(str(path))
  assert columns == ['k', 'value', 'monotone'] and rows == []

def test_header_lines_are_json():
  lines = header_lines(make_table([]))
  assert all(line.startswith('# ') for line in lines)
  config = json.loads(lines[4].partition(': ')[2])
  assert config['seed'] == 3

def test_stdout(capsys):
  emit(make_table([[1, 2, False]]), '-')
  assert capsys.readouterr().out.splitlines()[-1] == '1,2,false'

def test_io_failures(tmp_path):
  with pytest.raises(IoFailure):
    emit(make_table([]), str(tmp_path / 'missing' / 'out.csv'))
  with pytest.raises(IoFailure):
    read_table(str(tmp_path / 'absent.csv'))
