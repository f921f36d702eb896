class LabError(Exception):
  exit_code = 2

class ValidationError(LabError, ValueError):
  exit_code = 1

  def __init__(self, message, line=None):
    self.line = line
    if line is not None:
      message = f'{message} (line {line})'
    super().__init__(message)

class NumericalFailure(LabError, ArithmeticError):
  exit_code = 2

class NonPositiveParameter(ValidationError):
  def __init__(self, name, value=None, line=None):
    self.name = name
    message = f'parameter {name} must be finite and > 0'
    if value is not None:
      message += f', got {value!r}'
    super().__init__(message, line=line)

class UnknownKey(ValidationError):
  pass

class MissingKey(ValidationError):
  pass

class TypeMismatch(ValidationError):
  pass

class ConstraintViolation(ValidationError):
  pass

class InsufficientSamples(ValidationError):
  pass

class IoFailure(ValidationError):
  pass

class StepTooLarge(ValidationError):
  pass

class DegenerateSpectrum(NumericalFailure):
  pass

class ZeroWavenumber(NumericalFailure):
  def __init__(self, message='operation undefined at k = 0'):
    super().__init__(message)

class SingularSum(NumericalFailure):
  pass

class WeightSearchFailed(NumericalFailure):
  pass

class VacuumReached(NumericalFailure):
  pass

class StepRejected(NumericalFailure):
  pass

class NonPositiveSample(NumericalFailure):
  pass
