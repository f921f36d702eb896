from .run import run_nonlinear
