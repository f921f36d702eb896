from .params import unit_params, validate
