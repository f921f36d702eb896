from .modes import full_matrix, random_mode
from .evolution import linear_evolve, mode_propagate
