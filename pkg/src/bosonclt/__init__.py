"""Mean-field bosonic dynamics, Bogoliubov fluctuations and their central limit theorem on a lattice."""
__version__ = "0.1.0"

from .grid import Grid, PairPotential, WaveFunction, conjugate_J, convolve, laplacian_apply, make_potential
from .kernels import BACKEND
