"""Numerical lab for complex Henon-type maps: Green functions, currents, periodic points."""
import os

# prefer OpenMP over an outdated TBB, which numba would try first and warn about
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp tbb workqueue")

__version__ = "0.1.0"
