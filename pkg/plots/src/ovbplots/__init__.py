"""Figure rendering for the trial-generalization toolkit's CSV outputs.

These scripts are read-only consumers: they never recompute a statistic,
they only draw the columns the analysis CLI wrote.  That split guarantees
a figure can never disagree with the numbers in the CSV next to it.
"""

__version__ = "0.1.0"

from .benchmark_scatter import plot_benchmark_scatter
from .contour import plot_contour
from .coverage import plot_coverage
from .io import SchemaError
