"""Figure rendering for coplanar-ba outputs.

Consumes only the benchmark's file interfaces — runs.csv / summary.csv and
hessian_*.txt pattern files — and renders paired bar charts and sparsity spy
images. Each PNG gets a .json data sidecar whose values are copied verbatim
from the source files so figures can be audited against the data.
"""

from .render import SchemaError, render_bench, render_spy

__all__ = ["SchemaError", "render_bench", "render_spy"]
