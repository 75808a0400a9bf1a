"""
This script shows how to compute the metric connection and curvature of flat
space written in polar coordinates.
"""
# %%
## Import modules
import sympy as sp
from gaugecheck.expr import COORDINATES, format_expr
import gaugecheck.geometry as geo
from gaugecheck.utils import sample_points

x0, x1, x2, x3 = COORDINATES

# %%
## Define the chart and sample points
# Coordinates (t, r, phi, z) with r kept away from the axis
box = ((-1, 1), (0.5, 1.5), (-1, 1), (-1, 1))
points = sample_points(box, count=100, seed=0)

# %%
## Define the frame and metric
frame = geo.FrameField.coordinate(points)
metric = geo.MetricField(sp.diag(1, -1, -x1**2, -1), samples=points)
for result in geo.check_metric(metric, points):
    print(result)

# %%
## Compute the connection
c = geo.structure_constants(frame)
gamma = geo.christoffel(metric, frame, c)
for index in [(2, 1, 2), (2, 2, 1), (1, 2, 2)]:
    print(index, format_expr(gamma[index]))

# %%
## Verify torsion, metricity and flatness
print(geo.check_torsion(gamma, c, points))
print(geo.check_metricity(metric, gamma, frame, points))
R = geo.tangent_curvature(gamma, frame, c)
print("Nonzero curvature components:", sum(e != 0 for e in R.ravel()))
