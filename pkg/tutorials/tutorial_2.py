"""
This script shows how frames that do not come from coordinates enter the
calculus through their structure constants.
"""
# %%
## Import modules
import numpy as np
import sympy as sp
from gaugecheck.expr import COORDINATES, eval_array, format_expr
import gaugecheck.geometry as geo
from gaugecheck.utils import sample_points

x0, x1, x2, x3 = COORDINATES

# %%
## Define a non-coordinate frame
# Row i of the matrix holds the coordinate components of frame vector i, here
# Y_2 = x1 d/dx1 + d/dx2
points = sample_points(count=50, seed=1)
vectors = sp.eye(4)
vectors[2, 1] = x1
frame = geo.FrameField(vectors.tolist(), points)
frame.validate()

# %%
## Structure constants of the frame
c = geo.structure_constants(frame)
for index in np.ndindex(4, 4, 4):
    if c[index] != 0:
        print(index, format_expr(c[index]))

# %%
## Flat metric in the new frame
# Frame components g_ij = g(Y_i, Y_j) from the coordinate metric
metric = geo.MetricField.from_coordinate(sp.diag(1, -1, -1, -1), frame)
gamma = geo.christoffel(metric, frame, c)
print(geo.check_torsion(gamma, c, points))
print(geo.check_metricity(metric, gamma, frame, points))

# %%
## Curvature stays zero in any frame
R = eval_array(geo.tangent_curvature(gamma, frame, c), points)
print("Largest curvature component:", np.abs(R).max())

# %%
## Degenerate frames are rejected
vectors = sp.eye(4)
vectors[1, 1] = x1
try:
    geo.FrameField(vectors.tolist(), points).validate()
except geo.DegenerateFrameError as error:
    print(error)
