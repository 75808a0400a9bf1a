"""
This script shows how gauge maps act on a connection and checks that the
field strength transforms covariantly.
"""
# %%
## Import modules
import numpy as np
import sympy as sp
import gaugecheck.bundles as bun
from gaugecheck.expr import COORDINATES, format_expr
import gaugecheck.geometry as geo
from gaugecheck.tensor import ConnectionTriple
from gaugecheck.utils import sample_points

x0, x1, x2, x3 = COORDINATES
points = sample_points(count=50, seed=3)
frame = geo.FrameField.coordinate(points)
c = geo.structure_constants(frame)

# %%
## An SU(2) connection and gauge map
A = np.zeros((2, 4, 2), dtype=object)
A[0, 1, 1] = A[1, 1, 0] = sp.I * x2
A[0, 2, 0], A[1, 2, 1] = sp.I * x0, -sp.I * x0
conn = ConnectionTriple.real(geo.GammaField.zero(), A, points)
S = sp.Matrix([[sp.cos(x1) * sp.exp(sp.I * x0), sp.sin(x1)],
               [-sp.sin(x1), sp.cos(x1) * sp.exp(-sp.I * x0)]])
gauge = bun.GaugeMap(S)
for result in gauge.validate(points):
    print(result)

# %%
## Transform the connection and the bundle data
theta = bun.theta_params(gauge, frame)
print(format_expr(theta[0, 0, 0]))
print(bun.check_theta_forms(gauge, frame, points))
moved = bun.gauge_transform(conn, gauge, frame)
bundle = bun.gauge_bundle(bun.SU2Bundle.orthonormal(points), gauge)
print(bun.check_orthonormal(bundle, points))

# %%
## The field strength transforms with S and T
print(bun.check_gauge_covariance(conn, gauge, frame, c, points))
F = bun.bundle_curvature(moved, frame, c)
print(F.shape)

# %%
## Rank one phases leave the field strength unchanged
A = np.zeros((1, 4, 1), dtype=object)
A[0, 3, 0] = sp.I * x1
u1 = ConnectionTriple.real(geo.GammaField.zero(), A, points)
phase = bun.GaugeMap.phase(x0 * x1)
print(bun.check_abelian_invariance(u1, phase, frame, c, points))
