"""
This script shows how to describe bundle data of every rank and how to check
that a connection preserves it.
"""
# %%
## Import modules
import numpy as np
import sympy as sp
import gaugecheck.bundles as bun
from gaugecheck.expr import COORDINATES, format_expr
from gaugecheck.geometry import FrameField, GammaField
from gaugecheck.tensor import ConnectionTriple, reality_check
from gaugecheck.utils import sample_points

x0, x1, x2, x3 = COORDINATES
points = sample_points(count=50, seed=2)
frame = FrameField.coordinate(points)

# %%
## Rank one bundle in a frame that is not orthonormal
# D11 = exp(2 x0) forces the real part Re(A^1_01) = 1
u1 = bun.U1Bundle([["exp(2*x0)"]], samples=points)
for k in range(4):
    print(k, format_expr(bun.u1_real_part(u1, frame, k)))
A = np.zeros((1, 4, 1), dtype=object)
A[0, 0, 0] = 1 + sp.I * x3
conn = ConnectionTriple.real(GammaField.zero(), A, points)
for result in bun.connection_concordance(u1, conn, frame):
    print(result)

# %%
## Rank two bundle in an orthonormal frame
su2 = bun.SU2Bundle.orthonormal(points)
for result in su2.validate() + [bun.d_concordance(su2)]:
    print(result)

# %%
## A connection with skew-Hermitian traceless matrices is concordant
A = np.zeros((2, 4, 2), dtype=object)
A[0, 1, 1] = A[1, 1, 0] = sp.I * x2
A[0, 2, 0], A[1, 2, 1] = sp.I, -sp.I
conn = ConnectionTriple.real(GammaField.zero(), A, points)
for result in (bun.connection_concordance(su2, conn, frame)
               + bun.su_algebra_check(conn, 2, points)):
    print(result)
for result in reality_check(conn, frame, points=points):
    print(result)

# %%
## Rank three skew tensor identities
su3 = bun.SU3Bundle(sp.eye(3), 2, points)
print(format_expr(su3.d_upper[0, 1, 2]))
for result in bun.epsilon_identities(su3):
    print(result)
