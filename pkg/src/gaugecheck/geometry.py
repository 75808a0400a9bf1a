# Standard Python packages
from functools import cached_property
import logging
# Non-standard Python packages
import numpy as np
import sympy as sp
# Local packages
from gaugecheck.expr import (as_expr, as_expr_array, diff_expr, eval_array,
                             ScalarExpr)
from gaugecheck.utils import (CheckResult, default_samples, DEFAULT_TOLERANCE,
                              DERIVED_TOLERANCE, residual_check)

logger = logging.getLogger(__name__)

#: Smallest admissible magnitude of a frame or metric determinant
DEGENERACY_THRESHOLD = 1e-9
#: Space-time signature as signs of the metric eigenvalues
MINKOWSKI_SIGNATURE = (1, -1, -1, -1)

###############################################################################
# Errors
###############################################################################
class DegenerateFrameError(ValueError):
    """Frame vectors are linearly dependent at a sample point"""

    def __init__(self, message: str, point=None) -> None:
        self.point = None if point is None else tuple(float(x) for x in point)
        where = "" if point is None else f" at {self.point}"
        super().__init__(f"degenerate frame: {message}{where}")

class SingularMetricError(ValueError):
    """Metric is not invertible (or not positive) at a sample point"""

    def __init__(self, message: str, point=None) -> None:
        self.point = None if point is None else tuple(float(x) for x in point)
        where = "" if point is None else f" at {self.point}"
        super().__init__(f"singular metric: {message}{where}")

def _as_points(points, fallback) -> np.ndarray:
    if points is None:
        return fallback
    return np.atleast_2d(np.asarray(points, dtype=float))

def _invert(matrix: sp.Matrix) -> sp.Matrix:
    """Exact inverse, by substitution for triangular matrices"""
    if any(matrix[i, i] == 0 for i in range(matrix.rows)):
        return matrix.inv(method="LU")
    if matrix.is_lower:
        return matrix.lower_triangular_solve(sp.eye(matrix.rows))
    if matrix.is_upper:
        return matrix.upper_triangular_solve(sp.eye(matrix.rows))
    return matrix.inv(method="LU")

###############################################################################
# FrameField
###############################################################################
class FrameField:
    """Non-holonomic tangent frame of four vector fields

    Entry ``vectors[i, j]`` is the j-th coordinate component of the i-th
    frame vector.
    """

    def __init__(self,
                 vectors,
                 samples: np.ndarray | None = None,
                 loci: tuple = (),
    ) -> None:
        """Class constructor

        Parameters
        ----------
        vectors : array_like
            4x4 components, row i holds frame vector i
        samples : np.ndarray | None
            Sample points with shape (N, 4), default sample set if None
        loci : tuple
            Excluded loci the samples were drawn around
        """
        self.vectors = as_expr_array(vectors, (4, 4))
        self.samples = _as_points(samples, default_samples())
        self.loci = tuple(loci)

    @classmethod
    def coordinate(cls,
                   samples: np.ndarray | None = None,
                   loci: tuple = (),
    ) -> 'FrameField':
        """Frame of the coordinate vector fields"""
        return cls(sp.eye(4).tolist(), samples, loci)

    def __repr__(self) -> str:
        return f"FrameField({self.vectors.tolist()})"

    @property
    def is_coordinate(self) -> bool:
        """True if the frame is the coordinate frame"""
        return all(self.vectors[i, j] == (1 if i == j else 0)
                   for i, j in np.ndindex(4, 4))

    @cached_property
    def inverse(self) -> np.ndarray:
        """Coframe matrix theta with sum_s theta[k, s] vectors[i, s] = delta"""
        if self.is_coordinate:
            return as_expr_array(sp.eye(4))
        logger.debug("Inverting frame matrix")
        matrix = sp.Matrix(4, 4, lambda s, i: self.vectors[i, s])
        return as_expr_array(_invert(matrix))

    def determinant(self, points: np.ndarray | None = None) -> np.ndarray:
        """Frame determinant at sample points"""
        points = _as_points(points, self.samples)
        return np.linalg.det(eval_array(self.vectors, points))

    def validate(self, points: np.ndarray | None = None) -> None:
        """Raise if the frame degenerates on the sample set

        A frame is degenerate where its determinant is smaller in magnitude
        than DEGENERACY_THRESHOLD. Without excluded loci the sample set is
        taken as connected, so a sign change of the determinant also marks a
        degeneracy between samples.

        Raises
        ------
        DegenerateFrameError
            If the frame degenerates
        """
        points = _as_points(points, self.samples)
        det = self.determinant(points)
        small = np.abs(det) <= DEGENERACY_THRESHOLD
        if small.any():
            row = int(np.argmax(small))
            raise DegenerateFrameError(f"determinant {abs(det[row]):.3e}",
                                       points[row])
        if not self.loci:
            sign = np.sign(det.real)
            flipped = sign != sign[0]
            if flipped.any():
                row = int(np.argmax(flipped))
                raise DegenerateFrameError("determinant changes sign",
                                           points[row])

class StructureConstants:
    """Commutator coefficients c[k, i, j] of a frame"""

    def __init__(self, components) -> None:
        self.components = as_expr_array(components, (4, 4, 4))

    def __getitem__(self, index):
        return self.components[index]

    @classmethod
    def zero(cls) -> 'StructureConstants':
        return cls(np.zeros((4, 4, 4), dtype=int))

###############################################################################
# MetricField
###############################################################################
class MetricField:
    """Frame-relative space-time metric g[i, j] with its inverse"""

    def __init__(self,
                 components,
                 inverse=None,
                 samples: np.ndarray | None = None,
                 signature: tuple = MINKOWSKI_SIGNATURE,
    ) -> None:
        """Class constructor

        Parameters
        ----------
        components : array_like
            Symmetric 4x4 components g_ij in the frame
        inverse : array_like | None
            Inverse components g^ij, computed symbolically if None
        samples : np.ndarray | None
            Sample points with shape (N, 4), default sample set if None
        signature : tuple
            Expected signs of the metric eigenvalues
        """
        self.components = as_expr_array(components, (4, 4))
        if inverse is not None:
            self.__dict__["inverse"] = as_expr_array(inverse, (4, 4))
        self.samples = _as_points(samples, default_samples())
        if len(signature) != 4 or any(s not in (1, -1) for s in signature):
            raise ValueError(f"Signature entries must be +1 or -1: {signature}")
        self.signature = tuple(signature)

    @classmethod
    def minkowski(cls, samples: np.ndarray | None = None) -> 'MetricField':
        """Flat metric diag(1, -1, -1, -1)"""
        diagonal = sp.diag(*MINKOWSKI_SIGNATURE)
        return cls(diagonal, diagonal, samples)

    @classmethod
    def from_coordinate(cls,
                        components,
                        frame: FrameField,
                        signature: tuple = MINKOWSKI_SIGNATURE,
    ) -> 'MetricField':
        """Express a metric given in coordinate components in a frame

        Parameters
        ----------
        components : array_like
            Coordinate components g_ab
        frame : FrameField
            Frame to express the metric in
        signature : tuple
            Expected signs of the metric eigenvalues

        Returns
        -------
        : MetricField
            Metric with g_ij = Y^a_i Y^b_j g_ab and its inverse
        """
        g = sp.Matrix(as_expr_array(components, (4, 4)).tolist())
        vectors = sp.Matrix(frame.vectors.tolist())
        coframe = sp.Matrix(frame.inverse.tolist())
        frame_g = vectors * g * vectors.T
        frame_inverse = coframe * _invert(g) * coframe.T
        return cls(frame_g, frame_inverse, frame.samples, signature)

    @cached_property
    def inverse(self) -> np.ndarray:
        """Inverse components g^ij"""
        logger.debug("Inverting metric matrix")
        return as_expr_array(_invert(sp.Matrix(self.components.tolist())))

    def validate(self, points: np.ndarray | None = None) -> None:
        """Raise if the metric is singular on the sample set

        Raises
        ------
        SingularMetricError
            If the metric determinant vanishes at a sample point
        """
        points = _as_points(points, self.samples)
        det = np.linalg.det(eval_array(self.components, points))
        small = np.abs(det) <= DEGENERACY_THRESHOLD
        if small.any():
            row = int(np.argmax(small))
            raise SingularMetricError(f"determinant {abs(det[row]):.3e}",
                                      points[row])

class GammaField:
    """Tangent connection components gamma[k, i, j]

    The first lower index i is the direction of differentiation.
    """

    def __init__(self, components) -> None:
        self.components = as_expr_array(components, (4, 4, 4))

    def __getitem__(self, index):
        return self.components[index]

    @classmethod
    def zero(cls) -> 'GammaField':
        return cls(np.zeros((4, 4, 4), dtype=int))

###############################################################################
# Operations
###############################################################################
def lie_derivative(f: ScalarExpr, frame: FrameField, k: int) -> ScalarExpr:
    """Derivative of a scalar along frame vector k

    Parameters
    ----------
    f : ScalarExpr
        Scalar to differentiate
    frame : FrameField
        Tangent frame
    k : int
        Frame index 0 to 3

    Returns
    -------
    : ScalarExpr
        sum_s Y^s_k df/dx^s
    """
    f = as_expr(f)
    return sp.Add(*(frame.vectors[k, s] * diff_expr(f, s)
                    for s in range(4) if frame.vectors[k, s] != 0))

def lie_array(values: np.ndarray, frame: FrameField, k: int) -> np.ndarray:
    """Apply lie_derivative to every entry of a component array"""
    result = np.empty(values.shape, dtype=object)
    for index in np.ndindex(values.shape):
        result[index] = lie_derivative(values[index], frame, k)
    return result

def structure_constants(frame: FrameField) -> StructureConstants:
    """Expand the commutators of frame vectors in the frame itself

    Parameters
    ----------
    frame : FrameField
        Nondegenerate tangent frame

    Returns
    -------
    : StructureConstants
        c[k, i, j] with [Y_i, Y_j] = sum_k c[k, i, j] Y_k

    Raises
    ------
    DegenerateFrameError
        If the frame degenerates on its sample set
    """
    frame.validate()
    if frame.is_coordinate:
        return StructureConstants.zero()
    logger.debug("Expanding frame commutators")
    commutator = np.empty((4, 4, 4), dtype=object)
    for s, i, j in np.ndindex(4, 4, 4):
        commutator[s, i, j] = (lie_derivative(frame.vectors[j, s], frame, i)
                               - lie_derivative(frame.vectors[i, s], frame, j))
    return StructureConstants(
        np.tensordot(frame.inverse, commutator, axes=([1], [0])))

def christoffel(metric: MetricField,
                frame: FrameField,
                c: StructureConstants | None = None,
) -> GammaField:
    """Components of the metric connection in a frame

    The connection is real, torsion-free and metric-compatible:

    .. math::
        \\Gamma^k_{ij} = \\frac{1}{2} g^{kr}(L_i g_{jr} + L_j g_{ir}
        - L_r g_{ij}) + \\frac{1}{2} c^k_{ij}
        - \\frac{1}{2} g^{kr} (c^s_{ir} g_{sj} + c^s_{jr} g_{si})

    Parameters
    ----------
    metric : MetricField
        Frame-relative metric
    frame : FrameField
        Tangent frame
    c : StructureConstants | None
        Structure constants of the frame, computed if None

    Returns
    -------
    : GammaField
        Metric connection components

    Raises
    ------
    SingularMetricError
        If the metric is singular at a frame sample point
    """
    metric.validate(frame.samples)
    if c is None:
        c = structure_constants(frame)
    logger.debug("Assembling metric connection")
    g = metric.components
    cc = c.components
    half = sp.Rational(1, 2)

    # lg[i, a, b] = L_i(g_ab); cg[i, r, j] = sum_s c[s, i, r] g[s, j]
    lg = np.stack([lie_array(g, frame, i) for i in range(4)])
    cg = np.tensordot(cc, g, axes=([0], [0]))
    lowered = np.empty((4, 4, 4), dtype=object)
    for r, i, j in np.ndindex(4, 4, 4):
        lowered[r, i, j] = (half * (lg[i, j, r] + lg[j, i, r] - lg[r, i, j])
                            - half * (cg[i, r, j] + cg[j, r, i]))
    gamma = np.tensordot(metric.inverse, lowered, axes=([1], [0])) + cc * half
    return GammaField(gamma)

def torsion(gamma: GammaField, c: StructureConstants) -> np.ndarray:
    """Torsion T[k, i, j] = gamma[k, i, j] - gamma[k, j, i] - c[k, i, j]"""
    g = gamma.components
    return as_expr_array(g - np.transpose(g, (0, 2, 1)) - c.components)

def curvature_form(conn: np.ndarray,
                   frame: FrameField,
                   c: StructureConstants,
) -> np.ndarray:
    """Curvature of connection components conn[p, k, j] (upper, direction, lower)

    Parameters
    ----------
    conn : np.ndarray
        Connection components with shape (r, 4, r)
    frame : FrameField
        Tangent frame
    c : StructureConstants
        Structure constants of the frame

    Returns
    -------
    curvature : np.ndarray
        Components R[p, k, i, j] with shape (r, r, 4, 4), antisymmetric in i, j
    """
    rank = conn.shape[0]
    curvature = np.empty((rank, rank, 4, 4), dtype=object)
    curvature[...] = sp.S.Zero
    for i in range(4):
        for j in range(i + 1, 4):
            ci, cj = conn[:, i, :], conn[:, j, :]
            block = (lie_array(cj, frame, i) - lie_array(ci, frame, j)
                     + np.dot(ci, cj) - np.dot(cj, ci))
            for s in range(4):
                if c[s, i, j] != 0:
                    block = block - conn[:, s, :] * c[s, i, j]
            curvature[:, :, i, j] = block
            curvature[:, :, j, i] = -block
    return as_expr_array(curvature)

def tangent_curvature(gamma: GammaField,
                      frame: FrameField,
                      c: StructureConstants,
) -> np.ndarray:
    """Curvature R[p, k, i, j] of the tangent connection"""
    logger.debug("Assembling tangent curvature")
    return curvature_form(gamma.components, frame, c)

def metricity_residual(metric: MetricField,
                       gamma: GammaField,
                       frame: FrameField,
) -> np.ndarray:
    """Covariant differential of the metric, zero for a metric connection

    Returns
    -------
    : np.ndarray
        Components (nabla g)[i, j, k] with the direction k last
    """
    from gaugecheck.tensor import (ConnectionTriple, covariant_differential,
                                   TensorField, TensorType)
    field = TensorField(TensorType(0, 0, 0, 0, 0, 2), 1, metric.components)
    conn = ConnectionTriple.zero(1, gamma)
    return covariant_differential(field, conn, frame).components

###############################################################################
# Checks
###############################################################################
def check_frame(frame: FrameField,
                points: np.ndarray | None = None,
                tolerance: float = DEFAULT_TOLERANCE,
) -> list[CheckResult]:
    """Nondegeneracy and reality of a frame

    The nondegeneracy residual is 1 at every sample point where the
    determinant magnitude is below DEGENERACY_THRESHOLD.
    """
    points = _as_points(points, frame.samples)
    values = eval_array(frame.vectors, points)
    det = np.abs(np.linalg.det(values))
    return [
        CheckResult("frame", "frame-nondegenerate",
                    (det <= DEGENERACY_THRESHOLD).astype(float), points,
                    tolerance),
        CheckResult("frame", "frame-real", values.imag, points, tolerance),
    ]

def check_structure_constants(c: StructureConstants,
                              points: np.ndarray,
                              tolerance: float = DERIVED_TOLERANCE,
) -> list[CheckResult]:
    """Antisymmetry and reality of structure constants"""
    values = eval_array(c.components, points)
    return [
        CheckResult("structure", "structure-antisymmetry",
                    values + np.swapaxes(values, 2, 3), points, tolerance),
        CheckResult("structure", "structure-real", values.imag, points,
                    tolerance),
    ]

def check_metric(metric: MetricField,
                 points: np.ndarray | None = None,
                 tolerance: float = DEFAULT_TOLERANCE,
) -> list[CheckResult]:
    """Symmetry, reality, inverse and signature of a metric

    The signature residual counts the eigenvalues whose signs disagree with
    the expected signature at each sample point.
    """
    points = _as_points(points, metric.samples)
    g = eval_array(metric.components, points)
    g_inv = eval_array(metric.inverse, points)
    identity = np.broadcast_to(np.eye(4), g.shape)

    eigenvalues = np.linalg.eigvalsh(0.5 * (g.real + np.swapaxes(g.real, 1, 2)))
    positive = np.sum(eigenvalues > 0, axis=1)
    expected = sum(1 for s in metric.signature if s > 0)
    mismatch = np.abs(positive - expected).astype(float)
    return [
        CheckResult("metric", "metric-symmetric", g - np.swapaxes(g, 1, 2),
                    points, tolerance),
        CheckResult("metric", "metric-real", g.imag, points, tolerance),
        CheckResult("metric", "metric-inverse", g @ g_inv - identity, points,
                    tolerance),
        CheckResult("metric", "metric-signature", mismatch, points,
                    tolerance),
    ]

def check_torsion(gamma: GammaField,
                  c: StructureConstants,
                  points: np.ndarray,
                  tolerance: float = DERIVED_TOLERANCE,
) -> CheckResult:
    """Torsion of a connection, zero for a metric connection"""
    return residual_check("gamma", "torsion", torsion(gamma, c), points,
                          tolerance)

def check_metricity(metric: MetricField,
                    gamma: GammaField,
                    frame: FrameField,
                    points: np.ndarray | None = None,
                    tolerance: float = DERIVED_TOLERANCE,
) -> CheckResult:
    """Covariant differential of the metric, zero for a metric connection"""
    points = _as_points(points, frame.samples)
    return residual_check("gamma", "metricity",
                          metricity_residual(metric, gamma, frame), points,
                          tolerance)

def check_curvature(curvature: np.ndarray,
                    points: np.ndarray,
                    tolerance: float = DERIVED_TOLERANCE,
                    name: str = "curvature",
) -> CheckResult:
    """Antisymmetry of curvature components in their last two indices"""
    values = eval_array(curvature, points)
    return CheckResult(name, "curvature-antisymmetry",
                       values + np.swapaxes(values, -1, -2), points, tolerance)
