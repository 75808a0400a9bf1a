# Standard Python packages
from abc import ABC, abstractmethod
from functools import cached_property
import logging
# Non-standard Python packages
import numpy as np
import sympy as sp
# Local packages
from gaugecheck.expr import (as_expr, as_expr_array, conj_array, conj_expr,
                             eval_array, ScalarExpr)
from gaugecheck.geometry import (curvature_form, DEGENERACY_THRESHOLD,
                                 DegenerateFrameError, FrameField,
                                 lie_array, lie_derivative,
                                 SingularMetricError, StructureConstants,
                                 structure_constants)
from gaugecheck.tensor import (ConnectionTriple, covariant_differential,
                               RankMismatchError, TensorField, TensorType)
from gaugecheck.utils import (CheckResult, default_samples, DEFAULT_TOLERANCE,
                              DERIVED_TOLERANCE)

logger = logging.getLogger(__name__)

#: Tolerance for the covariance of non-abelian field strengths
COVARIANCE_TOLERANCE = 1e-8

class DegenerateSkewError(ValueError):
    """Skew tensor of a bundle vanishes at a sample point"""

    def __init__(self, message: str, point=None) -> None:
        self.point = None if point is None else tuple(float(x) for x in point)
        where = "" if point is None else f" at {self.point}"
        super().__init__(f"degenerate skew tensor: {message}{where}")

def _levi_civita(q: int) -> np.ndarray:
    return np.array([[[sp.LeviCivita(i, j, k) for k in range(q)]
                      for j in range(q)] for i in range(q)], dtype=object)

def _first_failure(mask: np.ndarray) -> int | None:
    return int(np.argmax(mask)) if mask.any() else None

###############################################################################
# BundleStructure
###############################################################################
class BundleStructure(ABC):
    """Abstract base class for the bundles of rank 1, 2 and 3

    A bundle carries a Hermitian tensor ``D[i, j]`` (first index a bundle
    lower slot, second a conjugate lower slot) and, for ranks 2 and 3, a
    skew tensor ``d_lower`` with its inverse companion ``d_upper``.
    """

    def __init__(self,
                 D,
                 d=None,
                 samples: np.ndarray | None = None,
    ) -> None:
        """Class constructor

        Parameters
        ----------
        D : array_like
            q x q Hermitian tensor components
        d : array_like | ScalarExpr | None
            Skew tensor, either the full array or its single independent
            component (d12 resp. d123)
        samples : np.ndarray | None
            Sample points with shape (N, 4), default sample set if None
        """
        D = as_expr_array(D)
        if D.shape != (self.q, self.q):
            raise RankMismatchError(f"Hermitian tensor of rank {self.q} bundle",
                                    (self.q, self.q), D.shape)
        self.D = D
        self.d_lower = self._skew_tensor(d)
        self.samples = (default_samples() if samples is None
                        else np.atleast_2d(np.asarray(samples, dtype=float)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(D={self.D.tolist()})"

    @property
    @abstractmethod
    def q(self) -> int:
        """Bundle rank"""
        pass

    @property
    @abstractmethod
    def group(self) -> str:
        """Name of the structure group"""
        pass

    @abstractmethod
    def _skew_tensor(self, d) -> np.ndarray | None:
        """Build the lower skew tensor components from user input"""
        pass

    @classmethod
    @abstractmethod
    def orthonormal(cls, samples: np.ndarray | None = None) -> 'BundleStructure':
        """Bundle data in an orthonormal frame"""
        pass

    @property
    def skew_type(self) -> TensorType | None:
        """Tensor type of the lower skew tensor"""
        return None if self.d_lower is None else TensorType(eta=self.q)

    @cached_property
    def d_upper(self) -> np.ndarray:
        """Inverse skew tensor components"""
        return inverse_skew(self)

    def validate(self,
                 points: np.ndarray | None = None,
                 tolerance: float = DEFAULT_TOLERANCE,
    ) -> list[CheckResult]:
        """Hermitian, positive and skew-symmetric bundle data

        The positivity residual counts nonpositive eigenvalues of D at each
        sample point.
        """
        points = self.samples if points is None else points
        name = f"bundle.{self.q}"
        D = eval_array(self.D, points)
        D_star = np.conj(np.swapaxes(D, 1, 2))
        eigenvalues = np.linalg.eigvalsh(0.5 * (D + D_star))
        results = [
            CheckResult(name, "hermitian", D - D_star, points, tolerance),
            CheckResult(name, "hermitian-positive",
                        np.sum(eigenvalues <= 0, axis=1).astype(float), points,
                        tolerance),
        ]
        if self.d_lower is not None:
            lower = eval_array(self.d_lower, points)
            upper = eval_array(self.d_upper, points)
            n = len(points)
            transpositions = [lower + np.swapaxes(lower, a, a + 1)
                              for a in range(1, self.q)]
            symmetric = np.concatenate([t.reshape(n, -1)
                                        for t in transpositions], axis=1)
            if self.q == 2:
                inverse = (np.einsum("nik,njk->nij", upper, lower)
                           - np.eye(2))
            else:
                inverse = np.einsum("nijk,nijk->n", upper, lower) / 6 - 1
            results += [
                CheckResult(name, "skew-symmetric", symmetric, points,
                            tolerance),
                CheckResult(name, "skew-inverse", inverse.reshape(n, -1),
                            points, tolerance),
            ]
        return results

class U1Bundle(BundleStructure):
    """Rank one bundle with structure group U(1)"""

    q = 1
    group = "U(1)"

    def _skew_tensor(self, d) -> None:
        if d is not None:
            raise RankMismatchError("Rank one bundle has no skew tensor",
                                    None, d)
        return None

    @classmethod
    def orthonormal(cls, samples: np.ndarray | None = None) -> 'U1Bundle':
        return cls([[1]], samples=samples)

class SU2Bundle(BundleStructure):
    """Rank two bundle with structure group SU(2)"""

    q = 2
    group = "SU(2)"

    def _skew_tensor(self, d) -> np.ndarray:
        if d is None:
            raise ValueError("A rank two bundle needs a skew tensor d!")
        if np.ndim(d) == 0:
            d12 = as_expr(d)
            return as_expr_array([[0, d12], [-d12, 0]])
        d = as_expr_array(d)
        if d.shape != (2, 2):
            raise RankMismatchError("Skew tensor of rank two bundle", (2, 2),
                                    d.shape)
        return d

    @classmethod
    def orthonormal(cls, samples: np.ndarray | None = None) -> 'SU2Bundle':
        return cls(sp.eye(2), 1, samples)

class SU3Bundle(BundleStructure):
    """Rank three bundle with structure group SU(3)"""

    q = 3
    group = "SU(3)"

    def _skew_tensor(self, d) -> np.ndarray:
        if d is None:
            raise ValueError("A rank three bundle needs a skew tensor d!")
        if np.ndim(d) == 0:
            return as_expr_array(_levi_civita(3) * as_expr(d))
        d = as_expr_array(d)
        if d.shape != (3, 3, 3):
            raise RankMismatchError("Skew tensor of rank three bundle",
                                    (3, 3, 3), d.shape)
        return d

    @classmethod
    def orthonormal(cls, samples: np.ndarray | None = None) -> 'SU3Bundle':
        return cls(sp.eye(3), 1, samples)

#: Bundle classes by rank
BUNDLES = {1: U1Bundle, 2: SU2Bundle, 3: SU3Bundle}

def make_bundle(q: int,
                D,
                d=None,
                samples: np.ndarray | None = None,
) -> BundleStructure:
    """Build the bundle structure of rank q"""
    if q not in BUNDLES:
        raise ValueError(f"Bundle rank must be 1, 2, or 3, got {q}!")
    return BUNDLES[q](D, d, samples)

###############################################################################
# Metric data
###############################################################################
def _section(x, q: int) -> np.ndarray:
    components = x.components if isinstance(x, TensorField) else as_expr_array(x)
    if components.shape != (q,):
        raise RankMismatchError("Section length", (q,), components.shape)
    return components

def hermitian_form(b: BundleStructure, x, y) -> ScalarExpr:
    """Hermitian form sum_ij D[i, j] conj(x^j) y^i

    Parameters
    ----------
    b : BundleStructure
        Bundle carrying the Hermitian tensor
    x, y : TensorField | array_like
        Sections of rank b.q

    Returns
    -------
    : ScalarExpr
        Value of the form, conjugate linear in x
    """
    x = _section(x, b.q)
    y = _section(y, b.q)
    return sp.Add(*(b.D[i, j] * conj_expr(x[j]) * y[i]
                    for i, j in np.ndindex(b.q, b.q)))

def check_orthonormal(b: BundleStructure,
                      points: np.ndarray | None = None,
                      tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Compare bundle data with its orthonormal-frame form

    Orthonormal data is a unit D and, for rank 2, d = [[0, 1], [-1, 0]], for
    rank 3, d_123 = 1.
    """
    points = b.samples if points is None else points
    n = len(points)
    residuals = [(eval_array(b.D, points) - np.eye(b.q)).reshape(n, -1)]
    if b.d_lower is not None:
        canonical = type(b).orthonormal(points).d_lower
        residuals.append((eval_array(b.d_lower, points)
                          - eval_array(canonical, points)).reshape(n, -1))
    return CheckResult(f"bundle.{b.q}", "orthonormal",
                       np.concatenate(residuals, axis=1), points, tolerance)

def inverse_skew(b: BundleStructure) -> np.ndarray:
    """Upper skew tensor components of a bundle

    Rank 2 uses the transposed matrix inverse, sum_k d^ik d_jk = delta^i_j,
    which makes orthonormal data self-inverse. Rank 3 uses d^123 = 1/d_123.

    Raises
    ------
    DegenerateSkewError
        If the independent skew component vanishes at a sample point
    """
    if b.d_lower is None:
        raise RankMismatchError("Only rank 2 and 3 bundles carry a skew tensor",
                                (2, 3), b.q)
    leading = b.d_lower[(0, 1, 2)[:b.q]]
    values = eval_array(leading, b.samples)
    row = _first_failure(np.abs(values) <= DEGENERACY_THRESHOLD)
    if row is not None:
        raise DegenerateSkewError(f"|d| = {abs(values[row]):.3e}",
                                  b.samples[row])
    if b.q == 2:
        return as_expr_array([[0, 1 / leading], [-1 / leading, 0]])
    return as_expr_array(_levi_civita(3) / leading)

def d_concordance(b: BundleStructure,
                  points: np.ndarray | None = None,
                  tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Algebraic compatibility of the Hermitian and skew tensors

    Rank 2 residual: sum_ij d^ij D[i, a] D[j, b] - conj(d_ab); rank 3 is the
    analogous triple sum.
    """
    if b.d_lower is None:
        raise RankMismatchError("Only rank 2 and 3 bundles carry a skew tensor",
                                (2, 3), b.q)
    points = b.samples if points is None else points
    D = eval_array(b.D, points)
    upper = eval_array(b.d_upper, points)
    lower = eval_array(b.d_lower, points)
    if b.q == 2:
        lhs = np.einsum("nij,nia,njb->nab", upper, D, D)
    else:
        lhs = np.einsum("nijk,nia,njb,nkc->nabc", upper, D, D, D)
    return CheckResult(f"bundle.{b.q}", "skew-hermitian-concordance",
                       lhs - np.conj(lower), points, tolerance)

def epsilon_identities(b: BundleStructure,
                       points: np.ndarray | None = None,
                       tolerance: float = DEFAULT_TOLERANCE,
) -> list[CheckResult]:
    """Contractions of the rank 3 skew tensor with its inverse

    Residuals of sum_k d_ijk d^abk - (delta^a_i delta^b_j - delta^a_j delta^b_i)
    and of sum_jk d_ijk d^ajk - 2 delta^a_i.
    """
    if b.q != 3:
        raise RankMismatchError("Epsilon identities need a rank 3 bundle", 3,
                                b.q)
    points = b.samples if points is None else points
    lower = eval_array(b.d_lower, points)
    upper = eval_array(b.d_upper, points)
    delta = np.eye(3)
    pair = (np.einsum("ai,bj->ijab", delta, delta)
            - np.einsum("aj,bi->ijab", delta, delta))
    return [
        CheckResult("bundle.3", "epsilon-contraction-1",
                    np.einsum("nijk,nabk->nijab", lower, upper) - pair,
                    points, tolerance),
        CheckResult("bundle.3", "epsilon-contraction-2",
                    np.einsum("nijk,najk->nia", lower, upper) - 2 * delta,
                    points, tolerance),
    ]

###############################################################################
# Connection conditions
###############################################################################
def connection_concordance(b: BundleStructure,
                           conn: ConnectionTriple,
                           frame: FrameField,
                           points: np.ndarray | None = None,
                           tolerance: float = DERIVED_TOLERANCE,
) -> list[CheckResult]:
    """Covariant constancy of the bundle tensors

    Parameters
    ----------
    b : BundleStructure
        Bundle data
    conn : ConnectionTriple
        Connection of rank b.q
    frame : FrameField
        Tangent frame
    points : np.ndarray | None
        Sample points, the frame samples if None
    tolerance : float
        Largest admissible residual

    Returns
    -------
    : list[CheckResult]
        Residuals of nabla D and, for rank 2 and 3, of nabla d

    Raises
    ------
    RankMismatchError
        If the connection rank differs from the bundle rank
    """
    if conn.q != b.q:
        raise RankMismatchError("Connection and bundle ranks differ", b.q,
                                conn.q)
    points = frame.samples if points is None else points
    name = f"bundle.{b.q}"
    D = TensorField(TensorType(eta=1, zeta=1), b.q, b.D)
    results = [CheckResult(name, "hermitian-concordance",
                           eval_array(covariant_differential(D, conn, frame)
                                      .components, points),
                           points, tolerance)]
    if b.d_lower is not None:
        d = TensorField(b.skew_type, b.q, b.d_lower)
        results.append(CheckResult(name, "skew-concordance",
                                   eval_array(covariant_differential(
                                       d, conn, frame).components, points),
                                   points, tolerance))
    return results

def u1_real_part(b: BundleStructure, frame: FrameField, k: int) -> ScalarExpr:
    """Real part of a concordant rank one connection, L_k(D11) / (2 D11)

    Raises
    ------
    SingularMetricError
        If D11 is not a positive real at a frame sample point
    """
    if b.q != 1:
        raise RankMismatchError("Real part formula needs a rank 1 bundle", 1,
                                b.q)
    D11 = b.D[0, 0]
    values = eval_array(D11, frame.samples)
    row = _first_failure((values.real <= 0)
                         | (np.abs(values.imag) > DEFAULT_TOLERANCE))
    if row is not None:
        raise SingularMetricError("D11 is not positive", frame.samples[row])
    return lie_derivative(D11, frame, k) / (2 * D11)

def u1_real_part_check(b: BundleStructure,
                       conn: ConnectionTriple,
                       frame: FrameField,
                       points: np.ndarray | None = None,
                       tolerance: float = DERIVED_TOLERANCE,
) -> CheckResult:
    """Compare Re(A^1_k1) with the real part formula in every direction k"""
    points = frame.samples if points is None else points
    expected = as_expr_array([u1_real_part(b, frame, k) for k in range(4)])
    actual = eval_array(conn.A[0, :, 0], points)
    return CheckResult("bundle.1", "u1-real-part",
                       actual.real - eval_array(expected, points).real, points,
                       tolerance)

def su_algebra_check(conn: ConnectionTriple,
                     q: int,
                     points: np.ndarray | None = None,
                     tolerance: float = DERIVED_TOLERANCE,
) -> list[CheckResult]:
    """Membership of the connection matrices A_k in su(q)

    Residuals of conj(A^i_kj) + A^j_ki (skew-Hermitian) and sum_i A^i_ki
    (traceless) for every direction k.
    """
    if q not in (2, 3):
        raise ValueError(f"su(q) membership needs q = 2 or 3, got {q}!")
    if conn.q != q:
        raise RankMismatchError("Connection rank", q, conn.q)
    points = default_samples() if points is None else points
    A = eval_array(conn.A, points)
    name = f"connection.{q}"
    return [
        CheckResult(name, "su-algebra-hermitian",
                    np.conj(A) + np.transpose(A, (0, 3, 2, 1)), points,
                    tolerance),
        CheckResult(name, "su-algebra-trace", np.einsum("niki->nk", A),
                    points, tolerance),
    ]

###############################################################################
# Gauge maps
###############################################################################
class GaugeMap:
    """Change of bundle frame with matrix S and inverse T

    Entry ``S[i, j]`` is S^i_j. A rank one map can be given by a real
    phase phi with S = exp(i phi).
    """

    def __init__(self, S, T=None) -> None:
        """Class constructor

        Parameters
        ----------
        S : array_like
            q x q frame change matrix
        T : array_like | None
            Inverse of S, the conjugate transpose of S if None
        """
        S = as_expr_array(S)
        q = S.shape[0] if S.ndim == 2 else None
        if q not in (1, 2, 3) or S.shape != (q, q):
            raise RankMismatchError("Gauge map needs a square matrix",
                                    "q x q with q in 1, 2, 3", S.shape)
        self.S = S
        self.T = (conj_array(S.T) if T is None
                  else as_expr_array(T, (q, q)))
        self.phi = None

    @classmethod
    def phase(cls, phi) -> 'GaugeMap':
        """Rank one map S = exp(i phi)"""
        phi = as_expr(phi)
        gauge = cls([[sp.exp(sp.I * phi)]], [[sp.exp(-sp.I * phi)]])
        gauge.phi = phi
        return gauge

    @classmethod
    def identity(cls, q: int) -> 'GaugeMap':
        return cls(sp.eye(q), sp.eye(q))

    def __repr__(self) -> str:
        if self.phi is not None:
            return f"GaugeMap.phase({self.phi})"
        return f"GaugeMap({self.S.tolist()})"

    @property
    def q(self) -> int:
        return self.S.shape[0]

    def validate(self,
                 points: np.ndarray | None = None,
                 tolerance: float = DEFAULT_TOLERANCE,
    ) -> list[CheckResult]:
        """Inverse, unitarity and (for q = 2, 3) unit determinant of S"""
        points = default_samples() if points is None else points
        name = f"gauge.{self.q}"
        S = eval_array(self.S, points)
        T = eval_array(self.T, points)
        identity = np.eye(self.q)
        results = [
            CheckResult(name, "gauge-inverse", S @ T - identity, points,
                        tolerance),
            CheckResult(name, "gauge-unitary",
                        S @ np.conj(np.swapaxes(S, 1, 2)) - identity, points,
                        tolerance),
        ]
        if self.q > 1:
            results.append(CheckResult(name, "gauge-determinant",
                                       np.linalg.det(S) - 1, points,
                                       tolerance))
        return results

def theta_params(gauge: GaugeMap, frame: FrameField) -> np.ndarray:
    """Theta parameters theta[i, k, j] = sum_a S[i, a] L_k(T[a, j])"""
    return np.stack([np.dot(gauge.S, lie_array(gauge.T, frame, k))
                     for k in range(4)], axis=1)

def theta_params_alt(gauge: GaugeMap, frame: FrameField) -> np.ndarray:
    """Theta parameters from -sum_a L_k(S[i, a]) T[a, j]"""
    return np.stack([-np.dot(lie_array(gauge.S, frame, k), gauge.T)
                     for k in range(4)], axis=1)

def check_theta_forms(gauge: GaugeMap,
                      frame: FrameField,
                      points: np.ndarray | None = None,
                      tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Agreement of both expressions of the theta parameters"""
    points = frame.samples if points is None else points
    return CheckResult(f"gauge.{gauge.q}", "theta-forms",
                       eval_array(theta_params(gauge, frame), points)
                       - eval_array(theta_params_alt(gauge, frame), points),
                       points, tolerance)

def _check_gauge(conn: ConnectionTriple,
                 gauge: GaugeMap,
                 frame: FrameField,
) -> None:
    if conn.q != gauge.q:
        raise RankMismatchError("Gauge map and connection ranks differ",
                                conn.q, gauge.q)
    det = np.linalg.det(eval_array(gauge.S, frame.samples))
    row = _first_failure(np.abs(det) <= DEGENERACY_THRESHOLD)
    if row is not None:
        raise DegenerateFrameError("gauge map is not invertible",
                                   frame.samples[row])

def gauge_transform(conn: ConnectionTriple,
                    gauge: GaugeMap,
                    frame: FrameField,
) -> ConnectionTriple:
    """Connection components after a change of bundle frame

    A rank one phase map shifts A by -i L_k(phi). Otherwise every direction
    transforms as S A_k T + theta_k, and Abar follows by conjugation. The
    tangent connection is unchanged.

    Parameters
    ----------
    conn : ConnectionTriple
        Connection in the original bundle frame
    gauge : GaugeMap
        Frame change of the same rank
    frame : FrameField
        Tangent frame

    Returns
    -------
    : ConnectionTriple
        Connection in the new bundle frame

    Raises
    ------
    RankMismatchError
        If the ranks of map and connection differ
    DegenerateFrameError
        If S is singular at a frame sample point
    """
    _check_gauge(conn, gauge, frame)
    logger.debug(f"Gauge transforming rank {conn.q} connection")
    if gauge.phi is not None:
        shift = as_expr_array([[[-sp.I * lie_derivative(gauge.phi, frame, k)]
                                for k in range(4)]])
        return ConnectionTriple(conn.gamma, conn.A + shift,
                                conn.Abar + conj_array(shift))

    theta = theta_params(gauge, frame)
    S_bar, T_bar = conj_array(gauge.S), conj_array(gauge.T)
    A = np.stack([np.dot(np.dot(gauge.S, conn.A[:, k, :]), gauge.T)
                  for k in range(4)], axis=1) + theta
    Abar = np.stack([np.dot(np.dot(S_bar, conn.Abar[:, k, :]), T_bar)
                     for k in range(4)], axis=1) + conj_array(theta)
    return ConnectionTriple(conn.gamma, A, Abar)

def gauge_bundle(b: BundleStructure, gauge: GaugeMap) -> BundleStructure:
    """Bundle tensors expressed in the bundle frame reached by a gauge map

    With psi = S psi_tilde the tensors become D' = T^t D conj(T) and
    d'_ij.. = T^a_i T^b_j .. d_ab.., so Hermitian forms are unchanged.
    """
    if b.q != gauge.q:
        raise RankMismatchError("Gauge map and bundle ranks differ", b.q,
                                gauge.q)
    T = gauge.T
    D = np.dot(np.dot(T.T, b.D), conj_array(T))
    d = None
    if b.d_lower is not None:
        d = b.d_lower
        for axis in range(b.q):
            d = np.moveaxis(np.tensordot(T, d, axes=([0], [axis])), 0, axis)
    return make_bundle(b.q, D, d, b.samples)

def section_transform(psi_tilde, gauge: GaugeMap) -> TensorField:
    """Section components psi^i = sum_j S[i, j] psi_tilde^j in the new frame"""
    psi = _section(psi_tilde, gauge.q)
    return TensorField.section(np.dot(gauge.S, psi))

###############################################################################
# Field strength
###############################################################################
def bundle_curvature(conn: ConnectionTriple,
                     frame: FrameField,
                     c: StructureConstants | None = None,
                     q: int | None = None,
                     conjugate: bool = False,
) -> np.ndarray:
    """Curvature r[p, k, i, j] of the bundle connection components

    Parameters
    ----------
    conn : ConnectionTriple
        Connection
    frame : FrameField
        Tangent frame
    c : StructureConstants | None
        Structure constants of the frame, computed if None
    q : int | None
        Expected bundle rank, not checked if None
    conjugate : bool
        Use the conjugate components Abar instead of A

    Returns
    -------
    : np.ndarray
        Components with shape (q, q, 4, 4)
    """
    if q is not None and q != conn.q:
        raise RankMismatchError("Connection rank", q, conn.q)
    if c is None:
        c = structure_constants(frame)
    logger.debug(f"Assembling rank {conn.q} field strength")
    return curvature_form(conn.Abar if conjugate else conn.A, frame, c)

def abelian_field_strength(conn: ConnectionTriple,
                           frame: FrameField,
                           c: StructureConstants | None = None,
) -> np.ndarray:
    """Rank one field strength r[i, j] = L_i A_j - L_j A_i - c^s_ij A_s"""
    if conn.q != 1:
        raise RankMismatchError("Abelian field strength needs rank 1", 1,
                                conn.q)
    if c is None:
        c = structure_constants(frame)
    A = conn.A[0, :, 0]
    strength = np.empty((4, 4), dtype=object)
    for i, j in np.ndindex(4, 4):
        strength[i, j] = (lie_derivative(A[j], frame, i)
                          - lie_derivative(A[i], frame, j)
                          - sp.Add(*(c[s, i, j] * A[s] for s in range(4))))
    return as_expr_array(strength)

def check_gauge_covariance(conn: ConnectionTriple,
                           gauge: GaugeMap,
                           frame: FrameField,
                           c: StructureConstants | None = None,
                           points: np.ndarray | None = None,
                           tolerance: float = COVARIANCE_TOLERANCE,
) -> CheckResult:
    """Field strength after a gauge map against S r T of the original"""
    points = frame.samples if points is None else points
    if c is None:
        c = structure_constants(frame)
    before = eval_array(bundle_curvature(conn, frame, c), points)
    after = eval_array(bundle_curvature(gauge_transform(conn, gauge, frame),
                                        frame, c), points)
    S = eval_array(gauge.S, points)
    T = eval_array(gauge.T, points)
    expected = np.einsum("npa,nabij,nbk->npkij", S, before, T)
    return CheckResult(f"gauge.{gauge.q}", "gauge-covariance",
                       after - expected, points, tolerance)

def check_abelian_invariance(conn: ConnectionTriple,
                             gauge: GaugeMap,
                             frame: FrameField,
                             c: StructureConstants | None = None,
                             points: np.ndarray | None = None,
                             tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Rank one field strength before and after a gauge map"""
    points = frame.samples if points is None else points
    if c is None:
        c = structure_constants(frame)
    before = eval_array(abelian_field_strength(conn, frame, c), points)
    after = eval_array(abelian_field_strength(
        gauge_transform(conn, gauge, frame), frame, c), points)
    return CheckResult("gauge.1", "abelian-gauge-invariance", after - before,
                       points, tolerance)
