# Standard Python packages
from dataclasses import dataclass
import logging
# Non-standard Python packages
import numpy as np
# Local packages
from gaugecheck.expr import as_expr_array, conj_array, eval_array
from gaugecheck.geometry import (curvature_form, FrameField, GammaField,
                                 lie_array, StructureConstants,
                                 structure_constants, tangent_curvature)
from gaugecheck.utils import CheckResult, default_samples, DERIVED_TOLERANCE

logger = logging.getLogger(__name__)

#: Largest total valence of a dense tensor field
MAX_RANK = 8

class RankMismatchError(ValueError):
    """Operands disagree on bundle rank or component shape"""

    def __init__(self, message: str, expected, actual) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"{message}: expected {expected}, got {actual}")

###############################################################################
# TensorType
###############################################################################
@dataclass(frozen=True)
class TensorType:
    """Valences (eps, eta | sigma, zeta | m, n) of a frame-relative tensor

    The pairs count upper and lower indices of the bundle, the conjugate
    bundle and the tangent bundle.
    """
    eps: int = 0
    eta: int = 0
    sigma: int = 0
    zeta: int = 0
    m: int = 0
    n: int = 0

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.valences):
            raise ValueError(f"Valences must be nonnegative: {self}")
        if sum(self.valences) > MAX_RANK:
            raise ValueError(f"Total rank of {self} exceeds {MAX_RANK}!")

    def __str__(self) -> str:
        return (f"({self.eps},{self.eta}|{self.sigma},{self.zeta}"
                f"|{self.m},{self.n})")

    @property
    def valences(self) -> tuple:
        return (self.eps, self.eta, self.sigma, self.zeta, self.m, self.n)

    @property
    def bundle_rank(self) -> int:
        """Number of bundle and conjugate bundle slots"""
        return self.eps + self.eta + self.sigma + self.zeta

    def slot_kinds(self) -> list[tuple[str, int]]:
        """Connection group and sign of every slot in storage order"""
        kinds = []
        for (group, sign), count in zip(
                [("A", 1), ("A", -1), ("Abar", 1), ("Abar", -1),
                 ("gamma", 1), ("gamma", -1)],
                self.valences):
            kinds.extend([(group, sign)] * count)
        return kinds

    def shape(self, q: int) -> tuple:
        """Dense component shape for bundle rank q"""
        return (q,) * self.bundle_rank + (4,) * (self.m + self.n)

    def swapped(self) -> 'TensorType':
        """Type with bundle and conjugate bundle valences exchanged"""
        return TensorType(self.sigma, self.zeta, self.eps, self.eta,
                          self.m, self.n)

    def differentiated(self) -> 'TensorType':
        """Type of the covariant differential"""
        return TensorType(self.eps, self.eta, self.sigma, self.zeta,
                          self.m, self.n + 1)

###############################################################################
# TensorField
###############################################################################
class TensorField:
    """Dense frame-relative tensor field

    Slots are ordered bundle uppers, bundle lowers, conjugate uppers,
    conjugate lowers, tangent uppers, tangent lowers. Bundle indices are
    stored 0-based.
    """

    def __init__(self, ttype: TensorType, q: int, components) -> None:
        """Class constructor

        Parameters
        ----------
        ttype : TensorType
            Valences of the field
        q : int
            Bundle rank 1, 2, or 3
        components : array_like
            ScalarExpr components with shape ttype.shape(q)
        """
        if q not in (1, 2, 3):
            raise ValueError(f"Bundle rank must be 1, 2, or 3, got {q}!")
        self.ttype = ttype
        self.q = q
        self.components = as_expr_array(components, ttype.shape(q))

    @classmethod
    def scalar(cls, f, q: int = 1) -> 'TensorField':
        """Scalar field of type (0,0|0,0|0,0)"""
        return cls(TensorType(), q, f)

    @classmethod
    def section(cls, components) -> 'TensorField':
        """Section of a bundle, type (1,0|0,0|0,0)"""
        components = as_expr_array(components)
        return cls(TensorType(eps=1), len(components), components)

    def __repr__(self) -> str:
        return f"TensorField({self.ttype}, q={self.q})"

    def __getitem__(self, index):
        return self.components[index]

###############################################################################
# ConnectionTriple
###############################################################################
class ConnectionTriple:
    """Connection components (gamma, A, Abar) defining the covariant differential

    ``A[i, k, j]`` is A^i_kj with the tangent direction k in the middle, the
    same layout as ``gamma[k, i, j]``.
    """

    def __init__(self, gamma, A, Abar) -> None:
        """Class constructor

        Parameters
        ----------
        gamma : GammaField | array_like
            Tangent connection components
        A : array_like
            Bundle connection components with shape (q, 4, q)
        Abar : array_like
            Conjugate bundle connection components with shape (q, 4, q)
        """
        self.gamma = gamma if isinstance(gamma, GammaField) else GammaField(gamma)
        self.A = as_expr_array(A)
        self.Abar = as_expr_array(Abar)
        q = self.A.shape[0] if self.A.ndim == 3 else None
        if q not in (1, 2, 3) or self.A.shape != (q, 4, q):
            raise RankMismatchError("Connection components A need shape (q, 4, q)",
                                    "(q, 4, q) with q in 1, 2, 3", self.A.shape)
        if self.Abar.shape != self.A.shape:
            raise RankMismatchError("Abar must match the shape of A",
                                    self.A.shape, self.Abar.shape)
        self.q = q

    def __repr__(self) -> str:
        return f"ConnectionTriple(q={self.q})"

    @classmethod
    def real(cls,
             gamma,
             A,
             points: np.ndarray | None = None,
             tolerance: float = DERIVED_TOLERANCE,
    ) -> 'ConnectionTriple':
        """Real connection with Abar the conjugate of A

        Raises
        ------
        ValueError
            If gamma has an imaginary part above tolerance at the points
        """
        gamma = gamma if isinstance(gamma, GammaField) else GammaField(gamma)
        points = default_samples() if points is None else points
        imaginary = np.abs(eval_array(gamma.components, points).imag).max()
        if imaginary > tolerance:
            raise ValueError(f"A real connection needs a real gamma, imaginary "
                             f"part {imaginary:.3e}!")
        A = as_expr_array(A)
        return cls(gamma, A, conj_array(A))

    @classmethod
    def zero(cls, q: int, gamma: GammaField | None = None) -> 'ConnectionTriple':
        """Connection with vanishing bundle components"""
        A = np.zeros((q, 4, q), dtype=int)
        return cls(GammaField.zero() if gamma is None else gamma, A, A)

###############################################################################
# Operations
###############################################################################
def tau_conjugate(x: TensorField) -> TensorField:
    """Complex conjugation involution of a tensor field

    Conjugates every component and exchanges the bundle and conjugate
    bundle index groups; tangent slots are left in place.

    Parameters
    ----------
    x : TensorField
        Field of type (eps,eta|sigma,zeta|m,n)

    Returns
    -------
    : TensorField
        Field of type (sigma,zeta|eps,eta|m,n)
    """
    t = x.ttype
    bundle = list(range(t.eps + t.eta))
    conjugate = list(range(len(bundle), t.bundle_rank))
    tangent = list(range(t.bundle_rank, t.bundle_rank + t.m + t.n))
    components = np.transpose(conj_array(x.components),
                              conjugate + bundle + tangent)
    return TensorField(t.swapped(), x.q, components)

def covariant_differential(x: TensorField,
                           conn: ConnectionTriple,
                           frame: FrameField,
) -> TensorField:
    """Covariant differential of a tensor field

    Every upper slot adds the matching connection contracted into that slot
    and every lower slot subtracts it. Bundle slots use A, conjugate slots
    use Abar and tangent slots use gamma.

    Parameters
    ----------
    x : TensorField
        Field of type (eps,eta|sigma,zeta|m,n)
    conn : ConnectionTriple
        Connection of the same bundle rank
    frame : FrameField
        Tangent frame

    Returns
    -------
    : TensorField
        Field of type (eps,eta|sigma,zeta|m,n+1) with the direction slot last

    Raises
    ------
    RankMismatchError
        If the field has bundle slots and its rank differs from the connection
    ValueError
        If the differential would exceed MAX_RANK slots
    """
    if sum(x.ttype.valences) >= MAX_RANK:
        raise ValueError(f"Covariant differential of a type {x.ttype} field "
                         f"exceeds {MAX_RANK} slots!")
    if x.ttype.bundle_rank and x.q != conn.q:
        raise RankMismatchError("Field and connection bundle ranks differ",
                                conn.q, x.q)
    logger.debug(f"Covariant differential of type {x.ttype}")
    groups = {"A": conn.A, "Abar": conn.Abar, "gamma": conn.gamma.components}
    X = x.components
    kinds = x.ttype.slot_kinds()

    slices = []
    for k in range(4):
        term = lie_array(X, frame, k)
        for axis, (group, sign) in enumerate(kinds):
            C = groups[group][:, k, :]
            if sign > 0:
                contracted = np.tensordot(C, X, axes=([1], [axis]))
                term = term + np.moveaxis(contracted, 0, axis)
            else:
                contracted = np.tensordot(C, X, axes=([0], [axis]))
                term = term - np.moveaxis(contracted, 0, axis)
        slices.append(term)
    return TensorField(x.ttype.differentiated(), x.q,
                       np.stack(slices, axis=-1))

def reality_check(conn: ConnectionTriple,
                  frame: FrameField,
                  c: StructureConstants | None = None,
                  points: np.ndarray | None = None,
                  tolerance: float = DERIVED_TOLERANCE,
) -> list[CheckResult]:
    """Residuals of the reality conditions of a connection

    Checks Abar against the conjugate of A, the imaginary parts of gamma and
    of the tangent curvature, and the conjugate bundle curvature against the
    conjugate of the bundle curvature.

    Parameters
    ----------
    conn : ConnectionTriple
        Connection to check
    frame : FrameField
        Tangent frame
    c : StructureConstants | None
        Structure constants of the frame, computed if None
    points : np.ndarray | None
        Sample points, the frame samples if None
    tolerance : float
        Largest admissible residual

    Returns
    -------
    : list[CheckResult]
        One record per reality condition
    """
    points = frame.samples if points is None else points
    if c is None:
        c = structure_constants(frame)
    name = f"connection.{conn.q}"
    A = eval_array(conn.A, points)
    Abar = eval_array(conn.Abar, points)
    gamma = eval_array(conn.gamma.components, points)
    R = eval_array(tangent_curvature(conn.gamma, frame, c), points)
    r = eval_array(curvature_form(conn.A, frame, c), points)
    rbar = eval_array(curvature_form(conn.Abar, frame, c), points)
    return [
        CheckResult(name, "potential-conjugate", Abar - np.conj(A), points,
                    tolerance),
        CheckResult(name, "gamma-real", gamma.imag, points, tolerance),
        CheckResult(name, "curvature-real", R.imag, points, tolerance),
        CheckResult(name, "field-strength-conjugate", rbar - np.conj(r),
                    points, tolerance),
    ]
