# Standard Python packages
from functools import lru_cache
import logging
import re
# Non-standard Python packages
import numpy as np
from scipy.stats import qmc
# Local packages
from gaugecheck.expr import eval_array, format_expr, parse_expr

logger = logging.getLogger(__name__)

#: Tolerance for residuals of constant data
DEFAULT_TOLERANCE = 1e-10
#: Tolerance for residuals of derived fields
DERIVED_TOLERANCE = 1e-9
#: Number of quasi-random sample points
DEFAULT_SAMPLE_COUNT = 100
#: Seed of the quasi-random sequence
DEFAULT_SEED = 0
#: Sample box as (low, high) per chart coordinate
DEFAULT_BOX = ((-1.0, 1.0),) * 4

_LOCUS = re.compile(r"^(?P<lhs>.+?)\s*(?P<op><=|>=|<|>)\s*(?P<rhs>.+)$")

class Locus:
    """Excluded region of the chart given by an inequality"""

    def __init__(self, text: str) -> None:
        """Class constructor

        Parameters
        ----------
        text : str
            Inequality such as ``x1 < 0.1`` or ``sin(x1) <= 0.2``
        """
        match = _LOCUS.match(text.strip())
        if match is None:
            raise ValueError(f"Excluded locus must be an inequality: {text!r}")
        self.text = text.strip()
        self.lhs = parse_expr(match["lhs"])
        self.op = match["op"]
        self.rhs = parse_expr(match["rhs"])

    def __repr__(self) -> str:
        return f"Locus({format_expr(self.lhs)} {self.op} {format_expr(self.rhs)})"

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Return mask of points lying inside the excluded region"""
        lhs = eval_array(self.lhs, points).real
        rhs = eval_array(self.rhs, points).real
        return {"<": np.less, "<=": np.less_equal, ">": np.greater,
                ">=": np.greater_equal}[self.op](lhs, rhs)

def sample_points(box=DEFAULT_BOX,
                  count: int = DEFAULT_SAMPLE_COUNT,
                  seed: int = DEFAULT_SEED,
                  exclude: list | tuple = (),
) -> np.ndarray:
    """Draw quasi-random chart points from a box avoiding excluded loci

    Points come from a scrambled Halton sequence, so a fixed seed always
    reproduces the same sample set.

    Parameters
    ----------
    box : sequence
        Four (low, high) coordinate ranges
    count : int
        Number of points
    seed : int
        Seed of the scrambled sequence
    exclude : list | tuple
        Loci (Locus or inequality text) to avoid

    Returns
    -------
    points : np.ndarray
        Sample points with shape (count, 4)
    """
    box = np.asarray(box, dtype=float)
    if box.shape != (4, 2) or np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("Sample box must be four increasing (low, high) pairs!")
    if count < 1:
        raise ValueError("Sample count must be positive!")
    loci = [Locus(locus) if isinstance(locus, str) else locus
            for locus in exclude]

    sampler = qmc.Halton(d=4, scramble=True, seed=seed)
    accepted = []
    found = 0
    # Rejection sampling in batches; give up if loci cover the box
    for _ in range(64):
        batch = qmc.scale(sampler.random(max(count, 16)), box[:, 0], box[:, 1])
        keep = np.ones(len(batch), dtype=bool)
        for locus in loci:
            keep &= ~locus.contains(batch)
        accepted.append(batch[keep])
        found += int(keep.sum())
        if found >= count:
            break
    else:
        raise ValueError("Excluded loci leave too few sample points in the box!")
    points = np.concatenate(accepted)[:count]
    logger.debug(f"Drew {count} sample points with seed {seed}")
    return points

@lru_cache(maxsize=1)
def _default_samples() -> np.ndarray:
    points = sample_points()
    points.setflags(write=False)
    return points

def default_samples() -> np.ndarray:
    """Return the default sample set (read only)"""
    return _default_samples()

###############################################################################
# Residual checks
###############################################################################
def _by_rank(*labels) -> dict:
    return dict(zip((1, 2, 3), labels))

#: Equation reference of every check tag, keyed by bundle rank where the
#: rank selects the equation
EQUATIONS = {
    "frame-nondegenerate": "2.3",
    "frame-real": "2.3",
    "structure-antisymmetry": "2.4",
    "structure-real": "2.4",
    "metric-symmetric": "2.9",
    "metric-real": "2.9",
    "metric-inverse": "2.9",
    "metric-signature": "2.9",
    "torsion": "2.8",
    "metricity": "2.9",
    "curvature-antisymmetry": {None: "2.10", 1: "3.7", 2: "4.9", 3: "5.9"},
    "potential-conjugate": "2.7",
    "gamma-real": "2.7",
    "curvature-real": "2.13",
    "field-strength-conjugate": "2.14",
    "hermitian": _by_rank("1.5", "1.6", "1.7"),
    "hermitian-positive": _by_rank("1.5", "1.6", "1.7"),
    "orthonormal": _by_rank("1.5", "1.6", "1.7"),
    "skew-symmetric": "1.8",
    "skew-inverse": _by_rank(None, "1.9", "1.10"),
    "skew-hermitian-concordance": _by_rank(None, "1.9", "1.10"),
    "hermitian-concordance": _by_rank("3.1", "4.1", "5.1"),
    "skew-concordance": _by_rank(None, "4.2", "5.2"),
    "u1-real-part": "3.2",
    "su-algebra-hermitian": _by_rank(None, "4.3", "5.3"),
    "su-algebra-trace": _by_rank(None, "4.3", "5.3"),
    "epsilon-contraction-1": "eps.1",
    "epsilon-contraction-2": "eps.2",
    "gauge-inverse": _by_rank("3.3", "4.4", "5.4"),
    "gauge-unitary": _by_rank("3.3", "4.4", "5.4"),
    "gauge-determinant": _by_rank("3.3", "4.4", "5.4"),
    "theta-forms": _by_rank("3.6", "4.8", "5.8"),
    "gauge-covariance": _by_rank(None, "4.7", "5.7"),
    "abelian-gauge-invariance": "3.8",
}

def equation_tag(tag: str, q: int | None = None) -> str:
    """Equation reference of a check tag, '-' if the tag has none

    Parameters
    ----------
    tag : str
        Identifier of the relation a check implements
    q : int | None
        Bundle rank of the checked data, None for tangent data

    Returns
    -------
    : str
        Equation reference such as '4.1'
    """
    label = EQUATIONS.get(tag)
    if isinstance(label, dict):
        label = label.get(q)
    return label or "-"

def _rank(name: str) -> int | None:
    """Bundle rank embedded in a record name such as 'bundle.2.gauged'"""
    for part in name.split("."):
        if part.isdigit():
            return int(part)
    return None

class CheckResult:
    """Residual record of a single check evaluated at sample points"""

    def __init__(self,
                 name: str,
                 tag: str,
                 residuals,
                 points,
                 tolerance: float = DEFAULT_TOLERANCE,
    ) -> None:
        """Class constructor

        Parameters
        ----------
        name : str
            Name of the check
        tag : str
            Identifier of the relation the check implements
        residuals : array_like
            Residual values with shape (N, ...) for N sample points
        points : array_like
            Sample points with shape (N, 4)
        tolerance : float
            Largest admissible residual magnitude
        """
        self.name = name
        self.tag = tag
        self.equation = equation_tag(tag, _rank(name))
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.residuals = np.asarray(residuals, dtype=complex)
        if self.residuals.ndim == 0 or len(self.residuals) != len(self.points):
            raise ValueError("Residuals need one leading entry per sample point!")
        self.tolerance = tolerance

        magnitude = np.abs(self.residuals).reshape(len(self.points), -1)
        if magnitude.size == 0:
            self.max_residual = 0.0
            self.worst_point = tuple(self.points[0])
            self.worst_slot = ()
        else:
            row, col = np.unravel_index(np.argmax(magnitude), magnitude.shape)
            self.max_residual = float(magnitude[row, col])
            self.worst_point = tuple(float(x) for x in self.points[row])
            self.worst_slot = tuple(int(i) for i in
                                    np.unravel_index(col, self.residuals.shape[1:]))
        self.passed = bool(self.max_residual <= tolerance)

    def __bool__(self) -> bool:
        return self.passed

    def __repr__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"CheckResult({self.name!r}, {self.tag!r}, "
                f"{self.max_residual:.5e}, {verdict})")

    def residual(self, *slot) -> np.ndarray:
        """Residual values of one slot at every sample point"""
        return self.residuals[(slice(None),) + slot]

def residual_check(name: str,
                   tag: str,
                   exprs,
                   points,
                   tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Evaluate symbolic residuals at sample points and record the result

    Parameters
    ----------
    name : str
        Name of the check
    tag : str
        Identifier of the relation the check implements
    exprs : array_like
        Array of ScalarExpr residuals; zero when the check holds
    points : array_like
        Sample points with shape (N, 4)
    tolerance : float
        Largest admissible residual magnitude

    Returns
    -------
    : CheckResult
        Residual record
    """
    return CheckResult(name, tag, eval_array(exprs, points), points, tolerance)
