# Standard Python packages
from dataclasses import dataclass
from functools import cached_property
import logging
from pathlib import Path
import re
import warnings
# Non-standard Python packages
import numpy as np
import sympy as sp
# Local packages
from gaugecheck.bundles import DegenerateSkewError, GaugeMap, make_bundle
from gaugecheck.expr import (conj_expr, DomainError, eval_array,
                             ExpressionSyntaxError, parse_expr)
from gaugecheck.geometry import (christoffel, DegenerateFrameError,
                                 FrameField, GammaField, MetricField,
                                 MINKOWSKI_SIGNATURE, SingularMetricError,
                                 StructureConstants, structure_constants)
from gaugecheck.tensor import ConnectionTriple, RankMismatchError
from gaugecheck.utils import (DEFAULT_BOX, DEFAULT_SAMPLE_COUNT, DEFAULT_SEED,
                              DEFAULT_TOLERANCE, Locus, sample_points)

logger = logging.getLogger(__name__)

_SECTION = re.compile(r"^\[\s*(?P<name>[A-Za-z]+(?:\.\d+)?)\s*\]$")
_ENTRY = re.compile(r"^(?P<key>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<value>.*?)\s*$")
_FRAME_KEY = re.compile(r"^Y([0-3])([0-3])$")
_METRIC_KEY = re.compile(r"^g([0-3])([0-3])$")
_HERMITIAN_KEY = re.compile(r"^D(\d)(\d)$")
_SKEW_KEY = re.compile(r"^d(\d+)$")
_POTENTIAL_KEY = re.compile(r"^(A|Abar)(\d)(\d)(\d)$")
_GAUGE_KEY = re.compile(r"^S(\d)(\d)$")

###############################################################################
# Errors
###############################################################################
@dataclass(frozen=True)
class ScenarioIssue:
    """Problem found in a scenario file at a 1-based line and column"""
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"

class ScenarioError(ValueError):
    """Scenario file does not parse or violates an invariant"""

    def __init__(self, issues: list[ScenarioIssue], path=None) -> None:
        self.issues = list(issues)
        self.path = path
        prefix = "" if path is None else f"{path}: "
        super().__init__(prefix + "; ".join(str(i) for i in self.issues))

@dataclass
class _Entry:
    value: str
    line: int
    column: int

@dataclass
class _Section:
    name: str
    line: int
    entries: dict

###############################################################################
# Reading
###############################################################################
def _read_sections(text: str, issues: list) -> dict:
    """Split scenario text into sections of key/value entries"""
    sections = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        match = _SECTION.match(stripped)
        if match:
            name = match["name"]
            if name in sections:
                issues.append(ScenarioIssue(number, indent + 1,
                                            f"duplicate section [{name}]"))
            current = sections.setdefault(name, _Section(name, number, {}))
            continue
        match = _ENTRY.match(stripped)
        if match is None:
            issues.append(ScenarioIssue(number, indent + 1,
                                        "expected '[section]' or 'key = value'"))
            continue
        if current is None:
            issues.append(ScenarioIssue(number, indent + 1,
                                        "entry outside of a section"))
            continue
        key = match["key"]
        if key in current.entries:
            issues.append(ScenarioIssue(number, indent + 1,
                                        f"duplicate key {key!r}"))
        current.entries[key] = _Entry(match["value"], number,
                                      indent + match.start("value") + 1)
    return sections

class _Builder:
    """Turn parsed sections into validated scenario data, collecting issues"""

    def __init__(self, sections: dict, issues: list) -> None:
        self.sections = sections
        self.issues = issues

    def issue(self, entry, message: str, offset: int = 0) -> None:
        if isinstance(entry, _Section):
            self.issues.append(ScenarioIssue(entry.line, 1, message))
        elif isinstance(entry, _Entry):
            self.issues.append(ScenarioIssue(entry.line, entry.column + offset,
                                             message))
        else:
            self.issues.append(ScenarioIssue(0, 0, message))

    def expr(self, entry: _Entry):
        try:
            return parse_expr(entry.value)
        except ExpressionSyntaxError as error:
            self.issue(entry, str(error), error.position)
            return None

    def number(self, entry: _Entry, kind=float):
        try:
            value = complex(sp.N(parse_expr(entry.value)))
            if value.imag != 0 or (kind is int and value.real != int(value.real)):
                raise ValueError
            return kind(value.real)
        except (ExpressionSyntaxError, ValueError, TypeError):
            self.issue(entry, f"expected a real {kind.__name__} constant")
            return None

###############################################################################
# Scenario
###############################################################################
class Scenario:
    """Chart, frame, metric, bundle and gauge data of one verification run"""

    def __init__(self,
                 frame: FrameField,
                 metric: MetricField,
                 bundles: dict | None = None,
                 potentials: dict | None = None,
                 gauges: dict | None = None,
                 names: tuple = ("x0", "x1", "x2", "x3"),
                 box: tuple = DEFAULT_BOX,
                 seed: int = DEFAULT_SEED,
                 tolerance: float = DEFAULT_TOLERANCE,
                 path: str | None = None,
    ) -> None:
        """Class constructor

        Parameters
        ----------
        frame : FrameField
            Tangent frame, carries the sample points and excluded loci
        metric : MetricField
            Frame-relative metric
        bundles : dict | None
            BundleStructure by rank
        potentials : dict | None
            (A, Abar) component arrays by rank, Abar None for a real connection
        gauges : dict | None
            GaugeMap by rank
        names : tuple
            Display names of the chart coordinates
        box : tuple
            Sample box as four (low, high) pairs
        seed : int
            Seed of the sample points
        tolerance : float
            Tolerance for constant data checks
        path : str | None
            Source file
        """
        self.frame = frame
        self.metric = metric
        self.bundles = dict(bundles or {})
        self.potentials = dict(potentials or {})
        self.gauges = dict(gauges or {})
        self.names = tuple(names)
        self.box = tuple(tuple(b) for b in box)
        self.seed = seed
        self.tolerance = tolerance
        self.path = path
        self.warnings = []

    @property
    def points(self) -> np.ndarray:
        return self.frame.samples

    @property
    def loci(self) -> tuple:
        return self.frame.loci

    @cached_property
    def structure(self) -> StructureConstants:
        return structure_constants(self.frame)

    @cached_property
    def gamma(self) -> GammaField:
        return christoffel(self.metric, self.frame, self.structure)

    def connection(self, q: int) -> ConnectionTriple:
        """Connection of the rank q bundle with the metric connection"""
        if q not in self.bundles:
            raise ScenarioError([ScenarioIssue(0, 0,
                                               f"no [bundle.{q}] block")],
                                self.path)
        A, Abar = self.potentials[q]
        if Abar is None:
            return ConnectionTriple.real(self.gamma, A, self.points)
        return ConnectionTriple(self.gamma, A, Abar)

    def warn(self, message: str) -> None:
        """Record a non-fatal validation finding"""
        self.warnings.append(message)
        warnings.warn(message, stacklevel=2)

def _chart(builder: _Builder, section: _Section | None) -> dict:
    chart = {"names": ("x0", "x1", "x2", "x3"), "box": list(DEFAULT_BOX),
             "samples": DEFAULT_SAMPLE_COUNT, "seed": DEFAULT_SEED,
             "loci": [], "signature": MINKOWSKI_SIGNATURE,
             "tolerance": DEFAULT_TOLERANCE}
    if section is None:
        return chart
    for key, entry in section.entries.items():
        if key == "names":
            names = tuple(n.strip() for n in entry.value.split(","))
            if len(names) != 4 or not all(names):
                builder.issue(entry, "names needs four comma separated names")
            else:
                chart["names"] = names
        elif key in ("x0", "x1", "x2", "x3"):
            bounds = entry.value.split(",")
            values = [builder.number(_Entry(b, entry.line, entry.column))
                      for b in bounds]
            if len(values) != 2 or None in values or values[0] >= values[1]:
                builder.issue(entry, "expected 'low, high' with low < high")
            else:
                chart["box"][int(key[1])] = tuple(values)
        elif key in ("samples", "seed"):
            value = builder.number(entry, int)
            if value is not None:
                if key == "samples" and value < 1:
                    builder.issue(entry, "samples must be positive")
                chart[key] = value
        elif key == "tolerance":
            value = builder.number(entry)
            if value is not None:
                chart["tolerance"] = value
        elif key == "exclude":
            offset = 0
            for part in entry.value.split(";"):
                if part.strip():
                    try:
                        chart["loci"].append(Locus(part))
                    except (ExpressionSyntaxError, ValueError) as error:
                        builder.issue(entry, str(error), offset)
                offset += len(part) + 1
        elif key == "signature":
            signs = [s.strip() for s in entry.value.split(",")]
            if len(signs) != 4 or any(s not in ("+", "-") for s in signs):
                builder.issue(entry, "signature needs four signs '+' or '-'")
            else:
                chart["signature"] = tuple(1 if s == "+" else -1 for s in signs)
        else:
            builder.issue(entry, f"unknown chart key {key!r}")
    return chart

def _matrix(builder: _Builder, section: _Section | None, pattern,
            default: sp.Matrix, upper: bool = False, skip: tuple = ()) -> sp.Matrix:
    matrix = default.copy()
    if section is None:
        return matrix
    for key, entry in section.entries.items():
        if key in skip:
            continue
        match = pattern.match(key)
        if match is None:
            builder.issue(entry, f"unknown [{section.name}] key {key!r}")
            continue
        i, j = int(match[1]), int(match[2])
        if upper and i > j:
            builder.issue(entry, f"give the symmetric entry as "
                                 f"{key[0]}{j}{i} instead of {key}")
            continue
        value = builder.expr(entry)
        if value is not None:
            matrix[i, j] = value
            if upper:
                matrix[j, i] = value
    return matrix

def _bundle(builder: _Builder, section: _Section, q: int) -> tuple:
    """Hermitian tensor, skew tensor and potentials of a bundle block"""
    D = sp.eye(q)
    d = sp.Integer(1) if q > 1 else None
    A = np.full((q, 4, q), sp.S.Zero, dtype=object)
    Abar = None
    for key, entry in section.entries.items():
        if match := _HERMITIAN_KEY.match(key):
            i, j = int(match[1]), int(match[2])
            if not (1 <= i <= q and 1 <= j <= q):
                builder.issue(entry, f"rank-consistency: {key} in a rank {q} "
                                     f"bundle")
            elif i > j:
                builder.issue(entry, f"give the Hermitian entry as D{j}{i}")
            elif (value := builder.expr(entry)) is not None:
                D[i - 1, j - 1] = value
                if i != j:
                    D[j - 1, i - 1] = conj_expr(value)
        elif match := _SKEW_KEY.match(key):
            expected = "".join(str(i) for i in range(1, q + 1))
            if q == 1 or match[1] != expected:
                builder.issue(entry, f"rank-consistency: {key} in a rank {q} "
                                     f"bundle")
            elif (value := builder.expr(entry)) is not None:
                d = value
        elif match := _POTENTIAL_KEY.match(key):
            i, k, j = int(match[2]), int(match[3]), int(match[4])
            if not (1 <= i <= q and 1 <= j <= q) or k > 3:
                builder.issue(entry, f"rank-consistency: {key} in a rank {q} "
                                     f"bundle")
            elif (value := builder.expr(entry)) is not None:
                if match[1] == "A":
                    A[i - 1, k, j - 1] = value
                else:
                    if Abar is None:
                        Abar = np.full((q, 4, q), sp.S.Zero, dtype=object)
                    Abar[i - 1, k, j - 1] = value
        else:
            builder.issue(entry, f"unknown [{section.name}] key {key!r}")
    return D, d, A, Abar

def _gauge(builder: _Builder, section: _Section, q: int) -> GaugeMap | None:
    if "phi" in section.entries:
        entry = section.entries["phi"]
        if q != 1:
            builder.issue(entry, f"rank-consistency: phi in a rank {q} gauge")
            return None
        if len(section.entries) > 1:
            builder.issue(section, "give either phi or S11, not both")
        phi = builder.expr(entry)
        return None if phi is None else GaugeMap.phase(phi)
    S = sp.eye(q)
    for key, entry in section.entries.items():
        match = _GAUGE_KEY.match(key)
        if match is None:
            builder.issue(entry, f"unknown [{section.name}] key {key!r}")
            continue
        i, j = int(match[1]), int(match[2])
        if not (1 <= i <= q and 1 <= j <= q):
            builder.issue(entry, f"rank-consistency: {key} in a rank {q} gauge")
        elif (value := builder.expr(entry)) is not None:
            S[i - 1, j - 1] = value
    return GaugeMap(S)

def parse_scenario(text: str,
                   path: str | None = None,
                   samples: int | None = None,
                   seed: int | None = None,
                   tolerance: float | None = None,
) -> Scenario:
    """Build and validate a scenario from its text

    Parameters
    ----------
    text : str
        Scenario source
    path : str | None
        Source file used in messages
    samples, seed, tolerance : int, int, float | None
        Overrides of the chart block values

    Returns
    -------
    : Scenario
        Validated scenario

    Raises
    ------
    ScenarioError
        With every parse and validation issue found
    """
    issues = []
    sections = _read_sections(text, issues)
    builder = _Builder(sections, issues)
    for name, section in sections.items():
        base, _, rank = name.partition(".")
        if not ((base in ("chart", "frame", "metric") and not rank)
                or (base in ("bundle", "gauge") and rank in ("1", "2", "3"))):
            builder.issue(section, f"unknown section [{name}]")

    chart = _chart(builder, sections.get("chart"))
    samples = chart["samples"] if samples is None else samples
    seed = chart["seed"] if seed is None else seed
    tolerance = chart["tolerance"] if tolerance is None else tolerance

    vectors = _matrix(builder, sections.get("frame"), _FRAME_KEY, sp.eye(4))
    metric_section = sections.get("metric")
    components = "frame"
    if metric_section is not None and "components" in metric_section.entries:
        entry = metric_section.entries["components"]
        components = entry.value.strip()
        if components not in ("frame", "coordinate"):
            builder.issue(entry, "components must be 'frame' or 'coordinate'")
    g = _matrix(builder, metric_section, _METRIC_KEY,
                sp.diag(*MINKOWSKI_SIGNATURE), upper=True, skip=("components",))

    bundle_data = {}
    gauges = {}
    for q in (1, 2, 3):
        if f"bundle.{q}" in sections:
            bundle_data[q] = _bundle(builder, sections[f"bundle.{q}"], q)
        if f"gauge.{q}" in sections:
            gauges[q] = _gauge(builder, sections[f"gauge.{q}"], q)
    if issues:
        raise ScenarioError(issues, path)

    # Validation against the sample points
    try:
        points = sample_points(chart["box"], samples, seed, chart["loci"])
    except (ValueError, DomainError) as error:
        raise ScenarioError([ScenarioIssue(_line(sections, "chart"), 1,
                                           str(error))], path) from None
    frame = FrameField(vectors.tolist(), points, tuple(chart["loci"]))
    try:
        frame.validate()
    except (DegenerateFrameError, DomainError) as error:
        raise ScenarioError([ScenarioIssue(_line(sections, "frame"), 1,
                                           str(error))], path) from None
    try:
        if components == "coordinate":
            metric = MetricField.from_coordinate(g, frame, chart["signature"])
        else:
            metric = MetricField(g, samples=points,
                                 signature=chart["signature"])
        metric.validate()
    except (SingularMetricError, DomainError, ValueError) as error:
        raise ScenarioError([ScenarioIssue(_line(sections, "metric"), 1,
                                           str(error))], path) from None

    bundles = {}
    potentials = {}
    for q, (D, d, A, Abar) in bundle_data.items():
        try:
            bundle = make_bundle(q, D, d, points)
            if bundle.d_lower is not None:
                # Computes and caches the inverse, raising on a degenerate d
                bundle.d_upper
            bundles[q] = bundle
            potentials[q] = (A, Abar)
        except (DegenerateSkewError, RankMismatchError, DomainError) as error:
            issues.append(ScenarioIssue(_line(sections, f"bundle.{q}"), 1,
                                        str(error)))
    if issues:
        raise ScenarioError(issues, path)

    scenario = Scenario(frame, metric, bundles, potentials, gauges,
                        chart["names"], chart["box"], seed, tolerance, path)
    _soft_checks(scenario)
    logger.info(f"Loaded scenario {path or '<text>'} with bundles "
                f"{sorted(bundles)} and {len(points)} samples")
    return scenario

def _line(sections: dict, name: str) -> int:
    return sections[name].line if name in sections else 0

def _soft_checks(scenario: Scenario) -> None:
    """Warn about findings that do not invalidate a scenario"""
    points = scenario.points
    if np.abs(eval_array(scenario.frame.vectors, points).imag).max() > \
            scenario.tolerance:
        scenario.warn("frame has a non-negligible imaginary part")
    g = eval_array(scenario.metric.components, points).real
    positive = np.sum(np.linalg.eigvalsh(g) > 0, axis=1)
    expected = sum(1 for s in scenario.metric.signature if s > 0)
    if np.any(positive != expected):
        scenario.warn("metric signature differs from the declared signature")
    for q in scenario.gauges:
        if q not in scenario.bundles:
            scenario.warn(f"[gauge.{q}] has no matching [bundle.{q}] block")

def load_scenario(path,
                  samples: int | None = None,
                  seed: int | None = None,
                  tolerance: float | None = None,
) -> Scenario:
    """Read and validate a scenario file

    Parameters
    ----------
    path : str | Path
        Scenario file
    samples, seed, tolerance : int, int, float | None
        Overrides of the chart block values

    Returns
    -------
    : Scenario
        Validated scenario

    Raises
    ------
    ScenarioError
        With every parse and validation issue found
    OSError
        If the file cannot be read
    """
    path = Path(path)
    return parse_scenario(path.read_text(), str(path), samples, seed,
                          tolerance)
