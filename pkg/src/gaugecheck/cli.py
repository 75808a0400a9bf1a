# Standard Python packages
import argparse
import logging
from pathlib import Path
import sys
# Non-standard Python packages
import numpy as np
import pandas as pd
# Local packages
import gaugecheck.bundles as bun
from gaugecheck.expr import format_expr
import gaugecheck.geometry as geo
from gaugecheck.scenario import (load_scenario, Scenario, ScenarioError,
                                 ScenarioIssue)
from gaugecheck.tensor import ConnectionTriple, reality_check
from gaugecheck.utils import CheckResult, DERIVED_TOLERANCE

logger = logging.getLogger(__name__)

#: Commands understood by run_command
COMMANDS = ("validate", "gamma", "torsion", "curvature", "bundle-check",
            "gauge-apply", "report")

###############################################################################
# Report
###############################################################################
class Report:
    """Check records and component values produced by one command"""

    def __init__(self, command: str, scenario: Scenario) -> None:
        """Class constructor

        Parameters
        ----------
        command : str
            Command that produced the report
        scenario : Scenario
            Scenario the command ran on
        """
        self.command = command
        self.scenario_path = scenario.path or "<text>"
        self.seed = scenario.seed
        self.samples = len(scenario.points)
        self.tolerance = scenario.tolerance
        self.names = scenario.names
        self.checks = []
        self.values = []

    def __repr__(self) -> str:
        return (f"Report({self.command!r}, {len(self.checks)} checks, "
                f"{len(self.values)} values)")

    @property
    def passed(self) -> bool:
        """True if every check passed"""
        return all(check.passed for check in self.checks)

    @property
    def tags(self) -> set:
        """Tags of all check records"""
        return {check.tag for check in self.checks}

    def add_checks(self,
                   results: CheckResult | list,
                   suffix: str = "",
    ) -> None:
        """Record check results, appending suffix to their names"""
        if isinstance(results, CheckResult):
            results = [results]
        for result in results:
            result.name += suffix
            logger.debug(f"{result.name} {result.tag}: "
                         f"{result.max_residual:.5e}")
            self.checks.append(result)

    def add_values(self,
                   name: str,
                   array: np.ndarray,
                   bundle_axes: tuple = (),
                   nonzero: bool = True,
    ) -> None:
        """Record the components of an array

        Indices along the axes listed in bundle_axes are printed 1-based.
        Components that are structurally zero are skipped if nonzero is True.
        """
        for index in np.ndindex(array.shape):
            value = array[index]
            if value != 0 or not nonzero:
                key = ",".join(str(i + 1 if axis in bundle_axes else i)
                               for axis, i in enumerate(index))
                self.values.append((name, key, format_expr(value)))

    def add_value(self, name: str, key: str, value: str) -> None:
        self.values.append((name, key, value))

    def table(self) -> pd.DataFrame:
        """Check records as a table"""
        return pd.DataFrame({
            "name": [c.name for c in self.checks],
            "equation": [c.equation for c in self.checks],
            "tag": [c.tag for c in self.checks],
            "residual": [c.max_residual for c in self.checks],
            "tolerance": [c.tolerance for c in self.checks],
            "verdict": ["PASS" if c.passed else "FAIL" for c in self.checks],
            "worst point": [_format_point(c.worst_point) for c in self.checks],
        }, columns=["name", "equation", "tag", "residual", "tolerance",
                    "verdict", "worst point"])

    def render(self) -> str:
        """Report body, one tab separated record per line"""
        lines = [f"command\t{self.command}",
                 f"scenario\t{self.scenario_path}",
                 f"seed\t{self.seed}",
                 f"samples\t{self.samples}",
                 f"tolerance\t{self.tolerance:.5e}"]
        for c in self.checks:
            verdict = "PASS" if c.passed else "FAIL"
            lines.append(f"check\t{c.name}\t{c.equation}\t{c.max_residual:.5e}"
                         f"\t{verdict}\t{c.tag}"
                         f"\t{_format_point(c.worst_point)}")
        for name, key, value in self.values:
            lines.append(f"value\t{name}\t{key}\t{value}")
        return "\n".join(lines) + "\n"

    def summarize(self) -> str:
        """Console summary of the check records"""
        table = self.table()
        failed = int((table["verdict"] == "FAIL").sum())
        summary = f"{self.command}: {len(table)} checks, {failed} failed"
        if table.empty:
            return summary
        return summary + "\n" + table.to_string(index=False,
                                                float_format="{:.3e}".format)

    def export(self, path) -> None:
        """Write the check records to a CSV file"""
        self.table().to_csv(path, index=False)

def _format_point(point) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in point) + ")"

###############################################################################
# Commands
###############################################################################
def _derived(scenario: Scenario) -> float:
    return max(DERIVED_TOLERANCE, scenario.tolerance)

def _connections(scenario: Scenario) -> dict:
    return {q: scenario.connection(q) for q in sorted(scenario.bundles)}

def _validate(report: Report, scenario: Scenario) -> None:
    points, tol = scenario.points, scenario.tolerance
    frame, c = scenario.frame, scenario.structure
    report.add_checks(geo.check_frame(frame, points, tol))
    report.add_checks(geo.check_structure_constants(c, points,
                                                    _derived(scenario)))
    report.add_checks(geo.check_metric(scenario.metric, points, tol))
    report.add_checks(geo.check_torsion(scenario.gamma, c, points,
                                        _derived(scenario)))
    report.add_checks(geo.check_metricity(scenario.metric, scenario.gamma,
                                          frame, points, _derived(scenario)))
    connections = _connections(scenario) or {1: ConnectionTriple.zero(
        1, scenario.gamma)}
    for conn in connections.values():
        report.add_checks(reality_check(conn, frame, c, points,
                                        _derived(scenario)))
    for q, bundle in sorted(scenario.bundles.items()):
        report.add_checks(bundle.validate(points, tol))
    for q, gauge in sorted(scenario.gauges.items()):
        report.add_checks(gauge.validate(points, tol))

def _gamma(report: Report, scenario: Scenario) -> None:
    report.add_values("gamma", scenario.gamma.components, nonzero=False)

def _torsion(report: Report, scenario: Scenario, checked=False) -> None:
    T = geo.torsion(scenario.gamma, scenario.structure)
    if not checked:
        report.add_checks(geo.check_torsion(scenario.gamma, scenario.structure,
                                            scenario.points,
                                            _derived(scenario)))
    report.add_values("torsion", T, nonzero=False)

def _curvature(report: Report, scenario: Scenario) -> None:
    frame, c, points = scenario.frame, scenario.structure, scenario.points
    R = geo.tangent_curvature(scenario.gamma, frame, c)
    report.add_checks(geo.check_curvature(R, points, _derived(scenario)))
    report.add_values("curvature", R)
    for q, conn in _connections(scenario).items():
        strength = bun.bundle_curvature(conn, frame, c, q)
        report.add_checks(geo.check_curvature(strength, points,
                                              _derived(scenario),
                                              f"field-strength.{q}"))
        report.add_values(f"field-strength.{q}", strength,
                          bundle_axes=(0, 1))
        if q == 1:
            report.add_values("abelian-field-strength",
                              bun.abelian_field_strength(conn, frame, c))

def _bundle_checks(report: Report,
                   scenario: Scenario,
                   bundle: bun.BundleStructure,
                   conn: ConnectionTriple,
                   suffix: str = "",
                   validated: bool = False,
) -> None:
    """Algebraic and connection conditions of one bundle

    The suffix is appended to every record name, so that checks of gauge
    transformed data stay apart from the checks of the scenario data.
    """
    points, tol = scenario.points, scenario.tolerance
    q = bundle.q
    validation = bundle.validate(points, tol)
    if not validated:
        report.add_checks(validation, suffix)
    positive = all(r.passed for r in validation
                   if r.tag == "hermitian-positive")
    if q > 1:
        report.add_checks(bun.d_concordance(bundle, points, tol), suffix)
    report.add_checks(bun.connection_concordance(bundle, conn, scenario.frame,
                                                 points, _derived(scenario)),
                      suffix)
    # The real part formula divides by D11
    if q == 1 and positive:
        report.add_checks(bun.u1_real_part_check(bundle, conn, scenario.frame,
                                                 points, _derived(scenario)),
                          suffix)
    if q == 3:
        report.add_checks(bun.epsilon_identities(bundle, points, tol), suffix)
    orthonormal = bun.check_orthonormal(bundle, points, tol)
    report.add_value(f"bundle.{q}{suffix}", "orthonormal",
                     "true" if orthonormal.passed else "false")
    # su(q) membership is implied by concordance in orthonormal frames only
    if q > 1 and orthonormal.passed:
        report.add_checks(bun.su_algebra_check(conn, q, points,
                                               _derived(scenario)), suffix)

def _bundle_check(report: Report, scenario: Scenario, validated=False) -> None:
    _require(scenario.bundles, "bundle-check", "[bundle.<q>]")
    for q, conn in _connections(scenario).items():
        _bundle_checks(report, scenario, scenario.bundles[q], conn,
                       validated=validated)

def _gauge_apply(report: Report, scenario: Scenario, validated=False) -> None:
    gauges = {q: g for q, g in scenario.gauges.items() if q in scenario.bundles}
    _require(gauges, "gauge-apply", "[gauge.<q>] with a matching [bundle.<q>]")
    frame, c, points = scenario.frame, scenario.structure, scenario.points
    for q, gauge in sorted(gauges.items()):
        conn = scenario.connection(q)
        if not validated:
            report.add_checks(gauge.validate(points, scenario.tolerance))
        report.add_checks(bun.check_theta_forms(gauge, frame, points,
                                                scenario.tolerance))
        transformed = bun.gauge_transform(conn, gauge, frame)
        report.add_values(f"potential.{q}", transformed.A,
                          bundle_axes=(0, 2))
        _bundle_checks(report, scenario,
                       bun.gauge_bundle(scenario.bundles[q], gauge),
                       transformed, ".gauged")
        if q == 1:
            report.add_checks(bun.check_abelian_invariance(
                conn, gauge, frame, c, points, _derived(scenario)))
        else:
            report.add_checks(bun.check_gauge_covariance(
                conn, gauge, frame, c, points,
                max(bun.COVARIANCE_TOLERANCE, scenario.tolerance)))

def _report(report: Report, scenario: Scenario) -> None:
    _validate(report, scenario)
    _gamma(report, scenario)
    _torsion(report, scenario, checked=True)
    _curvature(report, scenario)
    if scenario.bundles:
        _bundle_check(report, scenario, validated=True)
    if any(q in scenario.bundles for q in scenario.gauges):
        _gauge_apply(report, scenario, validated=True)

def _require(blocks: dict, command: str, block: str) -> None:
    if not blocks:
        raise ScenarioError([ScenarioIssue(0, 0,
                                           f"{command} needs a {block} block")])

_DISPATCH = {"validate": _validate, "gamma": _gamma, "torsion": _torsion,
             "curvature": _curvature, "bundle-check": _bundle_check,
             "gauge-apply": _gauge_apply, "report": _report}

def run_command(command: str, scenario: Scenario) -> Report:
    """Run a command on a scenario

    Parameters
    ----------
    command : str
        One of COMMANDS
    scenario : Scenario
        Validated scenario

    Returns
    -------
    : Report
        Check records and component values

    Raises
    ------
    ValueError
        If the command is unknown
    ScenarioError
        If the scenario lacks a block the command needs
    """
    if command not in _DISPATCH:
        raise ValueError(f"Unknown command {command!r}, expected one of "
                         f"{', '.join(COMMANDS)}")
    logger.info(f"Running {command} on {scenario.path or '<text>'}")
    report = Report(command, scenario)
    _DISPATCH[command](report, scenario)
    return report

###############################################################################
# Entry point
###############################################################################
def parse_args(argv: list | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="gck",
        description="Check frame-relative gauge connection data at sample "
                    "points of a chart.")
    parser.add_argument("command", choices=COMMANDS, help="Command to run")
    parser.add_argument("--scenario", required=True, type=Path,
                        help="Scenario file")
    parser.add_argument("--tolerance", type=float,
                        help="Tolerance for constant data checks")
    parser.add_argument("--samples", type=int, help="Number of sample points")
    parser.add_argument("--seed", type=int, help="Seed of the sample points")
    parser.add_argument("--out", type=Path,
                        help="Write the report here instead of stdout")
    parser.add_argument("--csv", type=Path,
                        help="Also write the check records as CSV")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="Log progress (twice for debug output)")
    args = parser.parse_args(argv)
    if args.samples is not None and args.samples < 1:
        parser.error("--samples must be positive")
    if args.tolerance is not None and args.tolerance <= 0:
        parser.error("--tolerance must be positive")
    return args

def main(argv: list | None = None) -> int:
    """Run gck, returning 0 if all checks pass, 1 on failures, 2 on errors"""
    args = parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose,
                                                      logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = load_scenario(args.scenario, args.samples, args.seed,
                                 args.tolerance)
        report = run_command(args.command, scenario)
    except (ScenarioError, OSError) as error:
        print(f"gck: {error}", file=sys.stderr)
        return 2
    except ValueError as error:
        print(f"gck: {args.command}: {error}", file=sys.stderr)
        return 2

    text = report.render()
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    if args.csv is not None:
        report.export(args.csv)
    logger.info(report.summarize())
    return 0 if report.passed else 1

if __name__ == "__main__":
    sys.exit(main())
