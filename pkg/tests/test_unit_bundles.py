import numpy as np
import pytest
import sympy as sp
import gaugecheck.bundles as bun
from gaugecheck.bundles import (DegenerateSkewError, GaugeMap, SU2Bundle,
                                SU3Bundle, U1Bundle)
from gaugecheck.expr import COORDINATES, eval_array, parse_expr
from gaugecheck.geometry import (DegenerateFrameError, FrameField, GammaField,
                                 SingularMetricError)
from gaugecheck.tensor import ConnectionTriple, RankMismatchError, TensorField
from tests.oracles import random_array, random_su_map, random_su_potential

x0, x1, x2, x3 = COORDINATES

def potential(q: int, entries: dict) -> np.ndarray:
    """Connection components from {(i, k, j): value} with 1-based i, j"""
    A = np.zeros((q, 4, q), dtype=object)
    for (i, k, j), value in entries.items():
        A[i - 1, k, j - 1] = parse_expr(value) if isinstance(value, str) \
            else value
    return A

## Bundle data
def test_make_bundle(points):
    assert isinstance(bun.make_bundle(1, [[1]]), U1Bundle)
    assert isinstance(bun.make_bundle(2, sp.eye(2), 1), SU2Bundle)
    b = bun.make_bundle(3, sp.eye(3), "2", points)
    assert isinstance(b, SU3Bundle) and b.group == "SU(3)"
    assert b.d_lower[0, 1, 2] == 2 and b.d_lower[1, 0, 2] == -2
    assert b.d_lower[0, 0, 1] == 0
    with pytest.raises(ValueError):
        bun.make_bundle(4, sp.eye(4))
    with pytest.raises(RankMismatchError):
        bun.make_bundle(2, sp.eye(3), 1)
    with pytest.raises(RankMismatchError):
        U1Bundle([[1]], 1)
    with pytest.raises(ValueError):
        SU2Bundle(sp.eye(2))

def test_validate(orthonormal_bundles, points):
    for b in orthonormal_bundles.values():
        assert all(b.validate(points))
    results = {r.tag: r for r in SU2Bundle([[1, 1], [0, -1]], 1,
                                           points).validate()}
    assert not results["hermitian"]
    assert not results["hermitian-positive"]
    assert results["hermitian-positive"].max_residual == 1
    assert results["skew-symmetric"] and results["skew-inverse"]
    results = {r.tag: r for r in SU2Bundle(sp.eye(2), [[1, 1], [-1, 0]],
                                           points).validate()}
    assert not results["skew-symmetric"]

def test_hermitian_form(orthonormal_bundles, points):
    b = orthonormal_bundles[2]
    x = TensorField.section(["1", "i"])
    assert bun.hermitian_form(b, x, x) == 2
    assert bun.hermitian_form(b, ["i", "0"], ["1", "0"]) == -sp.I
    rng = np.random.default_rng(6)
    D = sp.Matrix([[2, x1 + sp.I], [x1 - sp.I, 3]])
    b = SU2Bundle(D, 1, points)
    x, y = random_array(rng, (2,)), random_array(rng, (2,))
    np.testing.assert_allclose(
        eval_array(bun.hermitian_form(b, x, y), points),
        np.conj(eval_array(bun.hermitian_form(b, y, x), points)))
    with pytest.raises(RankMismatchError):
        bun.hermitian_form(b, ["1"], ["1", "0"])

def test_check_orthonormal(orthonormal_bundles, points):
    for b in orthonormal_bundles.values():
        assert bun.check_orthonormal(b, points).max_residual < 1e-12
    result = bun.check_orthonormal(U1Bundle([[2]], samples=points))
    assert not result and result.max_residual == pytest.approx(1)

def test_inverse_skew(orthonormal_bundles):
    upper = bun.inverse_skew(orthonormal_bundles[2])
    assert upper.tolist() == [[0, 1], [-1, 0]]
    upper = bun.inverse_skew(orthonormal_bundles[3])
    assert upper[0, 1, 2] == 1 and upper[2, 1, 0] == -1
    assert bun.inverse_skew(SU3Bundle(sp.eye(3), 2))[0, 1, 2] == \
        sp.Rational(1, 2)
    assert orthonormal_bundles[2].d_upper[0, 1] == 1
    with pytest.raises(DegenerateSkewError):
        bun.inverse_skew(SU2Bundle(sp.eye(2), 0))
    with pytest.raises(DegenerateSkewError):
        SU3Bundle(sp.eye(3), "x1 - x1").d_upper
    with pytest.raises(RankMismatchError):
        bun.inverse_skew(orthonormal_bundles[1])

def test_d_concordance(orthonormal_bundles, points):
    assert bun.d_concordance(orthonormal_bundles[2]).max_residual < 1e-12
    assert bun.d_concordance(orthonormal_bundles[3]).max_residual < 1e-12
    result = bun.d_concordance(SU2Bundle(2 * sp.eye(2), 1, points))
    assert not result
    assert result.max_residual == pytest.approx(3)
    assert result.worst_slot == (0, 1)

def test_epsilon_identities(orthonormal_bundles, points):
    for b in [orthonormal_bundles[3], SU3Bundle(sp.eye(3), 2, points)]:
        results = bun.epsilon_identities(b)
        assert [r.tag for r in results] == ["epsilon-contraction-1",
                                            "epsilon-contraction-2"]
        assert all(r.max_residual < 1e-12 for r in results)
    with pytest.raises(RankMismatchError):
        bun.epsilon_identities(orthonormal_bundles[2])

## Connection conditions
def test_connection_concordance(orthonormal_bundles, coordinate_frame):
    A = potential(2, {(1, 1, 2): "i*x2", (2, 1, 1): "i*x2", (1, 2, 1): "i",
                      (2, 2, 2): "-i"})
    conn = ConnectionTriple.real(GammaField.zero(), A)
    results = bun.connection_concordance(orthonormal_bundles[2], conn,
                                         coordinate_frame)
    assert [r.tag for r in results] == ["hermitian-concordance",
                                        "skew-concordance"]
    assert all(results)

    conn = ConnectionTriple.real(GammaField.zero(),
                                 potential(1, {(1, 0, 1): "1/2 + 2*i"}))
    (result,) = bun.connection_concordance(orthonormal_bundles[1], conn,
                                           coordinate_frame)
    assert result.max_residual == pytest.approx(1)
    assert result.worst_slot == (0, 0, 0)

    b = U1Bundle([["exp(2*x0)"]], samples=coordinate_frame.samples)
    conn = ConnectionTriple.real(GammaField.zero(), potential(1, {(1, 0, 1): 1}))
    assert all(bun.connection_concordance(b, conn, coordinate_frame))
    with pytest.raises(RankMismatchError):
        bun.connection_concordance(orthonormal_bundles[2], conn,
                                   coordinate_frame)

def test_u1_real_part(orthonormal_bundles, coordinate_frame):
    assert bun.u1_real_part(orthonormal_bundles[1], coordinate_frame, 0) == 0
    b = U1Bundle([["exp(2*x0)"]])
    assert sp.simplify(bun.u1_real_part(b, coordinate_frame, 0)) == 1
    assert bun.u1_real_part(b, coordinate_frame, 1) == 0
    conn = ConnectionTriple.real(GammaField.zero(),
                                 potential(1, {(1, 0, 1): "1 + i*x3",
                                               (1, 2, 1): "5*i"}))
    assert bun.u1_real_part_check(b, conn, coordinate_frame)
    with pytest.raises(SingularMetricError):
        bun.u1_real_part(U1Bundle([[-1]]), coordinate_frame, 0)
    with pytest.raises(RankMismatchError):
        bun.u1_real_part(orthonormal_bundles[2], coordinate_frame, 0)

def test_su_algebra_check(points):
    def check(entries):
        conn = ConnectionTriple.real(GammaField.zero(), potential(2, entries))
        return {r.tag: r for r in bun.su_algebra_check(conn, 2, points)}

    results = check({(1, 0, 1): "i", (2, 0, 2): "-i"})
    assert all(results.values())
    results = check({(1, 0, 2): "i", (2, 0, 1): "i"})
    assert all(results.values())
    results = check({(1, 0, 1): "i", (2, 0, 2): "i"})
    assert results["su-algebra-hermitian"]
    assert results["su-algebra-trace"].max_residual == pytest.approx(2)
    results = check({(1, 3, 1): "1"})
    assert results["su-algebra-hermitian"].max_residual == pytest.approx(2)
    with pytest.raises(ValueError):
        bun.su_algebra_check(ConnectionTriple.zero(1), 1)

## Gauge maps
def test_gauge_map(points):
    rng = np.random.default_rng(12)
    for q in (2, 3):
        gauge = GaugeMap(random_su_map(rng, q))
        assert gauge.q == q
        assert all(gauge.validate(points))
    results = {r.tag: r for r in GaugeMap(sp.diag(sp.I, sp.I)).validate(points)}
    assert results["gauge-unitary"] and results["gauge-inverse"]
    assert results["gauge-determinant"].max_residual == pytest.approx(2)
    phase = GaugeMap.phase("x0*x1")
    assert phase.q == 1 and phase.phi == x0 * x1
    assert all(phase.validate(points))
    with pytest.raises(RankMismatchError):
        GaugeMap([[1, 0, 0], [0, 1, 0]])

def test_theta_params(coordinate_frame, points):
    S = sp.Matrix([[1, 1], [0, 1]]) / sp.sqrt(2)
    theta = bun.theta_params(GaugeMap(S), coordinate_frame)
    assert all(e == 0 for e in theta.ravel())

    gauge = GaugeMap(sp.diag(sp.exp(sp.I * x0), sp.exp(-sp.I * x0)))
    theta = eval_array(bun.theta_params(gauge, coordinate_frame), points)
    expected = np.zeros((len(points), 2, 4, 2), dtype=complex)
    expected[:, 0, 0, 0] = -1j
    expected[:, 1, 0, 1] = 1j
    np.testing.assert_allclose(theta, expected, atol=1e-14)

    rng = np.random.default_rng(9)
    for q in (2, 3):
        gauge = GaugeMap(random_su_map(rng, q))
        assert bun.check_theta_forms(gauge, coordinate_frame).passed

def test_gauge_transform(coordinate_frame, points):
    A = potential(2, {(1, 1, 2): "x0", (2, 3, 2): "i*x1"})
    conn = ConnectionTriple.real(GammaField.zero(), A)
    same = bun.gauge_transform(conn, GaugeMap.identity(2), coordinate_frame)
    np.testing.assert_allclose(eval_array(same.A, points),
                               eval_array(conn.A, points))

    # Constant map: A -> S A S^-1
    S = sp.Matrix([[0, sp.I], [sp.I, 0]])
    moved = bun.gauge_transform(conn, GaugeMap(S), coordinate_frame)
    values = eval_array(conn.A, points)
    S_num = np.array(S.tolist(), dtype=complex)
    expected = np.einsum("ia,nakb,bj->nikj", S_num, values,
                         np.linalg.inv(S_num))
    np.testing.assert_allclose(eval_array(moved.A, points), expected,
                               atol=1e-14)
    np.testing.assert_allclose(eval_array(moved.Abar, points),
                               np.conj(expected), atol=1e-14)
    assert moved.gamma is conn.gamma

    conn = ConnectionTriple.zero(1)
    moved = bun.gauge_transform(conn, GaugeMap.phase("x0"), coordinate_frame)
    assert moved.A[0, 0, 0] == -sp.I
    assert all(moved.A[0, k, 0] == 0 for k in (1, 2, 3))
    assert moved.Abar[0, 0, 0] == sp.I

def test_gauge_transform_errors(coordinate_frame):
    with pytest.raises(DegenerateFrameError):
        bun.gauge_transform(ConnectionTriple.zero(2), GaugeMap(sp.diag(1, 0),
                                                               sp.eye(2)),
                            coordinate_frame)
    with pytest.raises(RankMismatchError):
        bun.gauge_transform(ConnectionTriple.zero(2), GaugeMap.identity(3),
                            coordinate_frame)

def test_gauge_bundle(orthonormal_bundles, points):
    rng = np.random.default_rng(10)
    for q in (2, 3):
        gauge = GaugeMap(random_su_map(rng, q))
        moved = bun.gauge_bundle(orthonormal_bundles[q], gauge)
        assert bun.check_orthonormal(moved, points).max_residual < 1e-12
    gauge = GaugeMap.phase("x2")
    moved = bun.gauge_bundle(orthonormal_bundles[1], gauge)
    assert bun.check_orthonormal(moved, points)

def test_section_transform(orthonormal_bundles, points):
    assert bun.section_transform(["1", "x0"], GaugeMap.identity(2))[1] == x0
    psi = bun.section_transform(["1"], GaugeMap.phase("pi/2"))
    assert psi[0] == sp.I
    rng = np.random.default_rng(13)
    b = orthonormal_bundles[3]
    gauge = GaugeMap(random_su_map(rng, 3))
    psi_tilde = random_array(rng, (3,))
    psi = bun.section_transform(psi_tilde, gauge)
    np.testing.assert_allclose(
        eval_array(bun.hermitian_form(b, psi, psi), points),
        eval_array(bun.hermitian_form(b, psi_tilde, psi_tilde), points))

## Field strength
def test_bundle_curvature(coordinate_frame, points):
    strength = bun.bundle_curvature(ConnectionTriple.zero(2), coordinate_frame)
    assert strength.shape == (2, 2, 4, 4)
    assert all(e == 0 for e in strength.ravel())

    conn = ConnectionTriple.real(GammaField.zero(),
                                 potential(1, {(1, 3, 1): "i*x1"}))
    strength = bun.bundle_curvature(conn, coordinate_frame, q=1)
    assert strength[0, 0, 1, 3] == sp.I and strength[0, 0, 3, 1] == -sp.I
    abelian = bun.abelian_field_strength(conn, coordinate_frame)
    assert abelian[1, 3] == sp.I and abelian[3, 1] == -sp.I
    assert sum(e != 0 for e in abelian.ravel()) == 2
    with pytest.raises(RankMismatchError):
        bun.bundle_curvature(conn, coordinate_frame, q=2)

    # Constant non-abelian potential: r_12 = [A_1, A_2]
    conn = ConnectionTriple.real(GammaField.zero(), potential(2, {
        (1, 1, 2): "i", (2, 1, 1): "i", (1, 2, 2): "1", (2, 2, 1): "-1"}))
    strength = eval_array(
        bun.bundle_curvature(conn, coordinate_frame)[:, :, 1, 2], points)
    expected = np.broadcast_to(np.array([[-2j, 0], [0, 2j]]), strength.shape)
    np.testing.assert_allclose(strength, expected)

def test_abelian_field_strength_frame(points):
    """The structure constant term enters the rank one field strength"""
    vectors = sp.eye(4)
    vectors[2, 1] = x1
    frame = FrameField(vectors.tolist(), points)
    conn = ConnectionTriple.real(GammaField.zero(),
                                 potential(1, {(1, 1, 1): "i"}))
    abelian = eval_array(bun.abelian_field_strength(conn, frame), points)
    # r_12 = -c^1_12 A_1 = -i
    np.testing.assert_allclose(abelian[:, 1, 2], -1j)
    np.testing.assert_allclose(eval_array(
        bun.bundle_curvature(conn, frame)[0, 0], points), abelian)

def test_gauge_covariance(coordinate_frame, points):
    rng = np.random.default_rng(14)
    conn = ConnectionTriple.real(GammaField.zero(), random_su_potential(rng, 2))
    gauge = GaugeMap(random_su_map(rng, 2))
    assert bun.check_gauge_covariance(conn, gauge, coordinate_frame,
                                      points=points)
    conn = ConnectionTriple.real(GammaField.zero(),
                                 random_array(rng, (1, 4, 1)))
    assert bun.check_abelian_invariance(conn, GaugeMap.phase("x0*x2 + sin(x3)"),
                                        coordinate_frame, points=points)
