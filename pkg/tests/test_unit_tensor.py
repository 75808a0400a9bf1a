import numpy as np
import pytest
import sympy as sp
from gaugecheck.expr import COORDINATES, eval_array, parse_expr
import gaugecheck.geometry as geo
from gaugecheck.geometry import GammaField
from gaugecheck.tensor import (ConnectionTriple, covariant_differential,
                               RankMismatchError, reality_check,
                               tau_conjugate, TensorField, TensorType)
from tests.oracles import (random_array, random_frame, random_metric,
                           tensor_product)

x0, x1, x2, x3 = COORDINATES

## TensorType
def test_tensor_type():
    t = TensorType(1, 1, 0, 2, 1, 1)
    assert t.bundle_rank == 4
    assert t.shape(2) == (2, 2, 2, 2, 4, 4)
    assert t.shape(3) == (3,) * 4 + (4, 4)
    assert t.swapped() == TensorType(0, 2, 1, 1, 1, 1)
    assert t.differentiated() == TensorType(1, 1, 0, 2, 1, 2)
    assert str(t) == "(1,1|0,2|1,1)"
    assert t.slot_kinds() == [("A", 1), ("A", -1), ("Abar", -1),
                              ("Abar", -1), ("gamma", 1), ("gamma", -1)]
    assert TensorType().shape(1) == ()

def test_tensor_type_errors():
    with pytest.raises(ValueError):
        TensorType(-1)
    with pytest.raises(ValueError):
        TensorType(2, 2, 2, 2, 1, 0)

## TensorField
def test_tensor_field():
    field = TensorField(TensorType(eps=1, n=1), 2, [["x0", 0, 0, 0],
                                                    [0, "i*x1", 0, 0]])
    assert field[1, 1] == sp.I * x1
    assert field.components.shape == (2, 4)
    psi = TensorField.section(["1", "i"])
    assert psi.q == 2 and psi.ttype == TensorType(eps=1)
    assert TensorField.scalar("x0").components.shape == ()
    with pytest.raises(ValueError):
        TensorField(TensorType(eps=1), 2, ["x0"])
    with pytest.raises(ValueError):
        TensorField(TensorType(), 4, "x0")

## ConnectionTriple
def test_connection_triple():
    A = np.zeros((2, 4, 2), dtype=object)
    A[0, 1, 0] = sp.I * x1
    conn = ConnectionTriple.real(GammaField.zero(), A)
    assert conn.q == 2
    assert conn.Abar[0, 1, 0] == -sp.I * x1
    assert ConnectionTriple.zero(3).q == 3
    with pytest.raises(RankMismatchError):
        ConnectionTriple(GammaField.zero(), np.zeros((2, 4, 3)),
                         np.zeros((2, 4, 3)))
    with pytest.raises(RankMismatchError):
        ConnectionTriple(GammaField.zero(), np.zeros((2, 4, 2)),
                         np.zeros((1, 4, 1)))
    gamma = np.zeros((4, 4, 4), dtype=object)
    gamma[0, 0, 0] = sp.I
    with pytest.raises(ValueError):
        ConnectionTriple.real(gamma, np.zeros((1, 4, 1)))

## Conjugation involution
def test_tau_conjugate():
    real = TensorField(TensorType(m=1, n=1), 1,
                       [[f"x{i}*x{j}" for j in range(4)] for i in range(4)])
    conjugated = tau_conjugate(real)
    assert conjugated.ttype == real.ttype
    assert all(a == b for a, b in zip(conjugated.components.ravel(),
                                      real.components.ravel()))

    psi = TensorField.section(["x0", "i"])
    psi_bar = tau_conjugate(psi)
    assert psi_bar.ttype == TensorType(sigma=1)
    assert psi_bar[1] == -sp.I

def test_tau_conjugate_slots(points):
    rng = np.random.default_rng(3)
    t = TensorType(1, 0, 0, 1, 0, 1)
    x = TensorField(t, 2, random_array(rng, t.shape(2)))
    y = tau_conjugate(x)
    assert y.ttype == TensorType(0, 1, 1, 0, 0, 1)
    values = eval_array(x.components, points)
    np.testing.assert_allclose(eval_array(y.components, points),
                               np.conj(np.transpose(values, (0, 2, 1, 3))))
    twice = tau_conjugate(y)
    assert twice.ttype == t
    np.testing.assert_allclose(eval_array(twice.components, points), values)

## Covariant differential
def test_covariant_differential_scalar(points):
    rng = np.random.default_rng(1)
    frame = random_frame(rng, points)
    f = parse_expr("x0*sin(x1) + i*x2^2")
    conn = ConnectionTriple.zero(1)
    df = covariant_differential(TensorField.scalar(f), conn, frame)
    assert df.ttype == TensorType(n=1)
    for k in range(4):
        assert df[k] == geo.lie_derivative(f, frame, k)

def test_covariant_differential_section(coordinate_frame, points):
    psi = TensorField.section(["x1^2", "i*x0*x3"])
    conn = ConnectionTriple.zero(2)
    dpsi = eval_array(covariant_differential(psi, conn, coordinate_frame)
                      .components, points)
    expected = np.zeros((len(points), 2, 4), dtype=complex)
    expected[:, 0, 1] = 2 * points[:, 1]
    expected[:, 1, 0] = 1j * points[:, 3]
    expected[:, 1, 3] = 1j * points[:, 0]
    np.testing.assert_allclose(dpsi, expected)

def test_covariant_differential_signs(coordinate_frame):
    """Upper slots add the connection and lower slots subtract it"""
    A = np.zeros((1, 4, 1), dtype=int)
    A[0, 2, 0] = 3
    conn = ConnectionTriple(GammaField.zero(), A,
                            np.zeros((1, 4, 1), dtype=int))
    upper = covariant_differential(TensorField.section(["1"]), conn,
                                   coordinate_frame)
    lower = covariant_differential(TensorField(TensorType(eta=1), 1, ["1"]),
                                   conn, coordinate_frame)
    conjugate = covariant_differential(TensorField(TensorType(sigma=1), 1,
                                                   ["1"]),
                                       conn, coordinate_frame)
    assert list(upper[0]) == [0, 0, 3, 0]
    assert list(lower[0]) == [0, 0, -3, 0]
    assert list(conjugate[0]) == [0, 0, 0, 0]

    gamma = np.zeros((4, 4, 4), dtype=int)
    gamma[1, 0, 2] = 5
    conn = ConnectionTriple.zero(1, GammaField(gamma))
    vector = np.zeros(4, dtype=int)
    vector[2] = 1
    dv = covariant_differential(TensorField(TensorType(m=1), 1, vector), conn,
                                coordinate_frame)
    assert dv[1, 0] == 5
    covector = np.zeros(4, dtype=int)
    covector[1] = 1
    dw = covariant_differential(TensorField(TensorType(n=1), 1, covector),
                                conn, coordinate_frame)
    assert dw[2, 0] == -5

def test_covariant_differential_rank_mismatch(coordinate_frame):
    with pytest.raises(RankMismatchError):
        covariant_differential(TensorField.section(["1", "x0"]),
                               ConnectionTriple.zero(3), coordinate_frame)
    # Pure tangent fields work with any bundle rank
    covariant_differential(TensorField(TensorType(n=1), 2, ["x0", 0, 0, 0]),
                           ConnectionTriple.zero(3), coordinate_frame)

def test_covariant_differential_max_rank(coordinate_frame):
    full = TensorType(4, 4, 0, 0, 0, 0)
    field = TensorField(full, 1, np.ones(full.shape(1), dtype=int))
    with pytest.raises(ValueError, match="exceeds 8 slots"):
        covariant_differential(field, ConnectionTriple.zero(1),
                               coordinate_frame)
    seven = TensorType(4, 3, 0, 0, 0, 0)
    field = TensorField(seven, 1, np.ones(seven.shape(1), dtype=int))
    dx = covariant_differential(field, ConnectionTriple.zero(1),
                                coordinate_frame)
    assert dx.ttype == TensorType(4, 3, 0, 0, 0, 1)

def test_leibniz_rule(points):
    rng = np.random.default_rng(8)
    frame = random_frame(rng, points)
    conn = ConnectionTriple(GammaField(random_array(rng, (4, 4, 4))),
                            random_array(rng, (2, 4, 2)),
                            random_array(rng, (2, 4, 2)))
    x_type = TensorType(1, 0, 0, 1, 0, 0)
    y_type = TensorType(0, 1, 0, 0, 1, 0)
    x = TensorField(x_type, 2, random_array(rng, x_type.shape(2)))
    y = TensorField(y_type, 2, random_array(rng, y_type.shape(2)))
    lhs = covariant_differential(tensor_product(x, y), conn, frame)
    rhs_1 = tensor_product(covariant_differential(x, conn, frame), y)
    rhs_2 = tensor_product(x, covariant_differential(y, conn, frame))
    assert lhs.ttype == rhs_1.ttype == rhs_2.ttype
    np.testing.assert_allclose(eval_array(lhs.components, points),
                               eval_array(rhs_1.components, points)
                               + eval_array(rhs_2.components, points),
                               rtol=1e-10, atol=1e-10)

def test_tau_commutes_with_real_connection(points):
    rng = np.random.default_rng(4)
    frame = random_frame(rng, points)
    metric = random_metric(rng, frame)
    conn = ConnectionTriple.real(geo.christoffel(metric, frame),
                                 random_array(rng, (2, 4, 2)), points)
    t = TensorType(1, 1, 0, 1, 0, 1)
    x = TensorField(t, 2, random_array(rng, t.shape(2)))
    lhs = covariant_differential(tau_conjugate(x), conn, frame)
    rhs = tau_conjugate(covariant_differential(x, conn, frame))
    np.testing.assert_allclose(eval_array(lhs.components, points),
                               eval_array(rhs.components, points),
                               rtol=1e-10, atol=1e-10)

## Reality conditions
def test_reality_check(coordinate_frame, points):
    rng = np.random.default_rng(2)
    A = random_array(rng, (2, 4, 2))
    conn = ConnectionTriple.real(GammaField.zero(), A, points)
    results = reality_check(conn, coordinate_frame, points=points)
    assert [r.tag for r in results] == ["potential-conjugate", "gamma-real",
                                        "curvature-real",
                                        "field-strength-conjugate"]
    assert all(results)

    Abar = conn.Abar.copy()
    Abar[1, 3, 0] = Abar[1, 3, 0] + sp.Rational(1, 4)
    broken = ConnectionTriple(GammaField.zero(), A, Abar)
    results = {r.tag: r for r in reality_check(broken, coordinate_frame,
                                               points=points)}
    assert not results["potential-conjugate"]
    assert results["potential-conjugate"].max_residual == \
        pytest.approx(0.25, abs=1e-12)
    assert results["potential-conjugate"].worst_slot == (1, 3, 0)
    assert not results["field-strength-conjugate"]
    assert results["gamma-real"]
