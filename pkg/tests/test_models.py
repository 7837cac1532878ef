import numpy as np
import pytest

from weakkamlab.errors import ConfigurationError, RangeExhaustedError
from weakkamlab.grid import build_edge_graph, make_grid
from weakkamlab.models import (
    EikonalQuadraticModel,
    TableLagrangianModel,
    constant,
    cosine,
    default_momentum_box,
    legendre_transform_numeric,
    make_builtin_model,
    sum_of_cosines,
    table_from_file,
)


@pytest.fixture
def grid64():
    return make_grid(1, 64)


def test_legendre_pure_quadratic():
    # sup_p (p*v - p^2) = v^2/4; at v=1 the max sits at p=1/2, on the dp grid
    val = legendre_transform_numeric(lambda x, p: p * p, 0.0, 1.0, p_range=4.0, p_step=1.0 / 8)
    assert val == pytest.approx(0.25, abs=1e-12)


def test_legendre_rest_velocity():
    V = 0.7
    val = legendre_transform_numeric(lambda x, p: 0.5 * p * p + V, 0.0, 0.0, p_range=4.0, p_step=1.0 / 8)
    assert val == pytest.approx(-V, abs=1e-12)


def test_legendre_against_closed_form_conjugate():
    # oracle: conjugate of p^2/2 + V(x) is v^2/2 - V(x), here V = cos(2 pi x)
    dp = 1.0 / 64
    val = legendre_transform_numeric(
        lambda x, p: 0.5 * p * p + np.cos(2 * np.pi * x), 0.0, 1.0, p_range=8.0, p_step=dp
    )
    assert val == pytest.approx(0.5 - 1.0, abs=dp * dp)


def test_legendre_boundary_attainment_raises():
    with pytest.raises(RangeExhaustedError):
        # linear H: sup is attained at the box edge for v > slope
        legendre_transform_numeric(lambda x, p: 0.1 * p, 0.0, 1.0, p_range=2.0, p_step=0.25)


def test_legendre_2d():
    val = legendre_transform_numeric(
        lambda x, p: np.sum(np.atleast_2d(p) ** 2, axis=-1),
        np.zeros(2),
        np.array([1.0, 0.0]),
        p_range=3.0,
        p_step=0.25,
        dim=2,
    )
    assert val == pytest.approx(0.25, abs=1e-12)


def test_mechanical_builtin(grid64):
    model = make_builtin_model("mechanical", {"potential": cosine()}, grid64)
    assert model.kind == "mechanical"
    assert model.eval_L(0.5, 0.0) == pytest.approx(1.0)  # -V(0.5) = 1
    assert model.eval_H(0.0, 0.0) == pytest.approx(1.0)


def test_sin_contact_builtin(grid64):
    model = make_builtin_model("sin-contact", {}, grid64)
    assert model.eval_LG(0.3, 0.0, np.pi / 2) == pytest.approx(-1.0)
    assert model.eval_dLG_du0(0.3, 0.0) == pytest.approx(-1.0)
    assert model.eval_LG(0.0, 2.0, 0.0) == pytest.approx(1.0)


def test_linear_discount_builtin(grid64):
    a = sum_of_cosines([(1.0, 1, 0.0), (0.5, 0, 0.0)])  # cos(2 pi x) + 0.5
    model = make_builtin_model(
        "linear-discount", {"a": a, "base": "mechanical", "potential": cosine()}, grid64
    )
    assert model.eval_dLG_du0(0.0, 1.0) == pytest.approx(-1.5)
    assert model.eval_dLG_du0(0.5, 0.0) == pytest.approx(0.5)
    # exact linear contact identity L_G = L - a*u
    rng = np.random.default_rng(0)
    x = rng.integers(0, 64, size=50) / 64.0
    v = rng.integers(-3, 4, size=50).astype(float)
    u = rng.normal(size=50)
    lhs = model.eval_LG(x, v, u)
    rhs = model.eval_L(x, v) - model.linear_coefficient(x) * u
    assert lhs == pytest.approx(rhs, abs=0.0)


def test_unknown_builtin_rejected(grid64):
    with pytest.raises(ConfigurationError):
        make_builtin_model("quartic", {}, grid64)


def test_fenchel_inequality_on_random_triples(grid64):
    models = [
        make_builtin_model("mechanical", {"potential": cosine()}, grid64),
        make_builtin_model("eikonal2", {}, grid64),
    ]
    rng = np.random.default_rng(42)
    for model in models:
        x = rng.integers(0, 64, size=1000) / 64.0
        v = rng.uniform(-3.0, 3.0, size=1000)
        p = rng.uniform(-6.0, 6.0, size=1000)
        gap = model.eval_L(x, v) + model.eval_H(x, p) - p * v
        assert np.min(gap) >= -1e-9


def test_convexity_in_v_on_samples(grid64):
    model = make_builtin_model("mechanical", {"potential": cosine()}, grid64)
    rng = np.random.default_rng(5)
    x = rng.integers(0, 64, size=300) / 64.0
    v1 = rng.uniform(-3, 3, size=300)
    v2 = rng.uniform(-3, 3, size=300)
    th = rng.uniform(0, 1, size=300)
    mid = model.eval_L(x, th * v1 + (1 - th) * v2)
    chord = th * model.eval_L(x, v1) + (1 - th) * model.eval_L(x, v2)
    assert np.max(mid - chord) <= 1e-9


def test_double_conjugacy_recovers_H(grid64):
    # numeric Legendre of the numeric Legendre of H returns H within O(dp)
    graph = build_edge_graph(grid64, dt=grid64.dx, m=3)
    model = make_builtin_model("mechanical", {"potential": cosine()}, grid64)
    P, dp = default_momentum_box(graph)

    def numeric_L(x, v):
        return legendre_transform_numeric(model.eval_H, x, v, P, dp)

    # sweep v on the interior range where the inner sup stays off the box edge
    v_grid = np.arange(-P / 2, P / 2 + dp / 2, dp)
    for x in (0.0, 0.25, 0.5):
        for p in (0.0, 0.5, 1.0, -1.5):
            back = max(p * v - numeric_L(x, v) for v in v_grid)
            assert back == pytest.approx(model.eval_H(x, p), abs=2 * dp)


def test_table_potential_roundtrip(tmp_path):
    grid = make_grid(1, 8)
    values = np.arange(8, dtype=float) / 10.0
    f = tmp_path / "pot.csv"
    f.write_text("\n".join(str(v) for v in values) + "\n")
    spec = table_from_file(f)
    assert spec.sample(grid) == pytest.approx(values)


def test_table_potential_length_mismatch(tmp_path):
    f = tmp_path / "pot.csv"
    f.write_text("1.0\n2.0\n")
    with pytest.raises(ConfigurationError):
        table_from_file(f).sample(make_grid(1, 8))


def test_table_lagrangian_model_lookup():
    grid = make_grid(1, 8)
    graph = build_edge_graph(grid, dt=grid.dx, m=1)
    rng = np.random.default_rng(9)
    values = rng.normal(size=(8, 3))
    model = TableLagrangianModel(graph, values)
    assert model.eval_L(3 / 8.0, 1.0) == pytest.approx(values[3, 2])
    assert model.eval_L(0.0, -1.0) == pytest.approx(values[0, 0])
    edge_L = model.edge_lagrangian(graph)
    assert edge_L[graph.edge_index(3, 2)] == pytest.approx(values[3, 2])


def test_constant_spec_in_2d():
    grid = make_grid(2, 4)
    assert constant(0.5).sample(grid) == pytest.approx(np.full(16, 0.5))


def test_cosine_spec_in_2d_sums_axes():
    grid = make_grid(2, 4)
    vals = cosine().sample(grid)
    # node (0,0): cos(0) + cos(0) = 2
    assert vals[0] == pytest.approx(2.0)


def test_edge_lagrangian_matches_pointwise(grid64):
    graph = build_edge_graph(grid64, dt=grid64.dx, m=3)
    model = make_builtin_model("mechanical", {"potential": cosine()}, grid64)
    edge_L = model.edge_lagrangian(graph)
    e = graph.edge_index(16, 5)  # node 16 = x 0.25, velocity offset +2 -> v = 2
    assert edge_L[e] == pytest.approx(model.eval_L(0.25, 2.0))
