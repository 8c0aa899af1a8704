import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deficiency.errors import InputError, NoSelfAdjointExtension
from deficiency.extensions import (
    UnitaryParameter,
    boundary_form,
    build_extension,
    domain_angle,
    graph_angle,
    sweep_extensions,
    verify_extension,
)
from deficiency.linalg import max_angle
from deficiency.operator import deficiency_indices, hermitian_model, momentum_interval


def random_unitary(d, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def matrix_of(e):
    return e.apply(np.eye(e.base.n, dtype=complex))


def test_unitary_parameter_validation():
    UnitaryParameter(random_unitary(3, 0))
    with pytest.raises(InputError):
        UnitaryParameter(1.1 * np.eye(2))
    with pytest.raises(InputError):
        UnitaryParameter(np.ones((2, 3)))


def test_phase_parameter():
    u = UnitaryParameter.phase(np.pi / 2, 2)
    assert u.d == 2 and np.allclose(u.matrix, 1j * np.eye(2))


def test_trivial_extension(herm6):
    e = build_extension(herm6, UnitaryParameter.phase(0.0, 0))
    assert e.d == 0
    assert max_angle(e.domain, herm6.domain) <= 1e-12
    assert np.allclose(matrix_of(e), herm6.action)
    assert verify_extension(e).passed


def test_unequal_indices_rejected():
    # not symmetric, but (S + i) loses rank while (S - i) does not
    model = hermitian_model(np.diag([-1j, 0.0]))
    with pytest.raises(NoSelfAdjointExtension) as info:
        build_extension(model, UnitaryParameter.phase(0.0, 1))
    assert "if and only if d_+(A)=d_-(A)" in str(info.value)


def test_parameter_size_mismatch(small_momentum):
    with pytest.raises(InputError):
        build_extension(small_momentum, UnitaryParameter.phase(0.0, 1))


@pytest.mark.parametrize("theta", [0.0, np.pi / 2, np.pi])
def test_momentum_extension_checks(momentum, theta):
    d = deficiency_indices(momentum)[0]
    e = build_extension(momentum, UnitaryParameter.phase(theta, d))
    rep = verify_extension(e)
    assert e.domain.size == momentum.domain.size + d
    assert rep.dim_check and rep.extends_base and rep.symmetric and rep.maximality
    assert rep.symmetry_residual <= 1e-8 * max(1.0, np.max(np.linalg.norm(e.domain_images(), axis=0)))


def test_decomposition_reproduces_formula(small_momentum):
    e = build_extension(small_momentum, UnitaryParameter(random_unitary(2, 4)))
    scale = np.max(np.abs(e.generator_images))
    assert np.max(np.abs(e.apply(e.generators) - e.generator_images)) <= 1e-10 * scale


def test_extension_is_hermitian_and_extends(small_momentum):
    m = small_momentum
    e = build_extension(m, UnitaryParameter(random_unitary(2, 5)))
    b = matrix_of(e)
    assert np.max(np.abs(b - b.conj().T)) <= 1e-9 * np.max(np.abs(b))
    assert np.max(np.abs(b @ m.domain.vectors - m.action @ m.domain.vectors)) <= 1e-9 * np.max(np.abs(b))


def test_anti_diagonal_combination(small_momentum):
    e = build_extension(small_momentum, UnitaryParameter.phase(0.7, 2))
    g = e.basis_plus.vectors[:, :1]
    ug = e.basis_minus.vectors @ e.parameter.matrix[:, :1]
    v, w = ug - g, ug + g
    av = -1j * ug - 1j * g  # the action i g on N+ and -i h on N-
    aw = 1j * g - 1j * ug
    gamma = boundary_form(v, av, w, aw)[0, 0]
    oracle = 2j * (np.vdot(g, g) + np.vdot(ug, ug))
    assert abs(gamma - oracle) <= 1e-12
    assert abs(gamma) > 1


def test_sweep_order_and_distinct_actions(small_momentum):
    thetas = 2 * np.pi * np.arange(8) / 8
    grid = [UnitaryParameter.phase(t, 2) for t in thetas]
    out = sweep_extensions(small_momentum, grid)
    assert len(out) == 8
    for (e, rep), u in zip(out, grid):
        assert rep.passed and e.parameter is u
    for i in range(8):
        for j in range(i + 1, 8):
            assert graph_angle(out[i][0], out[j][0]) > 1e-3


def test_sweep_equal_parameters(small_momentum):
    u = UnitaryParameter.phase(1.0, 2)
    (e1, _), (e2, _) = sweep_extensions(small_momentum, [u, u])
    assert domain_angle(e1, e2) <= 1e-8 and graph_angle(e1, e2) <= 1e-8


def test_sweep_empty_grid_trivial(herm6):
    out = sweep_extensions(herm6, [])
    assert len(out) == 1 and out[0][1].passed


def test_sweep_empty_grid_nontrivial(small_momentum):
    assert sweep_extensions(small_momentum, []) == []


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(10, 30))
def test_random_unitary_extensions(seed, n):
    model = momentum_interval(n)
    e = build_extension(model, UnitaryParameter(random_unitary(2, seed)))
    rep = verify_extension(e)
    assert rep.passed
    assert rep.domain_dim - model.domain.size == 2


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0.05, 1.0))
def test_phase_injective_on_graphs(theta, delta):
    model = momentum_interval(16)
    e1 = build_extension(model, UnitaryParameter.phase(theta, 2))
    e2 = build_extension(model, UnitaryParameter.phase(theta + delta, 2))
    assert graph_angle(e1, e2) > 1e-6
