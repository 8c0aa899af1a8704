from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deficiency.errors import InputError, NumericalFailure
from deficiency.linalg import (
    DEFAULT_TOL,
    Frame,
    Tolerances,
    gram_schmidt,
    kappa,
    kappa_gram_schmidt,
    max_angle,
    orthogonal_complement,
    orthonormal_range,
    principal_angles,
    range_complement,
    read_matrix,
    write_matrix,
)


# -- exact rank oracle -------------------------------------------------------

def _cx(z):
    return (Fraction(float(z.real)), Fraction(float(z.imag)))


def _mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _inv(a):
    d = a[0] ** 2 + a[1] ** 2
    return (a[0] / d, -a[1] / d)


def exact_rank(m):
    """Gaussian elimination over Q(i) on the exact binary values of m."""
    rows = [[_cx(z) for z in row] for row in np.asarray(m)]
    rank, ncols = 0, len(rows[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != (0, 0)), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = _inv(rows[rank][c])
        for r in range(len(rows)):
            if r != rank and rows[r][c] != (0, 0):
                f = _mul(rows[r][c], inv)
                rows[r] = [_sub(x, _mul(f, y)) for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def rand_c(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# -- orthonormal_range -------------------------------------------------------

def test_identity_range():
    f = orthonormal_range(np.eye(3))
    assert f.size == 3
    assert max_angle(f, Frame.standard(3)) <= 1e-12


def test_equal_columns_rank_one():
    col = np.array([1, 1, 0, 0], dtype=float)
    f = orthonormal_range(np.column_stack([col, col]))
    assert f.size == 1
    assert abs(abs(np.vdot(f.vectors[:, 0], col / np.sqrt(2))) - 1) <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_random_rank_matches_exact_elimination(seed):
    rng = np.random.default_rng(seed)
    m = rand_c(rng, 5, 3)
    assert orthonormal_range(m).size == exact_rank(m) == 3


def test_rank_deficient_exact_oracle():
    rng = np.random.default_rng(11)
    # small integer entries keep the dependency exact in binary
    a = rng.integers(-3, 4, size=(5, 2)) + 1j * rng.integers(-3, 4, size=(5, 2))
    m = np.column_stack([a, a[:, 0] * 2 - a[:, 1]])
    assert exact_rank(m) == 2
    assert orthonormal_range(m).size == 2


def test_non_finite_rejected():
    with pytest.raises(InputError):
        orthonormal_range(np.array([[1.0, np.nan]]))


def test_relative_rank_cutoff_scale_free():
    rng = np.random.default_rng(2)
    m = rand_c(rng, 6, 3)
    assert orthonormal_range(1e-8 * m).size == orthonormal_range(1e8 * m).size == 3


# -- complements -------------------------------------------------------------

def test_complement_of_e1():
    c = orthogonal_complement(Frame(np.array([[1.0], [0.0]])))
    assert c.size == 1
    assert max_angle(c, Frame(np.array([[0.0], [1.0]]))) <= 1e-12


def test_complement_of_full_frame_is_empty():
    assert orthogonal_complement(Frame.standard(3)).size == 0


def test_complement_of_complex_vector():
    v = np.array([[1.0], [1j]]) / np.sqrt(2)
    c = orthogonal_complement(Frame(v))
    # solve <v, x> = conj(v) . x = 0 directly: x = (1, -i)/sqrt(2)
    x = np.array([[1.0], [-1j]]) / np.sqrt(2)
    assert abs(np.vdot(v[:, 0], x[:, 0])) <= 1e-15
    assert max_angle(c, Frame(x)) <= 1e-12


def test_range_complement_matches_two_step():
    rng = np.random.default_rng(5)
    m = rand_c(rng, 7, 4)
    assert max_angle(range_complement(m), orthogonal_complement(orthonormal_range(m))) <= 1e-10


def test_range_complement_rank_deficient():
    rng = np.random.default_rng(6)
    a = rand_c(rng, 7, 3)
    m = np.column_stack([a, a @ rand_c(rng, 3, 2)])
    c = range_complement(m)
    assert c.size == 4
    assert np.max(np.abs(c.vectors.conj().T @ m)) <= 1e-10


# -- principal angles --------------------------------------------------------

def test_angles_self():
    f = orthonormal_range(rand_c(np.random.default_rng(1), 5, 2))
    assert np.all(principal_angles(f, f) <= 1e-12)


def test_angles_orthogonal():
    e1, e2 = Frame(np.array([[1.0], [0.0]])), Frame(np.array([[0.0], [1.0]]))
    assert np.allclose(principal_angles(e1, e2), [np.pi / 2])


def test_angle_quarter_pi():
    e1 = Frame(np.array([[1.0], [0.0]]))
    u = np.array([[1.0], [1.0]]) / np.sqrt(2)
    expected = np.arccos(abs(np.vdot(e1.vectors[:, 0], u[:, 0])))
    assert np.isclose(principal_angles(e1, Frame(u))[0], expected)
    assert np.isclose(expected, np.pi / 4)


def test_intersecting_spans_zero_angle():
    rng = np.random.default_rng(4)
    f = orthonormal_range(rand_c(rng, 7, 4))
    g = orthonormal_range(rand_c(rng, 7, 4))
    # 4 + 4 > 7 forces a common direction
    assert principal_angles(f, g)[0] <= 1e-14


def test_angles_dimension_mismatch():
    with pytest.raises(InputError):
        principal_angles(Frame.standard(2), Frame.standard(3))


# -- kappa and kappa Gram-Schmidt ---------------------------------------------

@pytest.mark.parametrize("x, expected", [(0.0, 1.0), (3.5, 3.5), (-2.0, -2.0), (1e-12, 1.0)])
def test_kappa(x, expected):
    assert kappa(x) == expected


def test_kgs_orthonormal_input():
    out = kappa_gram_schmidt(np.eye(2))
    assert np.allclose(out, np.eye(2), atol=1e-15)


def test_kgs_repeated_vector():
    out = kappa_gram_schmidt(np.array([[2.0, 2.0], [0.0, 0.0]]))
    assert np.allclose(out[:, 0], [1, 0])
    assert np.all(out[:, 1] == 0)


def test_kgs_leading_zero():
    out = kappa_gram_schmidt(np.array([[0.0, 3.0], [0.0, 4.0]]))
    assert np.all(out[:, 0] == 0)
    assert np.allclose(out[:, 1], [0.6, 0.8])


def test_gram_schmidt_rejects_dependence():
    with pytest.raises(NumericalFailure):
        gram_schmidt(np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_tolerances_positive():
    with pytest.raises(InputError):
        Tolerances(tol_rank=0.0)


# -- matrix files ------------------------------------------------------------

def test_matrix_roundtrip(tmp_path):
    m = rand_c(np.random.default_rng(0), 3, 2)
    write_matrix(tmp_path / "m.txt", m)
    assert np.array_equal(read_matrix(tmp_path / "m.txt"), m)


@pytest.mark.parametrize("text", ["2 2\n1 0\n", "x y\n", "1 1\n1 nan\n", "1 1\n1\n"])
def test_matrix_file_malformed(tmp_path, text):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(InputError):
        read_matrix(p)


# -- properties --------------------------------------------------------------

shapes = st.tuples(st.integers(1, 8), st.integers(1, 6), st.integers(0, 2**31 - 1))


@settings(max_examples=60, deadline=None)
@given(shapes)
def test_frame_outputs_orthonormal(args):
    n, k, seed = args
    m = rand_c(np.random.default_rng(seed), n, k)
    f = orthonormal_range(m)
    c = orthogonal_complement(f)
    assert f.gram_residual() <= DEFAULT_TOL.tol_ortho
    assert c.gram_residual() <= DEFAULT_TOL.tol_ortho
    both = Frame(np.hstack([f.vectors, c.vectors]))
    assert both.size == n and both.gram_residual() <= DEFAULT_TOL.tol_ortho


@settings(max_examples=60, deadline=None)
@given(shapes)
def test_complement_involution(args):
    n, k, seed = args
    f = orthonormal_range(rand_c(np.random.default_rng(seed), n, min(k, n)))
    assert max_angle(orthogonal_complement(orthogonal_complement(f)), f) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(shapes)
def test_kgs_identity_on_orthonormal(args):
    n, k, seed = args
    f = orthonormal_range(rand_c(np.random.default_rng(seed), n, min(k, n)))
    assert np.max(np.abs(kappa_gram_schmidt(f.vectors) - f.vectors)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.lists(st.booleans(), min_size=1, max_size=8), st.integers(0, 2**31 - 1))
def test_kgs_matches_gs_on_independent_subsequence(n, dependent, seed):
    rng = np.random.default_rng(seed)
    cols = []
    for dep in dependent:
        if dep and cols:
            cols.append(np.column_stack(cols) @ rand_c(rng, len(cols)))
        else:
            cols.append(rand_c(rng, n))
    vs = np.column_stack(cols)
    out = kappa_gram_schmidt(vs)

    # oracle: classical Gram-Schmidt on the inputs independent of their predecessors
    keep = [j for j in range(vs.shape[1])
            if np.linalg.matrix_rank(vs[:, :j + 1], tol=1e-8) > np.linalg.matrix_rank(vs[:, :j], tol=1e-8)]
    basis = []
    for j in keep:
        v = vs[:, j].astype(complex)
        for b in basis:
            v = v - np.vdot(b, v) * b
        basis.append(v / np.linalg.norm(v))
    nonzero = [j for j in range(out.shape[1]) if np.any(out[:, j] != 0)]
    assert nonzero == keep
    for j, b in zip(keep, basis):
        assert abs(abs(np.vdot(b, out[:, j])) - 1) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**31 - 1))
def test_principal_angles_match_reference(k, l, seed):
    import scipy.linalg

    rng = np.random.default_rng(seed)
    # generic position; when k + l > n the spans intersect and the reference
    # loses accuracy near zero (sqrt(eps) floor)
    n = k + l + 1
    f = orthonormal_range(rand_c(rng, n, k))
    g = orthonormal_range(rand_c(rng, n, l))
    ref = np.sort(scipy.linalg.subspace_angles(f.vectors, g.vectors))
    assert np.max(np.abs(principal_angles(f, g) - ref)) <= 1e-12


def test_small_angles_resolved():
    rng = np.random.default_rng(9)
    f = orthonormal_range(rand_c(rng, 8, 2))
    rot = np.eye(8, dtype=complex)
    rot[[0, 0, 1, 1], [0, 1, 0, 1]] = [np.cos(1e-9), -np.sin(1e-9), np.sin(1e-9), np.cos(1e-9)]
    g = Frame(rot @ f.vectors)
    assert max_angle(f, g) <= 2e-9
    assert max_angle(f, f) <= 1e-14
