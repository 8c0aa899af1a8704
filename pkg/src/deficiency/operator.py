"""Symmetric operators as restricted-domain matrix models.

A model is a square matrix ``S`` acting on all of C^n (the maximal action) plus
an orthonormal frame ``D`` for the domain of the restricted operator A = S|_D.
Deficiency spaces are orthogonal complements of the ranges of (S ± i) on D.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, ModelRejected, UnsupportedParameter
from .linalg import (
    DEFAULT_TOL,
    Frame,
    Tolerances,
    as_matrix,
    orthogonal_complement,
    orthonormal_range,
    range_complement,
    read_matrix,
)

PRESETS = ("momentum_interval", "laplacian_interval", "matrix_file")


@dataclass(frozen=True, eq=False)
class OperatorModel:
    action: np.ndarray = field(repr=False)
    domain: Frame
    label: str = ""
    # uniform quadrature weight; rescales every inner product equally
    weight: float = 1.0

    def __post_init__(self):
        s = as_matrix(self.action, "action")
        if s.shape[0] != s.shape[1]:
            raise InputError(f"action must be square, got {s.shape}")
        if self.domain.ambient_dim != s.shape[0]:
            raise InputError("domain frame and action disagree on the ambient dimension")
        if self.domain.size == 0:
            raise InputError("domain is empty")
        s.setflags(write=False)
        object.__setattr__(self, "action", s)

    @property
    def n(self) -> int:
        return self.action.shape[0]

    @property
    def domain_matrix(self) -> np.ndarray:
        return self.domain.vectors

    def shifted(self, z: complex) -> np.ndarray:
        """(S + z) applied to the domain frame, an n x |D| matrix."""
        return self.action @ self.domain.vectors + z * self.domain.vectors

    def with_domain(self, domain: Frame) -> "OperatorModel":
        return OperatorModel(self.action, domain, self.label, self.weight)


@dataclass(frozen=True)
class SymmetryReport:
    residual: float
    relative: float
    pair: tuple[int, int]
    accepted: bool


@dataclass(frozen=True)
class DeficiencyReport:
    d_plus: int
    d_minus: int
    basis_plus: Frame
    basis_minus: Frame
    residuals: float


def boundary_form_matrix(model: OperatorModel) -> np.ndarray:
    """G[j, k] = <S d_j, d_k> - <d_j, S d_k> over the domain frame."""
    d = model.domain.vectors
    sd = model.action @ d
    return sd.conj().T @ d - d.conj().T @ sd


def validate_symmetric(model: OperatorModel, tol: Tolerances = DEFAULT_TOL, *, raise_on_fail=True) -> SymmetryReport:
    g = np.abs(boundary_form_matrix(model))
    norms = np.linalg.norm(model.action @ model.domain.vectors, axis=0)
    scale = norms[:, None] + norms[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0, g / scale, 0.0)
    j, k = np.unravel_index(int(np.argmax(rel)), rel.shape)
    report = SymmetryReport(
        residual=float(g.max()),
        relative=float(rel[j, k]),
        pair=(int(j), int(k)),
        accepted=bool(rel[j, k] <= tol.tol_sym),
    )
    if raise_on_fail and not report.accepted:
        raise ModelRejected(
            f"symmetry residual exceeded: |<Sf,g>-<f,Sg>| = {g[j, k]:.3e} "
            f"(relative {rel[j, k]:.3e} > {tol.tol_sym:g}) at domain pair {report.pair}",
            residual=report.residual,
            pair=report.pair,
        )
    return report


def _sign(sign) -> int:
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise InputError(f"sign must be '+' or '-', got {sign!r}")


def deficiency_space(model: OperatorModel, sign, tol: Tolerances = DEFAULT_TOL) -> Frame:
    """N_± = R(A ± i)^⊥, computed as the complement of the range of (S ± i) on D."""
    return range_complement(model.shifted(_sign(sign) * 1j), tol)


def deficiency_indices(model: OperatorModel, tol: Tolerances = DEFAULT_TOL) -> tuple[int, int]:
    return deficiency_space(model, "+", tol).size, deficiency_space(model, "-", tol).size


def deficiency_report(model: OperatorModel, tol: Tolerances = DEFAULT_TOL) -> DeficiencyReport:
    plus = deficiency_space(model, "+", tol)
    minus = deficiency_space(model, "-", tol)
    res = 0.0
    for frame, s in ((plus, 1), (minus, -1)):
        if frame.size:
            r = model.shifted(s * 1j)
            col = np.linalg.norm(model.domain.vectors, axis=0)
            res = max(res, float(np.max(np.abs(frame.vectors.conj().T @ r) / col)))
    return DeficiencyReport(plus.size, minus.size, plus, minus, res)


def regularity_constant(model: OperatorModel, z: complex) -> float:
    """Smallest singular value of (S - z) on the domain frame (best c_z)."""
    s = np.linalg.svd(model.shifted(-complex(z)), compute_uv=False)
    return float(s[-1])


def in_regularity_domain(model: OperatorModel, z: complex, tol: Tolerances = DEFAULT_TOL) -> bool:
    s = np.linalg.svd(model.shifted(-complex(z)), compute_uv=False)
    return bool(s[-1] > tol.tol_rank * s[0])


def deficiency_dim_at(model: OperatorModel, z: complex, tol: Tolerances = DEFAULT_TOL) -> int:
    """d_z = dim R(A - z)^⊥ for z off the real axis."""
    z = complex(z)
    if z.imag == 0:
        raise UnsupportedParameter(f"z = {z} is real; regularity is not guaranteed there")
    return range_complement(model.shifted(-z), tol).size


@dataclass(frozen=True, eq=False)
class CayleyTransform:
    """The isometry (A - i)(A + i)^{-1}: R(A + i) -> R(A - i) in range coordinates."""

    domain: Frame
    codomain: Frame
    matrix: np.ndarray = field(repr=False)

    def apply(self, v) -> np.ndarray:
        return self.codomain.vectors @ (self.matrix @ self.domain.coordinates(v))

    def isometry_defect(self) -> float:
        k = self.matrix.shape[1]
        if k == 0:
            return 0.0
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(k))))


def cayley_transform(model: OperatorModel, tol: Tolerances = DEFAULT_TOL) -> CayleyTransform:
    x = model.shifted(1j)
    y = model.shifted(-1j)
    p = orthonormal_range(x, tol)
    q = orthonormal_range(y, tol)
    # C (P^H X) = Q^H Y
    px = p.vectors.conj().T @ x
    qy = q.vectors.conj().T @ y
    c = np.linalg.lstsq(px.T, qy.T, rcond=None)[0].T
    return CayleyTransform(p, q, c)


# -- domains and presets ---------------------------------------------------


def domain_from_constraints(constraints, n: int) -> Frame:
    """Frame for {u : c @ u = 0 for every constraint row c}."""
    if constraints is None or len(constraints) == 0:
        return Frame.standard(n)
    rows = as_matrix(constraints, "constraints")
    if rows.shape[1] != n:
        raise InputError(f"constraints have {rows.shape[1]} columns, expected {n}")
    # c @ u = <conj(c), u>
    dom = orthogonal_complement(orthonormal_range(rows.conj().T))
    if dom.size == 0:
        raise InputError("constraints are inconsistent: they leave an empty domain")
    return dom


def read_constraints(path, n: int) -> np.ndarray:
    """Sparse constraint file: each line holds ``idx re im`` triples (0-based idx)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read constraint file {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        if len(tokens) % 3:
            raise InputError(f"{path}:{lineno}: expected 'idx re im' triples")
        row = np.zeros(n, dtype=complex)
        for t in range(0, len(tokens), 3):
            try:
                idx = int(tokens[t])
                coeff = complex(float(tokens[t + 1]), float(tokens[t + 2]))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
            if not 0 <= idx < n:
                raise InputError(f"{path}:{lineno}: index {idx} outside 0..{n - 1}")
            row[idx] += coeff
        rows.append(row)
    return np.array(rows).reshape(len(rows), n)


def from_matrix(action, constraints=None, label="matrix") -> OperatorModel:
    s = as_matrix(action, "action")
    return OperatorModel(s, domain_from_constraints(constraints, s.shape[0]), label)


def hermitian_model(action, label="hermitian") -> OperatorModel:
    """Full-domain model; symmetric iff ``action`` is hermitian."""
    return from_matrix(action, None, label)


def _grid(n: int) -> float:
    if n < 8:
        raise InputError(f"grid size must be at least 8, got {n}")
    return 1.0 / (n - 1)


def central_difference(n: int) -> np.ndarray:
    """First derivative on n uniform points of [0, 1], one-sided at the two ends."""
    h = _grid(n)
    c = np.zeros((n, n))
    k = np.arange(1, n - 1)
    c[k, k + 1] = 1.0 / (2 * h)
    c[k, k - 1] = -1.0 / (2 * h)
    c[0, :2] = [-1.0 / h, 1.0 / h]
    c[-1, -2:] = [-1.0 / h, 1.0 / h]
    return c


def second_difference(n: int) -> np.ndarray:
    h = _grid(n)
    c = np.zeros((n, n))
    k = np.arange(1, n - 1)
    c[k, k - 1] = 1.0
    c[k, k] = -2.0
    c[k, k + 1] = 1.0
    c[0, :3] = [1.0, -2.0, 1.0]
    c[-1, -3:] = [1.0, -2.0, 1.0]
    return c / h**2


def momentum_interval(n: int = 200) -> OperatorModel:
    """-i d/dx on [0, 1] with both endpoint values pinned to zero."""
    h = _grid(n)
    cons = np.zeros((2, n))
    cons[0, 0] = 1.0
    cons[1, -1] = 1.0
    return OperatorModel(-1j * central_difference(n), domain_from_constraints(cons, n),
                         f"momentum_interval(n={n})", h)


def laplacian_interval(n: int = 200) -> OperatorModel:
    """d^2/dx^2 on [0, 1]; value and first difference vanish at both ends."""
    h = _grid(n)
    cons = np.zeros((4, n))
    cons[0, 0] = 1.0
    cons[1, -1] = 1.0
    cons[2, :2] = [-1.0, 1.0]
    cons[3, -2:] = [-1.0, 1.0]
    return OperatorModel(second_difference(n).astype(complex), domain_from_constraints(cons, n),
                         f"laplacian_interval(n={n})", h)


def matrix_file(matrix, constraints=None) -> OperatorModel:
    s = read_matrix(matrix)
    if s.shape[0] != s.shape[1]:
        raise InputError(f"{matrix}: action matrix must be square, got {s.shape}")
    cons = read_constraints(constraints, s.shape[0]) if constraints else None
    return from_matrix(s, cons, f"matrix_file({Path(matrix).name})")


def preset(name: str, **params) -> OperatorModel:
    if name == "momentum_interval":
        return momentum_interval(int(params.get("n", 200)))
    if name == "laplacian_interval":
        return laplacian_interval(int(params.get("n", 200)))
    if name == "matrix_file":
        if "matrix" not in params:
            raise InputError("matrix_file preset needs a 'matrix' path")
        return matrix_file(params["matrix"], params.get("constraints"))
    raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
