"""Self-adjoint extensions from unitaries N+ -> N- (von Neumann's formula).

D(B) = D(A) ∔ (U + I) N+ and B(f + Ug + g) = Af + ig - iUg.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateSum, InputError, NoSelfAdjointExtension
from .linalg import DEFAULT_TOL, Frame, Tolerances, as_matrix, orthonormal_range, principal_angles
from .operator import OperatorModel, deficiency_space


@dataclass(frozen=True, eq=False)
class UnitaryParameter:
    """Columns are the images of the N+ basis vectors in N- coordinates."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = as_matrix(self.matrix, "unitary")
        if u.shape[0] != u.shape[1]:
            raise InputError(f"unitary parameter must be square, got {u.shape}")
        d = u.shape[0]
        defect = float(np.max(np.abs(u @ u.conj().T - np.eye(d)))) if d else 0.0
        if defect > 1e-10:
            raise InputError(f"parameter is not unitary: |UU^H - I| = {defect:.3e}")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @classmethod
    def phase(cls, theta: float, d: int = 1) -> "UnitaryParameter":
        return cls(np.exp(1j * theta) * np.eye(d))

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ExtensionModel:
    base: OperatorModel
    parameter: UnitaryParameter
    basis_plus: Frame
    basis_minus: Frame
    domain: Frame
    # generators of D(B) (non-orthogonal) and B applied to each of them
    generators: np.ndarray = field(repr=False)
    generator_images: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.basis_plus.size

    def coefficients(self, u) -> np.ndarray:
        """Coordinates of ``u`` in the generators [D | (U+I)N+] (least squares)."""
        return np.linalg.lstsq(self.generators, np.asarray(u, dtype=complex), rcond=None)[0]

    def apply(self, u) -> np.ndarray:
        return self.generator_images @ self.coefficients(u)

    def domain_images(self) -> np.ndarray:
        """B applied to every domain frame vector."""
        return self._images

    @cached_property
    def _images(self) -> np.ndarray:
        return self.apply(self.domain.vectors)

    def graph(self) -> Frame:
        """Orthonormal frame of the graph {(u, Bu)} in C^{2n}."""
        return self._graph

    @cached_property
    def _graph(self) -> Frame:
        return orthonormal_range(np.vstack([self.domain.vectors, self.domain_images()]))


def build_extension(model: OperatorModel, u: UnitaryParameter, tol: Tolerances = DEFAULT_TOL) -> ExtensionModel:
    plus = deficiency_space(model, "+", tol)
    minus = deficiency_space(model, "-", tol)
    if plus.size != minus.size:
        raise NoSelfAdjointExtension(
            f"deficiency indices ({plus.size}, {minus.size}) differ; self-adjoint extensions "
            "exist if and only if d_+(A)=d_-(A)"
        )
    if u.d != plus.size:
        raise InputError(f"unitary parameter is {u.d}x{u.d} but d = {plus.size}")
    d_frame = model.domain.vectors
    if plus.size == 0:
        return ExtensionModel(model, u, plus, minus, model.domain, d_frame, model.action @ d_frame)

    ug = minus.vectors @ u.matrix
    g = plus.vectors
    gens = np.hstack([d_frame, ug + g])
    images = np.hstack([model.action @ d_frame, 1j * g - 1j * ug])
    s = np.linalg.svd(gens, compute_uv=False)
    rank = int(np.sum(s > tol.tol_rank * s[0]))
    if rank != gens.shape[1]:
        raise DegenerateSum(
            f"D(A) and (U+I)N+ are not a direct sum: rank {rank} < {gens.shape[1]}"
        )
    domain = orthonormal_range(gens, tol)
    return ExtensionModel(model, u, plus, minus, domain, gens, images)


def boundary_form(x, bx, y, by) -> np.ndarray:
    """Gamma(u, w) = <Bu, w> - <u, Bw> for the columns of x (with images bx) and y."""
    return bx.conj().T @ y - x.conj().T @ by


def _boundary_space(e: ExtensionModel):
    """Generators and images of the extended action on span(D ∪ N+ ∪ N-)."""
    m = e.base
    gens = np.hstack([m.domain.vectors, e.basis_plus.vectors, e.basis_minus.vectors])
    images = np.hstack([m.action @ m.domain.vectors, 1j * e.basis_plus.vectors, -1j * e.basis_minus.vectors])
    return gens, images


def extended_action(e: ExtensionModel, v) -> np.ndarray:
    """Sf on D, i g on N+, -i h on N-, applied via least-squares coordinates."""
    gens, images = _boundary_space(e)
    c = np.linalg.lstsq(gens, np.asarray(v, dtype=complex), rcond=None)[0]
    return images @ c


@dataclass(frozen=True)
class ExtensionReport:
    symmetry_residual: float
    symmetry_bound: float
    extends_residual: float
    extends_bound: float
    domain_dim: int
    expected_dim: int
    complement_dim: int
    min_complement_form: float
    symmetric: bool
    extends_base: bool
    dim_check: bool
    maximality: bool

    @property
    def passed(self) -> bool:
        return self.symmetric and self.extends_base and self.dim_check and self.maximality


def verify_extension(e: ExtensionModel, tol: Tolerances = DEFAULT_TOL) -> ExtensionReport:
    v = e.domain.vectors
    bv = e.domain_images()
    scale = float(np.max(np.linalg.norm(bv, axis=0))) if v.shape[1] else 0.0
    scale = max(scale, 1.0)
    sym = float(np.max(np.abs(boundary_form(v, bv, v, bv)))) if v.shape[1] else 0.0

    m = e.base
    sd = m.action @ m.domain.vectors
    ext = float(np.max(np.abs(e.apply(m.domain.vectors) - sd)))

    # maximality: nothing outside D(B) in the boundary space is Gamma-orthogonal to D(B)
    gens, _ = _boundary_space(e)
    span = orthonormal_range(gens, tol).vectors
    rest = span - v @ (v.conj().T @ span)
    comp = orthonormal_range(rest, tol) if np.linalg.norm(rest) > tol.tol_zero else Frame.empty(m.n)
    min_form = float("inf")
    if comp.size:
        acv = extended_action(e, comp.vectors)
        gamma = boundary_form(comp.vectors, acv, v, bv)
        min_form = float(np.min(np.max(np.abs(gamma), axis=1)))
    maximal = comp.size == 0 or min_form > tol.tol_form * scale

    return ExtensionReport(
        symmetry_residual=sym,
        symmetry_bound=tol.tol_form * scale,
        extends_residual=ext,
        extends_bound=tol.tol_ortho * scale,
        domain_dim=e.domain.size,
        expected_dim=m.domain.size + e.d,
        complement_dim=comp.size,
        min_complement_form=min_form if comp.size else 0.0,
        symmetric=sym <= tol.tol_form * scale,
        extends_base=ext <= tol.tol_ortho * scale,
        dim_check=e.domain.size == m.domain.size + e.d,
        maximality=bool(maximal),
    )


def sweep_extensions(model: OperatorModel, grid, tol: Tolerances = DEFAULT_TOL):
    """Build and verify one extension per parameter, in grid order.

    An empty grid on a model with d = 0 yields the single trivial extension.
    Returns a list of ``(extension, report)`` pairs.
    """
    grid = list(grid)
    if not grid:
        d = deficiency_space(model, "+", tol).size
        if d:
            return []
        grid = [UnitaryParameter(np.zeros((0, 0)))]
    out = []
    for u in grid:
        e = build_extension(model, u, tol)
        out.append((e, verify_extension(e, tol)))
    return out


def domain_angle(e1: ExtensionModel, e2: ExtensionModel) -> float:
    """Largest principal angle between the two domains (0 when equal)."""
    if e1.domain.size != e2.domain.size:
        return float(np.pi / 2)
    a = principal_angles(e1.domain, e2.domain)
    return float(a[-1]) if a.size else 0.0


def graph_angle(e1: ExtensionModel, e2: ExtensionModel) -> float:
    g1, g2 = e1.graph(), e2.graph()
    if g1.size != g2.size:
        return float(np.pi / 2)
    a = principal_angles(g1, g2)
    return float(a[-1]) if a.size else 0.0
