"""Dense complex linear-algebra kernels.

Inner products are conjugate-linear in the first argument. Frames store their
vectors as the columns of an ``(n, k)`` complex array.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, NumericalFailure


@dataclass(frozen=True)
class Tolerances:
    tol_rank: float = 1e-10
    tol_zero: float = 1e-8
    tol_ortho: float = 1e-10
    tol_sym: float = 1e-10
    tol_form: float = 1e-8

    def __post_init__(self):
        for name in ("tol_rank", "tol_zero", "tol_ortho", "tol_sym", "tol_form"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"tolerance {name} must be positive, got {value!r}")


DEFAULT_TOL = Tolerances()


def as_matrix(m, name="matrix") -> np.ndarray:
    """Coerce to a 2-D complex array, rejecting NaN/Inf."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class Frame:
    """Ordered orthonormal set of vectors in C^n (the columns of ``vectors``)."""

    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = as_matrix(self.vectors, "frame")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def empty(cls, n: int) -> "Frame":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def standard(cls, n: int) -> "Frame":
        return cls(np.eye(n, dtype=complex))

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"Frame(ambient_dim={self.ambient_dim}, size={self.size})"

    def gram_residual(self) -> float:
        if self.size == 0:
            return 0.0
        g = self.vectors.conj().T @ self.vectors
        return float(np.max(np.abs(g - np.eye(self.size))))

    def is_orthonormal(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        return self.gram_residual() <= tol.tol_ortho

    def projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T

    def coordinates(self, x) -> np.ndarray:
        return self.vectors.conj().T @ np.asarray(x, dtype=complex)


def orthonormal_range(m, tol: Tolerances = DEFAULT_TOL) -> Frame:
    """Orthonormal basis of the column span of ``m``.

    The numerical rank counts singular values above ``tol_rank`` times the
    largest one.
    """
    a = as_matrix(m)
    if a.shape[0] == 0:
        raise InputError("matrix has no rows")
    if a.shape[1] == 0:
        return Frame.empty(a.shape[0])
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return Frame.empty(a.shape[0])
    rank = int(np.sum(s > tol.tol_rank * s[0]))
    return Frame(u[:, :rank])


def _complement_of_span(a: np.ndarray, rank: int) -> Frame:
    u, _, _ = np.linalg.svd(a, full_matrices=True)
    return Frame(u[:, rank:])


def range_complement(m, tol: Tolerances = DEFAULT_TOL) -> Frame:
    """Orthonormal basis of the orthogonal complement of the column span of ``m``."""
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape[1] == 0:
        return Frame.standard(n)
    s = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(s > tol.tol_rank * s[0])) if s[0] > 0 else 0
    if rank == a.shape[1]:
        # full column rank: the trailing Householder columns span the complement
        q, _ = np.linalg.qr(a, mode="complete")
        return Frame(q[:, rank:])
    return _complement_of_span(a, rank)


def orthogonal_complement(f: Frame) -> Frame:
    if f.size == 0:
        return Frame.standard(f.ambient_dim)
    return _complement_of_span(f.vectors, f.size)


def principal_angles(f: Frame, g: Frame) -> np.ndarray:
    """Principal angles between two spans, ascending, in radians."""
    if f.ambient_dim != g.ambient_dim:
        raise InputError(f"ambient dimensions differ: {f.ambient_dim} vs {g.ambient_dim}")
    if f.size == 0 or g.size == 0:
        return np.zeros(0)
    a, b = (f.vectors, g.vectors) if f.size >= g.size else (g.vectors, f.vectors)
    # frames are orthonormal, so no re-orthonormalization is needed
    m = a.conj().T @ b
    cos = np.linalg.svd(m, compute_uv=False)
    sin = np.linalg.svd(b - a @ m, compute_uv=False)[::-1]
    # arccos loses accuracy near 0, arcsin near pi/2
    angles = np.where(cos**2 <= 0.5, np.arccos(np.clip(cos, 0.0, 1.0)), np.arcsin(np.clip(sin, 0.0, 1.0)))
    return np.sort(angles)


def max_angle(f: Frame, g: Frame) -> float:
    """Largest principal angle; pi/2 if the dimensions differ (spans cannot agree)."""
    if f.size != g.size:
        return float(np.pi / 2)
    if f.size == 0:
        return 0.0
    return float(principal_angles(f, g)[-1])


def kappa(x: float, tol_zero: float = DEFAULT_TOL.tol_zero) -> float:
    """The normaliser that sends (numerical) zero to one and fixes everything else."""
    return 1.0 if abs(x) <= tol_zero else x


def _project_out(v: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # classical Gram-Schmidt step, applied twice for stability
    for _ in range(2):
        if basis.shape[1]:
            v = v - basis @ (basis.conj().T @ v)
    return v


def kappa_gram_schmidt(vs, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gram-Schmidt that tolerates linearly dependent inputs.

    Each input column is orthogonalised against the nonzero outputs so far and
    divided by ``kappa`` of the remainder's norm. Remainders with norm at most
    ``tol_zero`` are replaced by exact zeros, so dependent inputs come out as
    zero columns instead of noise. Returns an array with the input's shape.
    """
    a = as_matrix(vs, "vectors")
    out = np.zeros_like(a)
    kept = []
    for k in range(a.shape[1]):
        basis = a[:, :0] if not kept else out[:, kept]
        r = _project_out(a[:, k], basis)
        norm = float(np.linalg.norm(r))
        if norm <= tol.tol_zero:
            continue
        out[:, k] = r / kappa(norm, tol.tol_zero)
        kept.append(k)
    return out


def gram_schmidt(vs, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Classical Gram-Schmidt with reorthogonalisation.

    Returns the orthonormalised columns and raises if an input is dependent on
    its predecessors at relative level ``tol_rank``.
    """
    a = as_matrix(vs, "vectors")
    out = np.zeros_like(a)
    for k in range(a.shape[1]):
        v = a[:, k]
        scale = np.linalg.norm(v)
        r = _project_out(v, out[:, :k])
        norm = np.linalg.norm(r)
        if scale == 0 or norm <= tol.tol_rank * scale:
            raise NumericalFailure(f"vector {k} is numerically dependent on its predecessors")
        out[:, k] = r / norm
    return out


def read_matrix(path) -> np.ndarray:
    """Read the text matrix format: ``rows cols`` then one ``re im`` line per entry."""
    path = Path(path)
    try:
        lines = [ln.split() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read matrix file {path}: {exc}") from exc
    if not lines or len(lines[0]) != 2:
        raise InputError(f"{path}: first line must be 'rows cols'")
    try:
        rows, cols = int(lines[0][0]), int(lines[0][1])
        body = [(float(re_), float(im)) for re_, im in lines[1:]]
    except ValueError as exc:
        raise InputError(f"{path}: malformed entry ({exc})") from exc
    if rows <= 0 or cols <= 0 or len(body) != rows * cols:
        raise InputError(f"{path}: expected {rows}x{cols} entries, found {len(body)}")
    data = np.array([complex(re_, im) for re_, im in body]).reshape(rows, cols)
    return as_matrix(data, str(path))


def write_matrix(path, m) -> None:
    a = as_matrix(m)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines += [f"{float(z.real)!r} {float(z.imag)!r}" for z in a.ravel()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
