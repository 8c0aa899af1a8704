"""H_AB = H_A ⊗ I + I ⊗ M_phi over a finite weighted point set.

With m points, L^2(Omega; C^n) is C^{nm} with <f, g> = sum_i mu_i <f_i, g_i>.
Internally every fiber is multiplied by sqrt(mu_i); the block operator commutes
with that rescaling, so all kernels run with the plain inner product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CertificateFailure, InputError, ToleranceInconsistency
from .frames import FiberFrames, unitarity_residual
from .linalg import DEFAULT_TOL, Frame, Tolerances, max_angle, orthonormal_range, range_complement
from .operator import OperatorModel, _sign, deficiency_indices, validate_symmetric


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    phi: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).ravel()
        mu = np.asarray(self.mu, dtype=float).ravel()
        if phi.size == 0 or phi.shape != mu.shape:
            raise InputError("measure space needs matching, nonempty phi and mu lists")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(mu))):
            raise InputError("phi and mu must be finite")
        if np.any(mu <= 0):
            raise InputError("weights mu must be strictly positive")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def uniform(cls, phi) -> "MeasureSpace":
        phi = np.asarray(phi, dtype=float)
        return cls(phi, np.ones_like(phi))

    @property
    def m(self) -> int:
        return self.phi.size


@dataclass(frozen=True, eq=False)
class BipartiteModel:
    fiber: OperatorModel
    space: MeasureSpace
    operator: OperatorModel = field(repr=False)

    @property
    def n(self) -> int:
        return self.fiber.n

    @property
    def m(self) -> int:
        return self.space.m

    def blocks(self, vectors) -> list[np.ndarray]:
        v = np.asarray(vectors)
        return [v[i * self.n:(i + 1) * self.n] for i in range(self.m)]

    def to_weighted(self, vectors) -> np.ndarray:
        """Undo the sqrt(mu) rescaling: fiber i is divided by sqrt(mu_i)."""
        scale = np.repeat(1.0 / np.sqrt(self.space.mu), self.n)
        return np.asarray(vectors) * scale.reshape(-1, *([1] * (np.ndim(vectors) - 1)))

    def weighted_inner(self, f, g) -> complex:
        """<f, g> = sum_i mu_i <f_i, g_i> for vectors in weighted coordinates."""
        return sum(mu * np.vdot(a, b) for mu, a, b in zip(self.space.mu, self.blocks(f), self.blocks(g)))


def assemble(fiber: OperatorModel, space: MeasureSpace, tol: Tolerances = DEFAULT_TOL) -> BipartiteModel:
    validate_symmetric(fiber, tol)
    s = fiber.action
    eye = np.eye(fiber.n)
    action = scipy.linalg.block_diag(*[s + phi * eye for phi in space.phi])
    domain = Frame(scipy.linalg.block_diag(*[fiber.domain.vectors] * space.m))
    op = OperatorModel(action, domain, f"bipartite[{fiber.label}; m={space.m}]", fiber.weight)
    return BipartiteModel(fiber, space, op)


def deficiency_direct(b: BipartiteModel, sign, tol: Tolerances = DEFAULT_TOL) -> Frame:
    """Range complement of (H_AB ± i) on the whole nm-dimensional (rescaled) space."""
    return range_complement(b.operator.shifted(_sign(sign) * 1j), tol)


def fiber_parameter(phi: float, sign) -> complex:
    # N(H* - (i - phi)) = R(H - (-i - phi))^⊥ = R(H + phi + i)^⊥, i.e. z = phi + i
    return complex(phi, _sign(sign))


def deficiency_fibered(b: BipartiteModel, sign, tol: Tolerances = DEFAULT_TOL) -> list[Frame]:
    d_plus, d_minus = deficiency_indices(b.fiber, tol)
    expected = d_plus if _sign(sign) > 0 else d_minus
    frames = []
    for i, phi in enumerate(b.space.phi):
        f = range_complement(b.fiber.shifted(fiber_parameter(phi, sign)), tol)
        if f.size != expected:
            raise ToleranceInconsistency(f"fiber {i}: deficiency dimension {f.size}, expected {expected}")
        frames.append(f)
    return frames


def block_frame(frames: list[Frame]) -> Frame:
    return Frame(scipy.linalg.block_diag(*[f.vectors for f in frames]))


def oracle_angle(b: BipartiteModel, sign, tol: Tolerances = DEFAULT_TOL, direct: Frame | None = None) -> float:
    """Largest principal angle between the direct and the fibered deficiency spaces."""
    direct = deficiency_direct(b, sign, tol) if direct is None else direct
    return max_angle(direct, block_frame(deficiency_fibered(b, sign, tol)))


@dataclass(frozen=True, eq=False)
class IsomorphismCertificate:
    sign: int
    map: np.ndarray = field(repr=False)
    dimension: int
    expected_dimension: int
    unitarity_residual: float
    image_angle: float
    fiber_residuals: tuple[float, ...]
    tau: Frame = field(repr=False)

    def failures(self, unitary_tol: float = 1e-9, angle_tol: float = 1e-8) -> list[tuple[str, int | None, float]]:
        out = []
        if self.dimension != self.expected_dimension:
            out.append(("dimension", None, float(self.dimension)))
        if self.unitarity_residual > unitary_tol:
            out.append(("unitarity", None, self.unitarity_residual))
        if self.image_angle > angle_tol:
            out.append(("image_span", None, self.image_angle))
        for i, r in enumerate(self.fiber_residuals):
            if r > angle_tol:
                out.append(("fiber_membership", i, r))
        return out

    def passed(self, unitary_tol: float = 1e-9, angle_tol: float = 1e-8) -> bool:
        return not self.failures(unitary_tol, angle_tol)

    def require(self, unitary_tol: float = 1e-9, angle_tol: float = 1e-8) -> "IsomorphismCertificate":
        fails = self.failures(unitary_tol, angle_tol)
        if fails:
            check, fiber, value = fails[0]
            where = f" at fiber {fiber}" if fiber is not None else ""
            raise CertificateFailure(f"isomorphism check '{check}' failed{where}: {value:.3e}",
                                     fiber=fiber, check=check)
        return self


def isomorphism(b: BipartiteModel, sign, tol: Tolerances = DEFAULT_TOL,
                direct: Frame | None = None) -> IsomorphismCertificate:
    """Map N±(H_AB) onto N±(H_A) ⊗ C^m fiber by fiber with the unitaries U_z.

    The returned ``map`` sends orthonormal coordinates of the direct deficiency
    frame to orthonormal coordinates of L^2(Omega; N±(H_A)) (tau basis in every
    fiber, sqrt(mu) weighting). It is unitary exactly when every fiber component
    of the direct space lies in the fiber's sigma frame.
    """
    s = _sign(sign)
    frames = FiberFrames(b.fiber, tol, reference=s * 1j)
    d = frames.d_plus
    direct = deficiency_direct(b, s, tol) if direct is None else direct
    tau = frames.tau

    coords = []
    residuals = []
    for i, (phi, block) in enumerate(zip(b.space.phi, b.blocks(direct.vectors))):
        data = frames.at(fiber_parameter(phi, s))
        c = data.tau_coordinates(block)
        residuals.append(float(np.max(np.abs(block - data.selected.vectors @ c))) if block.size else 0.0)
        coords.append(c)
    w = np.vstack(coords) if coords else np.zeros((0, direct.size))

    if w.shape[0] == w.shape[1]:
        unit = unitarity_residual(w)
    else:
        unit = float("inf")
    target = block_frame([tau] * b.m)
    image = orthonormal_range(target.vectors @ w, tol) if w.size else Frame.empty(target.ambient_dim)
    angle = max_angle(image, target)
    return IsomorphismCertificate(s, w, direct.size, d * b.m, unit, angle, tuple(residuals), tau)


@dataclass(frozen=True)
class ProbeReport:
    d_ab: tuple[int, int]
    d_a_times_n_b: tuple[int, int]
    n_a_times_d_b: tuple[int, int]
    conjectured_sum: tuple[int, int]
    note: str = "exploratory: no expected value"


def tensor_model(a: OperatorModel, b: OperatorModel) -> OperatorModel:
    """S_A ⊗ I + I ⊗ S_B on the algebraic tensor product D_A ⊗ D_B."""
    action = np.kron(a.action, np.eye(b.n)) + np.kron(np.eye(a.n), b.action)
    domain = Frame(np.kron(a.domain.vectors, b.domain.vectors))
    return OperatorModel(action, domain, f"({a.label}) x ({b.label})")


def conjecture_probe(a: OperatorModel, b_sym: OperatorModel, tol: Tolerances = DEFAULT_TOL) -> ProbeReport:
    validate_symmetric(a, tol)
    validate_symmetric(b_sym, tol)
    da = deficiency_indices(a, tol)
    db = deficiency_indices(b_sym, tol)
    dab = deficiency_indices(tensor_model(a, b_sym), tol)
    left = (da[0] * b_sym.n, da[1] * b_sym.n)
    right = (a.n * db[0], a.n * db[1])
    return ProbeReport(dab, left, right, (left[0] + right[0], left[1] + right[1]))
