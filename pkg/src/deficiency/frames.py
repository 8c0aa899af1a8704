"""Explicit orthonormal frames of R(A + z)^⊥ as z moves in a half plane.

Pipeline for a fixed model:

1. ``xi_basis``: vectors xi_n in D with ((A + i) xi_n) orthonormal.
2. ``eta_basis``: Gram-Schmidt of ((A + z) xi_n), an orthonormal basis of R(A + z).
3. ``sigma_sequence``: rho_n = (I - P_z) zeta_n for the standard basis zeta_n,
   run through kappa-Gram-Schmidt; exactly d+ of the results are nonzero.
4. ``select_indices``: positions of the nonzero sigma_n.
5. ``fiber_unitary``: U_z sends the selected sigma_n(z) to a fixed reference tau_j.

Everything is also usable in the lower half plane by building the xi basis at
the reference point -i instead of i.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalFailure, ToleranceInconsistency, UnsupportedParameter
from .linalg import DEFAULT_TOL, Frame, Tolerances, gram_schmidt, kappa_gram_schmidt, orthonormal_range
from .operator import OperatorModel


@dataclass(frozen=True, eq=False)
class XiBasis:
    model: OperatorModel
    xi: np.ndarray = field(repr=False)
    image: Frame
    reference: complex = 1j
    residual: float = 0.0

    @property
    def size(self) -> int:
        return self.xi.shape[1]

    @property
    def d_plus(self) -> int:
        """Codimension of R(A + reference); the expected number of nonzero sigma."""
        return self.model.n - self.size

    def check_z(self, z: complex) -> complex:
        z = complex(z)
        if z.imag == 0 or np.sign(z.imag) != np.sign(self.reference.imag):
            raise UnsupportedParameter(
                f"z = {z} is not in the half plane of the reference point {self.reference}"
            )
        return z

    def shifted_images(self, z: complex) -> np.ndarray:
        """The vectors (A + z) xi_n as columns."""
        return self.model.action @ self.xi + z * self.xi


def xi_basis(model: OperatorModel, tol: Tolerances = DEFAULT_TOL, *, reference: complex = 1j) -> XiBasis:
    reference = complex(reference)
    if reference not in (1j, -1j):
        raise InputError("reference point must be i or -i")
    x = model.shifted(reference)
    image = orthonormal_range(x, tol)
    coeffs, *_ = np.linalg.lstsq(x, image.vectors, rcond=None)
    xi = model.domain.vectors @ coeffs
    recon = model.action @ xi + reference * xi
    residual = float(np.max(np.abs(recon - image.vectors))) if image.size else 0.0
    if residual > 1e-9:
        raise NumericalFailure(f"xi reconstruction residual {residual:.3e} exceeds 1e-9")
    return XiBasis(model, xi, image, reference, residual)


def eta_basis(x: XiBasis, z: complex, tol: Tolerances = DEFAULT_TOL) -> Frame:
    z = x.check_z(z)
    return Frame(gram_schmidt(x.shifted_images(z), tol))


def sigma_sequence(x: XiBasis, z: complex, zeta: Frame | None = None,
                   tol: Tolerances = DEFAULT_TOL, *, check_count=True, eta: Frame | None = None) -> np.ndarray:
    """Columns sigma_1(z), ..., sigma_n(z); zero columns are exact zeros."""
    eta = (eta_basis(x, z, tol) if eta is None else eta).vectors
    n = x.model.n
    zeta_v = np.eye(n, dtype=complex) if zeta is None else zeta.vectors
    rho = zeta_v - eta @ (eta.conj().T @ zeta_v)
    sigma = kappa_gram_schmidt(rho, tol)
    if check_count:
        count = len(select_indices(sigma))
        if count != x.d_plus:
            raise ToleranceInconsistency(
                f"{count} nonzero sigma vectors at z = {z}, expected d+ = {x.d_plus}; retune tol_zero"
            )
    return sigma


def select_indices(sigma) -> tuple[int, ...]:
    """1-based positions of the nonzero columns, in increasing order."""
    sigma = np.asarray(sigma)
    nz = np.flatnonzero(np.any(sigma != 0, axis=0))
    return tuple(int(k) + 1 for k in nz)


def selected_frame(sigma) -> Frame:
    idx = select_indices(sigma)
    return Frame(np.asarray(sigma)[:, [k - 1 for k in idx]])


@dataclass(frozen=True, eq=False)
class FiberFrameData:
    z: complex
    eta: Frame
    sigma: np.ndarray = field(repr=False)
    indices: tuple[int, ...]
    selected: Frame
    tau: Frame
    unitary_to_reference: np.ndarray = field(repr=False)

    def apply(self, f) -> np.ndarray:
        """U_z f = sum_j <sigma_{n_j}(z), f> tau_j, as an ambient vector."""
        return self.tau.vectors @ (self.selected.vectors.conj().T @ np.asarray(f, dtype=complex))

    def tau_coordinates(self, f) -> np.ndarray:
        return self.selected.vectors.conj().T @ np.asarray(f, dtype=complex)


def fiber_unitary(selected: Frame, tau: Frame, basis: Frame | None = None) -> np.ndarray:
    """Matrix of U_z from ``basis`` coordinates to tau coordinates.

    ``basis`` is any orthonormal frame of the same fiber deficiency space; by
    default the selected sigma frame itself, for which the matrix is the
    identity.
    """
    if selected.size != tau.size:
        raise InputError(f"{selected.size} selected sigma vectors but {tau.size} tau vectors")
    if selected.ambient_dim != tau.ambient_dim:
        raise InputError("sigma and tau frames live in different spaces")
    basis = selected if basis is None else basis
    if basis.size != selected.size:
        raise InputError("basis size differs from the fiber deficiency dimension")
    # <tau_j, U_z b_k> = <sigma_j, b_k>
    return selected.vectors.conj().T @ basis.vectors


class FiberFrames:
    """Per-model cache of the xi basis and the reference frame tau.

    tau is the selected sigma frame at the reference point, so U at the
    reference point is the identity.
    """

    def __init__(self, model: OperatorModel, tol: Tolerances = DEFAULT_TOL, *, reference: complex = 1j):
        self.model = model
        self.tol = tol
        self.xi = xi_basis(model, tol, reference=reference)
        self.tau = selected_frame(sigma_sequence(self.xi, self.xi.reference, tol=tol))

    @property
    def d_plus(self) -> int:
        return self.xi.d_plus

    def at(self, z: complex, basis: Frame | None = None) -> FiberFrameData:
        z = self.xi.check_z(z)
        eta = eta_basis(self.xi, z, self.tol)
        sigma = sigma_sequence(self.xi, z, tol=self.tol, eta=eta)
        sel = selected_frame(sigma)
        u = fiber_unitary(sel, self.tau, basis)
        return FiberFrameData(z, eta, sigma, select_indices(sigma), sel, self.tau, u)


def unitarity_residual(u) -> float:
    u = np.asarray(u)
    if u.size == 0:
        return 0.0
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))
