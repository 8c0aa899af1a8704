"""Deficiency spaces, von Neumann extensions, and bipartite deficiency isomorphisms
for symmetric operators given as restricted-domain matrix models."""

__version__ = "0.1.0"

from .bipartite import (
    BipartiteModel,
    IsomorphismCertificate,
    MeasureSpace,
    ProbeReport,
    assemble,
    conjecture_probe,
    deficiency_direct,
    deficiency_fibered,
    isomorphism,
)
from .errors import (
    CertificateFailure,
    DeficiencyError,
    DegenerateSum,
    InputError,
    ModelRejected,
    NoSelfAdjointExtension,
    NumericalFailure,
    ToleranceInconsistency,
)
from .extensions import (
    ExtensionModel,
    UnitaryParameter,
    build_extension,
    sweep_extensions,
    verify_extension,
)
from .frames import (
    FiberFrames,
    eta_basis,
    fiber_unitary,
    select_indices,
    sigma_sequence,
    xi_basis,
)
from .linalg import (
    Frame,
    Tolerances,
    kappa,
    kappa_gram_schmidt,
    orthogonal_complement,
    orthonormal_range,
    principal_angles,
)
from .operator import (
    OperatorModel,
    cayley_transform,
    deficiency_dim_at,
    deficiency_indices,
    deficiency_space,
    laplacian_interval,
    momentum_interval,
    preset,
    regularity_constant,
    validate_symmetric,
)
