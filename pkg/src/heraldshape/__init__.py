"""Exact simulation of heralded single-photon shaping with entangled photon pairs."""

from .linalg import ShapingError, dft_matrix, kron, partial_trace
from .metrics import (
    MetricsReport,
    entanglement_entropy,
    fidelity,
    multiphoton_success,
    purity,
    tomography_reconstruct,
)
from .protocol import (
    DetectionBasis,
    HeraldOutcome,
    LossChannel,
    Modulator,
    apply_loss,
    apply_modulator,
    bucket_detect,
    eraser_basis,
    herald,
    is_unbiased,
    measure_idler,
    phase_correct,
    rescale_to_physical,
)
from .states import (
    JointState,
    ModeSpace,
    Shape,
    correlated_pair,
    generalized_bell,
    hyperentangled,
    schmidt_decompose,
    shaped_entangled,
)

__version__ = "0.1.0"
