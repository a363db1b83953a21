"""Entanglement sudden death of two qubits under classical dephasing noise."""

from esdlab.errors import EigenvalueConvergenceError, NonPhysicalStateError
from esdlab.qmat import (
    DensityMatrix,
    ValidityReport,
    XState,
    bell_state,
    eigenvalues,
    embed,
    tensor_product,
    validate_density,
    werner_state,
    x_state,
)
from esdlab.channels import (
    DephasingRates,
    KrausSet,
    apply_channel,
    evolve_global_closed_form,
    evolve_local_closed_form,
    global_kraus,
    local_kraus,
)
from esdlab.measures import (
    ConcurrenceResult,
    EsdReport,
    concurrence_general,
    concurrence_x_state,
    esd_time_global,
    esd_time_local,
    esd_time_numeric,
    is_separable,
    negativity,
)

__version__ = "0.1.0"

__all__ = [
    "ConcurrenceResult",
    "DensityMatrix",
    "DephasingRates",
    "EigenvalueConvergenceError",
    "EsdReport",
    "KrausSet",
    "NonPhysicalStateError",
    "ValidityReport",
    "XState",
    "apply_channel",
    "bell_state",
    "concurrence_general",
    "concurrence_x_state",
    "eigenvalues",
    "embed",
    "esd_time_global",
    "esd_time_local",
    "esd_time_numeric",
    "evolve_global_closed_form",
    "evolve_local_closed_form",
    "global_kraus",
    "is_separable",
    "local_kraus",
    "negativity",
    "tensor_product",
    "validate_density",
    "werner_state",
    "x_state",
]
