"""exlab: exact desk-scale laboratory for NOF-leakage-resilient and adversarial-source extractors."""

__version__ = "0.1.0"

from ._runtime import (ConfigurationError, ContractError, DomainError, ResourceError,  # noqa: E402
                       set_budget, set_threads)
from .distkit import Dist, FlatSourceSpec, JointDist  # noqa: E402
from .extract import NmExtParams  # noqa: E402
from .gf2k import FieldElem, FieldSpec  # noqa: E402
from .nofsim import CylinderIntersection, NofProtocol  # noqa: E402
from .reports import VerifyReport  # noqa: E402
from .tables import FunctionTable  # noqa: E402
from .verify import SourceFamily  # noqa: E402

__all__ = [
    "ConfigurationError", "ContractError", "DomainError", "ResourceError", "set_budget", "set_threads",
    "Dist", "JointDist", "FlatSourceSpec", "NmExtParams", "FieldElem", "FieldSpec",
    "NofProtocol", "CylinderIntersection", "VerifyReport", "FunctionTable", "SourceFamily",
]
