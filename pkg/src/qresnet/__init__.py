"""qresnet: statevector simulation of quantum residual neural networks."""

__version__ = "0.1.0"

from .backend import backend_name
from .simcore import GateKind, Observable, Statevector, new_statevector

__all__ = [
    "GateKind",
    "Observable",
    "Statevector",
    "backend_name",
    "new_statevector",
    "__version__",
]
