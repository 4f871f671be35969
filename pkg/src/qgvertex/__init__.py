"""Hermitian-unitary vertex couplings with few passbands on quantum graphs.

Modules
-------
couplings    T <-> S maps, rank signature, connectivity
families     maximal-zero families built from kappa kernels
potentials   energy-dependent S under edge potentials, filter functions
patterns     numerical search for the maximal number of zeros
realization  compile a coupling into a delta-graph blueprint
solver       scattering on finite metric graphs, convergence studies
cli          ``qgvertex`` command-line entry point
"""
__version__ = "0.1.0"

from .couplings import (  # noqa: E402
    SMatrix,
    VertexCoupling,
    build_s_from_t,
    is_completely_connected,
    rank_signature,
    recover_t_from_s,
)
from .errors import (  # noqa: E402
    BudgetError,
    InvalidInputError,
    NumericalError,
    QGVertexError,
    ResonanceError,
    ThresholdError,
)
from .families import KappaFamilySpec, build_family, zero_count  # noqa: E402
from .potentials import ChannelPotentials, s_with_potentials, sweep  # noqa: E402
from .realization import RealizationBlueprint, compile_coupling, export_dot  # noqa: E402
from .solver import MetricGraph, convergence_study, scatter  # noqa: E402

__all__ = [
    "BudgetError", "ChannelPotentials", "InvalidInputError", "KappaFamilySpec", "MetricGraph",
    "NumericalError", "QGVertexError", "RealizationBlueprint", "ResonanceError", "SMatrix",
    "ThresholdError", "VertexCoupling", "build_family", "build_s_from_t", "compile_coupling",
    "convergence_study", "export_dot", "is_completely_connected", "rank_signature",
    "recover_t_from_s", "s_with_potentials", "scatter", "sweep", "zero_count",
]
