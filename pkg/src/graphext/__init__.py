"""Vertex couplings for Airy and Schrodinger operators on looping-edge,
tadpole and T-shaped metric graphs: Krein-space classification, deficiency
indices and discrete dynamics."""
from .graph import MetricGraphSpec, OperatorOrder, Topology, TraceVector
from .krein import FramedOperator, IndefiniteForm, is_krein_contraction, is_krein_unitary, krein_adjoint
from .verdicts import ClassificationReport, DeficiencyReport, Verdict
from .catalogue import CATALOGUE, build_spec, classify, deficiency, run_catalogue
from .evolution import Scenario, assemble, certify, run

__all__ = [
    "MetricGraphSpec", "OperatorOrder", "Topology", "TraceVector",
    "FramedOperator", "IndefiniteForm", "is_krein_contraction", "is_krein_unitary", "krein_adjoint",
    "ClassificationReport", "DeficiencyReport", "Verdict",
    "CATALOGUE", "build_spec", "classify", "deficiency", "run_catalogue",
    "Scenario", "assemble", "certify", "run",
]
__version__ = "0.1.0"
