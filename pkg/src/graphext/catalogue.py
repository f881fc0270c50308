"""Named example couplings with their expected verdicts, and the dispatch
helpers the CLI uses (classify, deficiency, build from JSON)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import airy, schrodinger
from .graph import MetricGraphSpec
from .krein import null_basis
from .verdicts import ClassificationReport, Verdict


class InputError(ValueError):
    """Malformed extension description."""


AIRY_SPECS = (airy.MatrixCoupling, airy.MixedCoupling)


def operator_of(spec) -> str:
    return "airy" if isinstance(spec, AIRY_SPECS) else "schrodinger"


def classify(spec, tol_unitary: float = 1e-10, tol_psd: float = 1e-10) -> ClassificationReport:
    if isinstance(spec, AIRY_SPECS):
        return airy.classify_airy(spec, tol_unitary, tol_psd)
    return schrodinger.classify_schrodinger(spec, tol_unitary, tol_psd)


def deficiency(graph: MetricGraphSpec, operator: str = "airy"):
    if operator == "airy":
        return airy.airy_deficiency(graph)
    if operator == "schrodinger":
        return schrodinger.schrodinger_deficiency(graph)
    raise InputError(f"unknown operator {operator!r}")


def constraint_matrix(spec) -> np.ndarray:
    if isinstance(spec, AIRY_SPECS):
        return airy.constraint_matrix(spec)
    return schrodinger.constraint_matrix(spec)


def boundary_gram(spec) -> np.ndarray:
    """Hermitian matrix of the boundary form on canonical traces."""
    g = spec.graph
    if isinstance(spec, AIRY_SPECS):
        return airy.airy_gram(g)
    return 1j * schrodinger.schrodinger_gram(g)


# -- construction from JSON ------------------------------------------------------

def factories() -> dict:
    out = {}
    for op, reg in (("airy", airy.example_factories()), ("schrodinger", schrodinger.example_factories())):
        for name, fn in reg.items():
            out[name] = (op, fn)
    return out


def _coerce(params: dict) -> dict:
    out = dict(params)
    if isinstance(out.get("graph"), dict):
        out["graph"] = MetricGraphSpec.from_dict(out["graph"])
    return out


def build_example(name: str, params: dict | None = None):
    reg = factories()
    if name not in reg:
        raise InputError(f"unknown example {name!r}; known: {', '.join(sorted(reg))}")
    try:
        return reg[name][1](**_coerce(params or {}))
    except TypeError as exc:
        raise InputError(f"bad parameters for {name}: {exc}") from None


def _matrix(data, key):
    try:
        M = np.array(data[key], dtype=complex)
    except KeyError:
        raise InputError(f"missing {key!r}") from None
    except (TypeError, ValueError):
        raise InputError(f"{key!r} must be a numeric matrix") from None
    return M


def build_spec(data: dict):
    """Extension from a JSON object.

    Either {"example": name, "params": {...}} or an explicit description
    {"operator": "airy"|"schrodinger", "graph": {...}, "kind": ..., ...} with
    kind one of even_paired / replicated (matrix "L"), derivative_split ("Y",
    "L"), matrix ("L"), subspace ("Y") or constraints ("C")."""
    if not isinstance(data, dict):
        raise InputError("extension description must be a JSON object")
    if "example" in data:
        return build_example(data["example"], data.get("params"))
    if "graph" not in data:
        raise InputError("missing 'graph'")
    g = MetricGraphSpec.from_dict(data["graph"])
    op = data.get("operator", "airy")
    kind = data.get("kind")
    label = data.get("label", "")
    if op == "airy":
        if kind in ("even_paired", "replicated"):
            frame = airy.build_frame(g, airy.FrameKind(kind))
            return airy.MatrixCoupling(frame, _matrix(data, "L"), label=label)
        if kind == "derivative_split":
            frame = airy.build_frame(g, airy.FrameKind.DERIVATIVE_SPLIT)
            return airy.MixedCoupling(frame, _matrix(data, "Y"), _matrix(data, "L"), label=label)
    elif op == "schrodinger":
        frame = schrodinger.build_schrodinger_frame(g)
        if kind == "matrix":
            return schrodinger.SchrodingerMatrixCoupling(frame, _matrix(data, "L"), label=label)
        if kind == "subspace":
            return schrodinger.SubspaceCoupling(frame, _matrix(data, "Y"), label=label)
        if kind == "constraints":
            return schrodinger.ConstraintCoupling(frame, _matrix(data, "C"), label=label)
    else:
        raise InputError(f"unknown operator {op!r}")
    raise InputError(f"unknown kind {kind!r} for operator {op}")


# -- catalogue ---------------------------------------------------------------------------

_PLUS_TADPOLE = {"topology": "tadpole", "L": 1.0, "N": 1, "coefficients": [[1.0, 1.0], [1.0, 1.0]]}
_LN2 = [[0.5, -1.0, 2.0], [-1.0, 1.5, 0.25], [2.0, 0.25, -0.75]]
_TS2 = [[1.0, 0.5, -0.5], [0.5, 2.0, 1.0], [-0.5, 1.0, -1.0]]

SSA, SA, CG = Verdict.SKEW_SELF_ADJOINT, Verdict.SELF_ADJOINT, Verdict.CONTRACTION_GENERATOR


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    example: str
    params: dict
    expected: Verdict
    group: str

    def build(self):
        return build_example(self.example, self.params)


CATALOGUE = [
    # delta-type couplings on looping edges with an even number of half-lines
    CatalogueEntry("delta_z z=-2", "delta_z", {"z": -2.0}, SSA, "looping-edge delta"),
    CatalogueEntry("delta_z z=0", "delta_z", {"z": 0.0}, SSA, "looping-edge delta"),
    CatalogueEntry("delta_z z=1", "delta_z", {"z": 1.0}, SSA, "looping-edge delta"),
    CatalogueEntry("delta_z z=1.5 k=2", "delta_z", {"z": 1.5, "k": 2}, SSA, "looping-edge delta"),
    CatalogueEntry("pair z=1 m=0.5", "pair", {"z": 1.0, "m": 0.5}, SSA, "looping-edge delta"),
    CatalogueEntry("swap2", "swap2", {"m1": 1.0, "m2": -0.5}, SSA, "looping-edge delta"),
    CatalogueEntry("swap4", "swap4", {"m1": 1.0, "m2": 0.5, "m3": -1.0, "m4": 2.0}, SSA,
                   "looping-edge delta"),
    # replicated frame on the tadpole
    CatalogueEntry("tadpole contraction m=(0,0,-2,0)", "tadpole_contraction",
                   {"m": [0.0, 0.0, -2.0, 0.0]}, CG, "tadpole delta"),
    # derivative-split frame
    CatalogueEntry("mixed 2x2 m=(1,1,1)", "mixed_2x2", {"m1": 1.0, "m2": 1.0, "m3": 1.0}, CG, "split"),
    CatalogueEntry("mixed 2x2 m=(0,1,1)", "mixed_2x2", {"m1": 0.0, "m2": 1.0, "m3": 1.0}, CG, "split"),
    CatalogueEntry("Y_1 with swap", "y_z", {"z": 1.0, "graph": _PLUS_TADPOLE}, CG, "split"),
    CatalogueEntry("Y_0 with swap", "y_z", {"z": 0.0, "graph": _PLUS_TADPOLE}, CG, "split"),
    # Schrodinger
    CatalogueEntry("L_1", "l_n", {"m": [[1.0, -0.5], [-0.5, 2.0]]}, SA, "schrodinger delta"),
    CatalogueEntry("L_2", "l_n", {"m": _LN2}, SA, "schrodinger delta"),
    CatalogueEntry("delta_prime m=(1,0,-1,0.5)", "delta_prime",
                   {"m1": 1.0, "m2": 0.0, "m3": -1.0, "m4": 0.5}, SA, "schrodinger delta"),
    CatalogueEntry("delta_prime m=(2,1,0.5,1)", "delta_prime",
                   {"m1": 2.0, "m2": 1.0, "m3": 0.5, "m4": 1.0}, SA, "schrodinger delta"),
    CatalogueEntry("D_Z Z=0", "dzn", {"Z": 0.0}, SA, "schrodinger delta"),
    CatalogueEntry("D_Z Z=2", "dzn", {"Z": 2.0}, SA, "schrodinger delta"),
    CatalogueEntry("D_Z Z=-1 N=3", "dzn", {"Z": -1.0, "N": 3}, SA, "schrodinger delta"),
    CatalogueEntry("H_Y0", "subspace", {"Y": [1.0, 1.0, 0.0]}, SA, "subspace"),
    CatalogueEntry("H_Y (1,0,-1)", "subspace", {"Y": [1.0, 0.0, -1.0]}, SA, "subspace"),
    CatalogueEntry("T delta_prime m4=1", "delta_prime_t", {"m4": 1.0}, SA, "T-shaped"),
    CatalogueEntry("T N=1", "tshape", {"m": [[1.0, 2.0], [2.0, -1.0]]}, SA, "T-shaped"),
    CatalogueEntry("T N=2", "tshape", {"m": _TS2}, SA, "T-shaped"),
]


def random_member_pairs(spec, rng: np.random.Generator, n_pairs: int = 20) -> list:
    X = null_basis(constraint_matrix(spec), n=boundary_gram(spec).shape[0])
    k = X.shape[1]
    out = []
    for _ in range(n_pairs):
        a = rng.standard_normal((k, 2)) + 1j * rng.standard_normal((k, 2))
        out.append((X @ a[:, 0], X @ a[:, 1]))
    return out


def form_vanishing(spec, rng: np.random.Generator, n_pairs: int = 20) -> float:
    """Largest |[U, V]| over random pairs of domain traces."""
    G = boundary_gram(spec)
    vals = [abs(np.vdot(v, G @ u)) for u, v in random_member_pairs(spec, rng, n_pairs)]
    return float(max(vals, default=0.0))


@dataclass
class CatalogueResult:
    entry: CatalogueEntry
    report: ClassificationReport
    form_max: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def match(self) -> bool:
        return self.report.verdict is self.entry.expected

    def to_dict(self) -> dict:
        return {"name": self.entry.name, "example": self.entry.example,
                "params": self.entry.params, "group": self.entry.group,
                "expected": self.entry.expected.value, "verdict": self.report.verdict.value,
                "match": self.match, "form_max": self.form_max,
                "classification": self.report.to_dict()}


def run_catalogue(tol_unitary: float = 1e-10, tol_psd: float = 1e-10, seed: int = 0xC0FFEE,
                  n_pairs: int = 20, entries=None) -> list[CatalogueResult]:
    rng = np.random.default_rng(seed)
    results = []
    for entry in entries or CATALOGUE:
        spec = entry.build()
        rep = classify(spec, tol_unitary, tol_psd)
        res = CatalogueResult(entry, rep)
        if rep.verdict in (Verdict.SELF_ADJOINT, Verdict.SKEW_SELF_ADJOINT):
            res.form_max = form_vanishing(spec, rng, n_pairs)
        results.append(res)
    return results
