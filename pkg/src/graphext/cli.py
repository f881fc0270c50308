"""graphext command line.

    graphext classify   --input spec.json
    graphext deficiency --input graph.json
    graphext catalogue
    graphext simulate   --input spec.json --output run.csv
    graphext certify    --input spec.json

Exit codes: 0 success, 1 input error, 2 verdict inconsistency (including a
catalogue entry whose verdict differs from the expected one).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import evolution
from .airy import FrameError
from .catalogue import InputError, build_spec, classify, deficiency, operator_of, run_catalogue
from .graph import GraphError, MetricGraphSpec
from .krein import KreinError
from .reporting import load_json, make_report, write_report

COMMANDS = ("classify", "deficiency", "catalogue", "simulate", "certify")
DEFAULT_SEED = 0xC0FFEE


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    tol_unitary: float = 1e-10
    tol_psd: float = 1e-10
    seed: int = DEFAULT_SEED
    grid_h: float | None = None
    horizon: float | None = None

    def to_dict(self) -> dict:
        return {"tolerances": {"unitary": self.tol_unitary, "psd": self.tol_psd},
                "seed": self.seed, "grid_h": self.grid_h, "horizon": self.horizon,
                "input": Path(self.input).name if self.input else None}


def _int_auto(s: str) -> int:
    return int(s, 0)


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphext", description="Vertex couplings on looping-edge, "
                                "tadpole and T-shaped graphs: classification and dynamics.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="JSON extension, graph or scenario description")
    p.add_argument("--output", help="report path (JSON; simulate also accepts .csv)")
    p.add_argument("--tol-unitary", type=float, default=1e-10)
    p.add_argument("--tol-psd", type=float, default=1e-10)
    p.add_argument("--seed", type=_int_auto, default=DEFAULT_SEED)
    p.add_argument("--grid-h", type=float, default=None, help="grid spacing for simulate/certify")
    p.add_argument("--horizon", type=float, default=None, help="half-line truncation length R")
    return p


def _need_input(cfg: RunConfig) -> dict:
    if not cfg.input:
        raise InputError(f"{cfg.command} needs --input")
    return load_json(cfg.input)


def _scenario(cfg: RunConfig, data: dict, L: float) -> evolution.Scenario:
    sc = evolution.Scenario.from_dict(data.get("scenario", {}))
    if cfg.grid_h is not None:
        sc.h = cfg.grid_h / L if sc.relative else cfg.grid_h
    if cfg.horizon is not None:
        sc.R = cfg.horizon / L if sc.relative else cfg.horizon
    return sc


def cmd_classify(cfg):
    spec = build_spec(_need_input(cfg))
    rep = classify(spec, cfg.tol_unitary, cfg.tol_psd)
    return "ok", rep.to_dict(), 0


def cmd_deficiency(cfg):
    data = _need_input(cfg)
    op = data.get("operator", "airy")
    g = MetricGraphSpec.from_dict(data.get("graph", data))
    rep = deficiency(g, op)
    return "ok", {"graph": g.to_dict(), **rep.to_dict()}, 0


def cmd_catalogue(cfg):
    results = run_catalogue(cfg.tol_unitary, cfg.tol_psd, cfg.seed)
    rows = [r.to_dict() for r in results]
    bad = [r["name"] for r in rows if not r["match"]]
    out = {"entries": rows, "n_entries": len(rows), "n_match": len(rows) - len(bad), "mismatches": bad}
    return ("mismatch", out, 2) if bad else ("ok", out, 0)


def cmd_simulate(cfg):
    data = _need_input(cfg)
    spec = build_spec(data)
    rep = evolution.run(spec, _scenario(cfg, data, spec.graph.L))
    if cfg.output and cfg.output.endswith(".csv"):
        rep.to_csv(cfg.output)
        cfg.output = None
    out = {"operator": operator_of(spec), "label": spec.label, **rep.summary()}
    return rep.status, out, 0


def cmd_certify(cfg):
    data = _need_input(cfg)
    spec = build_spec(data)
    verdict = classify(spec, cfg.tol_unitary, cfg.tol_psd).verdict
    cert = evolution.certify(spec, _scenario(cfg, data, spec.graph.L), verdict=verdict)
    out = {"operator": operator_of(spec), "label": spec.label, **cert.to_dict()}
    if cert.consistent is False:
        status = "inconsistent discretization" if cert.status == "inconsistent discretization" else "inconsistent"
        return status, out, 2
    return cert.status, out, 0


HANDLERS = {"classify": cmd_classify, "deficiency": cmd_deficiency, "catalogue": cmd_catalogue,
            "simulate": cmd_simulate, "certify": cmd_certify}


def run(cfg: RunConfig) -> int:
    try:
        status, result, code = HANDLERS[cfg.command](cfg)
    except (InputError, GraphError, FrameError, KreinError, evolution.DiscretizationError, ValueError) as exc:
        print(f"graphext {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    report = make_report(cfg.command, cfg.to_dict(), result, status)
    text = write_report(report, cfg.output)
    if cfg.output is None:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    ns = parser().parse_args(argv)
    cfg = RunConfig(ns.command, ns.input, ns.output, ns.tol_unitary, ns.tol_psd, ns.seed,
                    ns.grid_h, ns.horizon)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
