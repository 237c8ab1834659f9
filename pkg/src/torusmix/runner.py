"""Orchestrates the analyses of one run and writes the report bundle.

Bundle layout (all under the output directory):

    report.json          every analysis result, ``"schema": 1``
    verdicts.csv         one row per verdict
    scan.csv             mixing-scale table (mix-scale / verify-*)
    proof_trace.json     proof-trace analysis
    trace.csv            first Groenwall trajectory (verify-corollary)
    image.csv, energy_density.csv, *.ppm, *.svg   render analysis
    manifest.json        config echo, versions, tolerances; ``runtime`` holds
                         wall times and thread count, the only non-reproducible part
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .bounds import (ENERGY_RTOL, as_map, conjecture_diagnostic, corollary_verdict,
                     energy_density_field, image_indicator, proof_trace, theorem_verdict)
from .flow import (check_near_incompressible, det_floor, gronwall_residuals,
                   integrated_gronwall_margins, trajectory_trace, write_trace_csv)
from .geometry import cell_centers, integrate, write_field_csv
from .mixing import mixing_scale_scan, write_scan_csv
from .render import render

SCHEMA = 1
GRONWALL_TOL = 1e-6
DIAGNOSTIC_RES = 256
RENDER_RES = 256

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

VERDICT_COLUMNS = ("analysis", "status", "holds", "certified_eps", "bound", "value", "margin")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, path):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


class Run:
    def __init__(self, config, out_dir):
        self.config = config
        self.p = config.params
        self.out = Path(out_dir)
        self.results = {}
        self.verdicts = []
        self.wall = {}
        self._indicator = None
        self._scan = None
        self.violations = []

    # shared, lazily computed inputs
    def indicator(self):
        if self._indicator is None:
            self._indicator = image_indicator(self.config.subject, self.p.grid_res)
        return self._indicator

    def scan(self):
        if self._scan is None:
            self._scan = mixing_scale_scan(self.indicator(), self.p.kappa, self.p.eps_values())
        return self._scan

    def verdict_row(self, analysis, status, holds, certified=None, bound=None, value=None, margin=None):
        self.verdicts.append((analysis, status, holds, certified, bound, value, margin))
        if not holds:
            self.violations.append(analysis)

    # analyses
    def energy(self):
        dens = energy_density_field(self.config.subject, self.p.energy_res)
        mp = as_map(self.config.subject)
        c1, c2 = cell_centers(self.p.energy_res, self.p.energy_res)
        d11, d12, d21, d22 = mp.jacobian_arrays(c1, c2)
        det = np.abs(d11 * d22 - d12 * d21)
        amgm = float((dens.samples - det).min())
        return {
            "energy": integrate(dens),
            "energy_res": self.p.energy_res,
            "density_min": float(dens.samples.min()),
            "density_max": float(dens.samples.max()),
            "det_abs_min": float(det.min()),
            "det_abs_max": float(det.max()),
            "min_density_minus_det": amgm,
            "orientation_reversing": bool(getattr(mp, "orientation_reversing", False)),
        }

    def mix_scale(self):
        scan = self.scan()
        write_scan_csv(scan, self.out / "scan.csv")
        return scan.as_dict()

    def verify_theorem(self):
        rep = theorem_verdict(self.config.subject, self.p.kappa, self.p.kappa_prime,
                              self.p.grid_res, self.p.eps_values(), self.p.energy_res,
                              indicator=self.indicator(), scan=self.scan())
        write_scan_csv(self.scan(), self.out / "scan.csv")
        self.verdict_row("verify-theorem", rep["status"], rep["holds"], rep.get("certified_eps"),
                         rep.get("bound"), rep.get("energy"), rep.get("margin"))
        return rep

    def verify_corollary(self):
        spec = self.config.subject
        p = self.p
        rep = corollary_verdict(spec, p.kappa, p.kappa_prime, p.grid_res, p.eps_values(),
                                p.t_samples, p.chain_res, p.incompress_res,
                                indicator=self.indicator(), scan=self.scan())
        write_scan_csv(self.scan(), self.out / "scan.csv")
        rng = np.random.default_rng(self.config.seed)
        x1, x2 = rng.random(p.trajectories), rng.random(p.trajectories)
        residuals = gronwall_residuals(spec, x1, x2)
        integrated = integrated_gronwall_margins(spec, x1, x2)
        write_trace_csv(trajectory_trace(spec, x1[:1], x2[:1]), self.out / "trace.csv")
        lo, hi, f2 = check_near_incompressible(spec, p.incompress_res, 10, with_scale=True)
        grad_int = conjecture_diagnostic(spec, DIAGNOSTIC_RES, p.t_samples)
        eps = rep.get("certified_eps")
        rep["groenwall"] = {
            "trajectories": p.trajectories,
            "max_pointwise_residual": float(residuals.max()),
            "min_integrated_margin": float(integrated.min()),
            "tol": GRONWALL_TOL,
        }
        rep["near_incompressible"] = {"det_abs_min": lo, "det_abs_max": hi,
                                      "det_floor": det_floor(p.kappa_prime, f2),
                                      "passes": bool(lo >= det_floor(p.kappa_prime, f2))}
        rep["conjecture_diagnostic"] = {"grad_F_integral": grad_int,
                                        "abs_log_eps": abs(math.log(eps)) if eps else None}
        pointwise_ok = bool(residuals.max() <= GRONWALL_TOL)
        integrated_ok = bool(integrated.min() >= -GRONWALL_TOL)
        self.verdict_row("groenwall-pointwise", "holds" if pointwise_ok else "violated",
                         pointwise_ok, value=float(residuals.max()), margin=-float(residuals.max()))
        self.verdict_row("groenwall-integrated", "holds" if integrated_ok else "violated",
                         integrated_ok, value=None, margin=float(integrated.min()))
        self.verdict_row("verify-corollary", rep["status"], rep["holds"], eps,
                         rep.get("bound"), rep.get("rhs"), rep.get("margin"))
        return rep

    def proof_trace(self):
        p = self.p
        eps = p.proof_eps or self.scan().certified or max(p.eps_values())
        tr = proof_trace(self.config.subject, p.kappa, p.kappa_prime, eps, p.s_samples,
                         p.grid_res, p.quad_points, p.pack_res, p.energy_res)
        doc = tr.as_dict()
        doc["failures"] = tr.failures()
        write_json(doc, self.out / "proof_trace.json")
        ok = tr.ok
        margin = tr.final.get("margin")
        self.verdict_row("proof-trace", f"{tr.mode}:{'holds' if ok else 'violated'}", ok,
                         eps, tr.final.get("lower_bound"), tr.final.get("energy_on_A"), margin)
        return {"eps": eps, "mode": tr.mode, "ok": ok, "failures": tr.failures(),
                "slices": len(tr.slices), "final": tr.final}

    def render(self):
        res = min(self.p.grid_res, RENDER_RES)
        ind = image_indicator(self.config.subject, res)
        dens = energy_density_field(self.config.subject, res)
        write_field_csv(ind, self.out / "image.csv")
        write_field_csv(dens, self.out / "energy_density.csv")
        files = []
        for fmt in self.p.formats:
            for name, fld, style in (("image", ind, "indicator"), ("energy_density", dens, "heatmap")):
                path = self.out / f"{name}.{fmt}"
                render(fld, style, path, fmt)
                files.append(path.name)
        return {"resolution": res, "files": files}

    DISPATCH = {
        "energy": energy,
        "mix-scale": mix_scale,
        "verify-theorem": verify_theorem,
        "verify-corollary": verify_corollary,
        "proof-trace": proof_trace,
        "render": render,
    }

    def execute(self):
        self.out.mkdir(parents=True, exist_ok=True)
        for name in self.config.analyses:
            t0 = time.perf_counter()
            self.results[name] = self.DISPATCH[name](self)
            self.wall[name] = time.perf_counter() - t0
        exit_code = EXIT_VIOLATION if self.violations else EXIT_OK
        report = {
            "schema": SCHEMA,
            "name": self.config.name,
            "subject": self.config.subject.describe(),
            "kind": "flow" if self.config.is_flow else "map",
            "analyses": self.results,
            "violations": self.violations,
            "exit_code": exit_code,
        }
        write_json(report, self.out / "report.json")
        with open(self.out / "verdicts.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(VERDICT_COLUMNS)
            for row in self.verdicts:
                w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                            for v in row])
        write_json(self.manifest(exit_code), self.out / "manifest.json")
        return exit_code

    def manifest(self, exit_code):
        p = self.p
        return {
            "schema": SCHEMA,
            "config": self.config.echo(),
            "versions": {"torusmix": __version__, "numpy": np.__version__,
                         "python": platform.python_version()},
            "backend": kernels.BACKEND,
            "tolerances": {
                "mixing_tol": 10.0 / p.grid_res,
                "energy_rtol": ENERGY_RTOL,
                "groenwall_tol": GRONWALL_TOL,
                "proof_trace": {"hoelder": 1e-9, "area": "(sqrt(2) L + 4) / grid_res",
                                "length": 1.0 / p.quad_points, "final": 1.0 / p.energy_res},
            },
            "exit_code": exit_code,
            "runtime": {"wall_seconds": self.wall, "threads": kernels.get_threads()},
        }
