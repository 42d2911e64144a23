"""File-driven analysis pipeline: parse a system document, run the
requested stages (check, transform, criterion, simulate, fit) and emit
machine-readable reports plus plot data.

The input document is a single JSON object carrying the system and all
analysis settings, so a report is reproducible from the file alone.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .criterion import (
    INCONCLUSIVE,
    STABLE_CERTIFIED,
    compute_limits,
    evaluate_criterion,
)
from .dde import (
    HistorySpec,
    SimConfig,
    export_csv,
    fit_rate,
    lyapunov_monitor,
    simulate,
)
from .fields import (
    CERTIFIED,
    DilationMap,
    NOT_HOMOGENEOUS,
    PolyMap,
    StructureReport,
    check_cooperative,
    check_nondecreasing,
    check_omega_condition,
    homogeneity_degree,
)
from .rates import make_delay, make_mu
from .transform import build_transformed_system

STAGES = ("check", "transform", "criterion", "simulate", "fit")
_DEPS = {"criterion": "transform", "fit": "simulate"}


class DocumentError(ValueError):
    """Schema violation; the message names the offending field."""


def _require(cond, path, msg):
    if not cond:
        raise DocumentError("%s: %s" % (path, msg))


def _parse_polymap(obj, n, path):
    _require(isinstance(obj, list) and len(obj) == n, path,
             "expected a list of %d component term lists" % n)
    comps = []
    for i, terms in enumerate(obj):
        _require(isinstance(terms, list), "%s[%d]" % (path, i), "expected a list of terms")
        mons = []
        for k, term in enumerate(terms):
            tpath = "%s[%d][%d]" % (path, i, k)
            _require(isinstance(term, dict) and "c" in term and "e" in term,
                     tpath, 'expected {"c": coeff, "e": [exponents]}')
            _require(isinstance(term["e"], list) and len(term["e"]) == n,
                     tpath + ".e", "expected %d exponents" % n)
            _require(all(isinstance(v, (int, float)) and v >= 0 for v in term["e"]),
                     tpath + ".e", "exponents must be nonnegative numbers")
            _require(isinstance(term["c"], (int, float)) and term["c"] != 0,
                     tpath + ".c", "coefficient must be a nonzero number")
            mons.append((term["c"], term["e"]))
        comps.append(mons)
    return PolyMap(n, comps)


@dataclass
class SystemDocument:
    n: int
    f: PolyMap
    g: PolyMap
    r: DilationMap
    delay_spec: dict
    mu_spec: dict
    phi0: np.ndarray
    xi: np.ndarray
    r_star: float
    sim: dict = field(default_factory=dict)

    def to_json_obj(self):
        def enc(F):
            return [
                [{"c": m.coeff, "e": list(m.exponents)} for m in terms]
                for terms in F.components
            ]

        obj = {
            "n": self.n,
            "f": enc(self.f),
            "g": enc(self.g),
            "r": list(self.r.r),
            "delay": self.delay_spec,
            "mu": self.mu_spec,
            "xi": self.xi.tolist(),
            "r_star": self.r_star,
            "history": {"phi0": self.phi0.tolist()},
        }
        if self.sim:
            obj["sim"] = self.sim
        return obj

    def serialize(self):
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, SystemDocument) and self.to_json_obj() == other.to_json_obj()


def parse_system(text: str) -> SystemDocument:
    """Parse and validate a system document; applies defaults
    (xi = ones, r_star = max r_i, simulation step policy)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError("document: invalid JSON (%s)" % e) from None
    _require(isinstance(obj, dict), "document", "top level must be an object")
    _require(isinstance(obj.get("n"), int) and obj["n"] >= 1, "n",
             "expected a positive integer")
    n = obj["n"]
    f = _parse_polymap(obj.get("f"), n, "f")
    g = _parse_polymap(obj.get("g"), n, "g")
    _require(isinstance(obj.get("r"), list) and len(obj["r"]) == n, "r",
             "expected %d dilation weights" % n)
    _require(all(isinstance(v, (int, float)) and v > 0 for v in obj["r"]), "r",
             "weights must be positive numbers")
    r = DilationMap(tuple(obj["r"]))
    _require(isinstance(obj.get("delay"), dict), "delay", "expected an object")
    _require(isinstance(obj.get("mu"), dict), "mu", "expected an object")
    try:
        make_delay(obj["delay"])
    except Exception as e:
        raise DocumentError("delay: %s" % e) from None
    try:
        make_mu(obj["mu"])
    except Exception as e:
        raise DocumentError("mu: %s" % e) from None
    hist = obj.get("history")
    _require(isinstance(hist, dict) and isinstance(hist.get("phi0"), list)
             and len(hist["phi0"]) == n, "history.phi0",
             "expected %d nonnegative values" % n)
    _require(all(isinstance(v, (int, float)) and v >= 0 for v in hist["phi0"]),
             "history.phi0", "values must be nonnegative")
    xi = obj.get("xi", [1.0] * n)
    _require(isinstance(xi, list) and len(xi) == n
             and all(isinstance(v, (int, float)) and v > 0 for v in xi),
             "xi", "expected %d positive values" % n)
    r_star = obj.get("r_star", max(obj["r"]))
    _require(isinstance(r_star, (int, float)) and r_star > 0, "r_star",
             "expected a positive number")
    sim = obj.get("sim", {})
    if sim:
        _require(isinstance(sim, dict), "sim", "expected an object")
        _require(isinstance(sim.get("t_end"), (int, float)), "sim.t_end",
                 "expected a number")
        for key in ("t_start", "rho", "h_min"):
            if key in sim:
                _require(isinstance(sim[key], (int, float)) and sim[key] > 0,
                         "sim.%s" % key, "expected a positive number")
    return SystemDocument(
        n=n, f=f, g=g, r=r,
        delay_spec=obj["delay"], mu_spec=obj["mu"],
        phi0=np.asarray(hist["phi0"], dtype=float),
        xi=np.asarray(xi, dtype=float),
        r_star=float(r_star),
        sim=dict(sim),
    )


@dataclass
class RunReport:
    structure: StructureReport = None
    transformed = None
    criterion = None
    simulation: dict = None
    provenance: dict = None
    stage_pass: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {
            "structure": self.structure.to_dict() if self.structure else None,
            "transform": self.transformed.to_dict() if self.transformed else None,
            "criterion": self.criterion.to_dict() if self.criterion else None,
            "simulation": self.simulation,
            "provenance": self.provenance,
            "stage_pass": self.stage_pass,
            "notes": self.notes,
        }
        return out


def _config_hash(doc: SystemDocument):
    return hashlib.sha256(
        json.dumps(doc.to_json_obj(), sort_keys=True).encode()
    ).hexdigest()[:16]


def run_pipeline(doc: SystemDocument, stages, seed=0):
    """Execute the requested stages in order.

    Returns (report, trajectory, exit_code); exit code 0 when every
    requested verdict is certified/passed, 1 otherwise.  Stage dependency
    violations raise DocumentError (exit code 2 at the CLI).
    """
    stages = set(stages)
    unknown = stages - set(STAGES)
    if unknown:
        raise DocumentError("stages: unknown %s" % sorted(unknown))
    for stage, dep in _DEPS.items():
        if stage in stages and dep not in stages:
            raise DocumentError("stages: %r requires %r" % (stage, dep))

    rng = np.random.default_rng(seed)
    report = RunReport()
    report.provenance = {
        "tool": "mustab",
        "version": __version__,
        "seed": int(seed),
        "config_hash": _config_hash(doc),
    }
    traj = None
    delay = make_delay(doc.delay_spec)
    mu = make_mu(doc.mu_spec)

    p_f = p_g = None
    if "check" in stages or "transform" in stages:
        structure = StructureReport()
        structure.cooperative = check_cooperative(doc.f, rng=rng)
        structure.nondecreasing = check_nondecreasing(doc.g, rng=rng)
        p_f = homogeneity_degree(doc.f, doc.r)
        p_g = homogeneity_degree(doc.g, doc.r)
        structure.homogeneity_f = p_f
        structure.homogeneity_g = p_g
        for i in range(doc.n):
            structure.omega[i] = check_omega_condition(doc.g, i, rng=rng)
        report.structure = structure
        hom_ok = (
            isinstance(p_f, float) and isinstance(p_g, float)
            and abs(p_f - p_g) <= 1e-9
        )
        report.stage_pass["check"] = bool(
            structure.cooperative.certified
            and structure.nondecreasing.certified
            and hom_ok
        )
        if not hom_ok:
            report.notes.append(
                "f/g are not homogeneous of one shared degree: %r vs %r" % (p_f, p_g)
            )

    tsys = None
    if "transform" in stages:
        if isinstance(p_f, float):
            tsys = build_transformed_system(doc.f, doc.g, doc.r, p_f)
            report.transformed = tsys
            report.stage_pass["transform"] = True
        else:
            report.stage_pass["transform"] = False
            report.notes.append("transform skipped: f is not r-homogeneous")

    if "criterion" in stages:
        if tsys is None or not report.stage_pass.get("check", False):
            report.stage_pass["criterion"] = False
            if tsys is not None:
                report.notes.append("criterion evaluated without full structure certificates")
        if tsys is not None:
            limits = compute_limits(mu, delay, tsys.p, doc.r_star)
            flags = {}
            if report.structure:
                flags["structure:cooperative"] = report.structure.cooperative.status
                flags["structure:nondecreasing"] = report.structure.nondecreasing.status
                flags["structure:homogeneous"] = (
                    CERTIFIED if isinstance(p_f, float) and isinstance(p_g, float)
                    and abs(p_f - p_g) <= 1e-9 else NOT_HOMOGENEOUS
                )
                for i, v in report.structure.omega.items():
                    flags["omega:g[%d]" % i] = v.status
            for i in tsys.gbar_flags:
                flags["gbar-negative-exponent:%d" % i] = "flagged"
            crit = evaluate_criterion(
                tsys.fbar, tsys.gbar, doc.xi, doc.r, doc.r_star, tsys.p,
                limits, hypothesis_flags=flags,
            )
            report.criterion = crit
            report.stage_pass["criterion"] = crit.verdict == STABLE_CERTIFIED

    if "simulate" in stages:
        sim = doc.sim
        if not sim:
            raise DocumentError("sim: simulation requested but no sim config present")
        t_start = float(sim.get("t_start", max(delay.t_min, 0.0)))
        cfg = SimConfig(
            t_start=t_start,
            t_end=float(sim["t_end"]),
            rho=float(sim.get("rho", 1e-3)),
            h_min=float(sim.get("h_min", 1e-3)),
        )
        history = HistorySpec(doc.phi0)
        traj = simulate(doc.f, doc.g, delay, history, cfg)
        monitor = None
        if tsys is not None:
            monitor = lyapunov_monitor(
                traj, mu, doc.xi, doc.r, doc.r_star,
                fbar=tsys.fbar, gbar=tsys.gbar, p=tsys.p, delay=delay,
            )
        else:
            monitor = lyapunov_monitor(traj, mu, doc.xi, doc.r, doc.r_star)
        report.simulation = {
            "t_end": float(traj.ts[-1]),
            "final_state": traj.xs[-1].tolist(),
            "v_growth_ratio": monitor.growth_ratio,
            "burn_in": monitor.burn_in,
            "monitor": monitor.to_dict(),
            "extrapolation_flagged": traj.extrapolation_flagged,
        }
        report.stage_pass["simulate"] = True
        report._monitor = monitor

    if "fit" in stages:
        slopes, intercepts = fit_rate(traj, mu)
        report.simulation["slopes"] = slopes.tolist()
        report.simulation["intercepts"] = intercepts.tolist()
        bound = -np.asarray(doc.r.r) / doc.r_star + 0.1
        report.stage_pass["fit"] = bool(np.all(slopes <= bound))

    code = 0 if all(report.stage_pass.get(s, True) for s in stages) else 1
    return report, traj, code


def emit_outputs(report: RunReport, traj, out_dir, mu=None):
    """Write report.json, trajectory.csv and rateplot.csv into out_dir.

    rateplot.csv holds ln mu(t) against ln x_j(t) restricted to strictly
    positive states, i.e. the data of a decay-rate plot.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    rpath = os.path.join(out_dir, "report.json")
    try:
        with open(rpath, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    except OSError as e:
        raise RuntimeError("cannot write %s: %s" % (rpath, e)) from None
    paths.append(rpath)
    if traj is not None:
        tpath = os.path.join(out_dir, "trajectory.csv")
        V = getattr(report, "_monitor", None)
        export_csv(traj, tpath, V=V.V if V is not None else None)
        paths.append(tpath)
        if mu is not None:
            ppath = os.path.join(out_dir, "rateplot.csv")
            mask = np.all(traj.xs > 0.0, axis=1)
            lnmu = np.log(np.asarray(mu.value(traj.ts[mask])))
            cols = ["lnmu_t"] + ["ln_x%d" % (j + 1) for j in range(traj.n)]
            with open(ppath, "w") as fh:
                fh.write(",".join(cols) + "\n")
                lnx = np.log(traj.xs[mask])
                for k in range(mask.sum()):
                    row = [lnmu[k]] + list(lnx[k])
                    fh.write(",".join("%.17g" % v for v in row) + "\n")
            paths.append(ppath)
    return paths
