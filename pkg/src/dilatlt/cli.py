"""Config-driven batch front end.

    dilatlt constants --gamma 1.5
    dilatlt spectrum --config runs.toml --out results/
    dilatlt verify --config runs.toml

Each (command, potential, settings) combination gets its own directory
named by a content hash; a directory that already holds a finished run is
reused unless --no-cache is given.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import shutil
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .constants import MomentOrder, ScopeError, classical_constant, cone_prefactor, flls_constant, lt_constant
from .discretize import Grid1D, GridError
from .eigensolver import ConvergenceError
from .ltverify import (analyze, plot_data, verify_corollary_total, verify_count, verify_flls_cone,
                       verify_main, verify_real_lt)
from .potentials import PotentialSpec, StripError, strip_halfwidth
from .quadrature import InadmissibleError, QuadratureConvergenceError
from .spectral_analysis import (ContourError, IllConditionedError, Tolerances, classify, multiplicities,
                                to_csv)

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VIOLATION = 0, 1, 2, 3
THREADS_ENV = "DILATLT_THREADS"
CHECKS = ("main", "corollary_total", "count", "flls_cone", "real_lt")
NUMERICAL_ERRORS = (ConvergenceError, QuadratureConvergenceError, ContourError, IllConditionedError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Run:
    spec: PotentialSpec
    grid: Grid1D
    betas: tuple
    gate: bool
    tolerances: Tolerances
    gammas: tuple
    kappas: tuple
    checks: tuple
    backend: str
    multiplicity_nodes: int

    def key(self, command: str) -> dict:
        return {"command": command, "version": __version__, "spec": self.spec.to_dict(),
                "grid": self.grid.to_dict(), "betas": list(self.betas), "gate": self.gate,
                "tolerances": self.tolerances.to_dict(), "gammas": list(self.gammas),
                "kappas": [_jnum(k) for k in self.kappas], "checks": list(self.checks),
                "backend": self.backend, "multiplicity_nodes": self.multiplicity_nodes}


@dataclass
class Outcome:
    name: str
    directory: Path
    code: int
    lines: list = field(default_factory=list)
    cached: bool = False


def _jnum(x):
    return x if math.isfinite(x) else "inf"


def _complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise UsageError(f"complex values are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def load_config(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file {path} not found")
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"cannot parse {path}: {exc}")


def build_runs(cfg: dict, tol_override: float | None = None) -> list:
    grid_cfg = cfg.get("grid", {})
    base_tol = Tolerances(**cfg.get("tolerances", {}))
    if tol_override is not None:
        base_tol = replace(base_tol, gate=tol_override, eps_stab=tol_override)
    verify = cfg.get("verify", {})
    gammas = tuple(float(g) for g in verify.get("gammas", [1.0, 1.5, 2.0]))
    kappas = tuple(math.inf if k == "inf" else float(k) for k in verify.get("kappas", [0.5, 1.0, 2.0]))
    checks = tuple(verify.get("checks", ["main", "corollary_total", "count", "flls_cone"]))
    for c in checks:
        if c not in CHECKS:
            raise UsageError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    for g in gammas:
        if g < 1:
            raise UsageError(f"gamma = {g} is outside the supported range gamma >= 1")
    pots = cfg.get("potential", [])
    if not pots:
        raise UsageError("config declares no [[potential]] entries")
    runs = []
    for i, raw in enumerate(pots):
        raw = dict(raw)
        g = {**grid_cfg, **raw.pop("grid", {})}
        betas = tuple(float(b) for b in raw.pop("betas", cfg.get("theta", {}).get("betas", [0.3, 0.5])))
        terms = []
        for t in raw.get("terms", []):
            t = dict(t)
            t["c"] = _complex(t.get("c", 0.0))
            terms.append(t)
        try:
            spec = PotentialSpec.from_dict({"name": raw.get("name", f"potential{i}"), "terms": terms})
            grid = Grid1D(float(g.get("L", 16.0)), int(g.get("N", 256)))
        except (ValueError, TypeError, KeyError) as exc:
            raise UsageError(f"potential #{i}: {exc}")
        if len(betas) != 2 or betas[0] == betas[1] or min(betas) <= 0:
            raise UsageError(f"{spec.name}: betas must be two distinct positive numbers")
        alpha = strip_halfwidth(spec)
        if max(betas) >= alpha:
            raise UsageError(f"{spec.name}: beta {max(betas)} is not inside the strip |beta| < {alpha:.6g}")
        runs.append(Run(spec, grid, betas, bool(g.get("gate", True)), base_tol, gammas, kappas, checks,
                        str(cfg.get("backend", "native")), int(cfg.get("multiplicity_nodes", 32))))
    return runs


def run_hash(key: dict) -> str:
    blob = json.dumps(key, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _execute(command: str, run: Run, out: Path, use_cache: bool, extra: dict) -> Outcome:
    key = {**run.key(command), **extra}
    d = out / f"{command}-{run_hash(key)}"
    done = d / "DONE"
    if use_cache and done.exists():
        return Outcome(run.spec.name, d, int(done.read_text().strip() or 0),
                       (d / "summary.txt").read_text().splitlines(), cached=True)
    if d.exists():
        shutil.rmtree(d)
    tmp = d.with_name(d.name + ".partial")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)
    _write(tmp / "config.json", _dump(key))
    t0 = time.time()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        code, lines = COMMANDS[command](run, tmp, extra)
    lines += [f"warning: {w.message}" for w in caught]
    _write(tmp / "summary.txt", "\n".join(lines) + "\n")
    # wall-clock data stays out of the hashed artefacts
    _write(tmp / "meta.json", _dump({"started": t0, "seconds": time.time() - t0, "pid": os.getpid()}))
    _write(tmp / "DONE", f"{code}\n")
    tmp.rename(d)
    return Outcome(run.spec.name, d, code, lines)


def _spectrum(run: Run, d: Path, extra: dict):
    an = analyze(run.spec, run.grid, run.betas, run.tolerances, run.gate, run.backend)
    ds = an.discrete
    recs = {r.value: r for r in an.records}
    rows = ds.upper.csv_rows(recs) + ds.lower.csv_rows(recs)
    _write(d / "spectrum.csv", to_csv(rows))
    _write(d / "spectrum.json", _dump(ds.to_dict()))
    _write(d / "multiplicity.json", _dump([r.to_dict() for r in an.records]))
    _write(d / "plot.txt", plot_data(an))
    lines = [f"{run.spec.name}: {len(ds.eigenvalues)} discrete eigenvalue(s) on L={run.grid.L:g}, N={run.grid.N}"]
    lines += [f"  {e.value.real:+.12f} {e.value.imag:+.12f}i  m={recs[e.value].m} g={recs[e.value].g}"
              for e in ds.eigenvalues]
    if ds.excluded:
        lines.append(f"  {len(ds.excluded)} uncertain value(s) excluded")
    if not ds.gate_passed:
        lines.append("  convergence gate FAILED")
        return EXIT_NUMERICAL, lines
    return EXIT_OK, lines


def _classify(run: Run, d: Path, extra: dict):
    t1 = _complex(extra.get("theta1", [0.0, run.betas[0]]))
    t2 = _complex(extra.get("theta2", [0.0, run.betas[1]]))
    cs = classify(run.spec, run.grid, t1, t2, run.tolerances, run.gate, backend=run.backend)
    _write(d / "spectrum.csv", to_csv(cs.csv_rows()))
    _write(d / "spectrum.json", _dump(cs.to_dict()))
    c = cs.counts()
    lines = [f"{run.spec.name}: theta = {t1}, {t2}: " + ", ".join(f"{k} {v}" for k, v in c.items())]
    lines += [f"  {e.value.real:+.12f} {e.value.imag:+.12f}i  drift {e.theta_drift:.2e}" for e in cs.discrete()]
    if cs.gate is not None and cs.gate.status == "failed":
        lines.append(f"  convergence gate FAILED (max change {cs.gate.max_change:.2e})")
        return EXIT_NUMERICAL, lines
    return EXIT_OK, lines


def _multiplicity(run: Run, d: Path, extra: dict):
    an = analyze(run.spec, run.grid, run.betas, run.tolerances, run.gate, run.backend)
    recs = an.records
    if run.multiplicity_nodes != run.tolerances.contour_nodes:
        recs = multiplicities(an.discrete, run.tolerances, run.multiplicity_nodes, run.backend)
    _write(d / "multiplicity.json", _dump([r.to_dict() for r in recs]))
    lines = [f"{run.spec.name}:"]
    lines += [f"  {r.value.real:+.12f} {r.value.imag:+.12f}i  m={r.m} g={r.g} eps={r.contour_radius:.3g} "
              f"defect={r.projector_defect:.1e}" for r in recs]
    return EXIT_OK, lines


def _verify(run: Run, d: Path, extra: dict):
    reports, lines, notices = [], [], []
    an = None
    needs_spectrum = any(c != "real_lt" for c in run.checks)
    if needs_spectrum:
        an = analyze(run.spec, run.grid, run.betas, run.tolerances, run.gate, run.backend)
    for gamma in run.gammas:
        for check in run.checks:
            try:
                if check == "main":
                    for sign in (1, -1):
                        reports.append(verify_main(run.spec, run.grid, gamma, sign, analysis=an,
                                                   tolerances=run.tolerances))
                elif check == "corollary_total":
                    reports.append(verify_corollary_total(run.spec, run.grid, gamma, analysis=an,
                                                          tolerances=run.tolerances))
                elif check == "count":
                    reports.append(verify_count(run.spec, run.grid, gamma, analysis=an,
                                                tolerances=run.tolerances))
                elif check == "flls_cone":
                    for kappa in run.kappas:
                        reports.append(verify_flls_cone(run.spec, run.grid, gamma, kappa, analysis=an,
                                                        tolerances=run.tolerances))
                elif check == "real_lt":
                    if not run.spec.is_real:
                        notices.append(f"{run.spec.name}: real_lt skipped (complex potential)")
                        continue
                    reports.append(verify_real_lt(run.spec, run.grid, gamma, run.tolerances,
                                                  backend=run.backend))
            except InadmissibleError as exc:
                notices.append(f"{run.spec.name}: {check} inadmissible: {exc}")
    _write(d / "report.json", _dump([r.to_dict() for r in reports]))
    if an is not None:
        _write(d / "plot.txt", plot_data(an, kappa=min(run.kappas) if run.kappas else None))
        _write(d / "spectrum.json", _dump(an.discrete.to_dict()))
    lines += [r.row() for r in reports] + notices
    if any(r.holds is False for r in reports):
        return EXIT_VIOLATION, lines
    if an is not None and not an.discrete.gate_passed:
        lines.append("convergence gate FAILED")
        return EXIT_NUMERICAL, lines
    return EXIT_OK, lines


def _sweep(run: Run, d: Path, extra: dict):
    betas = extra.get("sweep_betas") or [run.betas[0], run.betas[1]]
    grids = [Grid1D(float(L), int(N)) for L, N in extra.get("sweep_grids") or [[run.grid.L, run.grid.N]]]
    rows = [["L", "N", "beta", "value_re", "value_im", "drift"]]
    lines = [f"{run.spec.name}: sweep over {len(grids)} grid(s) and {len(betas)} beta value(s)"]
    for g in grids:
        for i, b in enumerate(betas):
            b2 = betas[i + 1] if i + 1 < len(betas) else betas[i - 1]
            for sign in (1, -1):
                cs = classify(run.spec, g, sign * 1j * b, sign * 1j * b2, run.tolerances, False,
                              backend=run.backend, residuals=False)
                for e in sorted(cs.discrete(), key=lambda e: (e.value.real, e.value.imag)):
                    rows.append([g.L, g.N, sign * b, e.value.real, e.value.imag, e.theta_drift])
    text = "\n".join(" ".join(repr(x) if isinstance(x, float) else str(x) for x in r) for r in rows) + "\n"
    _write(d / "sweep.txt", text)
    lines.append(f"  {len(rows) - 1} stable value(s) recorded in sweep.txt")
    return EXIT_OK, lines


COMMANDS = {"spectrum": _spectrum, "classify": _classify, "multiplicity": _multiplicity,
            "verify": _verify, "sweep": _sweep}


def cmd_constants(args) -> int:
    rows = []
    try:
        for gamma in args.gamma:
            order = MomentOrder(gamma, args.d)
            choice = lt_constant(order)
            row = {"gamma": gamma, "d": args.d, "classical": classical_constant(order),
                   "lt_mode": choice.mode, "lt_value": choice.value, "flls": flls_constant(order)}
            if args.kappa is not None:
                row["kappa"] = _jnum(args.kappa)
                row["cone_prefactor"] = cone_prefactor(order, args.kappa)
            rows.append(row)
    except (ScopeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for r in rows:
        line = (f"gamma={r['gamma']:g} d={r['d']} L_cl={r['classical']:.12g} L={r['lt_value']:.12g} "
                f"[{r['lt_mode']}] C={r['flls']:.12g}")
        if "cone_prefactor" in r:
            line += f" kappa={r['kappa']} cone={r['cone_prefactor']:.12g}"
        print(line)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "constants.json", _dump(rows))
    return EXIT_OK


def _batch(command: str, args) -> int:
    if not args.config:
        print(f"error: {command} needs --config", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(Path(args.config))
        runs = build_runs(cfg, args.tol)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    extra = {}
    if command == "classify":
        if args.theta1 is not None:
            extra["theta1"] = [args.theta1[0], args.theta1[1]]
        if args.theta2 is not None:
            extra["theta2"] = [args.theta2[0], args.theta2[1]]
    if command == "sweep":
        sw = cfg.get("sweep", {})
        extra["sweep_betas"] = [float(b) for b in sw.get("betas", [])]
        extra["sweep_grids"] = [[float(L), int(N)] for L, N in sw.get("grids", [])]
    out = Path(args.out or cfg.get("output", {}).get("dir", "dilatlt-runs"))
    out.mkdir(parents=True, exist_ok=True)
    threads = max(1, int(os.environ.get(THREADS_ENV, "1") or 1))

    def one(run):
        try:
            return _execute(command, run, out, not args.no_cache, extra)
        except NUMERICAL_ERRORS as exc:
            return Outcome(run.spec.name, out, EXIT_NUMERICAL, [f"{run.spec.name}: numerical failure: {exc}"])
        except (StripError, GridError, InadmissibleError, ScopeError) as exc:
            return Outcome(run.spec.name, out, EXIT_USAGE, [f"{run.spec.name}: {exc}"])

    with ThreadPoolExecutor(max_workers=threads) as pool:
        outcomes = list(pool.map(one, runs))
    for o in outcomes:
        for line in o.lines:
            print(line)
        print(f"  -> {o.directory}{' (cached)' if o.cached else ''}")
    codes = [o.code for o in outcomes]
    for c in (EXIT_VIOLATION, EXIT_NUMERICAL, EXIT_USAGE):
        if c in codes:
            return c
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output root directory")
    common.add_argument("--no-cache", action="store_true", help="recompute even if a finished run exists")
    common.add_argument("--tol", type=float, help="declared eigenvalue tolerance (gate and drift)")
    p = _Parser(prog="dilatlt", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    c = sub.add_parser("constants", parents=[common], help="Lieb-Thirring constants")
    c.add_argument("--gamma", type=float, nargs="+", default=[1.0, 1.5, 2.0])
    c.add_argument("--d", type=int, default=1)
    c.add_argument("--kappa", type=float)
    sub.add_parser("spectrum", parents=[common], help="discrete spectrum with convergence gate")
    cl = sub.add_parser("classify", parents=[common], help="classify one theta pair")
    cl.add_argument("--theta1", type=float, nargs=2, metavar=("RE", "IM"))
    cl.add_argument("--theta2", type=float, nargs=2, metavar=("RE", "IM"))
    sub.add_parser("multiplicity", parents=[common], help="Riesz-projector multiplicities")
    sub.add_parser("verify", parents=[common], help="check the moment inequalities")
    sub.add_parser("sweep", parents=[common], help="theta and grid sweeps")
    return p


def main(argv=None) -> int:
    p = make_parser()
    args = p.parse_args(argv)
    if args.command is None:
        p.print_help(sys.stderr)
        return EXIT_USAGE
    if args.command == "constants":
        return cmd_constants(args)
    return _batch(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
