"""Experiment orchestration: task scans, output files and the run manifest."""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import __version__
from .cantor import additive_energy, build_cantor, gamma_fit
from .config import ExperimentConfig
from .errors import DomainError
from .fup import (FFT_PAIRSUM, MATRIX, PAIRSUM, QUADRUPLE_BUDGET, SVD_MAX_N,
                  TRACE_MATRIX_MAX_N, CheckReport, beta_E, check_lemma41, check_lemma42,
                  check_prop43_strict, check_prop44, fekete_bounds, t_k_fft, t_k_quadruple, t_k_singular, trace_TT)
from .qbaker import BakerSpec, build_baker
from .spectral import CountingCurve, count_resonances, eigenvalues, fit_exponent, r_k
from .theory import GapInputs, exponent_grid, m_thm13

log = logging.getLogger(__name__)

OK, REJECTED, SKIPPED, VIOLATED, ERROR = "ok", "rejected", "skipped", "violated", "error"


@dataclass
class TaskResult:
    name: str
    status: str = OK
    message: str = ""
    files: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)
    data: object = None


def _now() -> str:
    # SOURCE_DATE_EPOCH pins the clock so that whole output trees, manifest included,
    # can be compared byte for byte
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), timezone.utc).isoformat()
    return datetime.now(timezone.utc).isoformat()


class Run:
    """One CLI invocation: runs tasks, writes files, and records the manifest."""

    def __init__(self, cfg: ExperimentConfig, command: str, out_dir, jobs: int | None = None):
        self.cfg = cfg
        self.command = command
        self.out = Path(out_dir)
        self.jobs = jobs or cfg.worker_count
        self.tasks: list[TaskResult] = []
        self.files: list[str] = []
        self.started = _now()
        self.out.mkdir(parents=True, exist_ok=True)
        self.write("config.resolved", cfg.resolved_text())

    def write(self, name: str, content: str) -> None:
        (self.out / name).write_text(content, encoding="utf-8")
        if name not in self.files:
            self.files.append(name)

    def run(self, tasks: list[tuple[str, Callable[[], TaskResult]]]) -> list[TaskResult]:
        """Run tasks on a bounded pool; results keep submission order."""

        def guarded(item):
            name, fn = item
            try:
                res = fn()
                res.name = name
                return res
            except Exception as exc:  # one failed grid point must not sink the scan
                log.warning("task %s failed: %s", name, exc)
                return TaskResult(name, ERROR, f"{type(exc).__name__}: {exc}")

        if self.jobs > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                results = list(pool.map(guarded, tasks))
        else:
            results = [guarded(t) for t in tasks]
        for res in results:
            self.tasks.append(res)
            for name, content in res.files.items():
                self.write(name, content)
        return results

    def record(self, result: TaskResult) -> None:
        self.tasks.append(result)

    @property
    def failed(self) -> bool:
        return any(t.status in (ERROR, VIOLATED) for t in self.tasks)

    def finish(self) -> int:
        inventory = []
        for name in self.files:
            digest = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
            inventory.append({"path": name, "sha256": digest})
        manifest = {
            "software_version": __version__,
            "command": self.command,
            "config_hash": self.cfg.digest(),
            "started": self.started,
            "finished": _now(),
            "tasks": [{"name": t.name, "status": t.status, "message": t.message} for t in self.tasks],
            "files": inventory,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
                                                encoding="utf-8")
        return 1 if self.failed else 0


def verify_manifest(out_dir) -> list[str]:
    """Names of files whose current hash differs from the manifest entry."""
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    bad = []
    for entry in manifest["files"]:
        path = out / entry["path"]
        if not path.exists() or hashlib.sha256(path.read_bytes()).hexdigest() != entry["sha256"]:
            bad.append(entry["path"])
    return bad


def _spec(cfg: ExperimentConfig, k: int) -> BakerSpec:
    return BakerSpec(cfg.alphabet, cfg.cutoff_obj, k)


def _spectrum_task(cfg: ExperimentConfig, k: int, write_csv: bool):
    def task():
        spec = _spec(cfg, k)
        result = eigenvalues(build_baker(spec, dense_cap=cfg.dense_cap), k=k, dense_cap=cfg.dense_cap)
        files = {}
        if write_csv:
            files[f"spectrum_k{k}.csv"] = result.to_csv(spec.fingerprint(), nu0=cfg.nu0, M=cfg.M)
        return TaskResult("", files=files, data=result)
    return task


def cmd_spectrum(cfg: ExperimentConfig, out_dir, jobs: int | None = None) -> int:
    run = Run(cfg, "spectrum", out_dir, jobs)
    run.run([(f"spectrum k={k}", _spectrum_task(cfg, k, True)) for k in cfg.k])
    return run.finish()


# Gap inputs ----------------------------------------------------------------

def _fekete_beta(cfg: ExperimentConfig) -> float:
    if not cfg.k:
        raise DomainError("beta = fekete needs at least one depth k")
    return fekete_bounds([t_k_fft(cfg.M, cfg.alphabet, k) for k in cfg.k]).running_best


def _energies(cfg: ExperimentConfig) -> list[tuple[int, int]]:
    return [(k, additive_energy(build_cantor(cfg.alphabet, k))) for k in cfg.k]


def resolve_gaps(cfg: ExperimentConfig) -> GapInputs | None:
    """Numeric gap inputs, computing ``beta``/``gamma`` when asked to; None if delta is 0 or 1."""
    if not cfg.alphabet.is_proper:
        return None
    beta = _fekete_beta(cfg) if cfg.beta == "fekete" else cfg.beta
    gamma = cfg.gamma
    if gamma == "fit":
        gamma = gamma_fit(cfg.alphabet, _energies(cfg), cfg.energy_k_min).gamma
    beta_e = None if gamma is None else beta_E(cfg.alphabet.delta, gamma)
    return GapInputs(cfg.alphabet.delta, beta_bd=cfg.beta_bd, beta=beta, beta_e=beta_e, gamma=gamma)


# Counting ------------------------------------------------------------------

def cmd_count(cfg: ExperimentConfig, out_dir, jobs: int | None = None) -> int:
    run = Run(cfg, "count", out_dir, jobs)
    results = run.run([(f"spectrum k={k}", _spectrum_task(cfg, k, False)) for k in cfg.k])
    spec0 = BakerSpec(cfg.alphabet, cfg.cutoff_obj, 2)
    curve = CountingCurve(spec0.fingerprint(include_depth=False), cfg.M, cfg.alphabet.delta)
    for k, res in zip(cfg.k, results):
        if res.status != OK:
            continue
        for nu in cfg.nu:
            curve.records.append((k, cfg.M**k, nu, count_resonances(res.data, nu, cfg.M)))
    run.write("counting_curve.csv", curve.to_csv())

    gaps = None
    if cfg.beta is not None and cfg.gamma is not None:
        try:
            gaps = resolve_gaps(cfg)
        except Exception as exc:
            run.record(TaskResult("gap inputs", ERROR, f"{type(exc).__name__}: {exc}"))

    def fit_task(nu):
        def task():
            theory = None
            if gaps is not None and gaps.beta is not None and gaps.beta_e is not None:
                theory = m_thm13(nu, gaps.delta, gaps.beta, gaps.beta_e)
            try:
                fit = fit_exponent(curve, nu, cfg.fit_ks, theory=theory)
            except DomainError as exc:
                # too few nonzero counts is a property of the data, not a failure
                return TaskResult("", SKIPPED, str(exc))
            line = json.dumps({"nu": nu, "slope": fit.slope, "intercept": fit.intercept,
                               "rss": fit.rss, "ks": list(fit.ks), "delta": cfg.alphabet.delta,
                               "m_thm13": fit.theory})
            return TaskResult("", lines=[line])
        return task

    fits = run.run([(f"fit nu={nu!r}", fit_task(nu)) for nu in cfg.fit_nus])
    run.write("fits.jsonl", "".join(line + "\n" for r in fits for line in r.lines))
    return run.finish()


# Fractal uncertainty checks ------------------------------------------------

def _lines(reports) -> TaskResult:
    return TaskResult("", lines=[r.to_json() for r in reports])


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _tk_task(cfg, k):
    def task():
        ref = t_k_fft(cfg.M, cfg.alphabet, k)
        reports = [CheckReport("tk", cfg.M, cfg.letters, k, ref.t_k, ref.t_k, True, ref.method,
                               {"N": ref.N})]
        n = cfg.alphabet.size**k
        oracles = []
        if n**4 <= QUADRUPLE_BUDGET:
            oracles.append(t_k_quadruple)
        if ref.N <= SVD_MAX_N:
            oracles.append(t_k_singular)
        for oracle in oracles:
            rec = oracle(cfg.M, cfg.alphabet, k)
            err = _rel(rec.t_k, ref.t_k)
            reports.append(CheckReport("tk", cfg.M, cfg.letters, k, rec.t_k, ref.t_k, err <= 1e-8,
                                       rec.method, {"N": ref.N, "rel_err": err}))
        return _lines(reports)
    return task


def _rk_task(cfg, k):
    def task():
        C = build_cantor(cfg.alphabet, k)
        rk = r_k(C)
        tk = t_k_fft(cfg.M, cfg.alphabet, k).t_k
        return _lines([CheckReport("tk_vs_rk", cfg.M, cfg.letters, k, rk**4, tk,
                                   rk**4 <= tk * (1 + 1e-9), "power-iteration", {"r_k": rk})])
    return task


def _trace_task(cfg, k, rho):
    def task():
        if cfg.M**k > TRACE_MATRIX_MAX_N:
            return TaskResult("", SKIPPED, f"N={cfg.M**k} above the matrix-oracle limit")
        a = trace_TT(cfg.M, cfg.alphabet, k, rho, PAIRSUM).value
        b = trace_TT(cfg.M, cfg.alphabet, k, rho, MATRIX).value
        err = _rel(a, b)
        return _lines([CheckReport("trace_identity", cfg.M, cfg.letters, k, a, b, err <= 1e-8,
                                   PAIRSUM, {"rho": rho, "rel_err": err})])
    return task


def _rejected(cfg, check, k) -> TaskResult:
    why = f"rejected: δ={cfg.alphabet.delta:g}"
    report = CheckReport(check, cfg.M, cfg.letters, k, None, None, None, "", {}, status=why)
    return TaskResult("", REJECTED, why, lines=[report.to_json()])


def _prop43_task(cfg, k):
    def task():
        try:
            report = check_prop43_strict(cfg.M, cfg.alphabet, k)
        except DomainError:
            return _rejected(cfg, "prop43", k)
        return _lines([report])
    return task


def _fekete_task(cfg):
    def task():
        if not cfg.alphabet.is_proper:
            # with delta in {0, 1} the trivial gap is already sharp
            return _rejected(cfg, "fekete", max(cfg.k))
        fb = fekete_bounds([t_k_fft(cfg.M, cfg.alphabet, k) for k in cfg.k])
        trivial = 0.5 - cfg.alphabet.delta
        report = CheckReport("fekete", cfg.M, cfg.letters, fb.best_k, fb.running_best, trivial,
                             fb.running_best > trivial, FFT_PAIRSUM,
                             {"bounds": {str(k): b for k, b in fb.bounds.items()}})
        return _lines([report])
    return task


def cmd_fup(cfg: ExperimentConfig, out_dir, jobs: int | None = None) -> int:
    run = Run(cfg, "fup", out_dir, jobs)
    checks = set(cfg.checks)
    tasks = []
    for k in cfg.k:
        if "tk" in checks:
            tasks.append((f"tk k={k}", _tk_task(cfg, k)))
        if "rk" in checks:
            tasks.append((f"rk k={k}", _rk_task(cfg, k)))
        for rho in cfg.rho:
            if "trace" in checks:
                tasks.append((f"trace k={k} rho={rho!r}", _trace_task(cfg, k, rho)))
            if "lemma41" in checks:
                tasks.append((f"lemma41 k={k} rho={rho!r}",
                              lambda k=k, rho=rho: _lines([check_lemma41(cfg.M, cfg.alphabet, k, rho)])))
        if "lemma42" in checks:
            for k1 in range(1, k):
                tasks.append((f"lemma42 k={k1}+{k - k1}",
                              lambda k1=k1, k=k: _lines([check_lemma42(cfg.M, cfg.alphabet, k1, k - k1)])))
        if "prop43" in checks:
            tasks.append((f"prop43 k={k}", _prop43_task(cfg, k)))
        if "prop44" in checks:
            tasks.append((f"prop44 k={k}", lambda k=k: _lines([check_prop44(cfg.M, cfg.alphabet, k)])))
    if "fekete" in checks and cfg.k:
        tasks.append(("fekete", _fekete_task(cfg)))
    results = run.run(tasks)
    for res in results:
        if res.status == OK and any(json.loads(line)["holds"] is False for line in res.lines):
            res.status, res.message = VIOLATED, "inequality violated"
    run.write("fup_report.jsonl", "".join(line + "\n" for r in results for line in r.lines))
    return run.finish()


# Energy and theory ---------------------------------------------------------

def cmd_energy(cfg: ExperimentConfig, out_dir, jobs: int | None = None) -> int:
    run = Run(cfg, "energy", out_dir, jobs)

    def energy_task(k):
        def task():
            C = build_cantor(cfg.alphabet, k)
            return TaskResult("", data=(k, C.modulus, len(C), additive_energy(C)))
        return task

    results = run.run([(f"energy k={k}", energy_task(k)) for k in cfg.k])
    rows = [r.data for r in results if r.status == OK]
    buf = io.StringIO()
    buf.write(f"# M={cfg.M} A={cfg.letters} version={__version__}\n")
    buf.write("k,N,size,energy\n")
    for k, N, size, e in rows:
        buf.write(f"{k},{N},{size},{e}\n")
    run.write("energy.csv", buf.getvalue())
    try:
        fit = gamma_fit(cfg.alphabet, [(k, e) for k, _, _, e in rows], cfg.energy_k_min)
    except DomainError as exc:
        run.record(TaskResult("gamma fit", SKIPPED, str(exc)))
    else:
        blob = {"M": cfg.M, "A": cfg.letters, "delta": cfg.alphabet.delta, "gamma": fit.gamma,
                "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual,
                "ks": list(fit.ks)}
        if cfg.alphabet.is_proper and fit.gamma >= 0:
            blob["beta_E"] = beta_E(cfg.alphabet.delta, fit.gamma)
        run.write("gamma_fit.json", json.dumps(blob) + "\n")
        run.record(TaskResult("gamma fit"))
    return run.finish()


def _cell(v) -> str:
    return "" if v is None else repr(float(v))


def cmd_theory(cfg: ExperimentConfig, out_dir, jobs: int | None = None) -> int:
    run = Run(cfg, "theory", out_dir, jobs)

    def task():
        gaps = resolve_gaps(cfg)
        if gaps is None:
            raise DomainError(f"delta={cfg.alphabet.delta:g} outside (0,1)")
        rows = exponent_grid(cfg.theory_nus(), gaps)
        buf = io.StringIO()
        buf.write(f"# delta={gaps.delta!r} beta_bd={gaps.beta_bd!r} beta={gaps.beta!r} "
                  f"beta_e={gaps.beta_e!r} gamma={gaps.gamma!r} version={__version__}\n")
        buf.write("nu,m_thm11,c_thm12,m_thm13\n")
        for row in rows:
            buf.write(",".join(_cell(row.get(c)) for c in ("nu", "m_thm11", "c_thm12", "m_thm13")) + "\n")
        return TaskResult("", files={"theory.csv": buf.getvalue()})

    run.run([("theory grid", task)])
    return run.finish()


COMMANDS = {
    "spectrum": cmd_spectrum,
    "count": cmd_count,
    "fup": cmd_fup,
    "energy": cmd_energy,
    "theory": cmd_theory,
}

__all__ = ["COMMANDS", "Run", "TaskResult", "verify_manifest", "resolve_gaps"]
