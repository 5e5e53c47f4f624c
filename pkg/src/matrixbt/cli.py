"""Batch runner for the verification suites.

    matrixbt COMMAND [--config PATH] [--seed U64] [--workers INT] [--out DIR]
                     [--part i|ii|v] [--mode ...]

Writes ``report.json`` and ``tables/*.csv`` into the output directory.  Exit
status is 0 when every pass criterion holds, 1 when one fails and 2 on
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .domain import power_moments_exact, power_moments_mc
from .fock import DomainSpec
from .hilbert import compare_spectral, compare_u_invariant, verify_gram
from .kernels import (
    KernelSeries,
    kernel_eval,
    product_gram_mc,
    reproduce_check,
    scalar_kernel,
)
from .domain import NormalTuple, haar_sample, mu_sample
from .semiclassical import (
    decay_table,
    expansion_check_spectral,
    expansion_check_u_invariant,
    sign_probe,
    sup_norm_limit,
)
from .symbols import Symbol, SymbolParseError

COMMANDS = (
    "verify-orthogonality",
    "verify-theorem",
    "semiclassical",
    "sup-norm-limit",
    "decay-demo",
    "kernel-check",
    "sign-probe",
)
SLOPE_TOL = 0.15


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str = ""
    domain: str = "plane"
    h: float | None = None
    h_grid: list | None = None
    N: int = 2
    n: int = 1
    K: int | None = None
    margin: int = 8
    R: int = 1
    samples: int = 100_000
    seed: int = 0
    sign: int = -1
    workers: int = 1
    part: str = "i"
    mode: str = ""
    kmax: int = 4
    symbols: dict = field(default_factory=dict)
    out: str = "out"

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**data)
        cfg._base = base
        cfg.fill_defaults()
        return cfg

    def fill_defaults(self) -> None:
        """Per-command values for fields left unset."""
        if self.K is None:
            self.K = {"semiclassical": 24, "sign-probe": 24, "kernel-check": 60}.get(self.command, 4)
        if self.h is None:
            self.h = 0.1 if self.command == "sign-probe" else 0.5
        if self.h_grid is None:
            self.h_grid = {"decay-demo": [0.4, 0.2, 0.1, 0.05],
                           "sup-norm-limit": [0.1, 0.05, 0.02]}.get(self.command, [0.1, 0.05, 0.02, 0.01])

    def resolved(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["symbols"] = {k: self.symbol(k).to_json() for k in sorted(self.symbols)}
        return out

    def symbol(self, name: str, default: Symbol | None = None) -> Symbol:
        spec = self.symbols.get(name)
        if spec is None:
            if default is None:
                raise ConfigError(f"symbol {name!r} missing from config")
            return default
        if isinstance(spec, dict) and "file" in spec:
            path = Path(spec["file"])
            if not path.is_absolute() and getattr(self, "_base", None) is not None:
                path = self._base / path
            try:
                text = path.read_text()
            except OSError as exc:
                raise ConfigError(f"symbol {name!r}: cannot read {path}: {exc}") from exc
            try:
                return Symbol.from_json(text)
            except SymbolParseError as exc:
                raise ConfigError(f"symbol {name!r} in {path}: {exc}") from exc
        try:
            return Symbol.from_json(spec)
        except SymbolParseError as exc:
            raise ConfigError(f"symbol {name!r}: {exc}") from exc

    def dom(self, h: float | None = None) -> DomainSpec:
        try:
            return DomainSpec(self.domain, self.h if h is None else h)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# suites; each returns (results, tables, failures)


def _orthogonality(cfg):
    dom = cfg.dom()
    est = power_moments_mc(dom, cfg.N, cfg.kmax, cfg.samples, cfg.seed, cfg.workers)
    z = est.z_scores(power_moments_exact(dom, cfg.N, cfg.kmax)).max(axis=(-2, -1))
    rows = [["j", "k", "max_z"]]
    rows += [[j, k, float(z[j, k])] for j in range(cfg.kmax + 1) for k in range(cfg.kmax + 1)]
    worst = float(z.max())
    failures = [] if worst <= 5 else [f"orthogonality: max z-score {worst:.3g} > 5"]
    return {"max_z": worst, "samples": est.samples}, {"orthogonality": rows}, failures


def _theorem(cfg):
    dom = cfg.dom()
    N, K = cfg.N, cfg.K
    if cfg.part == "i":
        rep = verify_gram(dom, N, K, cfg.samples, cfg.seed, cfg.workers)
    elif cfg.part == "ii":
        rep = compare_spectral(cfg.symbol("phi", Symbol.z()), dom, N, K, cfg.samples, cfg.seed, cfg.workers)
    elif cfg.part == "v":
        default = sum((Symbol.abs2(m, N) for m in range(2, N + 1)), Symbol(N))
        rep = compare_u_invariant(cfg.symbol("phi", default), dom, N, K, cfg.samples, cfg.seed, cfg.workers)
    else:
        raise ConfigError(f"unknown theorem part {cfg.part!r}; expected i, ii or v")
    res = rep.to_json()
    table = [list(res), [repr(v) if isinstance(v, float) else v for v in res.values()]]
    failures = [] if rep.passed else [f"theorem part {cfg.part}: max z-score {rep.max_z:.3g} > 5"]
    return res, {"theorem": table}, failures


def _semiclassical(cfg):
    dom = cfg.dom(cfg.h_grid[0])
    R = cfg.R
    if cfg.mode in ("", "spectral"):
        rep = expansion_check_spectral(cfg.symbol("phi", Symbol.z() ** 2), cfg.symbol("psi", Symbol.zbar() ** 2),
                                       R, dom, cfg.N, cfg.h_grid, cfg.K, cfg.margin, cfg.sign)
        bounds = {"scalar": (R + 1 - SLOPE_TOL, R + 1.3)}
    elif cfg.mode == "uinvariant":
        N = cfg.N
        phi = cfg.symbol("phi", Symbol.z(1, N) * Symbol.abs2(2, N))
        psi = cfg.symbol("psi", Symbol.zbar(1, N))
        rep = expansion_check_u_invariant(phi, psi, R, dom, N, cfg.h_grid, cfg.K, cfg.margin, cfg.sign)
        lo = R + 1 - SLOPE_TOL
        bounds = {"A": (lo, math.inf), "B": (lo, math.inf), "A-B": (lo, math.inf)}
    else:
        raise ConfigError(f"unknown semiclassical mode {cfg.mode!r}")
    failures = [f"semiclassical track {k}: slope {rep.tracks[k].slope} outside [{lo}, {hi}]"
                for k, (lo, hi) in bounds.items() if not rep.tracks[k].meets(lo, hi)]
    return rep.to_json(), {"residuals": list(rep.csv_rows())}, failures


def _sup_norm(cfg):
    phi = cfg.symbol("phi", Symbol.abs2() * Symbol.gaussian(1))
    rows = sup_norm_limit(phi, cfg.dom(cfg.h_grid[0]), cfg.h_grid)
    gaps = [r["gap"] for r in rows]
    failures = []
    if any(g < -1e-9 for g in gaps):
        failures.append("sup-norm-limit: operator norm exceeds sup norm")
    if any(b > a + 1e-12 for a, b in zip(gaps, gaps[1:])):
        failures.append("sup-norm-limit: gap not decreasing as h decreases")
    table = [list(rows[0])] + [[repr(v) for v in r.values()] for r in rows]
    return {"rows": rows}, {"sup_norm": table}, failures


def _decay(cfg):
    res = decay_table(cfg.h_grid, cfg.N)
    failures = [] if abs(res["slope"] - 1.0) <= 0.2 else [
        f"decay-demo: fitted slope {res['slope']:.3f} outside 1.0 +/- 0.2"]
    table = [["h", "op_norm", "sup_norm_oracle"]] + [
        [repr(h), repr(a), repr(b)] for h, a, b in zip(res["h_grid"], res["op_norms"], res["sup_norm_oracle"])]
    return res, {"decay": table}, failures


def _kernel(cfg):
    N, dom = cfg.N, cfg.dom()
    failures, res, rows = [], {}, [["check", "value"]]
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(999,)))
    if cfg.mode in ("", "single"):
        # N = 1 against the exponential
        if dom.kind == "plane":
            ks1 = KernelSeries.for_radius(dom, 1.0)
            x = rng.uniform(-0.7, 0.7, 50) + 1j * rng.uniform(-0.7, 0.7, 50)
            y = rng.uniform(-0.7, 0.7, 50) + 1j * rng.uniform(-0.7, 0.7, 50)
            err = float(np.max(np.abs(scalar_kernel(x, y, ks1) - np.exp(x * y.conj() / dom.h))))
            res["exp_error"] = err
            rows.append(["exp_error", repr(err)])
            if err > 1e-10:
                failures.append(f"kernel-check: N=1 kernel deviates from exp by {err:.3g}")
        ks = KernelSeries(dom, cfg.K)
        radius = 0.5 if dom.kind == "plane" else 0.4
        Z = NormalTuple(haar_sample(N, rng), (radius * np.exp(2j * np.pi * rng.uniform(size=(N, 1)))))
        worst = 0.0
        for k in range(3):
            for j in range(1, N + 1):
                rep = reproduce_check(k, j, Z, ks, cfg.samples, cfg.seed + k, cfg.workers)
                worst = max(worst, rep.max_z)
        res["reproduce_max_z"] = worst
        rows.append(["reproduce_max_z", repr(worst)])
        if worst > 5:
            failures.append(f"kernel-check: reproducing property max z-score {worst:.3g} > 5")
        pts = mu_sample(dom, N, 1, rng, size=8)
        G = np.block([[kernel_eval(pts[a], pts[b], ks) for b in range(8)] for a in range(8)])
        herm = float(np.max(np.abs(G - G.conj().T)))
        mineig = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[0])
        res.update(hermitian_error=herm, min_eigenvalue=mineig)
        rows += [["hermitian_error", repr(herm)], ["min_eigenvalue", repr(mineig)]]
        if herm > 1e-12 * max(1.0, np.max(np.abs(G))) or mineig < -1e-8:
            failures.append("kernel-check: positivity or Hermitian symmetry violated")
    elif cfg.mode == "product":
        est = product_gram_mc(dom, N, cfg.n if cfg.n > 1 else 2, min(cfg.kmax, 2), cfg.samples, cfg.seed, cfg.workers)
        z = float(np.max(est.z_scores(np.eye(est.mean.shape[0]))))
        res["product_gram_max_z"] = z
        rows.append(["product_gram_max_z", repr(z)])
        if z > 5:
            failures.append(f"kernel-check: product Gram max z-score {z:.3g} > 5")
    else:
        raise ConfigError(f"unknown kernel-check mode {cfg.mode!r}")
    return res, {"kernel": rows}, failures


def _sign(cfg):
    res = sign_probe(cfg.h, cfg.K)
    failures = []
    if res["working_sign"] != -1 or res["residual_minus"] > 1e-12:
        failures.append("sign-probe: sign -1 does not reproduce T_z T_zbar = T_|z|^2 - h")
    table = [list(res), [repr(v) for v in res.values()]]
    return res, {"sign_probe": table}, failures


SUITES = {
    "verify-orthogonality": _orthogonality,
    "verify-theorem": _theorem,
    "semiclassical": _semiclassical,
    "sup-norm-limit": _sup_norm,
    "decay-demo": _decay,
    "kernel-check": _kernel,
    "sign-probe": _sign,
}


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Execute one suite, write the report files, return (exit code, report)."""
    if cfg.command not in SUITES:
        raise ConfigError(f"unknown command {cfg.command!r}; expected one of {COMMANDS}")
    results, tables, failures = SUITES[cfg.command](cfg)
    report = {
        "command": cfg.command,
        "version": __version__,
        "config": cfg.resolved(),
        "results": results,
        "failures": failures,
        "pass": not failures,
    }
    out = Path(cfg.out)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n")
    for name, rows in tables.items():
        (out / "tables" / f"{name}.csv").write_text(_csv(rows))
    return (0 if not failures else 1), report


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matrixbt", description="Verification suites for Toeplitz operators on normal-matrix domains.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", type=Path)
    p.add_argument("--seed", type=int, help="64-bit unsigned seed (overrides config)")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--part", choices=("i", "ii", "v"))
    p.add_argument("--mode", choices=("spectral", "uinvariant", "single", "product"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data, base = {}, None
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"malformed config JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
            base = args.config.parent
        for key in ("command", "seed", "workers", "part", "mode"):
            val = getattr(args, key)
            if val is not None:
                data[key] = val
        if args.out is not None:
            data["out"] = str(args.out)
        if "seed" in data and not 0 <= int(data["seed"]) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        cfg = ExperimentConfig.from_dict(data, base)
        code, report = run(cfg)
    except (ConfigError, SymbolParseError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for msg in report["failures"]:
        print(f"FAILED {msg}", file=sys.stderr)
    print(f"{cfg.command}: {'pass' if code == 0 else 'FAIL'} -> {Path(cfg.out) / 'report.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
