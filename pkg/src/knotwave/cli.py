"""Command line front end: ``knotwave build | wavelets | verify``.

Exit codes: 0 success, 2 usage error, 3 construction failure, 4 verification
failure.  Every file written is a pure function of the arguments; timing goes
to stderr only.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import poly_family as pf
from . import quad_family as qf
from . import tau_wavelets as tw
from .centered import CenteredBasis
from .errors import ContractError, DomainError, KnotwaveError, NotNestedError
from .knots import ENDPOINT, KnotWindow, tau_integers
from .mra_wavelet import build_scaffold, build_wavelets, check_nested
from .piecewise import evaluate_many, transform
from .verification import DEFAULT_KNOTS, SUITES, tolerance_from_env

EXIT_OK, EXIT_USAGE, EXIT_CONSTRUCTION, EXIT_VERIFY = 0, 2, 3, 4
FAMILIES = ("poly", "quad", "tau-haar", "tau-quad")
NORMALIZATION = "every function has unit L2 norm; each basis and wavelet set is orthonormal"
BASIS_SIGNS = "fixed by the construction formulas; no sign flips are applied to the scaling functions"
WAVELET_SIGNS = "closed-form wavelets as constructed; generic complements are signed so their first significant Legendre coefficient is positive"


class UsageError(Exception):
    pass


class ConstructionFailure(Exception):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


# ---------------------------------------------------------------------------
# argument parsing


def _read_list(spec: str, what: str) -> list[float]:
    text = spec
    if spec.startswith("@"):
        try:
            text = Path(spec[1:]).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {what} file {spec[1:]!r}: {exc.strerror}") from None
    parts = text.replace(",", " ").split()
    if not parts:
        raise UsageError(f"empty {what} list")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"{what} must be numbers, got {spec!r}") from None
    if not all(np.isfinite(vals)):
        raise UsageError(f"{what} must be finite")
    return vals


def _window(spec: str | None, what: str = "knots") -> KnotWindow:
    vals = _read_list(spec, what) if spec is not None else list(DEFAULT_KNOTS)
    try:
        return KnotWindow(tuple(vals), ENDPOINT, ENDPOINT)
    except ContractError as exc:
        raise UsageError(f"--{what}: {exc}") from None


def _thetas(spec: str | None, window: KnotWindow, what: str = "theta"):
    vals = _read_list(spec, what) if spec is not None else [0.5]
    for t in vals:
        if not 0.0 < t < 1.0:
            raise UsageError(f"--{what}: theta = {t} is not in (0, 1)")
    thetas = vals[0] if len(vals) == 1 else tuple(vals)
    try:
        return qf.theta_sequence(window, thetas)
    except (ContractError, DomainError) as exc:
        raise UsageError(f"--{what}: {exc}") from None


@dataclass(frozen=True)
class JobConfig:
    command: str
    family: str
    degree: int
    theta: str | None
    knots: str | None
    knots0: str | None
    knots1: str | None
    theta0: str | None
    theta1: str | None
    level: int
    count: int | None
    samples: int
    out: str | None
    format: str
    perturb: float

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k not in ("out", "format")}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", required=True, choices=FAMILIES)
    common.add_argument("--degree", type=int, default=2, help="poly: degree n (the pair is n, n+3)")
    common.add_argument("--theta", help="quad: constant theta or @file with one value per interval")
    common.add_argument("--knots", help="poly/quad: comma list of knots or @file")
    common.add_argument("--level", type=int, default=0, help="tau: lattice level k")
    common.add_argument("--count", type=int, help="tau: the window covers the first COUNT tau-integers")
    common.add_argument("--samples", type=int, default=201, help="uniform sample points per column")
    common.add_argument("--out", help="directory for the output files (stdout when absent)")

    p = argparse.ArgumentParser(prog="knotwave", description="Orthogonal continuous spline wavelets on irregular knots.")
    p.add_argument("--version", action="version", version=f"knotwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", parents=[common], help="sample a scaling basis and write its manifest")
    b.add_argument("--format", choices=("csv", "json"), default="csv", help="what goes to stdout without --out")
    w = sub.add_parser("wavelets", parents=[common], help="build the wavelets of a nested pair")
    w.add_argument("--format", choices=("csv", "json"), default="csv", help="what goes to stdout without --out")
    w.add_argument("--knots0", help="quad: coarse knots (defaults to --knots)")
    w.add_argument("--knots1", help="quad: fine knots (defaults to the coarse knots plus their b-points)")
    w.add_argument("--theta0", help="quad: coarse theta (defaults to --theta)")
    w.add_argument("--theta1", help="quad: fine theta (defaults to --theta)")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite for a family")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--perturb", type=float, default=0.0, help="test hook: scale one coarse function by 1 + PERTURB")
    return p


def _config(ns: argparse.Namespace) -> JobConfig:
    if ns.samples < 2:
        raise UsageError("--samples must be at least 2")
    if ns.family == "poly" and ns.degree < 1:
        raise UsageError("--degree must be at least 1")
    if ns.command == "verify" and ns.family == "poly" and ns.degree < 2:
        raise UsageError("verify needs --degree of at least 2")
    if ns.level < 0:
        raise UsageError("--level must be nonnegative")
    if ns.count is not None and ns.count < 4:
        raise UsageError("--count must be at least 4")
    return JobConfig(
        ns.command, ns.family, ns.degree, ns.theta, ns.knots,
        getattr(ns, "knots0", None), getattr(ns, "knots1", None),
        getattr(ns, "theta0", None), getattr(ns, "theta1", None),
        ns.level, ns.count, ns.samples, ns.out, ns.format, float(getattr(ns, "perturb", 0.0)),
    )


# ---------------------------------------------------------------------------
# construction


def _top(cfg: JobConfig, default: int = 12):
    return tau_integers(cfg.count or default)[-1]


def _dilate(B: CenteredBasis, window: KnotWindow, k: int) -> CenteredBasis:
    """Level-0 functions on [0, τ^k top] mapped to level k: τ^{k/2} f(τ^k x)."""
    s, amp = tw.TAU**-k, tw.TAU ** (k / 2)

    def move(groups):
        return [[transform(f, s, 0.0, amp) for f in g] for g in groups]

    return CenteredBasis(window, move(B.bar), move(B.breve), True, B.bar_names, B.breve_names)


def basis_for(cfg: JobConfig) -> tuple[CenteredBasis, dict]:
    """The scaling basis requested by ``build`` and manifest extras."""
    if cfg.family == "poly":
        w = _window(cfg.knots)
        return pf.omega_basis(pf.build_family(cfg.degree), w), {"degree": cfg.degree}
    if cfg.family == "quad":
        w = _window(cfg.knots)
        th = _thetas(cfg.theta, w)
        return qf.omega(w, th), {"theta": list(th), "root_branch": "+"}
    top = _top(cfg)
    if cfg.family == "tau-haar":
        return tw.haar_level(cfg.level, top).basis, {"level": cfg.level}
    return tw.quad_tau_level(cfg.level, top).basis, {"level": cfg.level, "theta": tw.THETA, "root_branch": "+"}


def _nesting_failure(message: str, clauses: list[str]) -> ConstructionFailure:
    return ConstructionFailure(message, {"nesting_condition": "failed", "failed_clauses": clauses})


def pair_for(cfg: JobConfig):
    """(Φ⁰, Φ¹, closed-form Ψ or None, extras) for ``wavelets``."""
    if cfg.family == "poly":
        w = _window(cfg.knots)
        phi0 = pf.omega_basis(pf.build_family(cfg.degree), w)
        phi1 = pf.omega_basis(pf.build_family(cfg.degree + 3), w)
        return phi0, phi1, pf.poly_wavelets(cfg.degree, w), {"degree": cfg.degree, "fine_degree": cfg.degree + 3}
    if cfg.family == "quad":
        w0 = _window(cfg.knots0 or cfg.knots, "knots0")
        t0 = _thetas(cfg.theta0 or cfg.theta, w0, "theta0")
        if cfg.knots1:
            w1 = _window(cfg.knots1, "knots1")
            t1 = _thetas(cfg.theta1 or cfg.theta, w1, "theta1")
        else:
            # split every coarse interval at its b-point; both halves keep its theta
            w1 = qf.insert_b_points(w0, t0)
            t1 = _thetas(cfg.theta1, w1, "theta1") if cfg.theta1 else tuple(t for t in t0 for _ in range(2))
        try:
            rep = qf.nesting_report(w0, t0, w1, t1)
        except ContractError as exc:
            raise _nesting_failure("the fine knots are not a refinement of the coarse knots", [f"coarse knots contained in the fine knots: {exc}"]) from None
        if not rep.holds:
            raise _nesting_failure("the quadratic nesting condition fails", rep.failures)
        extras = {"theta0": list(t0), "theta1": list(t1), "fine_knots": list(w1.knots), "root_branch": "+"}
        return qf.omega(w0, t0), qf.omega(w1, t1), None, extras
    top = _top(cfg)
    k = cfg.level
    if cfg.family == "tau-haar":
        lo, hi = tw.level_pair("haar", k, top)
        return lo.basis, hi.basis, tw.haar_wavelets(k, top), {"level": k}
    lo, hi = tw.level_pair("quad", k, top)
    psi = tw.quad_tau_wavelets(top.times_tau_power(k))
    if k:
        psi = _dilate(psi, lo.window, k)
    return lo.basis, hi.basis, psi, {"level": k, "theta": tw.THETA, "root_branch": "+"}


# ---------------------------------------------------------------------------
# output


def _fmt(v: float) -> str:
    v = 0.0 if v == 0 else float(v)  # no negative zero
    return repr(v)


def samples_csv(B: CenteredBasis, n: int) -> str:
    w = B.window
    x = np.linspace(w.knots[0], w.knots[-1], n)
    items = B.labelled()
    header = ["x"] + [f"{w.label(i)}:{flav}:{name}" for i, flav, _, name, _ in items]
    vals = evaluate_many([f for *_, f in items], x) if items else np.zeros((0, n))
    vals = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    lines = [",".join(header)]
    for j in range(n):
        lines.append(",".join([_fmt(x[j])] + [_fmt(vals[c, j]) for c in range(len(items))]))
    return "\n".join(lines) + "\n"


def _counts(B: CenteredBasis) -> list[dict]:
    w = B.window
    return [
        {"knot": w.label(i), "bar": list(B.bar_names[i]), "breve": list(B.breve_names[i])}
        for i in range(len(w))
    ]


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(cfg: JobConfig, files: dict, stdout_key: str):
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    else:
        sys.stdout.write(files[stdout_key])


def cmd_build(cfg: JobConfig) -> int:
    B, extras = basis_for(cfg)
    manifest = {
        "command": "build",
        "config": cfg.to_json(),
        "window": B.window.to_json(),
        "dims": _counts(B),
        "total": len(B),
        "normalization": NORMALIZATION,
        "sign_convention": BASIS_SIGNS,
        "root_branch": extras.pop("root_branch", None),
        "family_parameters": extras,
        "csv_columns": "x, then knot:flavour:name per function; values are 0 outside the support",
    }
    files = {"basis.csv": samples_csv(B, cfg.samples), "manifest.json": _dumps(manifest)}
    _emit(cfg, files, "basis.csv" if cfg.format == "csv" else "manifest.json")
    return EXIT_OK


def cmd_wavelets(cfg: JobConfig) -> int:
    phi0, phi1, closed, extras = pair_for(cfg)
    try:
        check_nested(phi0, phi1)
    except NotNestedError as exc:
        raise _nesting_failure("the coarse space is not contained in the fine space", [str(exc)]) from None
    sc = build_scaffold(phi0, phi1, validate=True)
    if closed is None:
        psi, source = build_wavelets(sc), "generic"
    else:
        psi, source = closed, "closed form"
    tables = None
    if cfg.family == "tau-quad" and cfg.level == 0:
        tables = tw.cd_tables(phi0, phi1, psi)
    manifest = {
        "command": "wavelets",
        "config": cfg.to_json(),
        "window": phi0.window.to_json(),
        "dims": _counts(psi),
        "total": len(psi),
        "wavelet_source": source,
        "normalization": NORMALIZATION,
        "sign_convention": WAVELET_SIGNS,
        "root_branch": extras.pop("root_branch", None),
        "family_parameters": extras,
        "csv_columns": "x, then knot:flavour:name per wavelet; values are 0 outside the support",
    }
    files = {
        "wavelets.csv": samples_csv(psi, cfg.samples),
        "dimensions.json": _dumps(sc.dims.to_json()),
    }
    if tables is not None:
        files["tables.json"] = _dumps({"sign_convention": tw.SIGN_NOTE, "tables": tables})
        manifest["tables"] = "tables.json"
    files["manifest.json"] = _dumps(manifest)
    if cfg.format == "json" and not cfg.out:
        bundle = {"manifest": manifest, "dimensions": sc.dims.to_json()}
        if tables is not None:
            bundle["tables"] = tables
        files["bundle.json"] = _dumps(bundle)
    _emit(cfg, files, "wavelets.csv" if cfg.format == "csv" else "bundle.json")
    return EXIT_OK


def cmd_verify(cfg: JobConfig) -> int:
    tol = tolerance_from_env()
    if cfg.family == "poly":
        res = SUITES["poly"](degree=cfg.degree, knots=_window(cfg.knots).knots, tol=tol, perturb=cfg.perturb)
    elif cfg.family == "quad":
        w = _window(cfg.knots)
        th = _thetas(cfg.theta, w)
        res = SUITES["quad"](theta=th[0] if len(set(th)) == 1 else th, knots=w.knots, tol=tol, perturb=cfg.perturb)
    else:
        res = SUITES[cfg.family](count=cfg.count or 30, tol=tol, perturb=cfg.perturb)
    report = {"config": cfg.to_json(), "tolerance": tol, **res.to_json()}
    files = {"report.txt": res.text() + "\n", "report.json": _dumps(report)}
    _emit(cfg, files, "report.txt" if cfg.format == "text" else "report.json")
    return EXIT_OK if res.passed else EXIT_VERIFY


COMMANDS = {"build": cmd_build, "wavelets": cmd_wavelets, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        cfg = _config(ns)
        code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"knotwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionFailure as exc:
        print(f"knotwave: construction failed: {exc}", file=sys.stderr)
        print(_dumps(exc.report), end="", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except KnotwaveError as exc:
        print(f"knotwave: construction failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    print(f"runtime {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
