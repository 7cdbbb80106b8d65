"""Command-line front end: ``ctlp solve|certify|check|dual|example``.

Exit codes: 0 success, 1 input error, 2 solve failure (a node is infeasible or
unbounded), 3 no certificate holds, 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bundled import example1_document, reference
from .certify import (
    ACTIVE_TOL,
    DEFAULT_BETA,
    FR_FLOOR,
    KKT_TOL,
    InfeasibleTrajectoryError,
    beta_sweep,
    certify,
    check_kkt,
    recover_multipliers_detailed,
)
from .duality import GAP_TOL, build_dual, complementary_slackness, duality_report, multiplier_to_dual
from .errors import CertificateError, CTLPError, InputError, LoadError
from .instance import CTLPInstance, Trajectory, dump_instance, load_instance
from .solver import solve
from .timefunc import refine_grid

EXIT_OK, EXIT_INPUT, EXIT_SOLVE, EXIT_CERTIFY, EXIT_VERIFY = 0, 1, 2, 3, 4
SCHEMA = 1


@dataclass
class RunConfig:
    command: str
    instance_path: Path | None
    nodes_per_interval: int = 64
    beta: float = DEFAULT_BETA
    beta_sweep: tuple[float, float, int] | None = None
    active_tol: float = ACTIVE_TOL
    fr_floor: float = FR_FLOOR
    kkt_tol: float = KKT_TOL
    gap_tol: float = GAP_TOL
    trajectory: Path | None = None
    multipliers: Path | None = None
    dual: Path | None = None
    out: Path | None = None

    def __post_init__(self):
        if self.nodes_per_interval < 1:
            raise InputError("--nodes must be >= 1")
        if not self.beta > 0:
            raise InputError("--beta must be positive")


class _Failure(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code, self.payload = code, payload


def _emit(payload: dict, dest: Path | None, name: str = "report.json") -> None:
    payload = {"schema": SCHEMA, **payload, "generator": {"ctlp": __version__}}
    text = json.dumps(payload, indent=2, default=_jsonable) + "\n"
    if dest is None:
        sys.stdout.write(text)
        return
    path = dest / name if dest.is_dir() else dest
    path.write_text(text)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _read_document(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    return doc


def _load(cfg: RunConfig) -> CTLPInstance:
    return load_instance(_read_document(cfg.instance_path))


def _read_traj(path: Path, inst: CTLPInstance, what: str) -> Trajectory:
    try:
        return Trajectory.read_csv(path, inst.breakpoints)
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc.strerror}") from None


def _primal(cfg: RunConfig, inst: CTLPInstance) -> Trajectory:
    """User-supplied trajectory, or the solver's on a uniform refinement."""
    if cfg.trajectory is not None:
        z = _read_traj(cfg.trajectory, inst, "trajectory")
        if z.dim != inst.n:
            raise InputError(f"trajectory has {z.dim} columns, instance has n={inst.n}")
        return z
    res = solve(inst, refine_grid(inst.breakpoints, cfg.nodes_per_interval))
    if not res.optimal:
        j, t = res.witness
        raise _Failure(EXIT_SOLVE, f"node {j} (t={t:.17g}) is {res.status.value}")
    return res.z


def cmd_solve(cfg: RunConfig) -> int:
    inst = _load(cfg)
    grid = refine_grid(inst.breakpoints, cfg.nodes_per_interval)
    res = solve(inst, grid)
    summary = {
        "command": "solve",
        "status": res.status.value,
        "objective": res.objective if res.optimal else None,
        "nodes": len(grid),
        "nodes_per_interval": cfg.nodes_per_interval,
        "interpolation": "PiecewiseLinear",
        "per_node_status": [s.value for s in res.per_node_status],
        "witness": None if res.witness is None else {"node": res.witness[0], "t": res.witness[1]},
    }
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        if res.optimal:
            res.z.to_csv(cfg.out / "z.csv")
            res.u.to_csv(cfg.out / "u.csv")
        _emit(summary, cfg.out / "summary.json")
    else:
        _emit(summary, None)
    if not res.optimal:
        j, t = res.witness
        print(f"error: node {j} (t={t:.17g}) is {res.status.value}", file=sys.stderr)
        return EXIT_SOLVE
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    inst = _load(cfg)
    z = _primal(cfg, inst)
    kw = dict(fr_floor=cfg.fr_floor, active_tol=cfg.active_tol)
    if cfg.beta_sweep is not None:
        reports = beta_sweep(inst, z, *cfg.beta_sweep, **kw)
        payload = {"command": "certify", "sweep": [r.to_dict() for r in reports]}
        ok = any(r.any_holds for r in reports)
    else:
        rep = certify(inst, z, cfg.beta, **kw)
        payload = {"command": "certify", **rep.to_dict()}
        ok = rep.any_holds
    _emit(payload, cfg.out)
    return EXIT_OK if ok else EXIT_CERTIFY


def cmd_check(cfg: RunConfig) -> int:
    inst = _load(cfg)
    z = _primal(cfg, inst)
    rep = certify(inst, z, cfg.beta, fr_floor=cfg.fr_floor, active_tol=cfg.active_tol)
    payload: dict = {"command": "check", "certificate": rep.a.to_dict()}
    if cfg.multipliers is not None:
        u = _read_traj(cfg.multipliers, inst, "multipliers")
        payload["multipliers"] = "supplied"
    else:
        if not (rep.fr.holds or rep.rc.holds):
            _emit({**payload, "multipliers": None}, cfg.out)
            raise _Failure(EXIT_CERTIFY, "no certificate holds; cannot recover multipliers")
        base = rep.fr if rep.fr.holds else rep.rc
        rec = recover_multipliers_detailed(inst, z, cfg.beta, None, base)
        u = rec.u
        payload["multipliers"] = {"recovered_from": base.kind.value, **rec.to_dict()}
    w = _read_traj(cfg.dual, inst, "dual") if cfg.dual is not None else multiplier_to_dual(u)
    for name, traj in (("multipliers", u), ("dual", w)):
        if not np.array_equal(traj.grid.nodes, z.grid.nodes):
            raise InputError(f"{name} CSV is not on the trajectory's grid")
    u, w = Trajectory(z.grid, u.values), Trajectory(z.grid, w.values)
    kkt = check_kkt(inst, z, u, tol=cfg.kkt_tol)
    cert = rep.a if rep.a.holds else None
    dr = duality_report(inst, z, w, certificate=cert, gap_tol=cfg.gap_tol)
    cs = complementary_slackness(inst, z, w, certificate=cert, tol=cfg.kkt_tol)
    payload.update(kkt=kkt.to_dict(), duality=dr.to_dict(), complementary_slackness=cs.to_dict())
    _emit(payload, cfg.out)
    passed = kkt.passed and not dr.withheld and "ZeroGap" in [v.value for v in dr.verdicts] and cs.optimal_pair
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_dual(cfg: RunConfig) -> int:
    doc = _read_document(cfg.instance_path)
    if isinstance(doc, dict) and doc.get("sense") == "dual":
        raise LoadError("input is already a dual instance; the dual of a dual is not defined here", "$.sense")
    text = dump_instance(build_dual(load_instance(doc))) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)
    return EXIT_OK


def cmd_example(cfg: RunConfig) -> int:
    dest = cfg.out
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "example1.json").write_text(example1_document())
    inst = load_instance(example1_document())
    ref = reference(refine_grid(inst.breakpoints, cfg.nodes_per_interval))
    ref["z"].to_csv(dest / "zbar.csv")
    ref["u"].to_csv(dest / "u.csv")
    ref["w"].to_csv(dest / "w.csv")
    print(f"wrote example1.json, zbar.csv, u.csv, w.csv to {dest}")
    return EXIT_OK


def _sweep(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, k = text.split(":")
        return float(lo), float(hi), int(k)
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi:k, e.g. 1e-4:1:9") from None


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors, so they exit 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctlp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ctlp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trajectory=True):
        sp.add_argument("instance", type=Path, help="instance JSON file")
        sp.add_argument("--nodes", type=int, default=64, help="grid nodes per breakpoint interval (default 64)")
        sp.add_argument("--out", type=Path, help="output file (or directory for solve)")
        if trajectory:
            sp.add_argument("--trajectory", type=Path, help="primal trajectory CSV; solved for when omitted")
            sp.add_argument("--beta", type=float, default=DEFAULT_BETA, help="beta-activity width (default 1e-2)")
            sp.add_argument("--active-tol", type=float, default=ACTIVE_TOL)
            sp.add_argument("--fr-floor", type=float, default=FR_FLOOR)

    common(sub.add_parser("solve", help="solve on a uniform grid; writes z.csv, u.csv, summary.json"), False)
    sp = sub.add_parser("certify", help="active sets and regularity certificates")
    common(sp)
    sp.add_argument("--beta-sweep", type=_sweep, metavar="LO:HI:K", help="certify at K log-spaced beta values")
    sp = sub.add_parser("check", help="KKT, duality gap and complementary slackness")
    common(sp)
    sp.add_argument("--multipliers", type=Path, help="multiplier CSV u; recovered when omitted")
    sp.add_argument("--dual", type=Path, help="dual CSV w; defaults to -u")
    sp.add_argument("--kkt-tol", type=float, default=KKT_TOL)
    sp.add_argument("--gap-tol", type=float, default=GAP_TOL)
    sp = sub.add_parser("dual", help="write the dual instance JSON")
    sp.add_argument("instance", type=Path)
    sp.add_argument("--out", type=Path)
    sp = sub.add_parser("example", help="write the bundled instance and its reference trajectories")
    sp.add_argument("out", type=Path, help="destination directory")
    sp.add_argument("--nodes", type=int, default=2)
    return p


COMMANDS = {"solve": cmd_solve, "certify": cmd_certify, "check": cmd_check, "dual": cmd_dual, "example": cmd_example}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    get = lambda name, default=None: getattr(args, name, default)  # noqa: E731
    return RunConfig(
        command=args.command,
        instance_path=get("instance"),
        nodes_per_interval=get("nodes", 64),
        beta=get("beta", DEFAULT_BETA),
        beta_sweep=get("beta_sweep"),
        active_tol=get("active_tol", ACTIVE_TOL),
        fr_floor=get("fr_floor", FR_FLOOR),
        kkt_tol=get("kkt_tol", KKT_TOL),
        gap_tol=get("gap_tol", GAP_TOL),
        trajectory=get("trajectory"),
        multipliers=get("multipliers"),
        dual=get("dual"),
        out=get("out"),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InfeasibleTrajectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except CertificateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFY
    except (InputError, CTLPError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
