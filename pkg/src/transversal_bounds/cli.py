"""Command-line front end.

Subcommands: ``bound``, ``decompose``, ``construct``, ``count``, ``verify``.
Exit codes: 0 success, 2 validation, 3 numerical, 4 bound violation, 5 guard.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .bounds import Method, main_bound
from .construct import build_extremal, core_guarantee
from .count import MAX_EXACT_PART_SIZE, MAX_EXACT_PARTS, count_exact, count_sample
from .errors import GuardError, NumericalError, TransversalError, ValidationError
from .lp import DEFAULT_TOL, LogWeights, build_log_weights, solve_lp2
from .model import DensityMatrix, Mode, MultipartiteGraph, PartSpec, load_densities, load_graph

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_VIOLATION = 4
EXIT_GUARD = 5

DEFAULT_SAMPLES = 100_000

log = logging.getLogger("transversal_bounds")


@dataclass
class RunConfig:
    command: str
    densities: Path | None = None
    graph: Path | None = None
    parts: PartSpec | None = None
    method: str = "auto"
    crosscheck: bool = False
    mode: str = "it"
    samples: int | None = None
    seed: int = 0
    tol: float = DEFAULT_TOL
    jobs: int = 1
    out: Path | None = None
    sidecar: Path | None = None
    timing: bool = True
    verbosity: int = 0

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValidationError(f"tolerance must be positive, got {self.tol}")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        if self.jobs < 1:
            raise ValidationError("--jobs must be at least 1")


def default_tol() -> float:
    raw = os.environ.get("TB_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"TB_TOL={raw!r} is not a number") from None


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(obj: Any, path: Path | None) -> None:
    text = _dump(obj)
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _require(value, flag: str):
    if value is None:
        raise ValidationError(f"{flag} is required for this command")
    return value


def cmd_bound(cfg: RunConfig) -> int:
    d = load_densities(_require(cfg.densities, "--densities"))
    report = main_bound(d, cfg.method, crosscheck=cfg.crosscheck, tol=cfg.tol)
    _emit(report.to_json(), cfg.out)
    return EXIT_OK


def cmd_decompose(cfg: RunConfig) -> int:
    d = load_densities(_require(cfg.densities, "--densities"))
    report = main_bound(d, cfg.method, crosscheck=cfg.crosscheck, tol=cfg.tol)
    out = report.witness.to_json()
    out["coefficient"] = report.bound_coefficient
    out["method"] = report.method
    _emit(out, cfg.out)
    return EXIT_OK


def core_fractions(d: DensityMatrix, tol: float = DEFAULT_TOL) -> list[float]:
    """Feasible core fractions a_i; pairs of density 1 get a zero core on their lower endpoint."""
    report = main_bound(d, tol=tol)
    if report.primal is not None:
        return list(report.primal.a)
    w = build_log_weights(d)
    a = list(solve_lp2(LogWeights(w.p), tol).a)
    for i, _ in sorted(w.infinite_pairs):
        a[i] = 0.0
    return a


def cmd_construct(cfg: RunConfig) -> int:
    d = load_densities(_require(cfg.densities, "--densities"))
    parts = _require(cfg.parts, "--parts")
    c = build_extremal(d, parts, core_fractions(d, cfg.tol), seed=cfg.seed, tol=cfg.tol)
    if cfg.out is None:
        _emit({"graph": c.graph.to_json(), "sidecar": c.sidecar_json()}, None)
    else:
        _emit(c.graph.to_json(), cfg.out)
        sidecar = cfg.sidecar or cfg.out.with_name(cfg.out.stem + ".sidecar.json")
        _emit(c.sidecar_json(), sidecar)
    return EXIT_OK


def _within_guard(g: MultipartiteGraph) -> bool:
    return g.k <= MAX_EXACT_PARTS and max(g.n) <= MAX_EXACT_PART_SIZE


def cmd_count(cfg: RunConfig) -> int:
    g = load_graph(_require(cfg.graph, "--graph"))
    mode = Mode.parse(cfg.mode)
    if cfg.samples is not None:
        res = count_sample(g, cfg.samples, cfg.seed, mode)
    else:
        res = count_exact(g, mode, jobs=cfg.jobs)
    _emit(res.to_json(timing=cfg.timing), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    d = load_densities(_require(cfg.densities, "--densities"))
    parts = _require(cfg.parts, "--parts")
    parts.check_against(d)
    report = main_bound(d, cfg.method, crosscheck=cfg.crosscheck, tol=cfg.tol)
    c = build_extremal(d, parts, core_fractions(d, cfg.tol), seed=cfg.seed, tol=cfg.tol)
    total = parts.total
    bound_side = report.bound_coefficient * total
    slack = d.k * total / min(parts.n)
    guarantee = core_guarantee(c)

    out: dict[str, Any] = {
        "coefficient": report.bound_coefficient,
        "bound_times_n": bound_side,
        "finite_n_slack": slack,
        "core_guarantee": guarantee,
    }
    rel = 1e-9 * max(1.0, bound_side)
    if _within_guard(c.graph) and cfg.samples is None:
        count = count_exact(c.graph, Mode.INDEPENDENT, jobs=cfg.jobs).value
        out["count"] = count
        upper_ok = count <= bound_side + slack + rel
        lower_ok = count >= guarantee
        out["strict_upper"] = count <= bound_side + rel
    else:
        res = count_sample(c.graph, cfg.samples or DEFAULT_SAMPLES, cfg.seed, Mode.INDEPENDENT)
        count = res.value
        out.update({"estimate": res.value, "se": res.se, "samples": res.samples})
        upper_ok = count - 3 * res.se <= bound_side + slack + rel
        lower_ok = count + 3 * res.se >= guarantee
        out["strict_upper"] = count - 3 * res.se <= bound_side + rel
    out["ratio"] = count / bound_side if bound_side > 0 else None
    out["passed"] = bool(upper_ok and lower_ok)
    _emit(out, cfg.out)
    if not out["passed"]:
        log.error("verification failed: upper_ok=%s lower_ok=%s", upper_ok, lower_ok)
        return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {
    "bound": cmd_bound,
    "decompose": cmd_decompose,
    "construct": cmd_construct,
    "count": cmd_count,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--densities", type=Path, help="density matrix JSON")
    common.add_argument("--parts", help="comma-separated part sizes, e.g. 16,16,16")
    common.add_argument("--method", choices=[m.value for m in Method], default="auto")
    common.add_argument("--crosscheck", action="store_true", help="run both bound routes and compare")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance (env TB_TOL)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for exact counting")
    common.add_argument("--out", type=Path, help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="tb", description="Independent transversal bounds: solve, construct, count, verify."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bound", parents=[common], help="bound coefficient with witness decomposition")
    sub.add_parser("decompose", parents=[common], help="optimal odd cycle decomposition")
    p = sub.add_parser("construct", parents=[common], help="extremal construction graph")
    p.add_argument("--sidecar", type=Path, help="core/density sidecar path")
    p = sub.add_parser("count", parents=[common], help="count independent transversals or cliques")
    p.add_argument("--graph", type=Path)
    p.add_argument("--mode", default="it", help="it | clique")
    p.add_argument("--samples", type=int, help="estimate by sampling instead of exact search")
    p.add_argument("--no-timing", dest="timing", action="store_false", help="omit wall time from output")
    p = sub.add_parser("verify", parents=[common], help="bound vs construction vs exact count")
    p.add_argument("--samples", type=int, help="force sampling with this many draws")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        densities=ns.densities,
        graph=getattr(ns, "graph", None),
        parts=PartSpec.parse(ns.parts) if ns.parts else None,
        method=ns.method,
        crosscheck=ns.crosscheck,
        mode=getattr(ns, "mode", "it"),
        samples=getattr(ns, "samples", None),
        seed=ns.seed,
        tol=ns.tol if ns.tol is not None else default_tol(),
        jobs=ns.jobs,
        out=ns.out,
        sidecar=getattr(ns, "sidecar", None),
        timing=getattr(ns, "timing", True),
        verbosity=ns.verbose,
    )


def _fail(exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(ns.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        cfg = _config(ns)
        return COMMANDS[cfg.command](cfg)
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    except NumericalError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except GuardError as exc:
        return _fail(exc, EXIT_GUARD)
    except TransversalError as exc:
        return _fail(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
