"""Command-line front end.

Every subcommand is normalized into a :class:`Manifest` and dispatched through
:func:`run`, which validates parameters against a per-command schema, executes
the owning module and writes the artifacts. Exit codes: 0 on success, 1 on a
domain error (with a machine-readable JSON object on stderr), 2 on a usage
error. The default seed is 42; the ANGLE_SEED environment variable overrides
it when no explicit --seed is given.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import jsonio
from .errors import GeometryError, UsageError
from .geom import DEFAULT_TOL, AngleMultiset, enumerate_angles, verify
from .highdim import DEFAULT_LAMBDA, realize_highdim
from .multiset import realize_multiset
from .planar import realize_planar
from .projection import angle_distortion, tail_1d
from .solver import estimate_p, solve_numeric
from .svg import render_svg

DEFAULT_SEED = 42

_COMMANDS = {
    "realize": {"angles", "m", "convex", "dim", "eps", "lam"},
    "verify": {"config", "angles", "tol"},
    "enumerate": {"config"},
    "solve": {"angles", "m", "dim", "restarts"},
    "estimate-prob": {"dim", "m", "n", "samples"},
    "project-exp": {"dim", "eps", "theta", "samples"},
    "plot": {"config", "certificate", "project_first_two"},
}


@dataclass(frozen=True)
class Manifest:
    """One validated unit of work for :func:`run`."""

    command: str
    parameters: dict
    output_path: Path
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        unknown = set(self.parameters) - _COMMANDS[self.command]
        if unknown:
            raise UsageError(f"unknown parameter(s) for {self.command}: {sorted(unknown)}")


@dataclass
class RunResult:
    exit_code: int
    artifacts: list = field(default_factory=list)


def _parse_angle_list(text, degrees=False):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"could not parse angle list {text!r}: {exc}") from exc
    if degrees:
        values = [math.radians(v) for v in values]
    if not values:
        raise UsageError("empty angle list")
    return values


def _load_targets(param):
    if isinstance(param, AngleMultiset):
        return param
    if isinstance(param, (list, tuple)):
        return AngleMultiset.from_values(param)
    raise UsageError("angles must be a list of radians or an AngleMultiset")


def _load_config_file(path):
    obj = jsonio.load_document(Path(path).read_text(), what=str(path))
    if isinstance(obj, dict) and "config" in obj:
        return jsonio.config_from_json(obj["config"])
    return jsonio.config_from_json(obj)


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def run(manifest):
    """Execute one manifest; raises UsageError / GeometryError on failure."""
    params = manifest.parameters
    out = Path(manifest.output_path)

    if manifest.command == "realize":
        targets = _load_targets(params["angles"])
        dim = int(params.get("dim", 2))
        if dim == 2:
            m = int(params["m"])
            if any(mult > 1 for _, mult in targets.entries):
                config, cert = realize_multiset(targets, m)
            else:
                try:
                    config, cert = realize_planar(
                        targets.values(), m, convex=bool(params.get("convex", False))
                    )
                except GeometryError:
                    if params.get("convex", False):
                        raise
                    config, cert = realize_multiset(targets, m)
        else:
            config, cert = realize_highdim(
                targets,
                dim,
                lam=float(params.get("lam", DEFAULT_LAMBDA)),
                eps=params.get("eps"),
            )
        doc = jsonio.document(
            config=jsonio.config_to_json(config),
            certificate=jsonio.certificate_to_json(cert),
        )
        return RunResult(0, [_write(out, jsonio.dumps(doc))])

    if manifest.command == "verify":
        config = _load_config_file(params["config"])
        targets = _load_targets(params["angles"])
        tol = float(params.get("tol", DEFAULT_TOL))
        cert = verify(config, targets, tol)
        doc = jsonio.document(certificate=jsonio.certificate_to_json(cert))
        return RunResult(0, [_write(out, jsonio.dumps(doc))])

    if manifest.command == "enumerate":
        config = _load_config_file(params["config"])
        instances = enumerate_angles(config)
        doc = jsonio.document(
            instances=[
                {
                    "apex": inst.apex,
                    "ray_a": list(inst.ray_a),
                    "ray_b": list(inst.ray_b),
                    "measured": inst.measured,
                }
                for inst in instances
            ]
        )
        return RunResult(0, [_write(out, jsonio.dumps(doc))])

    if manifest.command == "solve":
        targets = _load_targets(params["angles"])
        report = solve_numeric(
            targets,
            int(params["m"]),
            int(params.get("dim", 2)),
            restarts=int(params.get("restarts", 40)),
            seed=manifest.seed,
        )
        doc = jsonio.document(
            status=report.status,
            best_residual=report.best_residual if math.isfinite(report.best_residual) else None,
            restarts_used=report.restarts_used,
            config=jsonio.config_to_json(report.config) if report.config else None,
            certificate=jsonio.certificate_to_json(report.certificate)
            if report.certificate
            else None,
        )
        return RunResult(0, [_write(out, jsonio.dumps(doc))])

    if manifest.command == "estimate-prob":
        est = estimate_p(
            int(params["dim"]),
            int(params["m"]),
            int(params["n"]),
            int(params["samples"]),
            seed=manifest.seed,
        )
        doc = jsonio.document(
            p_hat=est.p_hat, stderr=est.stderr, samples=est.samples, seed=est.seed
        )
        return RunResult(0, [_write(out, jsonio.dumps(doc))])

    if manifest.command == "project-exp":
        d = int(params["dim"])
        eps = float(params["eps"])
        samples = int(params["samples"])
        theta = params.get("theta")
        if theta is None:
            report = tail_1d(d, eps, samples, seed=manifest.seed)
            theta_text = ""
        else:
            report = angle_distortion(d, float(theta), eps, samples, seed=manifest.seed)
            theta_text = repr(float(theta))
        rows = [
            "d,theta,eps,samples,empirical,bound,pass",
            f"{d},{theta_text},{eps!r},{samples},{report.empirical!r},"
            f"{report.bound!r},{str(report.passed).lower()}",
        ]
        return RunResult(0, [_write(out, "\n".join(rows) + "\n")])

    if manifest.command == "plot":
        config = _load_config_file(params["config"])
        cert = None
        if params.get("certificate"):
            obj = jsonio.load_document(Path(params["certificate"]).read_text())
            if isinstance(obj, dict) and "certificate" in obj:
                obj = obj["certificate"]
            cert = jsonio.certificate_from_json(obj)
        svg = render_svg(
            config, cert, project_first_two=bool(params.get("project_first_two", False))
        )
        return RunResult(0, [_write(out, svg)])

    raise UsageError(f"unknown command {manifest.command!r}")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="anglekit", description="Realize, verify and explore prescribed angle sets."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_output=True):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default 42)")
        if needs_output:
            p.add_argument("--output", "-o", required=True, help="artifact output path")

    p = sub.add_parser("realize", help="construct a configuration realizing target angles")
    p.add_argument("--angles", required=True, help="comma-separated target angles")
    p.add_argument("--degrees", action="store_true", help="interpret --angles in degrees")
    p.add_argument("--m", type=int, help="point budget (planar modes)")
    p.add_argument("--convex", action="store_true", help="require convex position (planar)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--eps", type=float, help="angle margin from 0 and pi (dim > 2)")
    p.add_argument("--lam", type=float, default=DEFAULT_LAMBDA, help="anchor scale (dim > 2)")
    add_common(p)

    p = sub.add_parser("verify", help="verify a configuration against target angles")
    p.add_argument("--config", required=True)
    p.add_argument("--angles", required=True)
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    add_common(p)

    p = sub.add_parser("enumerate", help="list all realized angles of a configuration")
    p.add_argument("--config", required=True)
    add_common(p)

    p = sub.add_parser("solve", help="numerical realizability search")
    p.add_argument("--angles", required=True)
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--restarts", type=int, default=40)
    add_common(p)

    p = sub.add_parser("estimate-prob", help="Monte Carlo realizability probability")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    add_common(p)

    p = sub.add_parser("project-exp", help="random projection tail experiment")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--theta", type=float, default=None, help="run the angle variant")
    p.add_argument("--samples", type=int, required=True)
    add_common(p)

    p = sub.add_parser("plot", help="render a configuration as SVG")
    p.add_argument("--config", required=True)
    p.add_argument("--certificate", default=None)
    p.add_argument("--project-first-two", action="store_true")
    add_common(p)

    return parser


def _manifest_from_args(args):
    seed = args.seed
    if seed is None:
        try:
            seed = int(os.environ.get("ANGLE_SEED", DEFAULT_SEED))
        except ValueError as exc:
            raise UsageError(f"ANGLE_SEED must be an integer: {exc}") from exc

    params = {}
    cmd = args.command
    if cmd in ("realize", "verify", "solve"):
        params["angles"] = _parse_angle_list(args.angles, degrees=args.degrees)
    if cmd == "realize":
        if args.m is not None:
            params["m"] = args.m
        elif args.dim == 2:
            raise UsageError("--m is required for planar realization")
        params["convex"] = args.convex
        params["dim"] = args.dim
        if args.eps is not None:
            params["eps"] = args.eps
        params["lam"] = args.lam
    elif cmd == "verify":
        params["config"] = args.config
        params["tol"] = args.tol
    elif cmd == "enumerate":
        params["config"] = args.config
    elif cmd == "solve":
        params.update(m=args.m, dim=args.dim, restarts=args.restarts)
    elif cmd == "estimate-prob":
        params.update(dim=args.dim, m=args.m, n=args.n, samples=args.samples)
    elif cmd == "project-exp":
        params.update(dim=args.dim, eps=args.eps, samples=args.samples)
        if args.theta is not None:
            params["theta"] = args.theta
    elif cmd == "plot":
        params["config"] = args.config
        if args.certificate:
            params["certificate"] = args.certificate
        params["project_first_two"] = args.project_first_two

    return Manifest(command=cmd, parameters=params, output_path=Path(args.output), seed=seed)


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        manifest = _manifest_from_args(args)
        result = run(manifest)
        return result.exit_code
    except UsageError as exc:
        print(jsonio.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr, end="")
        return 2
    except GeometryError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "unmatched"):
            payload["unmatched"] = [
                {"occurrence": i, "target": t} for i, t in exc.unmatched
            ]
        print(jsonio.dumps(payload), file=sys.stderr, end="")
        return 1


if __name__ == "__main__":
    sys.exit(main())
