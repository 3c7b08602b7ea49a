"""Command-line driver: ``wafkit flow|verify|eigen|sweep``.

Exit status: 0 all verdicts pass, 1 an inequality or monotonicity claim
failed, 2 usage or configuration error, 3 numerical failure (convexity
loss, blow-up, domain exit).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

from . import __version__, axisym, curve2d, flowlab, inequalities, shapes, spectral
from .errors import ConfigError, ConvexityError, DomainError, NumericalError
from .spaceform import SpaceForm, make_space_form, parse_weight

log = logging.getLogger("wafkit")

ENV_WORKERS = "WAFKIT_WORKERS"
SPACES = {"euclidean": 0, "hyperbolic": -1, "sphere": 1}
THEOREMS = ("afw", "minkowski2d", "minkowskiH", "minkowskiS", "3term", "eigen")
# the second name is kept for scripts written against the original interface
SUITES = ("worked-examples", "example-1.4")
FLOW_GRID = {"N": 64, "M": 48}
GEOMETRY_GRID = {"N": 512, "M": 800}

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    space: str = "euclidean"
    K: int | None = None
    dim: int | None = None
    shape: str | None = None
    weight: str | None = None
    theorem: str | None = None
    suite: str | None = None
    flow: str | None = None
    k: int = 1
    l: int = 0
    N: int | None = None
    M: int | None = None
    dt: float = 1e-3
    max_steps: int = 200_000
    stop_tol: float = 1e-10
    max_time: float | None = None
    monitors: list[str] | None = None
    count: int = 10
    amp: float = 0.15
    seed: int = 0
    max_mode: int = spectral.DEFAULT_MAX_MODE
    out: str | None = None
    plots: bool = True

    # output location and figure switch do not change any result
    _UNHASHED = ("out", "plots")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def result_dict(self) -> dict:
        return {k: v for k, v in self.to_dict().items() if k not in self._UNHASHED}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.result_dict(), sort_keys=True).encode()).hexdigest()[:16]

    def space_form(self) -> SpaceForm:
        if self.space == "m2":
            if self.K is None:
                raise ConfigError("--space m2 needs --K")
            return make_space_form(self.K)
        if self.space not in SPACES:
            raise ConfigError(f"unknown space {self.space!r}")
        if self.K is not None and self.K != SPACES[self.space]:
            raise ConfigError(f"--K {self.K} contradicts --space {self.space}")
        return make_space_form(SPACES[self.space])

    def grid(self) -> tuple[int, int]:
        base = FLOW_GRID if self.flow else GEOMETRY_GRID
        return self.N or base["N"], self.M or base["M"]


# --------------------------------------------------------------------------
# output helpers


def _envelope(cfg: RunConfig, **payload) -> dict:
    return {"tool": "wafkit", "version": __version__, "config_digest": cfg.digest(), "config": cfg.result_dict(), **payload}


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    try:
        import numpy as np

        if isinstance(x, np.generic):
            return x.item()
        if isinstance(x, np.ndarray):
            return x.tolist()
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"not serializable: {type(x)}")


class Output:
    def __init__(self, cfg: RunConfig):
        self.dir = Path(cfg.out) if cfg.out else None
        self.plots = cfg.plots and self.dir is not None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.dir is not None:
            (self.dir / name).write_text(text)

    def path(self, name: str) -> Path:
        assert self.dir is not None
        return self.dir / name


def _shape_config(cfg: RunConfig) -> dict:
    if not cfg.shape:
        raise ConfigError("a --shape is required")
    return shapes.shape_config(cfg.shape)


def _dimension(cfg: RunConfig, shape_cfg: dict | None) -> int:
    if cfg.space == "m2":
        if cfg.dim not in (None, 2):
            raise ConfigError("--space m2 is two-dimensional")
        return 2
    if cfg.dim is not None:
        if cfg.dim < 2:
            raise ConfigError("--dim must be at least 2")
        return cfg.dim
    natural = shapes.natural_dim(shape_cfg) if shape_cfg else 0
    if natural:
        return natural
    if cfg.flow == "curve-lp" or cfg.theorem == "minkowski2d" or cfg.suite:
        return 2
    if cfg.flow or cfg.theorem in ("minkowskiH", "minkowskiS"):
        return 3
    return 2


def _build(cfg: RunConfig):
    space = cfg.space_form()
    scfg = _shape_config(cfg)
    n = _dimension(cfg, scfg)
    N, M = cfg.grid()
    try:
        shape = shapes.build_shape(scfg, space, n, N, M)
    except DomainError as exc:
        raise ConfigError(f"invalid shape: {exc}") from exc
    return space, n, shape


def _weight(cfg: RunConfig, default: str | None = "monomial:1"):
    text = cfg.weight or default
    return None if text is None else parse_weight(text)


# --------------------------------------------------------------------------
# commands


def flow_spec(cfg: RunConfig) -> flowlab.FlowSpec:
    return flowlab.FlowSpec(
        cfg.flow,
        k=cfg.k,
        weight=_weight(cfg),
        dt=cfg.dt,
        max_steps=cfg.max_steps,
        stop_tol=cfg.stop_tol,
        max_time=math.inf if cfg.max_time is None else cfg.max_time,
    )


def cmd_flow(cfg: RunConfig) -> int:
    if not cfg.flow:
        raise ConfigError("flow needs --flow")
    space, n, shape = _build(cfg)
    spec = flow_spec(cfg)
    spec.check_compatible(space.K, n)
    result = flowlab.run(shape, spec, cfg.monitors)
    out = Output(cfg)
    out.write("monitors.csv", result.series.to_csv())
    summary = _envelope(
        cfg,
        verdicts=result.verdicts,
        truncation={
            "converged": result.converged,
            "reason": result.reason,
            "steps": result.steps,
            "t": result.time,
            "stop_tol": spec.stop_tol,
            "max_steps": spec.max_steps,
            "max_time": cfg.max_time,
        },
        terminal_radius_span=result.roundness(),
        tolerances={"drift_per_step": flowlab.DRIFT_TOL},
    )
    out.write("verdicts.json", _json(summary))
    final_cfg = curve2d.to_config(result.final) if n == 2 else axisym.to_config(result.final)
    out.write("final_shape.json", _json(final_cfg))
    if out.plots:
        from . import plotting

        plotting.plot_monitors(result.series, out.path("monitors.png"))
        plotting.plot_shapes([shape, result.final], ["initial", "final"], out.path("shapes.png"))
    _echo({"verdicts": result.verdicts, "converged": result.converged, "steps": result.steps})
    return EXIT_OK if result.all_pass else EXIT_VIOLATED


def _default_theorem(space: SpaceForm, n: int) -> str:
    if n == 2:
        return "minkowski2d"
    return {0: "afw", -1: "minkowskiH", 1: "minkowskiS"}[space.K]


def run_theorem(theorem: str, geom, cfg: RunConfig) -> list[inequalities.InequalityReport]:
    if theorem == "afw":
        return [inequalities.verify_afw(geom, _weight(cfg), cfg.k, cfg.l)]
    if theorem == "minkowski2d":
        return [inequalities.verify_minkowski2d(geom, _weight(cfg))]
    if theorem == "minkowskiH":
        return [inequalities.verify_minkowskiH(geom, _weight(cfg))]
    if theorem == "minkowskiS":
        return [inequalities.verify_minkowskiS(geom, _weight(cfg))]
    if theorem == "3term":
        return [inequalities.verify_3term(geom, cfg.k)]
    if theorem == "eigen":
        return [spectral.verify_eigen_bound(geom, cfg.k, cfg.max_mode)[0]]
    if theorem in SUITES:
        return inequalities.worked_examples_suite(geom)
    raise ConfigError(f"unknown theorem {theorem!r}")


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.theorem and cfg.suite:
        raise ConfigError("give either --theorem or --suite")
    space, n, shape = _build(cfg)
    theorem = cfg.suite or cfg.theorem or _default_theorem(space, n)
    geom = spectral.shape_geometry(shape)
    reports = run_theorem(theorem, geom, cfg)
    out = Output(cfg)
    dicts = [r.to_dict() for r in reports]
    out.write("reports.json", _json(_envelope(cfg, reports=dicts)))
    if n == 2:
        out.write("geometry.csv", curve2d.geometry_csv(geom))
    if out.plots:
        from . import plotting

        plotting.plot_shapes([shape], [cfg.shape], out.path("shape.png"))
    _echo([{k: d[k] for k in ("theorem", "lhs", "rhs", "margin", "verdict")} for d in dicts])
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VIOLATED


def cmd_eigen(cfg: RunConfig) -> int:
    space, n, shape = _build(cfg)
    if space.K != 0:
        raise ConfigError("eigen is Euclidean only")
    geom = spectral.shape_geometry(shape)
    rep, spec = spectral.verify_eigen_bound(geom, cfg.k, cfg.max_mode)
    out = Output(cfg)
    out.write("spectrum.csv", spec.to_csv())
    out.write("bound.json", _json(_envelope(cfg, report=rep.to_dict())))
    if out.plots:
        from . import plotting

        plotting.plot_spectrum(spec, out.path("spectrum.png"), rep.lhs)
    _echo({"lambda1": spec.lambda1, "bound": rep.lhs, "verdict": rep.verdict})
    return EXIT_OK if rep.ok else EXIT_VIOLATED


def _requirement(cfg: RunConfig) -> str:
    key = cfg.flow or cfg.theorem or "minkowski2d"
    if key in ("hyp-mean", "minkowskiH"):
        return "h-convex"
    if key in ("imcf-k", "afw", "3term", "eigen"):
        return f"k-convex:{cfg.k}"
    return "convex"


def _sweep_job(job: tuple[int, Any, dict]) -> dict:
    index, shape, cfg_dict = job
    cfg = RunConfig.from_dict(cfg_dict)
    row: dict[str, Any] = {"index": index, "radius_span": shapes.radius_span(shape)}
    try:
        if cfg.flow:
            res = flowlab.run(shape, flow_spec(cfg), cfg.monitors)
            row.update(
                status="pass" if res.all_pass else "violated",
                converged=res.converged,
                steps=res.steps,
                terminal_radius_span=res.roundness(),
                worst_violation=max(v["max_violation"] for v in res.verdicts),
            )
        else:
            geom = spectral.shape_geometry(shape)
            theorem = cfg.theorem or _default_theorem(shape.space, geom.n)
            reps = run_theorem(theorem, geom, cfg)
            worst = min(reps, key=lambda r: r.margin / max(r.scale, 1e-300))
            row.update(
                status="pass" if all(r.ok for r in reps) else "violated",
                verdict=worst.verdict,
                margin=worst.margin,
                scale=worst.scale,
            )
    except (ConvexityError, NumericalError, DomainError) as exc:
        row.update(status="error", error=str(exc))
    return row


def workers_from_env() -> int:
    raw = os.environ.get(ENV_WORKERS, "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from None
    return max(1, w)


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.count < 1:
        raise ConfigError("--count must be positive")
    space = cfg.space_form()
    n = _dimension(cfg, None)
    N, M = cfg.grid()
    if cfg.flow:
        flow_spec(cfg).check_compatible(space.K, n)
    corpus = shapes.corpus(space, n, cfg.count, cfg.seed, cfg.amp, N, M, _requirement(cfg))
    jobs = [(i, s, cfg.to_dict()) for i, s in enumerate(corpus)]
    workers = workers_from_env()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    out = Output(cfg)
    keys = sorted({k for r in rows for k in r}, key=lambda k: (k != "index", k != "status", k))
    lines = [",".join(keys)]
    for r in rows:
        lines.append(",".join(_cell(r.get(k, "")) for k in keys))
    out.write("sweep.csv", "\n".join(lines) + "\n")
    tally = {s: sum(r["status"] == s for r in rows) for s in ("pass", "violated", "error")}
    out.write("sweep.json", _json(_envelope(cfg, tally=tally, rows=rows)))
    if out.plots:
        from . import plotting

        plotting.plot_shapes(corpus[:6], [f"#{i}" for i in range(min(6, len(corpus)))], out.path("corpus.png"))
        if not cfg.flow:
            ok = [r for r in rows if "margin" in r]
            plotting.plot_margins([r["margin"] for r in ok], [r["scale"] for r in ok], out.path("margins.png"))
    _echo({"tally": tally, "count": len(rows)})
    if tally["error"]:
        return EXIT_NUMERICAL
    return EXIT_VIOLATED if tally["violated"] else EXIT_OK


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    s = str(v)
    return f'"{s}"' if "," in s else s


def _echo(obj) -> None:
    sys.stdout.write(_json(obj))


COMMANDS = {"flow": cmd_flow, "verify": cmd_verify, "eigen": cmd_eigen, "sweep": cmd_sweep}


# --------------------------------------------------------------------------
# argument parsing


def _monitors(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--space", choices=[*SPACES, "m2"])
    common.add_argument("--K", type=int, choices=[-1, 0, 1], help="curvature for --space m2")
    common.add_argument("--dim", type=int, help="ambient dimension n")
    common.add_argument("--shape", help="e.g. circle:2, ellipse:2:1, fourier:1:0,0.1:0.05, "
                        "sphere:1, offset_sphere:1:0.3, legendre:1:0,0.05, file:shape.json")
    common.add_argument("--weight", help="weight preset, e.g. monomial:2, exp, rational-minus:1")
    common.add_argument("--k", type=int)
    common.add_argument("--N", type=int, help="curve samples")
    common.add_argument("--M", type=int, help="profile intervals (even)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--no-plots", dest="plots", action="store_false", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="wafkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wafkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("flow", parents=[common], argument_default=argparse.SUPPRESS, help="run a curvature flow with monitors")
    f.add_argument("--flow", choices=flowlab.FLOWS)
    f.add_argument("--dt", type=float)
    f.add_argument("--max-steps", dest="max_steps", type=int)
    f.add_argument("--stop-tol", dest="stop_tol", type=float)
    f.add_argument("--max-time", dest="max_time", type=float)
    f.add_argument("--monitors", type=_monitors)

    v = sub.add_parser("verify", parents=[common], argument_default=argparse.SUPPRESS, help="evaluate an inequality")
    v.add_argument("--theorem", choices=THEOREMS)
    v.add_argument("--suite", choices=SUITES)
    v.add_argument("--l", type=int)
    v.add_argument("--max-mode", dest="max_mode", type=int)

    e = sub.add_parser("eigen", parents=[common], argument_default=argparse.SUPPRESS, help="spectrum and eigenvalue bound")
    e.add_argument("--max-mode", dest="max_mode", type=int)

    s = sub.add_parser("sweep", parents=[common], argument_default=argparse.SUPPRESS, help="random corpus through a verifier or flow")
    s.add_argument("--theorem", choices=THEOREMS)
    s.add_argument("--flow", choices=flowlab.FLOWS)
    s.add_argument("--count", type=int)
    s.add_argument("--amp", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--l", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--max-steps", dest="max_steps", type=int)
    s.add_argument("--stop-tol", dest="stop_tol", type=float)
    s.add_argument("--max-time", dest="max_time", type=float)
    s.add_argument("--max-mode", dest="max_mode", type=int)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    given = dict(vars(ns))
    given.pop("verbose", None)
    data: dict[str, Any] = {}
    path = given.pop("config", None)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.pop("command", None)
    data.update(given)
    return RunConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"wafkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvexityError, NumericalError, DomainError) as exc:
        where = f" at step {exc.step}" if getattr(exc, "step", None) is not None else ""
        print(f"wafkit: numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
