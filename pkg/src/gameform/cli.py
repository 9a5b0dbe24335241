"""Command-line front end.

Subcommands ``classify``, ``find``, ``simulate``, ``continue`` and
``genericity`` load game configs, call the library and print JSON (or write
a trajectory CSV).  Every file written with ``--out`` gets a sibling
``<out>.manifest.json`` recording how to reproduce it.

Exit codes: 0 success, 2 invalid input or violated precondition,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import NewtonOptions, Tolerances, classify_point, multistart
from .dynamics import OBSERVABLES, StepSizes, flow_rk4, gradient_play_discrete, observable_values, write_trajectory_csv
from .errors import GameformError
from .games import BlockDims, Composite, RpsSoftmax, as_flat, parse_game_config
from .perturb import FAMILIES, MultistartSpec, continuation, genericity_sample

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# -- parsing helpers ----------------------------------------------------------


def _floats(text, what):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise _Fail(EXIT_INVALID, f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise _Fail(EXIT_INVALID, f"{what}: values must be finite")
    return vals


def _load_game(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _Fail(EXIT_INVALID, f"cannot read {path}: {exc.strerror}") from None
    return parse_game_config(text)


def _point(text, game, what="point"):
    return as_flat(np.array(_floats(text, what)), game.dims)


def _clean(obj):
    """Replace non-finite floats by null so the output stays strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    # repr of a float is the shortest string that round-trips exactly
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _manifest(args, outputs, rng_seed=None):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    return {
        "command": args.command,
        "game_config_path": getattr(args, "game", None),
        "parameters": params,
        "output_paths": [str(p) for p in outputs],
        "rng_seed": rng_seed,
        "tool_version": __version__,
    }


def _emit(args, text, rng_seed=None):
    """Print ``text``; with ``--out`` also write it plus a manifest."""
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
        Path(f"{out}.manifest.json").write_text(dumps(_manifest(args, [out], rng_seed)))
    sys.stdout.write(text)


def _tolerances(args):
    kw = {}
    for name in ("tol_omega", "tol_psd", "tol_pd", "tol_det", "tol_re"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    try:
        return Tolerances(**kw)
    except ValueError as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from None


# -- subcommands --------------------------------------------------------------


def cmd_classify(args):
    game = _load_game(args.game)
    report = classify_point(game, _point(args.point, game), _tolerances(args))
    _emit(args, dumps(report.to_dict()))
    return EXIT_OK


def cmd_find(args):
    game = _load_game(args.game)
    lo, hi = _box(args.box)
    if args.seeds < 1:
        raise _Fail(EXIT_INVALID, "--seeds must be >= 1")
    res = multistart(game, lo, hi, args.seeds, args.rng_seed, tols=_tolerances(args))
    _emit(args, dumps(res.to_dict()), args.rng_seed)
    return EXIT_OK


def _box(text):
    vals = _floats(text, "--box")
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise _Fail(EXIT_INVALID, f"--box: expected LO,HI with LO < HI, got {text!r}")
    return vals


def _betas(game):
    while isinstance(game, Composite):
        game = game.base
    if isinstance(game, RpsSoftmax):
        return game.beta1, game.beta2
    return 1.0, 1.0


def cmd_simulate(args):
    game = _load_game(args.game)
    x0 = _point(args.x0, game, "--x0")
    if args.observable in ("policy1", "policy2") and game.dims != BlockDims(3, 3):
        raise _Fail(EXIT_INVALID, "policy observables need a game with dims (3, 3)")
    if args.mode == "discrete":
        if args.gamma is None or args.iters is None:
            raise _Fail(EXIT_INVALID, "discrete mode needs --gamma and --iters")
        if args.dt is not None or args.t_final is not None:
            raise _Fail(EXIT_INVALID, "--dt and --t-final belong to rk4 mode")
        g = _floats(args.gamma, "--gamma")
        if len(g) not in (1, 2):
            raise _Fail(EXIT_INVALID, "--gamma takes G or G1,G2")
        try:
            steps = StepSizes(g[0], g[-1])
        except ValueError as exc:
            raise _Fail(EXIT_INVALID, str(exc)) from None
        traj = gradient_play_discrete(game, x0, steps, args.iters, args.record_every)
    else:
        if args.dt is None or args.t_final is None:
            raise _Fail(EXIT_INVALID, "rk4 mode needs --dt and --t-final")
        if args.gamma is not None or args.iters is not None:
            raise _Fail(EXIT_INVALID, "--gamma and --iters belong to discrete mode")
        traj = flow_rk4(game, x0, args.dt, args.t_final, args.record_every)

    beta = _betas(game)[1 if args.observable == "policy2" else 0]
    buf = io.StringIO()
    write_trajectory_csv(traj, buf, args.observable, beta)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        Path(f"{args.out}.manifest.json").write_text(dumps(_manifest(args, [args.out])))
    if args.summary:
        sys.stdout.write(dumps(_summary(traj, args.observable, beta)))
    elif not args.out:
        sys.stdout.write(buf.getvalue())
    if traj.error:
        sys.stderr.write(f"simulation stopped early: {traj.error}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def _summary(traj, observable, beta):
    vals = observable_values(traj, observable, beta)
    norm0, norm_t = float(np.linalg.norm(traj.states[0])), float(np.linalg.norm(traj.final))
    return {
        "n_recorded": len(traj),
        "final_step": int(traj.steps[-1]),
        "final_time": float(traj.times[-1]),
        "final_state": traj.final.tolist(),
        "observable": observable,
        "final_observable": vals[-1].tolist(),
        "time_average": vals.mean(axis=0).tolist(),
        "max_final_component": float(np.max(vals[-1])),
        "norm_initial": norm0,
        "norm_final": norm_t,
        "norm_drift": abs(norm_t - norm0),
        "error": traj.error,
    }


def cmd_continue(args):
    game = _load_game(args.game)
    pert = _load_game(args.perturb)
    if pert.dims != game.dims:
        raise _Fail(EXIT_INVALID, f"perturbation dims {tuple(pert.dims)} differ from game dims {tuple(game.dims)}")
    x0 = _point(args.x0, game, "--x0")
    path = continuation(game, pert, x0, args.t_max, args.steps, NewtonOptions(), _tolerances(args))
    _emit(args, dumps(path.to_dict()))
    if path.status == "CorrectorFailed":
        sys.stderr.write(f"corrector failed at t = {path.status_t!r}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def _family(text):
    text = text.strip()
    if text.startswith("{"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise _Fail(EXIT_INVALID, f"--family: invalid JSON ({exc.msg})") from None
    else:
        name, _, degree = text.partition(":")
        spec = {"family": name}
        if degree:
            try:
                spec["degree"] = int(degree)
            except ValueError:
                raise _Fail(EXIT_INVALID, f"--family: bad degree {degree!r}") from None
    if not isinstance(spec, dict) or spec.get("family") not in FAMILIES:
        raise _Fail(EXIT_INVALID, f"--family: expected one of {list(FAMILIES)}")
    return spec


def cmd_genericity(args):
    spec = _family(args.family)
    dims = [int(v) for v in _floats(args.dims, "--dims") if v == int(v)]
    if len(dims) != 2 or min(dims) < 1:
        raise _Fail(EXIT_INVALID, f"--dims: expected two positive integers, got {args.dims!r}")
    if args.n < 1:
        raise _Fail(EXIT_INVALID, "--n must be >= 1")
    lo, hi = _box(args.box)
    ms = MultistartSpec(lo, hi, args.seeds)
    stats = genericity_sample(spec, args.n, args.rng_seed, ms, _tolerances(args), BlockDims(*dims))
    _emit(args, dumps(stats.to_dict()), args.rng_seed)
    if args.strict and stats.n_degenerate > 0:
        sys.stderr.write(f"{stats.n_degenerate} degenerate critical point(s) found\n")
        return EXIT_NUMERICAL
    return EXIT_OK


# -- argument parser ----------------------------------------------------------


def _add_tols(p):
    g = p.add_argument_group("tolerance overrides")
    for name in ("omega", "psd", "pd", "det", "re"):
        g.add_argument(f"--tol-{name}", type=float, default=None, metavar="TOL")


def build_parser():
    parser = argparse.ArgumentParser(prog="gameform", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify one point")
    p.add_argument("--game", required=True, metavar="FILE")
    p.add_argument("--point", required=True, metavar="CSV")
    p.add_argument("--out", metavar="FILE")
    _add_tols(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("find", help="multistart Newton search for critical points")
    p.add_argument("--game", required=True, metavar="FILE")
    p.add_argument("--box", default="-2,2", metavar="LO,HI")
    p.add_argument("--seeds", type=int, default=16, metavar="N")
    p.add_argument("--rng-seed", type=int, default=0, metavar="S")
    p.add_argument("--out", metavar="FILE")
    _add_tols(p)
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("simulate", help="simulate gradient play")
    p.add_argument("--game", required=True, metavar="FILE")
    p.add_argument("--x0", required=True, metavar="CSV")
    p.add_argument("--mode", choices=("discrete", "rk4"), default="discrete")
    p.add_argument("--gamma", metavar="G1[,G2]")
    p.add_argument("--dt", type=float)
    p.add_argument("--iters", type=int, metavar="N")
    p.add_argument("--t-final", type=float, metavar="T")
    p.add_argument("--record-every", type=int, default=1, metavar="K")
    p.add_argument("--observable", choices=OBSERVABLES, default="identity")
    p.add_argument("--out", metavar="FILE.csv")
    p.add_argument("--summary", action="store_true", help="print a JSON summary instead of the CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("continue", help="continue a critical point along game + t * perturbation")
    p.add_argument("--game", required=True, metavar="FILE")
    p.add_argument("--perturb", required=True, metavar="FILE")
    p.add_argument("--x0", required=True, metavar="CSV")
    p.add_argument("--t-max", type=float, default=0.1, metavar="T")
    p.add_argument("--steps", type=int, default=20, metavar="N")
    p.add_argument("--out", metavar="FILE")
    _add_tols(p)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("genericity", help="classification statistics over random games")
    p.add_argument("--family", required=True, metavar="SPEC", help="family name, NAME:DEGREE, or a JSON object")
    p.add_argument("--n", type=int, required=True, metavar="N")
    p.add_argument("--rng-seed", type=int, default=0, metavar="S")
    p.add_argument("--dims", default="1,1", metavar="M1,M2")
    p.add_argument("--box", default="-2,2", metavar="LO,HI")
    p.add_argument("--seeds", type=int, default=16, metavar="N", help="multistart seeds per game")
    p.add_argument("--strict", action="store_true", help="exit 3 if any degenerate point is found")
    p.add_argument("--out", metavar="FILE")
    _add_tols(p)
    p.set_defaults(func=cmd_genericity)
    return parser


_CSV_FLAGS = ("--box", "--point", "--x0", "--gamma", "--dims")


def _join_negative_values(argv):
    """Let ``--box -1,1`` through: argparse would read ``-1,1`` as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _CSV_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2] not in ("", "-") and not nxt[1].isalpha():
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except _Fail as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except (ArithmeticError, OverflowError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (GameformError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
