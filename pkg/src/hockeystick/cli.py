"""Command-line interface.

Exit codes: 0 ok, 2 bad input, 3 invariant violation, 4 method not
applicable, 5 refusal to certify from an unsound contraction estimate.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import contraction as ctr
from . import privacy as pv
from .core import (
    Channel,
    ValidationError,
    check_density_matrix,
    decode_matrix,
)
from .divergences import PreconditionError, hockey_stick
from .hypothesis import (
    PrivacyRegion,
    region_contains,
    region_slacks,
    relax_budget,
    sample_channel_region,
)

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_METHOD, EXIT_SOUNDNESS = 0, 2, 3, 4, 5

# default neighbouring pair for region experiments: trace distance exactly 1/3
FIXTURE_RHO = np.diag([2.0 / 3.0, 1.0 / 3.0]).astype(complex)
FIXTURE_SIGMA = np.diag([1.0 / 3.0, 2.0 / 3.0]).astype(complex)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# --------------------------------------------------------------------------
# input loading

def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise CliError(EXIT_INPUT, f"{path}: malformed JSON ({e.msg}, line {e.lineno})") from e


def _decode(path: str, obj, key: str):
    if not isinstance(obj, dict) or key not in obj:
        raise CliError(EXIT_INPUT, f"{path}: expected an object with a {key!r} field")
    try:
        return obj[key] if key == "kraus" else decode_matrix(obj[key])
    except (ValidationError, TypeError, ValueError) as e:
        raise CliError(EXIT_INPUT, f"{path}: {e}") from e


def load_state(path: str) -> np.ndarray:
    obj = _read_json(path)
    m = _decode(path, obj, "matrix")
    if "dim" in obj and m.shape != (obj["dim"], obj["dim"]):
        raise CliError(EXIT_INPUT, f"{path}: declared dim {obj['dim']} but matrix is {m.shape}")
    try:
        return check_density_matrix(m, name=path)
    except ValidationError as e:
        raise CliError(EXIT_INVARIANT, str(e)) from e


def _channel_from_obj(path: str, obj) -> Channel:
    raw = _decode(path, obj, "kraus")
    try:
        ops = [decode_matrix(k) for k in raw]
    except (ValidationError, TypeError, ValueError) as e:
        raise CliError(EXIT_INPUT, f"{path}: {e}") from e
    if not ops or any(k.ndim != 2 or k.shape != ops[0].shape for k in ops):
        raise CliError(EXIT_INPUT, f"{path}: Kraus operators must be equally shaped matrices")
    for key, axis in (("dim_in", 1), ("dim_out", 0)):
        if key in obj and obj[key] != ops[0].shape[axis]:
            raise CliError(EXIT_INPUT, f"{path}: declared {key}={obj[key]} does not match Kraus shape")
    try:
        return Channel(ops, label=obj.get("label"))
    except ValidationError as e:
        raise CliError(EXIT_INVARIANT, f"{path}: {e}") from e


def load_channel(path: str) -> Channel:
    return _channel_from_obj(path, _read_json(path))


def load_algorithm(path: str) -> pv.LayeredAlgorithm:
    obj = _read_json(path)
    try:
        return pv.LayeredAlgorithm.from_json(obj)
    except (KeyError, TypeError) as e:
        raise CliError(EXIT_INPUT, f"{path}: malformed algorithm ({e})") from e
    except ValidationError as e:
        code = EXIT_INVARIANT if "sum K^dagger K" in str(e) else EXIT_INPUT
        raise CliError(code, f"{path}: {e}") from e


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _gamma(args) -> float:
    if (args.gamma is None) == (args.epsilon is None):
        raise CliError(EXIT_INPUT, "give exactly one of --gamma and --epsilon")
    return args.gamma if args.gamma is not None else math.exp(args.epsilon)


# --------------------------------------------------------------------------
# commands

def cmd_divergence(args) -> None:
    gamma = _gamma(args)
    rho, sigma = load_state(args.rho), load_state(args.sigma)
    if rho.shape != sigma.shape:
        raise CliError(EXIT_INPUT, f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    with _output(args.out) as out:
        print(f"{hockey_stick(rho, sigma, gamma):.12f}", file=out)


def cmd_contraction(args) -> None:
    ch = load_channel(args.channel)
    est = ctr.estimate_contraction(ch, args.gamma, args.method, args.restarts, args.seed)
    with _output(args.out) as out:
        print(f"channel: {est.channel_id}", file=out)
        print(f"gamma: {_fmt(est.gamma)}", file=out)
        print(f"lower: {est.lower:.12f}", file=out)
        print(f"upper: {est.upper:.12f}", file=out)
        print(f"methods: {','.join(est.method_tags)}", file=out)


def _uniform_noise(algo: pv.LayeredAlgorithm, kind: str):
    specs = [n for _, n in algo.layers]
    if not specs:
        raise CliError(EXIT_INPUT, "algorithm has no layers")
    if any(s.type != kind for s in specs):
        raise CliError(EXIT_METHOD, f"mode needs every noise layer to be {kind}")
    return specs


def _delta_fn(algo: pv.LayeredAlgorithm, kappa: float, mode: str, contraction_mode: str):
    """``epsilon -> delta`` for the requested certification mode."""
    if mode == "generic":
        return lambda eps: pv.delta_layered_generic(algo, kappa, eps, contraction_mode)
    if contraction_mode != "sound":
        raise pv.SoundnessError(f"mode {mode!r} only uses formula bounds; "
                                f"contraction mode {contraction_mode!r} is not sound")
    n = algo.n_layers
    if mode == "depolarizing":
        if all(s.type == "global_depolarizing" for _, s in algo.layers):
            ps = [s.p for _, s in algo.layers]
            return lambda eps: pv.delta_global_depolarizing(ps, algo.dim, kappa, eps)
        specs = _uniform_noise(algo, "local_depolarizing")
        s0 = specs[0]
        if any((s.p, s.k, s.local_dim) != (s0.p, s0.k, s0.local_dim) for s in specs):
            raise CliError(EXIT_METHOD, "local depolarizing mode needs identical layers")
        return lambda eps: pv.delta_local_depolarizing(s0.p, s0.local_dim, s0.k, n, kappa, eps)
    # qubit
    specs = _uniform_noise(algo, "kraus")
    s0 = specs[0]
    if s0.channel.dim_in != 2 or s0.channel.dim_out != 2:
        raise CliError(EXIT_METHOD, "qubit mode needs qubit Kraus noise")
    if any(s.k != s0.k or not _same_channel(s.channel, s0.channel) for s in specs):
        raise CliError(EXIT_METHOD, "qubit mode needs identical noise layers")
    lam = min(max(ctr.choi_min_eigenvalue(s0.channel), 0.0), 4.0)
    return lambda eps: pv.delta_qubit_noise(lam, s0.k, n, kappa, eps)


def _same_channel(a: Channel, b: Channel) -> bool:
    return np.allclose(a.superoperator(), b.superoperator(), atol=1e-12)


def _invert_delta(delta_fn, delta: float, eps_max: float = 50.0, iters: int = 200) -> float:
    """Smallest ``eps`` with ``delta_fn(eps) <= delta`` by bisection (``delta_fn`` is non-increasing)."""
    if delta_fn(0.0) <= delta:
        return 0.0
    if delta_fn(eps_max) > delta:
        return math.inf
    lo, hi = 0.0, eps_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if delta_fn(mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def cmd_certify(args) -> None:
    if not 0.0 <= args.kappa <= 1.0:
        raise CliError(EXIT_INPUT, "--kappa must lie in [0, 1]")
    if (args.epsilon is None) == (args.delta is None):
        raise CliError(EXIT_INPUT, "give exactly one of --epsilon and --delta")
    algo = load_algorithm(args.algorithm)
    delta_fn = _delta_fn(algo, args.kappa, args.mode, args.contraction)
    if args.epsilon is not None:
        if args.epsilon < 0:
            raise CliError(EXIT_INPUT, "--epsilon must be >= 0")
        eps, delta = args.epsilon, delta_fn(args.epsilon)
    else:
        if not 0.0 <= args.delta <= 1.0:
            raise CliError(EXIT_INPUT, "--delta must lie in [0, 1]")
        delta = args.delta
        eps = _closed_eps(algo, args) if args.mode == "depolarizing" else _invert_delta(delta_fn, delta)
    with _output(args.out) as out:
        print(f"epsilon={eps:.12f} delta={delta:.12f}", file=out)


def _closed_eps(algo, args) -> float:
    specs = [s for _, s in algo.layers]
    if all(s.type == "global_depolarizing" for s in specs):
        return pv.eps_global_depolarizing([s.p for s in specs], algo.dim, args.kappa, args.delta)
    s0 = specs[0]
    return pv.eps_local_depolarizing(s0.p, s0.local_dim, s0.k, algo.n_layers, args.kappa, args.delta)


# sweep ------------------------------------------------------------------

SWEEP_VARIABLES = ("n", "epsilon", "delta", "p", "lambda", "gamma", "alpha", "k")
_INT_PARAMS = ("n", "k", "D")
_DEFAULTS = {"D": 2, "k": 1, "n": 1, "kappa": 0.1, "epsilon": 0.0, "delta": 0.0, "distance": 0.1}


def _need(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise CliError(EXIT_INPUT, f"missing parameter(s): {', '.join(missing)}")
    return [params[n] for n in names]


def _q_eta_closed(q):
    p, d = _need(q, "p", "D")
    gamma = q["gamma"] if "gamma" in q else math.exp(q["epsilon"])
    return ctr.eta_depolarizing_closed(p, d, gamma)


def _q_delta_contraction(q):
    p, d, kappa, eps, n = _need(q, "p", "D", "kappa", "epsilon", "n")
    return min(kappa * ctr.eta_depolarizing_closed(p, d, math.exp(eps)) ** n, 1.0)


def _q_delta_global(q):
    p, d, kappa, eps, n = _need(q, "p", "D", "kappa", "epsilon", "n")
    return pv.delta_global_depolarizing([p] * n, d, kappa, eps)


def _q_eps_global(q):
    p, d, kappa, delta, n = _need(q, "p", "D", "kappa", "delta", "n")
    return pv.eps_global_depolarizing([p] * n, d, kappa, delta)


def _q_delta_local(q):
    p, d, k, n, kappa, eps = _need(q, "p", "D", "k", "n", "kappa", "epsilon")
    return pv.delta_local_depolarizing(p, d, k, n, kappa, eps)


def _q_eps_local(q):
    p, d, k, n, kappa, delta = _need(q, "p", "D", "k", "n", "kappa", "delta")
    return pv.eps_local_depolarizing(p, d, k, n, kappa, delta)


def _q_delta_qubit(q):
    lam, k, n, kappa, eps = _need(q, "lambda", "k", "n", "kappa", "epsilon")
    return pv.delta_qubit_noise(lam, k, n, kappa, eps)


def _q_trace_lower(q):
    p, k, n, dist = _need(q, "p", "k", "n", "distance")
    return pv.trace_lower_bound_local(p, k, n, dist).value


def _region_line(q, upper: bool):
    a, eps, delta = _need(q, "alpha", "epsilon", "delta")
    g = math.exp(eps)
    if upper:
        return min(1.0, g * (1.0 - a) + delta, 1.0 - (a - delta) / g)
    return max(0.0, 1.0 - delta - g * a, (1.0 - delta - a) / g)


def _q_relaxed_epsilon(q):
    eps, delta, dt = _need(q, "epsilon", "delta", "delta_tilde")
    return relax_budget(eps, delta, dt)


SWEEP_QUANTITIES = {
    "eta_closed": _q_eta_closed,
    "delta_contraction": _q_delta_contraction,
    "delta_global": _q_delta_global,
    "eps_global": _q_eps_global,
    "delta_local": _q_delta_local,
    "eps_local": _q_eps_local,
    "delta_qubit": _q_delta_qubit,
    "trace_lower": _q_trace_lower,
    "region_lower": lambda q: _region_line(q, False),
    "region_upper": lambda q: _region_line(q, True),
    "relaxed_epsilon": _q_relaxed_epsilon,
}


def _parse_value(key: str, text: str):
    try:
        v = float(text)
    except ValueError as e:
        raise CliError(EXIT_INPUT, f"{key}: not a number: {text!r}") from e
    if key in _INT_PARAMS:
        if v != int(v):
            raise CliError(EXIT_INPUT, f"{key} must be an integer, got {text}")
        return int(v)
    return v


def _parse_assign(text: str) -> tuple[str, list]:
    if "=" not in text:
        raise CliError(EXIT_INPUT, f"expected key=value, got {text!r}")
    key, vals = text.split("=", 1)
    key = key.strip()
    return key, [_parse_value(key, v) for v in vals.split(",") if v.strip()]


def sweep_grid(var: str, start: float, stop: float, steps: int) -> list:
    if var not in SWEEP_VARIABLES:
        raise CliError(EXIT_INPUT, f"unknown sweep variable {var!r}; expected one of {SWEEP_VARIABLES}")
    if steps < 2 or not start < stop:
        raise CliError(EXIT_INPUT, "sweep range needs start < stop and steps >= 2")
    xs = np.linspace(start, stop, steps)
    if var in _INT_PARAMS:
        if not np.allclose(xs, np.round(xs)):
            raise CliError(EXIT_INPUT, f"{var} grid {start}..{stop} in {steps} steps is not integral")
        return [int(round(x)) for x in xs]
    return [float(x) for x in xs]


def sweep_table(quantities, var, xs, fixed, series):
    """Header and rows for a sweep; one column per (quantity, series entry)."""
    for q in quantities:
        if q not in SWEEP_QUANTITIES:
            raise CliError(EXIT_INPUT, f"unknown quantity {q!r}; expected one of {sorted(SWEEP_QUANTITIES)}")
    keys = [k for k, _ in series]
    lengths = {len(v) for _, v in series}
    if len(lengths) > 1:
        raise CliError(EXIT_INPUT, "all --series lists must have the same length")
    combos = list(zip(*(v for _, v in series))) if series else [()]
    cols = []
    for q, combo in itertools.product(quantities, combos):
        label = ";".join(f"{k}={v:g}" for k, v in zip(keys, combo))
        if len(quantities) > 1 or not label:
            label = f"{q}[{label}]" if label else q
        cols.append((q, dict(zip(keys, combo)), label))
    rows = []
    for x in xs:
        row = [x]
        for q, extra, _ in cols:
            params = {**_DEFAULTS, **fixed, **extra, var: x}
            try:
                row.append(SWEEP_QUANTITIES[q](params))
            except (ValidationError, PreconditionError) as e:
                raise CliError(EXIT_INPUT, f"{q} at {var}={x}: {e}") from e
        rows.append(row)
    return ["x"] + [c[2] for c in cols], rows


def cmd_sweep(args) -> None:
    quantities = [q for q in args.quantity.split(",") if q]
    xs = sweep_grid(args.var, args.start, args.stop, args.steps)
    fixed = {}
    for text in args.set or []:
        key, vals = _parse_assign(text)
        if len(vals) != 1:
            raise CliError(EXIT_INPUT, f"--set {key} takes one value")
        fixed[key] = vals[0]
    series = [_parse_assign(t) for t in args.series or []]
    header, rows = sweep_table(quantities, args.var, xs, fixed, series)
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


# region -----------------------------------------------------------------

def cmd_region(args) -> None:
    ch = load_channel(args.channel)
    if (args.rho is None) != (args.sigma is None):
        raise CliError(EXIT_INPUT, "give both state files or neither")
    if args.rho is None:
        rho, sigma = FIXTURE_RHO, FIXTURE_SIGMA
    else:
        rho, sigma = load_state(args.rho), load_state(args.sigma)
    if rho.shape != sigma.shape or rho.shape[0] != ch.dim_in:
        raise CliError(EXIT_INPUT, "state and channel dimensions do not match")
    if args.samples < 1:
        raise CliError(EXIT_INPUT, "--samples must be >= 1")
    try:
        region = PrivacyRegion(args.epsilon, args.delta)
    except ValidationError as e:
        raise CliError(EXIT_INPUT, str(e)) from e
    pts = sample_channel_region(ch, rho, sigma, args.samples, args.seed, [args.epsilon])
    n_out = 0
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["index", "alpha", "beta", "inside"])
        for i, pt in enumerate(pts):
            inside = region_contains(region, pt)
            n_out += not inside
            w.writerow([i, _fmt(pt.alpha), _fmt(pt.beta), int(inside)])
    worst = max(-min(region_slacks(region, p.alpha, p.beta)) for p in pts)
    verdict = "certified_violation" if n_out else "no_violation_found"
    exact = max(pv.certify_pair(ch, rho, sigma, args.epsilon), pv.certify_pair(ch, sigma, rho, args.epsilon))
    msg = (f"{verdict}: {n_out}/{len(pts)} points outside R({args.epsilon:g}, {args.delta:g}); "
           f"worst excess {worst:.3e}; exact delta {exact:.12g}")
    print(msg, file=sys.stderr if args.out in (None, "-") else sys.stdout)


# renyi ------------------------------------------------------------------

def cmd_renyi(args) -> None:
    if args.action == "convert":
        if args.epsilon is None or args.delta is None:
            raise CliError(EXIT_INPUT, "convert needs --epsilon and --delta")
        try:
            b = pv.renyi_to_approx_dp(pv.RenyiBudget(args.epsilon, args.alpha, args.kind), args.delta)
        except ValidationError as e:
            raise CliError(EXIT_INPUT, str(e)) from e
        line = f"epsilon={b.epsilon:.12f} delta={b.delta:.12g}"
    else:
        if not (args.channel and args.rho and args.sigma):
            raise CliError(EXIT_INPUT, "certify needs --channel, --rho and --sigma")
        ch = load_channel(args.channel)
        rho, sigma = load_state(args.rho), load_state(args.sigma)
        try:
            eps = pv.renyi_dp_certify(ch, [(rho, sigma)], args.alpha, args.kind)
        except ValidationError as e:
            raise CliError(EXIT_INPUT, str(e)) from e
        line = f"epsilon={eps:.12f} alpha={args.alpha:g} kind={args.kind} (empirical over supplied pairs)"
    with _output(args.out) as out:
        print(line, file=out)


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 42)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")

    ap = argparse.ArgumentParser(prog="hockeystick", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    ap.add_argument("--out", default=None, help="output path (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="hockey-stick divergence E_gamma(rho || sigma)")
    p.add_argument("rho")
    p.add_argument("sigma")
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("contraction", parents=[common], help="bracket eta_gamma of a channel")
    p.add_argument("channel")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--method", choices=ctr.METHODS, default="optimize")
    p.add_argument("--restarts", type=int, default=ctr.DEFAULT_RESTARTS)
    p.set_defaults(func=cmd_contraction)

    p = sub.add_parser("certify", parents=[common], help="(epsilon, delta) budget of a layered algorithm")
    p.add_argument("algorithm")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--mode", choices=("generic", "depolarizing", "qubit"), default="generic")
    p.add_argument("--contraction", choices=("sound", "optimized"), default="sound",
                   help="source of per-layer contraction coefficients")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", parents=[common], help="tabulate bounds over a parameter range as CSV")
    p.add_argument("quantity", help=f"comma-separated from: {', '.join(SWEEP_QUANTITIES)}")
    p.add_argument("--var", required=True, help=f"x variable, one of {', '.join(SWEEP_VARIABLES)}")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="fixed parameter")
    p.add_argument("--series", action="append", metavar="KEY=V1,V2,...",
                   help="one column per value; repeated options are zipped")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("region", parents=[common], help="sample error points of a channel as CSV")
    p.add_argument("channel")
    p.add_argument("rho", nargs="?")
    p.add_argument("sigma", nargs="?")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("renyi", parents=[common], help="Renyi-DP certificate or conversion")
    p.add_argument("action", choices=("certify", "convert"))
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--kind", choices=("sandwiched", "petz"), default="sandwiched")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--channel")
    p.add_argument("--rho")
    p.add_argument("--sigma")
    p.set_defaults(func=cmd_renyi)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ctr.MethodError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_METHOD
    except pv.SoundnessError as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_SOUNDNESS
    except PreconditionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
