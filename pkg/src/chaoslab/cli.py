"""Command-line front end.

Subcommands: pair, phi, classify, scan, forge, entropy, pipka, count-ball,
verify. Every artifact embeds the resolved run configuration and seeds in a
'#' comment header, is written atomically (temp + rename) and contains no
timestamps, so re-running a command reproduces the file byte for byte.

Exit codes: 0 success, 1 usage error, 2 invariant violation detected in
outputs, 3 guard exceeded.
"""
from __future__ import annotations

import argparse
import difflib
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import blocks as bl
from . import classify as cl
from . import density as de
from . import entropy as en
from . import systems as sy
from .errors import (
    ChaoslabError,
    GuardExceeded,
    InvariantViolation,
    UsageError,
    ValidationError,
)
from .svgplot import render_phi_svg

# dotted config keys -> (argparse dest, parser)
CONFIG_KEYS = {
    "thresholds.tau_one": ("tau_one", float),
    "thresholds.tau_zero": ("tau_zero", float),
    "thresholds.eta_min": ("eta_min", float),
    "thresholds.gap": ("gap", float),
    "thresholds.eta_grid": ("eta_grid", str),
    "thresholds.burn_in": ("burn_in", int),
    "run.horizon": ("horizon", int),
    "run.seed": ("seed", int),
    "run.seed2": ("seed2", int),
    "run.metric": ("metric", str),
    "run.q": ("q", str),
    "run.out": ("out", str),
    "run.format": ("format", str),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the spec wants 1
        raise UsageError(message)


def load_config(path: str | Path) -> dict:
    """Plain-text `key = value` lines, '#' comments, dotted keys. Unknown
    keys are hard errors (with a suggestion); values are parsed per key."""
    overrides = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count("=") != 1:
            raise UsageError(f"{path}:{lineno}: expected a single 'key = value'")
        key, value = (part.strip() for part in line.split("="))
        if not key or not value:
            raise UsageError(f"{path}:{lineno}: malformed 'key = value' line")
        if key not in CONFIG_KEYS:
            hint = difflib.get_close_matches(key, CONFIG_KEYS, n=1)
            suffix = f"; did you mean {hint[0]!r}?" if hint else ""
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}{suffix}")
        dest, cast = CONFIG_KEYS[key]
        try:
            overrides[dest] = cast(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return overrides


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def header_lines(self) -> list[str]:
        lines = [f"# chaoslab {self.command}"]
        for key in sorted(self.values):
            value = self.values[key]
            if value is not None:
                lines.append(f"# {key} = {value}")
        return lines


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def write_csv(path, config: RunConfig, header: Sequence[str], rows) -> None:
    lines = config.header_lines()
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    atomic_write(path, "\n".join(lines) + "\n")


def emit_phi_svg(profile: de.PhiProfile, path, title: str = "Phi profile") -> None:
    """Standalone deterministic SVG plot of Phi* and Phi versus t (log x)."""
    atomic_write(path, render_phi_svg(profile, title))


# --- argument plumbing --------------------------------------------------------


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--format", choices=("csv", "svg"), default=None)


def _add_system(p: _Parser) -> None:
    p.add_argument(
        "--system",
        choices=("full-shift", "tent", "logistic", "odometer", "zero-entropy"),
        default="full-shift",
    )
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--probs", default=None, help="comma-separated symbol weights")
    p.add_argument("--param", type=float, default=None, help="interval-map parameter")
    p.add_argument("--coding-depth", type=int, default=1)
    p.add_argument("--base", default=None, help="odometer base, comma-separated")
    p.add_argument("--q", default=None, help="q-schedule, comma-separated")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seed2", type=int, default=None)
    p.add_argument("--witness", choices=sy.WITNESS_TARGETS, default=None)


def _add_thresholds(p: _Parser) -> None:
    p.add_argument("--tau-one", dest="tau_one", type=float, default=None)
    p.add_argument("--tau-zero", dest="tau_zero", type=float, default=None)
    p.add_argument("--eta-min", dest="eta_min", type=float, default=None)
    p.add_argument("--gap", type=float, default=None)
    p.add_argument("--eta-grid", dest="eta_grid", default=None)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    p.add_argument("--metric", choices=sy.METRICS, default=None)
    p.add_argument("--depth", type=int, default=3, help="partition scheme depth")


def build_parser() -> _Parser:
    parser = _Parser(prog="chaoslab")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("pair", "phi", "classify"):
        p = sub.add_parser(name)
        _add_common(p)
        _add_system(p)
        _add_thresholds(p)

    p = sub.add_parser("scan")
    _add_common(p)
    _add_system(p)
    _add_thresholds(p)
    p.add_argument("--count", type=int, default=8, help="number of trajectories")
    p.add_argument(
        "--target", choices=("li_yorke", "dc1", "dc1half", "dc2", "dc3"), default="dc2"
    )
    p.add_argument("--allow-empty", action="store_true")

    p = sub.add_parser("forge")
    _add_common(p)
    p.add_argument("--q", default="2,2,2")
    p.add_argument("--dump", choices=("params", "blocks", "point"), default="params")
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--markers", action="store_true", help="include the marker row")

    p = sub.add_parser("entropy")
    _add_common(p)
    p.add_argument("--q", default="2,2,2")
    p.add_argument("--empirical", action="store_true")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--word-len", dest="word_len", type=int, default=8)
    p.add_argument("--stride", type=int, default=1)

    p = sub.add_parser("pipka")
    _add_common(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--card", type=int, required=True)
    p.add_argument("--eps-grid", dest="eps_grid", default=None)

    p = sub.add_parser("count-ball")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--a0", default="zeros", help="zeros|alternating|explicit bits")
    p.add_argument("--eps", type=float, default=0.005)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--card", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--override-guard", action="store_true")

    p = sub.add_parser("verify")
    _add_common(p)
    p.add_argument(
        "--suite",
        choices=("params", "pi-bijection", "percentage", "entropy-zero", "scheme"),
        required=True,
    )
    p.add_argument("--q", default="2,2,2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=20)

    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """CLI flags beat config-file values beat defaults (None placeholders)."""
    if getattr(args, "config", None):
        overrides = load_config(args.config)
        for dest, value in overrides.items():
            if getattr(args, dest, None) is None:
                setattr(args, dest, value)
    return args


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _thresholds(args) -> cl.Thresholds:
    kwargs = {}
    if args.tau_one is not None:
        kwargs["tau_one"] = args.tau_one
    if args.tau_zero is not None:
        kwargs["tau_zero"] = args.tau_zero
    if args.eta_min is not None:
        kwargs["eta_min"] = args.eta_min
    if args.gap is not None:
        kwargs["gap"] = args.gap
    if args.eta_grid is not None:
        kwargs["eta_grid"] = _floats(args.eta_grid)
    if args.burn_in is not None:
        kwargs["burn_in"] = args.burn_in
    return cl.Thresholds(**kwargs)


def _system_spec(args) -> sy.SystemSpec:
    if args.system == "full-shift":
        probs = _floats(args.probs) if args.probs else (1.0 / args.arity,) * args.arity
        return sy.FullShift(args.arity, probs)
    if args.system in ("tent", "logistic"):
        param = args.param if args.param is not None else (2.0 if args.system == "tent" else 4.0)
        return sy.IntervalMap(args.system, param, args.coding_depth)
    if args.system == "odometer":
        if not args.base:
            raise UsageError("odometer needs --base")
        return sy.OdometerSpec(_ints(args.base))
    if args.system == "zero-entropy":
        if not args.q:
            raise UsageError("zero-entropy needs --q")
        return sy.ZeroEntropy(bl.QSchedule(_ints(args.q)))
    raise UsageError(f"unknown system {args.system!r}")


def _build_pair(args) -> sy.OrbitPair:
    horizon = args.horizon or 10000
    if args.witness:
        return sy.construct_witness_pair(args.witness, horizon)
    spec = _system_spec(args)
    seed = args.seed if args.seed is not None else 1
    seed2 = args.seed2 if args.seed2 is not None else seed + 1
    return sy.make_pair(spec, horizon, "independent", (seed, seed2))


def _config_from_args(args, keys: Sequence[str]) -> RunConfig:
    return RunConfig(
        command=args.command,
        values={k: getattr(args, k, None) for k in keys},
    )


# --- subcommand bodies --------------------------------------------------------


def _cmd_pair(args) -> int:
    pair = _build_pair(args)
    config = _config_from_args(
        args, ("system", "horizon", "seed", "seed2", "witness", "q", "base")
    )
    rows = []
    for n in range(pair.horizon):
        row = [n + 1]
        row.append(int(pair.a.symbols[n]) if pair.a.symbols is not None else "")
        row.append(int(pair.b.symbols[n]) if pair.b.symbols is not None else "")
        if pair.a.reals is not None:
            row.append(repr(float(pair.a.reals[n])))
            row.append(repr(float(pair.b.reals[n])))
        rows.append(row)
    header = ["n", "x_symbol", "y_symbol"]
    if pair.a.reals is not None:
        header += ["x_real", "y_real"]
    write_csv(args.out or "pair.csv", config, header, rows)
    return 0


def _phi_of(args) -> tuple[de.PhiProfile, RunConfig]:
    pair = _build_pair(args)
    metric = args.metric or "hamming-indicator"
    series = sy.distance_series(pair, metric)
    policy = de.CheckpointPolicy(burn_in=args.burn_in)
    profile = de.phi_profile(series, policy=policy)
    config = _config_from_args(
        args,
        ("system", "horizon", "seed", "seed2", "witness", "q", "base", "metric", "burn_in"),
    )
    return profile, config


def _cmd_phi(args) -> int:
    profile, config = _phi_of(args)
    out = args.out or ("phi.svg" if args.format == "svg" else "phi.csv")
    if args.format == "svg":
        emit_phi_svg(profile, out)
    else:
        rows = [
            [repr(float(t)), repr(float(s)), repr(float(l))]
            for t, s, l in zip(profile.thresholds, profile.phi_star, profile.phi_lower)
        ]
        write_csv(out, config, ["t", "phi_star", "phi_lower"], rows)
    return 0


def _cmd_classify(args) -> int:
    pair = _build_pair(args)
    metric = args.metric or "hamming-indicator"
    series = sy.distance_series(pair, metric)
    th = _thresholds(args)
    policy = th.policy()
    profile = de.phi_profile(series, policy=policy)
    verdict = cl.classify_metric_pair(profile, de.besicovitch_bounds(series, policy), th)
    # post-hoc invariant check on the emitted flags (exit 2 on violation)
    flags = verdict.flags
    chain = (
        (not flags["dc1"] or flags["dc1half"])
        and (not flags["dc1half"] or flags["dc2"])
        and (not flags["dc2"] or flags["dc3"])
        and (not flags["dc2"] or flags["li_yorke"])
    )
    if not chain:
        raise InvariantViolation("verdict violates the implication chain")
    eta: object = repr(verdict.separation_upper)
    k0: object = ""
    if args.depth and pair.a.symbols is not None:
        partition = cl.classify_partition_pair(pair, cl.cylinder_scheme(args.depth), th)
        if partition.k0 is not None:
            eta = repr(partition.separation_upper)
            k0 = partition.k0
    config = _config_from_args(
        args,
        ("system", "horizon", "seed", "seed2", "witness", "q", "base", "metric",
         "burn_in", "depth"),
    )
    config.values["note"] = "dc1 is a finite-horizon read only"
    row = [
        "0",
        flags["li_yorke"],
        flags["dc1"],
        flags["dc1half"],
        flags["dc2"],
        flags["dc3"],
        "" if verdict.separation_threshold is None else repr(verdict.separation_threshold),
        eta,
        k0,
    ]
    write_csv(
        args.out or "verdict.csv",
        config,
        ["pair_id", "ly", "dc1", "dc1half", "dc2", "dc3", "s", "eta", "k0"],
        [row],
    )
    return 0


def _cmd_scan(args) -> int:
    spec = _system_spec(args)
    horizon = args.horizon or 10000
    seed = args.seed if args.seed is not None else 1
    trajectories = [sy.sample_orbit(spec, horizon, seed + i) for i in range(args.count)]
    common = min(t.horizon for t in trajectories)
    trajectories = [sy.truncate_trajectory(t, common) for t in trajectories]
    th = _thresholds(args)
    metric = args.metric or "hamming-indicator"
    policy = th.policy()

    def scrambled(pair: sy.OrbitPair) -> bool:
        profile = de.phi_profile(sy.distance_series(pair, metric), policy=policy)
        return cl.classify_metric_pair(profile, None, th).flags[args.target]

    clique = cl.scan_scrambled_set(
        cl.all_pairs(trajectories), scrambled, singleton_if_empty=not args.allow_empty
    )
    config = _config_from_args(
        args, ("system", "horizon", "seed", "count", "target", "metric")
    )
    write_csv(args.out or "clique.csv", config, ["trajectory_id"], [[i] for i in clique])
    return 0


def _cmd_forge(args) -> int:
    schedule = bl.QSchedule(_ints(args.q))
    config = _config_from_args(args, ("q", "dump", "level", "seed"))
    out = args.out or f"forge-{args.dump}.csv"
    if args.dump == "params":
        rows = [
            [p.k, p.q_k, p.p_k, p.n_k, p.b_length, p.family_size]
            for p in bl.derive_params(schedule)
        ]
        write_csv(out, config, ["k", "q_k", "p_k", "N_k", "lenB", "count"], rows)
        return 0
    if args.dump == "blocks":
        level = args.level or schedule.depth
        family = bl.enumerate_family(schedule, level)
        lines = config.header_lines()
        for row in family:
            entry = "".join(str(int(b)) for b in row)
            if args.markers:
                marks = bl.marker_row(schedule, 0, schedule.n(level))
                entry += " " + ",".join(str(int(v)) for v in marks)
            lines.append(entry)
        atomic_write(out, "\n".join(lines) + "\n")
        return 0
    # point dump: marker row and binary row of one sampled point
    seed = args.seed if args.seed is not None else 1
    word = bl.sample_point(schedule, seed)
    lines = config.header_lines()
    lines.append("offset," + str(word.offset))
    lines.append("markers," + ",".join(str(int(v)) for v in word.markers))
    lines.append("binary," + "".join(str(int(b)) for b in word.binary))
    atomic_write(out, "\n".join(lines) + "\n")
    return 0


def _cmd_entropy(args) -> int:
    schedule = bl.QSchedule(_ints(args.q))
    config = _config_from_args(
        args, ("q", "empirical", "horizon", "seed", "word_len", "stride")
    )
    out = args.out or "entropy.csv"
    if not args.empirical:
        report = en.block_count_entropy(
            (schedule.family_size(k), schedule.n(k)) for k in range(1, schedule.depth + 1)
        )
        rows = [
            [k + 1, count, length, str(rate)]
            for k, ((count, length), rate) in enumerate(zip(report.levels, report.rates))
        ]
        write_csv(out, config, ["k", "count", "length", "bits_per_symbol"], rows)
        return 0
    horizon = args.horizon or 100000
    seed = args.seed if args.seed is not None else 1
    word = bl.sample_point(schedule, seed, offset=0)
    if word.available_horizon < horizon:
        reps = -(-horizon // word.binary.size)
        word = bl.sample_point(schedule, seed, offset=0, blocks=reps)
    track = word.symbol_track(horizon)
    fair = np.random.default_rng(np.random.SeedSequence(seed)).integers(0, 2, horizon)
    rows = [
        [
            "marker-block",
            args.word_len,
            args.stride,
            horizon,
            repr(en.empirical_cylinder_entropy(track, args.word_len, args.stride)),
        ],
        [
            "iid-fair-bits",
            args.word_len,
            args.stride,
            horizon,
            repr(en.empirical_cylinder_entropy(fair, args.word_len, args.stride)),
        ],
    ]
    write_csv(out, config, ["source", "word_len", "stride", "horizon", "bits_per_symbol"], rows)
    return 0


def _cmd_pipka(args) -> int:
    grid = _floats(args.eps_grid) if args.eps_grid else en.DEFAULT_EPS_GRID
    params = en.solve_pipka(args.eta, args.h, args.card, grid)
    config = _config_from_args(args, ("eta", "h", "card", "eps_grid"))
    row = [
        params.eta,
        params.h,
        params.card_p,
        params.m if params.m is not None else "",
        params.eps if params.eps is not None else "",
        repr(params.margin) if params.margin is not None else "",
        params.feasible,
    ]
    write_csv(
        args.out or "pipka.csv",
        config,
        ["eta", "h", "card", "m", "eps", "margin", "feasible"],
        [row],
    )
    return 0


def _cmd_count_ball(args) -> int:
    if args.a0 == "zeros":
        a0 = "0" * args.n
    elif args.a0 == "alternating":
        a0 = ("01" * args.n)[: args.n]
    else:
        a0 = args.a0
    experiment = en.run_counting_experiment(
        args.n,
        args.m,
        args.eta,
        args.eps,
        args.h,
        args.card,
        args.delta,
        a0=a0,
        override_guard=args.override_guard,
    )
    config = _config_from_args(
        args, ("n", "m", "eta", "eps", "h", "card", "delta", "a0")
    )
    row = [
        experiment.n,
        experiment.m,
        experiment.eta,
        experiment.eps,
        experiment.delta,
        experiment.count,
        repr(experiment.bound.value),
        repr(experiment.ratio_to_total),
        experiment.bound.flag,
    ]
    write_csv(
        args.out or "count-ball.csv",
        config,
        ["n", "m", "eta", "eps", "delta", "count", "bound", "ratio", "flag"],
        [row],
    )
    return 0


def _cmd_verify(args) -> int:
    schedule = bl.QSchedule(_ints(args.q))
    suite = args.suite
    if suite == "params":
        for p in bl.derive_params(schedule):
            if p.n_k != p.p_k * 2**p.k or p.family_size != 2**p.p_k:
                raise InvariantViolation(f"parameter identities fail at level {p.k}")
        print("params OK")
        return 0
    if suite == "pi-bijection":
        k = schedule.depth
        family = bl.enumerate_family(schedule, k)
        seen = set()
        for row in family:
            word = bl.pi(schedule, k, row)
            seen.add(word.tobytes())
            if not np.array_equal(bl.inverse_pi(schedule, k, word), row):
                raise InvariantViolation("inverse_pi(pi(C)) != C")
        if len(seen) != schedule.family_size(k):
            raise InvariantViolation("pi is not injective onto the word space")
        print("bijection OK")
        return 0
    if suite == "percentage":
        k = schedule.depth
        family = bl.enumerate_family(schedule, k)
        words = np.array([bl.pi(schedule, k, row) for row in family], dtype=np.int8)
        rng = np.random.default_rng(args.seed)
        count = min(len(family) ** 2, 400)
        for _ in range(count):
            i, j = rng.integers(0, len(family), 2)
            if bl.entry_disagreement(family[i], family[j]) != bl.entry_disagreement(
                words[i], words[j]
            ):
                raise InvariantViolation("entry-level percentage not preserved")
            for level in range(1, k):
                lhs = bl.disagreement_fraction(schedule, family[i], family[j], level)
                rhs = bl.image_component_disagreement(schedule, words[i], words[j], level)
                if lhs != rhs:
                    raise InvariantViolation("component percentage not preserved")
        print("percentage OK")
        return 0
    if suite == "entropy-zero":
        from fractions import Fraction

        report = en.block_count_entropy(
            (schedule.family_size(k), schedule.n(k)) for k in range(1, schedule.depth + 1)
        )
        for k, rate in enumerate(report.rates, start=1):
            if rate != Fraction(1, 2**k):
                raise InvariantViolation(f"entropy signature fails at level {k}")
        print("entropy-zero OK")
        return 0
    # scheme: refinement + shift-window property on sampled fiber pairs
    scheme = bl.central_block_scheme(schedule)
    rng = np.random.default_rng(args.seed)
    for trial in range(args.pairs):
        offset = int(rng.integers(0, schedule.n(schedule.depth)))
        pair = bl.fiber_pair(
            schedule, (args.seed + 2 * trial + 1, args.seed + 2 * trial + 2), offset=offset
        )
        masks = [
            np.zeros(pair.horizon, dtype=bool)
            if k == 0
            else scheme.same_atom_mask(pair, k)
            for k in range(schedule.depth + 1)
        ]
        for k in range(1, schedule.depth):
            if np.any(masks[k + 1] & ~masks[k]):
                raise InvariantViolation("refinement fails: same_atom(k+1) not in same_atom(k)")
        for k in range(1, schedule.depth + 1):
            nk = schedule.n(k)
            pos = offset + np.arange(pair.horizon)
            window_id = pos // nk
            for w in np.unique(window_id):
                window_mask = masks[k][window_id == w]
                if window_mask.size and not (window_mask.all() or not window_mask.any()):
                    raise InvariantViolation("shift-window property fails")
    print("scheme OK")
    return 0


HANDLERS = {
    "pair": _cmd_pair,
    "phi": _cmd_phi,
    "classify": _cmd_classify,
    "scan": _cmd_scan,
    "forge": _cmd_forge,
    "entropy": _cmd_entropy,
    "pipka": _cmd_pipka,
    "count-ball": _cmd_count_ball,
    "verify": _cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _merge_config(args)
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except ChaoslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
