"""Command-line driver.

Every subcommand reads one JSON config (a path, or the name of a bundled
example such as ``dfa``), writes a JSON report and prints a short table.
Exit codes: 0 all checks passed, 1 counterexample found, 2 usage or input
error.
"""

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import behavioural as bh
from . import correspondence as co
from . import functor as fn
from . import lifting as lf
from . import modality as mo
from .errors import BudgetExceeded, LiftCorrError
from .pseudometric import Pseudometric
from .quantale import (as_fraction, check_distributivity, check_laws, fmt_fraction,
                       quantale_from_json)
from .transport import kantorovich_dual, kantorovich_primal

DEFAULT_BUDGET = 200_000
DISTRIBUTIVITY = ("binary", "join-infinite", "meet-infinite", "complete")


class InputError(Exception):
    pass


def bundled_examples():
    root = resources.files("liftcorr") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(ref):
    path = Path(ref)
    if path.exists():
        text, where = path.read_text(), str(path)
    else:
        res = resources.files("liftcorr") / "data" / f"{ref}.json"
        if not res.is_file():
            raise InputError(f"{ref}: no such file or bundled example "
                             f"(bundled: {', '.join(bundled_examples())})")
        text, where = res.read_text(), f"bundled:{ref}"
    try:
        return json.loads(text), where
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _need(cfg, key, where):
    if key not in cfg:
        raise InputError(f"{where}: missing key {key!r}")
    return cfg[key]


def _quantale(cfg, where):
    try:
        return quantale_from_json(_need(cfg, "quantale", where))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: quantale: {exc}") from None


def _functor(cfg, Q, where, key="functor"):
    try:
        return fn.functor_from_json(_need(cfg, key, where), lambda m: mo.modality_from_json(m, Q))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {key}: {exc}") from None


def _modality(data, Q, where, key):
    try:
        return mo.modality_from_json(data, Q)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {key}: {exc}") from None


def _metric(cfg, Q, where):
    try:
        return Pseudometric.from_json(Q, _need(cfg, "metric", where))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{where}: metric: {exc}") from None


def _universe(cfg, Q, args):
    u = cfg.get("universe", {})
    return co.Universe(Q, sizes=tuple(u.get("sizes", (1, 2, 3))),
                       dist_grid=args.grid or u.get("dist_grid"),
                       max_set_size=u.get("max_set_size", 3),
                       metric_grid=u.get("metric_grid", 2),
                       mode=u.get("mode", "exhaustive"),
                       samples=u.get("samples", 200),
                       seed=args.seed if args.seed is not None else u.get("seed", 0),
                       budget=args.budget)


def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt_fraction(x)
    if isinstance(x, (set, frozenset)):
        return sorted((_jsonable(v) for v in x), key=str)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# subcommands; each returns (report, exit code)


def cmd_check_quantale(cfg, where, args):
    Q = _quantale(cfg, where)
    laws = check_laws(Q)
    dist = {}
    for kind in DISTRIBUTIVITY:
        try:
            r = check_distributivity(Q, kind, budget=args.budget)
            dist[kind] = {"holds": r.holds, "witness": None if r.witness is None else repr(r.witness)}
        except BudgetExceeded as exc:
            dist[kind] = {"holds": None, "skipped": str(exc)}
        except LiftCorrError as exc:
            dist[kind] = {"holds": None, "skipped": str(exc)}
    report = {"command": "check quantale", "laws": laws.to_json(), "distributivity": dist,
              "passed": laws.passed}
    return report, 0 if laws.passed else 1


def cmd_check_modality(cfg, where, args):
    Q = _quantale(cfg, where)
    F = _functor(cfg, Q, where)
    m = _modality(_need(cfg, "modality", where), Q, where, "modality")
    rep = mo.check_well_behaved(m, F, Q, dist_grid=args.grid or 2, budget=args.budget)
    report = {"command": "check modality", "report": rep.to_json(), "passed": rep.passed}
    return report, 0 if rep.passed else 1


def _terms(cfg, F, where):
    try:
        return (fn.term_from_json(F, _need(cfg, "t1", where)),
                fn.term_from_json(F, _need(cfg, "t2", where)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: term: {exc}") from None


def cmd_lift(side, cfg, where, args):
    Q = _quantale(cfg, where)
    F = _functor(cfg, Q, where)
    d = _metric(cfg, Q, where)
    t1, t2 = _terms(cfg, F, where)
    if side == "coupling":
        tau = _modality(_need(cfg, "modality", where), Q, where, "modality")
        res = lf.coupling_lift(F, tau, d, t1, t2, args.grid or cfg.get("dist_grid"), args.budget)
        wit = res.witness
        if isinstance(wit, dict):
            wit = [[list(k), fmt_fraction(v)] for k, v in sorted(wit.items(), key=repr)]
        elif wit is not None:
            wit = repr(wit)
    else:
        gamma = [_modality(g, Q, where, "gamma") for g in _need(cfg, "gamma", where)]
        strategy = cfg.get("strategy", "brute" if Q.enumerable else "witness")
        res = lf.codensity_lift(F, gamma, d, t1, t2, strategy, args.budget)
        wit = None
        if res.witness is not None:
            g, f = res.witness
            wit = {"modality": mo.show(g), "map": {str(k): Q.fmt(v) for k, v in f.items()}}
    report = {"command": f"lift {side}", "value": Q.fmt(res.value), "method": res.method,
              "witness": wit}
    return report, 0


def _correspondence(cfg, where):
    Q = _quantale(cfg, where)
    F = _functor(cfg, Q, where)
    corr = co.build_from_grammar(F, Q)
    if cfg.get("single_modality"):
        corr = co.single_modality(corr)
    return corr


def cmd_correspond(action, cfg, where, args):
    corr = _correspondence(cfg, where)
    if action == "build":
        return {"command": "correspond build", "correspondence": corr.to_json()}, 0
    universe = _universe(cfg, corr.Q, args)
    if action == "verify":
        rep = co.verify(corr, universe, strategy=cfg.get("strategy"))
        report = {"command": "correspond verify", "correspondence": corr.to_json(),
                  "report": rep.to_json(), "verdict": rep.verdict}
        return report, 0 if rep.equal else 1
    res = co.roundtrip(corr, universe)
    report = {"command": "correspond roundtrip", "correspondence": corr.to_json(), "roundtrip": res,
              "verdict": res["relation"]}
    return report, 0 if res["ok"] else 1


def _coalgebra(cfg, Q, where):
    try:
        return bh.Coalgebra.from_json(_need(cfg, "coalgebra", where), lambda m: mo.modality_from_json(m, Q))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: coalgebra: {exc}") from None


def cmd_metric_fixpoint(cfg, where, args):
    Q = _quantale(cfg, where)
    c = _coalgebra(cfg, Q, where)
    corr = co.build_from_grammar(c.F, Q)
    lift = bh.coupling_lifting(corr.F, corr.tau, args.grid or cfg.get("dist_grid"))
    discount = cfg.get("discount")
    rep = bh.fixpoint(c, lift, Q, max_steps=args.steps,
                      discount=None if discount is None else as_fraction(discount))
    report = {"command": "metric fixpoint", "fixpoint": rep.to_json(),
              "provenance": corr.provenance}
    return report, 0


def cmd_oracle_sdw(cfg, where, args):
    Q = _quantale(cfg, where)
    c = _coalgebra(cfg, Q, where)
    discount = as_fraction(_need(cfg, "discount", where))
    oracle = bh.sdw_oracle(c, discount, getattr(Q, "M", 1))
    fix = bh.fixpoint(c, bh.dfa_lifting(c, discount, oracle.Q), oracle.Q, max_steps=args.steps)
    agree = fix.metric == oracle
    report = {"command": "oracle sdw", "oracle": oracle.to_json(), "fixpoint": fix.to_json(),
              "agree": agree, "language_classes": bh.language_classes(c)}
    return report, 0 if agree else 1


def _weights(data, where, key):
    try:
        return {str(k): as_fraction(v) for k, v in data.items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {key}: {exc}") from None


def cmd_kr(side, cfg, where, args):
    Q = _quantale(cfg, where)
    d = _metric(cfg, Q, where)
    mu1 = _weights(_need(cfg, "mu1", where), where, "mu1")
    mu2 = _weights(_need(cfg, "mu2", where), where, "mu2")
    for mu, key in ((mu1, "mu1"), (mu2, "mu2")):
        if sum(mu.values()) != 1 or any(w < 0 for w in mu.values()):
            raise InputError(f"{where}: {key} is not a probability distribution")
        if not set(mu) <= set(d.carrier):
            raise InputError(f"{where}: {key} has support outside the metric's carrier")
    if side == "primal":
        value, coupling = kantorovich_primal(mu1, mu2, d)
        out = {"coupling": [[x, y, fmt_fraction(w)] for (x, y), w in sorted(coupling.items())]}
    else:
        value, f = kantorovich_dual(mu1, mu2, d, getattr(Q, "M", 1), points=d.carrier)
        out = {"function": {x: fmt_fraction(v) for x, v in f.items()}}
    report = {"command": f"kr {side}", "value": fmt_fraction(value), **out}
    return report, 0


def cmd_cts_demo(cfg, where, args):
    rep = bh.cts_counterexample(**cfg.get("instance", {}))
    variant = bh.cts_counterexample(variant=True, **cfg.get("instance", {}))
    sweep = None
    if cfg.get("sweep", True):
        m = bh.CTSModel(("x", "y"), ("a",), ("c1", "c2"), {})
        sweep = bh.cts_sweep(m)
    ok = (rep["verdict"] == "inequality-only" and rep["lift"] == rep["codensity"]
          and (sweep is None or sweep["equal"]))
    report = {"command": "cts demo", "verdict": rep["verdict"], "instance": rep,
              "variant": variant, "sweep": sweep}
    return report, 0 if ok else 1


# ---------------------------------------------------------------------------
# output


def _table(report):
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict) and v and len(lines) < 200:
            for k, w in v.items():
                walk(f"{prefix}.{k}" if prefix else str(k), w)
        else:
            s = json.dumps(v, sort_keys=True)
            lines.append(f"{prefix:<40} {s if len(s) <= 80 else s[:77] + '...'}")

    first = {k: v for k, v in report.items() if not isinstance(v, (dict, list))}
    walk("", first)
    walk("", {k: v for k, v in report.items() if k not in first})
    return "\n".join(lines)


def _flags(p, defaults):
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    p.add_argument("--budget", type=int, help="enumeration cap", **kw(DEFAULT_BUDGET))
    p.add_argument("--seed", type=int, help="seed for sampled modes", **kw(None))
    p.add_argument("--grid", type=int, help="distribution grid 1/q", **kw(None))
    p.add_argument("--steps", type=int, help="maximum fixpoint steps", **kw(None))
    p.add_argument("--format", choices=("json", "table"), **kw("table"))
    p.add_argument("--out", help="write the JSON report here", **kw(None))


def build_parser():
    p = argparse.ArgumentParser(prog="liftcorr", description=__doc__.splitlines()[0])
    _flags(p, True)
    # the same flags are accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    _flags(common, False)
    sub = p.add_subparsers(dest="command", required=True)

    def leaf(parent, name, actions):
        q = parent.add_parser(name, parents=[common])
        q.add_argument("action", choices=actions)
        q.add_argument("config")
        return q

    leaf(sub, "check", ("quantale", "modality"))
    leaf(sub, "lift", ("coupling", "codensity"))
    leaf(sub, "correspond", ("build", "verify", "roundtrip"))
    leaf(sub, "metric", ("fixpoint",))
    leaf(sub, "oracle", ("sdw",))
    leaf(sub, "kr", ("primal", "dual"))
    q = sub.add_parser("cts", parents=[common])
    q.add_argument("action", choices=("demo",))
    q.add_argument("config", nargs="?", default=None)
    sub.add_parser("examples", parents=[common])
    return p


def dispatch(args):
    if args.command == "examples":
        return {"examples": bundled_examples()}, 0
    if args.command == "cts" and args.config is None:
        cfg, where = {}, "defaults"
    else:
        cfg, where = load_config(args.config)
    if not isinstance(cfg, dict):
        raise InputError(f"{where}: top level must be an object")
    c, a = args.command, args.action
    if c == "check":
        return (cmd_check_quantale if a == "quantale" else cmd_check_modality)(cfg, where, args)
    if c == "lift":
        return cmd_lift(a, cfg, where, args)
    if c == "correspond":
        return cmd_correspond(a, cfg, where, args)
    if c == "metric":
        return cmd_metric_fixpoint(cfg, where, args)
    if c == "oracle":
        return cmd_oracle_sdw(cfg, where, args)
    if c == "kr":
        return cmd_kr(a, cfg, where, args)
    return cmd_cts_demo(cfg, where, args)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.budget <= 0 or (args.steps is not None and args.steps <= 0):
        print("liftcorr: budgets and step counts must be positive", file=sys.stderr)
        return 2
    try:
        report, code = dispatch(args)
    except BudgetExceeded as exc:
        print(f"liftcorr: budget exceeded (--budget {args.budget}): {exc}", file=sys.stderr)
        return 2
    except (InputError, LiftCorrError) as exc:
        print(f"liftcorr: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    if args.format == "json":
        print(text)
    else:
        print(_table(_jsonable(report)))
    return code


if __name__ == "__main__":
    sys.exit(main())
