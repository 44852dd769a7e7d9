"""Command-line entry point: ``exlab <group> <action> [options]``.

Every invocation is turned into an :class:`ExperimentConfig` (or read from
``--config FILE``), executed by :func:`run`, and written as a JSON
RunReport. Exit codes: 0 all checks hold, 1 some check failed, 2 usage or
schema error, 3 resource budget exceeded.
"""

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__, distkit, extract, fixtures, gf2k, nofsim, verify
from ._runtime import ConfigurationError, ContractError, ResourceError, set_budget, set_threads
from .reports import VerifyReport, _fmt
from .tables import FunctionTable


class UsageError(ValueError):
    pass


def _hex(text):
    try:
        return int(str(text), 16)
    except ValueError:
        raise UsageError(f"not a hex value: {text!r}") from None


def _load(obj):
    """Inline JSON object, or a path to a JSON file."""
    if isinstance(obj, (dict, list)):
        return obj
    if str(obj).lstrip().startswith(("{", "[")):
        try:
            return json.loads(obj)
        except json.JSONDecodeError as e:
            raise UsageError(f"malformed inline JSON: {e}") from None
    try:
        with open(obj) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {obj}: {e}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed JSON in {obj}: {e}") from None


def parse_function(spec, N, n, m=1):
    """Function spec: ip | ffm | xor | const:V | table:HEX (Boolean, entry j in bit j)."""
    spec = str(spec)
    if spec == "ip":
        if N != 2:
            raise UsageError("ip is a two-input function")
        return nofsim.inner_product(n)
    if spec == "ffm":
        return FunctionTable.from_callable(lambda *xs: extract.ffm_nof(list(xs), m, n), N, n, m)
    if spec == "xor":
        def fx(*xs):
            acc = 0
            for x in xs:
                acc = acc ^ x
            return acc & ((1 << m) - 1)
        return FunctionTable.from_callable(fx, N, n, m)
    if spec.startswith("const:"):
        v = int(spec.split(":", 1)[1], 0)
        return FunctionTable.from_callable(lambda *xs: 0 * xs[0] + v, N, n, m)
    if spec.startswith("table:"):
        v = _hex(spec.split(":", 1)[1])
        size = 1 << (N * n)
        if v >> size:
            raise UsageError("table longer than the input domain")
        return FunctionTable([(v >> j) & 1 for j in range(size)], N, n, 1)
    raise UsageError(f"unknown function spec {spec!r}")


def _family(obj, N, n):
    if obj is None:
        return verify.SourceFamily.uniform(N, n)
    fam = verify.SourceFamily.from_json(_load(obj))
    if fam.N != N or fam.n != n:
        raise UsageError(f"family has N={fam.N}, n={fam.n}; expected N={N}, n={n}")
    return fam


def _params(obj):
    try:
        return extract.NmExtParams.from_json(_load(obj))
    except (KeyError, TypeError) as e:
        raise UsageError(f"bad params: {e}") from None


def _protocols(p, N, n, seed):
    mu = int(p.get("mu", 0))
    adaptive = bool(p.get("adaptive", False))
    spec = p.get("protocols", "enumerate")
    if isinstance(spec, str) and spec == "enumerate":
        return list(nofsim.enumerate_protocols(N, n, mu, non_adaptive=not adaptive))
    if isinstance(spec, dict) and "seeds" in spec:
        lo, hi = spec["seeds"]
        return [nofsim.random_protocol(N, n, mu, not adaptive, seed=seed + s) for s in range(lo, hi)]
    if isinstance(spec, dict) and "file" in spec:
        return [nofsim.NofProtocol.from_json(_load(spec["file"]))]
    raise UsageError("protocols must be 'enumerate', {'seeds': [lo, hi]} or {'file': PATH}")


def _out(value, **extra):
    return dict({"output": value}, **extra)


def cmd_field_mul(p, cfg):
    t = int(p["width"])
    a, b = gf2k.FieldElem(_hex(p["a"]), t), gf2k.FieldElem(_hex(p["b"]), t)
    return [_out(format(gf2k.gf_mul(a, b).value, "x"), width=t)]


def cmd_field_table(p, cfg):
    f = gf2k.field(int(p["width"]))
    return [_out(format(f.reduction_poly, "x"), width=f.width, poly=f.poly_str())]


def _dist(obj):
    try:
        return distkit.Dist.from_json(_load(obj))
    except (KeyError, ValueError, ZeroDivisionError) as e:
        raise UsageError(f"bad distribution: {e}") from None


def cmd_dist_sd(p, cfg):
    return [_out(_fmt(distkit.statistical_distance(_dist(p["p"]), _dist(p["q"]))))]


def cmd_dist_hmin(p, cfg):
    h = distkit.min_entropy(_dist(p["p"]))
    return [_out(h.bits, max_prob=_fmt(h.max_prob))]


def cmd_dist_close(p, cfg):
    return [_out(_fmt(distkit.closeness_to_min_entropy(_dist(p["p"]), Fraction(p["k"]))))]


def cmd_nof_cube(p, cfg):
    N, n = int(p["N"]), int(p["n"])
    f = parse_function(p["f"], N, n, 1)
    fam = _family(p.get("family"), N, n)
    return [_out(_fmt(nofsim.cube_bias(f, fam.sources)))]


def cmd_nof_leak(p, cfg):
    N, n, m = int(p["N"]), int(p["n"]), int(p.get("m", 1))
    f = parse_function(p["f"], N, n, m)
    fam = _family(p.get("family"), N, n)
    if "protocol" in p:
        prot = nofsim.NofProtocol.from_json(_load(p["protocol"]))
    else:
        prot = nofsim.random_protocol(N, n, int(p.get("mu", 0)), not p.get("adaptive", False),
                                      seed=int(p.get("seed", cfg.seed)))
    return [_out(_fmt(nofsim.leakage_distance(f, prot, fam.sources)), protocol=prot.to_json())]


def cmd_nof_missing(p, cfg):
    N, n, m = int(p["N"]), int(p["n"]), int(p.get("m", 1))
    f = parse_function(p["f"], N, n, m)
    return [nofsim.missing_entropy_check(f, N, n, int(p["k"]), int(p["mu"]), seed=cfg.seed)]


def _inputs(p, params):
    xs = p["inputs"]
    if isinstance(xs, str):
        xs = xs.split(",")
    return tuple(_hex(x) for x in xs)


def cmd_extract_nme(p, cfg):
    params = _params(p["params"])
    return [_out(format(extract.weak_nme(params, _inputs(p, params)), "x"))]


def cmd_extract_adversarial(p, cfg):
    params = _params(p["params"])
    return [_out(format(extract.adversarial_extract(params, _inputs(p, params)), "x"))]


def cmd_verify_nme(p, cfg):
    params = _params(p["params"])
    fam = _family(p.get("family"), params.N, params.n)
    t = time.perf_counter()
    eps = verify.weak_nme_distance(params, fam)
    details = {"k": str(fam.k)}
    samples = int(p.get("mc_samples", 0))
    if samples:
        mc = verify.weak_nme_distance_mc(params, fam, samples=samples, seed=cfg.seed)
        details.update(mc_estimate=mc.estimate, mc_stderr=mc.stderr,
                       mc_within_3se=abs(mc.estimate - float(eps)) <= 3 * mc.stderr)
    bound = Fraction(p["claim"]) if "claim" in p else None
    rep = VerifyReport("weak_nme_distance", eps, bound=bound, runtime=time.perf_counter() - t,
                       details=details)
    if samples:
        rep.holds = rep.holds and details["mc_within_3se"]
    return [rep]


def cmd_verify_reduction(p, cfg):
    params = _params(p["params"])
    fam = _family(p.get("family"), params.N, params.n)
    prots = _protocols(p, params.N, params.n, cfg.seed)
    return [verify.reduction_bound_check(params, fam, prots)]


def cmd_verify_condenser(p, cfg):
    n, r, k, ell = int(p["n"]), int(p["r"]), int(p["k"]), int(p["ell"])
    cond = extract.ffm_condenser(n, r)
    t = time.perf_counter()
    prof = verify.condenser_profile(cond, k, ell, seed=cfg.seed)
    out = [VerifyReport("condenser_profile", prof.eps, runtime=time.perf_counter() - t, mode=prof.mode,
                        cost=prof.pairs, details={"n": n, "r": r, "k": k, "ell": ell,
                                                  "worst_pair": [list(s) for s in prof.worst]})]
    if "k_prime" in p:
        out.append(verify.strongness_check(cond, k, ell, prof.eps, int(p["k_prime"])))
    return out


def cmd_verify_adversarial(p, cfg):
    params = _params(p["params"])
    good = p["good"]
    if isinstance(good, str):
        good = [int(g) for g in good.split(",")]
    bad = p.get("bad", {})
    if isinstance(bad, str):
        bad = dict(item.split("=") for item in bad.split(",") if item)
    bad = {int(k): _hex(v) if isinstance(v, str) else int(v) for k, v in bad.items()}
    prots = None
    if "mu" in p:
        prots = _protocols(dict(p, protocols=p.get("protocols", {"seeds": [0, 20]})), 3, params.n, cfg.seed)
    return [verify.adversarial_reduction_check(params, int(p["N_total"]), tuple(good), bad, protocols=prots)]


def cmd_verify_suite(p, cfg):
    """Standard desk-scale battery used for reproducibility runs."""
    reps = []
    small = extract.NmExtParams(2, 2, 2, 1)
    for mu in (0, 1):
        reps.append(verify.reduction_bound_check(small, verify.SourceFamily.uniform(2, 2),
                                                 nofsim.enumerate_protocols(2, 2, mu)))
    p3 = extract.NmExtParams(3, 4, 2, 1)
    reps.append(verify.reduction_bound_check(
        p3, verify.SourceFamily.uniform(3, 4),
        [nofsim.random_protocol(3, 4, 2, True, seed=cfg.seed + s) for s in range(int(p.get("seeds", 50)))]))
    cond = extract.ffm_condenser(4, 2)
    prof = verify.condenser_profile(cond, 1, 1)
    reps.append(VerifyReport("condenser_profile", prof.eps, cost=prof.pairs, details={"k": 1, "ell": 1}))
    reps.append(verify.strongness_check(cond, 1, 1, prof.eps, 4))
    reps.append(nofsim.missing_entropy_check(nofsim.inner_product(2), 2, 2, 1, 2))
    for N_total, bad in ((4, {3: 5}), (5, {3: 7, 4: 11})):
        reps.append(verify.adversarial_reduction_check(p3, N_total, (0, 1, 2), bad))
    return reps


def cmd_fixtures_regen(p, cfg):
    return [_out(fixtures.fixtures_regen(p.get("dir", "tests/fixtures")))]


def cmd_fixtures_check(p, cfg):
    bad = fixtures.fixtures_check(p.get("dir", "tests/fixtures"))
    return [VerifyReport("fixture_mismatches", len(bad), bound=Fraction(0), details={"files": bad})]


COMMANDS = {
    "field mul": (cmd_field_mul, ("width", "a", "b")),
    "field table": (cmd_field_table, ("width",)),
    "dist sd": (cmd_dist_sd, ("p", "q")),
    "dist hmin": (cmd_dist_hmin, ("p",)),
    "dist close": (cmd_dist_close, ("p", "k")),
    "nof cube": (cmd_nof_cube, ("f", "N", "n")),
    "nof leak": (cmd_nof_leak, ("f", "N", "n")),
    "nof missing-entropy": (cmd_nof_missing, ("f", "N", "n", "k", "mu")),
    "extract nme": (cmd_extract_nme, ("params", "inputs")),
    "extract adversarial": (cmd_extract_adversarial, ("params", "inputs")),
    "verify nme": (cmd_verify_nme, ("params",)),
    "verify reduction": (cmd_verify_reduction, ("params",)),
    "verify condenser": (cmd_verify_condenser, ("n", "r", "k", "ell")),
    "verify adversarial": (cmd_verify_adversarial, ("params", "N_total", "good")),
    "verify suite": (cmd_verify_suite, ()),
    "fixtures regen": (cmd_fixtures_regen, ()),
    "fixtures check": (cmd_fixtures_check, ()),
}

_INT_KEYS = ("width", "N", "n", "m", "r", "k", "ell", "mu", "k_prime", "N_total")


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    threads: int = 1
    budget: int = None
    seed: int = 0
    out: str = None
    csv: str = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        missing = [k for k in COMMANDS[self.command][1] if k not in self.params]
        if missing:
            raise UsageError(f"{self.command}: missing {', '.join(missing)}")
        for k in _INT_KEYS:
            if k in self.params:
                try:
                    int(self.params[k])
                except (TypeError, ValueError):
                    raise UsageError(f"{k} must be an integer") from None
        if "width" in self.params and int(self.params["width"]) not in gf2k.FIELDS:
            raise UsageError(f"width {self.params['width']} not in the field table")
        if self.budget is not None and int(self.budget) <= 0:
            raise UsageError("budget must be positive")
        if int(self.threads) < 1:
            raise UsageError("threads must be >= 1")
        if not isinstance(self.seed, int):
            raise UsageError("seed must be an explicit integer")
        return self

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "command" not in obj:
            raise UsageError("config must be a JSON object with a 'command' field")
        known = {"command", "params", "threads", "budget", "seed", "out", "csv"}
        extra = set(obj) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        return cls(**obj).validate()

    def to_json(self):
        return {"command": self.command, "params": self.params, "threads": self.threads,
                "budget": self.budget, "seed": self.seed}


def _entry(res):
    if isinstance(res, VerifyReport):
        return res.to_json()
    return res


def run(config):
    """Execute one config; returns the RunReport dict (ResourceError propagates)."""
    config.validate()
    set_threads(int(config.threads))
    set_budget(int(config.budget) if config.budget is not None else None)
    handler = COMMANDS[config.command][0]
    t = time.perf_counter()
    try:
        results = handler(config.params, config)
    except (ContractError, ConfigurationError, KeyError) as e:
        raise UsageError(str(e)) from e
    finally:
        set_threads(1)
        set_budget(None)
    entries = [_entry(r) for r in results]
    holds = all(e.get("holds", True) for e in entries)
    evals = sum(int(e.get("cost", 0)) for e in entries)
    return {"tool": "exlab", "version": __version__, "config": config.to_json(),
            "results": entries, "holds": holds, "evaluations": evals,
            "runtime": time.perf_counter() - t}


_EXECUTION_ONLY = ("runtime", "threads")


def strip_timing(report):
    """Report without timing and thread-count fields (the reproducible part)."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k not in _EXECUTION_ONLY}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def csv_rows(report):
    buf = io.StringIO()
    w = csv.writer(buf)
    for e in report["results"]:
        if "quantity" in e:
            w.writerow([report["config"]["command"], e["quantity"], e["measured"], e["bound_float"],
                        e["holds"], e["mode"]])
    return buf.getvalue()


def _build_parser():
    ap = argparse.ArgumentParser(prog="exlab", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON ExperimentConfig (overrides the subcommand)")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--csv", help="append one CSV summary row per check")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--budget", type=lambda s: int(s, 0), default=None, help="max elementary evaluations")
    ap.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    ap.add_argument("--version", action="version", version=f"exlab {__version__}")
    groups = ap.add_subparsers(dest="group")

    def action(group, name, *opts):
        sp = group.add_parser(name)
        for flag, kw in opts:
            sp.add_argument(flag, **kw)
        return sp

    req = {"required": True}
    integer = {"type": int}
    g = groups.add_parser("field").add_subparsers(dest="action", required=True)
    action(g, "mul", ("--width", dict(integer, **req)), ("--a", req), ("--b", req))
    action(g, "table", ("--width", dict(integer, **req)))

    g = groups.add_parser("dist").add_subparsers(dest="action", required=True)
    action(g, "sd", ("--p", req), ("--q", req))
    action(g, "hmin", ("--p", req))
    action(g, "close", ("--p", req), ("--k", req))

    fn = ("--f", dict(req, help="ip | ffm | xor | const:V | table:HEX"))
    shape = [("--N", dict(integer, **req)), ("--n", dict(integer, **req)), ("--m", integer)]
    g = groups.add_parser("nof").add_subparsers(dest="action", required=True)
    action(g, "cube", fn, *shape, ("--family", {}))
    action(g, "leak", fn, *shape, ("--family", {}), ("--protocol", {}), ("--mu", integer),
           ("--adaptive", {"action": "store_true", "default": None}))
    action(g, "missing-entropy", fn, *shape, ("--k", dict(integer, **req)), ("--mu", dict(integer, **req)))

    g = groups.add_parser("extract").add_subparsers(dest="action", required=True)
    action(g, "nme", ("--params", req), ("--inputs", req))
    action(g, "adversarial", ("--params", req), ("--inputs", req))

    g = groups.add_parser("verify").add_subparsers(dest="action", required=True)
    action(g, "nme", ("--params", req), ("--family", {}), ("--mc-samples", dict(integer, dest="mc_samples")),
           ("--claim", {}))
    action(g, "reduction", ("--params", req), ("--family", {}), ("--mu", integer),
           ("--seeds", {"help": "LO:HI seeded protocols instead of full enumeration"}),
           ("--adaptive", {"action": "store_true", "default": None}))
    action(g, "condenser", ("--n", dict(integer, **req)), ("--r", dict(integer, **req)),
           ("--k", dict(integer, **req)), ("--ell", dict(integer, **req)), ("--k-prime", dict(integer, dest="k_prime")))
    action(g, "adversarial", ("--params", req), ("--N-total", dict(integer, dest="N_total", **req)),
           ("--good", req), ("--bad", {"default": ""}), ("--mu", integer))
    action(g, "suite", ("--seeds", integer))

    g = groups.add_parser("fixtures").add_subparsers(dest="action", required=True)
    action(g, "regen", ("--dir", {"default": "tests/fixtures"}))
    action(g, "check", ("--dir", {"default": "tests/fixtures"}))
    return ap


_GLOBAL = {"config", "out", "csv", "threads", "budget", "seed", "group", "action"}


def config_from_args(args):
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
        except OSError as e:
            raise UsageError(f"cannot read config: {e}") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"malformed config JSON: {e}") from None
        cfg = ExperimentConfig.from_json(obj)
    else:
        if not args.group:
            raise UsageError("no command given")
        params = {k: v for k, v in vars(args).items() if k not in _GLOBAL and v is not None}
        if args.group == "verify" and args.action == "reduction" and "seeds" in params:
            lo, hi = (int(x) for x in params.pop("seeds").split(":"))
            params["protocols"] = {"seeds": [lo, hi]}
        cfg = ExperimentConfig(f"{args.group} {args.action}", params)
    # command-line globals win over file values when given explicitly
    if args.threads != 1 or args.config is None:
        cfg.threads = args.threads
    if args.budget is not None:
        cfg.budget = args.budget
    if args.seed or args.config is None:
        cfg.seed = args.seed
    cfg.out = args.out or cfg.out
    cfg.csv = args.csv or cfg.csv
    return cfg.validate()


def main(argv=None):
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except UsageError as e:
        print(f"exlab: {e}", file=sys.stderr)
        return 2
    except ResourceError as e:
        report = {"tool": "exlab", "version": __version__, "error": "resource",
                  "what": e.what, "cost_estimate": e.cost, "budget": e.budget, "holds": False}
        _emit(report, cfg)
        print(f"exlab: {e}", file=sys.stderr)
        return 3
    _emit(report, cfg)
    return 0 if report["holds"] else 1


def _emit(report, cfg):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        fixtures.write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    if cfg.csv and "results" in report:
        with open(cfg.csv, "a") as fh:
            fh.write(csv_rows(report))
