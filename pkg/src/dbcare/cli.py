"""Command-line driver: ``dbcare sweep | run | bounds``.

Exit codes: 0 success, 1 I/O failure, 2 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import bounds, core, harness
from .core import InvalidParameter
from .policies import (MI, SR, Dbcare, Guess, OracleTwoArm, RacingFixedConfidence, SequentialHalving,
                       run_policy, safeguard_cap_for)
from .rng import RngStream

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


class ConfigError(Exception):
    pass


# -- small grammars ---------------------------------------------------------------

def parse_grid(spec: str) -> list[float]:
    """``lin:a:b:n``, ``log:a:b:n`` or a comma-separated list of numbers."""
    spec = spec.strip()
    try:
        if spec.startswith(("lin:", "log:")):
            kind, a, b, n = spec.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 1:
                raise ValueError
            if kind == "lin":
                pts = np.linspace(a, b, n)
            else:
                if a <= 0 or b <= 0:
                    raise ValueError
                pts = np.geomspace(a, b, n)
            return [float(p) for p in pts]
        pts = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse grid spec {spec!r}") from None
    if not pts:
        raise ConfigError(f"grid spec {spec!r} has no points")
    return pts


def parse_mini(spec: str) -> tuple[str, list[str], dict[str, str]]:
    """``name:token,key=value,...`` -> (name, bare tokens, key/value pairs)."""
    name, _, rest = spec.partition(":")
    tokens, kv = [], {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        if "=" in item:
            k, v = item.split("=", 1)
            kv[k.strip()] = v.strip()
        else:
            tokens.append(item)
    return name.strip().lower(), tokens, kv


def _num(kv, key, cast=float, default=None):
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing '{key}'")
        return default
    try:
        return cast(kv.pop(key))
    except ValueError:
        raise ConfigError(f"'{key}' is not a valid number") from None


def parse_instance(spec: str) -> core.BanditInstance:
    name, tokens, kv = parse_mini(spec)
    if name == "gaussian2":
        inst = core.make_gaussian_two_arm(_num(kv, "delta"), _num(kv, "sigma", default=1.0))
    elif name == "bernoulli2":
        inst = core.make_bernoulli_two_arm(_num(kv, "delta"))
    elif name == "onesparse":
        inst = core.make_one_sparse(_num(kv, "K", int), _num(kv, "delta"), _num(kv, "sigma", default=1.0))
    elif name == "lineardecay":
        inst = core.make_linear_decay(_num(kv, "K", int), _num(kv, "delta2"), _num(kv, "sigma", default=1.0))
    elif name == "drug":
        kind = tokens.pop() if tokens else "binary"
        if kind not in ("binary", "leveled"):
            raise ConfigError(f"drug instance must be binary or leveled, got {kind!r}")
        inst = harness.drug_instances()[0 if kind == "binary" else 1]
    else:
        raise ConfigError(f"unknown instance {name!r}")
    if kv or tokens:
        raise ConfigError(f"unexpected instance field(s) {sorted(kv) + tokens}")
    return inst


def parse_policy(spec: str, instance, risk: str, cost: float, B):
    name, tokens, kv = parse_mini(spec)
    kind = tokens.pop() if tokens else risk
    if kind not in (MI, SR):
        raise ConfigError(f"risk kind must be mi or sr, got {kind!r}")
    if name == "dbcare":
        B = _num(kv, "B", default=B if B is not None else math.nan)
        if kind == SR and math.isnan(B) and "delta" not in kv:
            raise ConfigError("dbcare:sr needs the reward range: pass --B or B=...")
        delta = _num(kv, "delta") if "delta" in kv else None
        pol = Dbcare(kind, cost, instance.sigma, B=None if math.isnan(B) else B, delta=delta)
    elif name == "oracle":
        default_gap = core.gap_profile(instance).gaps[0]
        pol = OracleTwoArm(kind, _num(kv, "known_delta", default=default_gap), cost, instance.sigma)
    elif name in ("sh", "sequential_halving"):
        pol = SequentialHalving(_num(kv, "T", int))
    elif name == "racing":
        pol = RacingFixedConfidence(_num(kv, "delta"), instance.sigma,
                                    _num(kv, "cap", int, default=safeguard_cap_for(cost)))
    elif name == "guess":
        pol = Guess()
    else:
        raise ConfigError(f"unknown policy {name!r}")
    if kv or tokens:
        raise ConfigError(f"unexpected policy field(s) {sorted(kv) + tokens}")
    return pol


# -- config files -----------------------------------------------------------------

_CONFIG_KEYS = {"setting", "grid", "policies", "risk", "cost", "K", "sigma", "B", "runs",
                "master_seed", "shuffle_arms", "plot", "out", "description"}


def find_config(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("dbcare") / "configs" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(path)


def _expect(cond, field, msg):
    if not cond:
        raise ConfigError(f"field '{field}': {msg}")


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def load_config(path: Path, runs=None, seed=None) -> tuple[list[harness.SweepConfig], dict]:
    """Parse a sweep config file into one SweepConfig per (risk, K)."""
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from None
    _expect(isinstance(raw, dict), "<root>", "must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    _expect(not unknown, unknown[0] if unknown else "", "unknown key")
    _expect("setting" in raw, "setting", "required")
    _expect(raw["setting"] in harness.SETTINGS, "setting", f"must be one of {harness.SETTINGS}")
    _expect("policies" in raw, "policies", "required")

    risks = raw.get("risk", MI)
    risks = [risks] if isinstance(risks, str) else risks
    _expect(isinstance(risks, list) and risks and all(r in (MI, SR) for r in risks),
            "risk", "must be 'mi', 'sr' or a list of them")
    Ks = raw.get("K", 2)
    Ks = Ks if isinstance(Ks, list) else [Ks]
    _expect(Ks and all(isinstance(k, int) and not isinstance(k, bool) and k >= 2 for k in Ks),
            "K", "must be an integer >= 2 or a list of them")
    if raw["setting"] == "LinearDecay":
        _expect(all(k >= 3 for k in Ks), "K", "LinearDecay needs K >= 3")

    for key, lo in (("cost", 0), ("sigma", 0)):
        if key in raw:
            _expect(_is_num(raw[key]) and raw[key] > lo, key, "must be a positive number")
    if raw.get("B") is not None:
        _expect(_is_num(raw["B"]) and raw["B"] > 0, "B", "must be a positive number or null")
    if "runs" in raw:
        _expect(isinstance(raw["runs"], int) and raw["runs"] >= 1, "runs", "must be an integer >= 1")
    if "master_seed" in raw:
        _expect(isinstance(raw["master_seed"], int) and 0 <= raw["master_seed"] < 2**64,
                "master_seed", "must be a 64-bit unsigned integer")

    policies = raw["policies"]
    _expect(isinstance(policies, list) and policies, "policies", "must be a nonempty list")
    for i, p in enumerate(policies):
        fld = f"policies[{i}]"
        _expect(isinstance(p, dict), fld, "must be an object")
        for key in ("delta", "budget", "budget_per_arm", "cap", "B"):
            if key in p:
                _expect(_is_num(p[key]), f"{fld}.{key}", "must be a number")
        if p.get("name") in ("racing", "dbcare") and "delta" in p:
            _expect(0 < p["delta"] < 1, f"{fld}.delta", "must lie in (0, 1)")
        for key in ("budget", "budget_per_arm", "cap"):
            if key in p:
                _expect(float(p[key]).is_integer() and p[key] >= 1, f"{fld}.{key}", "must be a positive integer")
        try:
            harness.policy_label(p)
        except InvalidParameter as exc:
            raise ConfigError(f"field '{fld}': {exc}") from None

    grid_raw = raw.get("grid")
    _expect(grid_raw is not None, "grid", "required")

    def grid_for(risk):
        g = grid_raw.get(risk) if isinstance(grid_raw, dict) else grid_raw
        fld = f"grid.{risk}" if isinstance(grid_raw, dict) else "grid"
        _expect(g is not None, fld, "missing")
        if isinstance(g, str):
            try:
                return parse_grid(g)
            except ConfigError as exc:
                raise ConfigError(f"field '{fld}': {exc}") from None
        _expect(isinstance(g, list) and g and all(_is_num(v) for v in g), fld, "must be a nonempty list of numbers")
        return [float(v) for v in g]

    configs = []
    for risk in risks:
        grid = grid_for(risk)
        if raw["setting"] == "TwoArmBernoulli":
            _expect(all(0 <= v <= 1 for v in grid), "grid", "Bernoulli gaps must lie in [0, 1]")
        elif raw["setting"] in harness.DRUG_SETTINGS:
            _expect(all(v > 0 for v in grid), "grid", "costs must be positive")
        else:
            _expect(all(v > 0 for v in grid) or raw["setting"] == "TwoArmGaussian", "grid", "gaps must be positive")
            _expect(all(v >= 0 for v in grid), "grid", "gaps must be nonnegative")
        if any(p.get("name") == "oracle" for p in policies):
            _expect(Ks == [2], "policies", "the oracle policy requires K = 2")
        for K in Ks:
            try:
                configs.append(harness.SweepConfig(
                    setting=raw["setting"], grid=grid, policies=policies, risk=risk,
                    cost=raw.get("cost", 1e-4), K=K, sigma=raw.get("sigma", 1.0), B=raw.get("B"),
                    runs=runs if runs is not None else raw.get("runs", 1000),
                    master_seed=seed if seed is not None else raw.get("master_seed", 0),
                    shuffle_arms=raw.get("shuffle_arms")))
            except InvalidParameter as exc:
                raise ConfigError(str(exc)) from None
    return configs, {"plot": bool(raw.get("plot", False)), "out": raw.get("out")}


def output_stem(config: harness.SweepConfig) -> str:
    if config.setting in ("OneSparse", "LinearDecay"):
        return f"{config.setting}_K{config.K}_{config.risk}"
    return f"{config.setting}_{config.risk}"


# -- commands ----------------------------------------------------------------------

def cmd_sweep(args) -> int:
    try:
        path = find_config(args.config)
    except FileNotFoundError:
        print(f"error: cannot read config {args.config}", file=sys.stderr)
        return EXIT_IO
    if args.runs is not None and args.runs < 1:
        print("error: field 'runs': must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        configs, extra = load_config(path, runs=args.runs, seed=args.seed)
    except ConfigError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    out = Path(args.out or extra["out"] or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        cache: dict = {}
        for cfg in configs:
            rows = harness.run_sweep(cfg, workers=args.workers, cache=cache)
            stem = output_stem(cfg)
            harness.write_csv(rows, out / f"{stem}.csv")
            if extra["plot"] or args.plot:
                harness.emit_plot(rows, out / f"{stem}.svg")
            print(f"wrote {out / (stem + '.csv')}")
    except InvalidParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        instance = parse_instance(args.instance)
        policy = parse_policy(args.policy, instance, args.risk, args.cost, args.B)
    except (ConfigError, InvalidParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    trace = run_policy(instance, policy, RngStream(args.seed, 0))
    means = instance.means
    mu = means[trace.recommended_arm]
    penalty = float(mu != means.max()) if args.risk == MI else float(means.max() - mu)
    risk = penalty + args.cost * trace.stopping_time_tau
    pulls = ",".join(str(p) for p in trace.pulls_per_arm)
    print(f"recommended={trace.recommended_arm} tau={trace.stopping_time_tau} pulls={pulls} "
          f"epochs={trace.epochs_completed} penalty={penalty!r} risk={risk!r}")
    return EXIT_OK


_CURVE_COLUMNS = {"OracleMI": "oracle_mi", "DbcareMI2": "dbcare_mi2", "OracleSR": "oracle_sr",
                  "DbcareSR2": "dbcare_sr2", "DbcareMIK": "dbcare_mik", "DbcareSRK": "dbcare_srk"}


def bounds_table(risk, scope, sigma, cost, grid, B=None, K=None) -> tuple[list[str], list[list]]:
    if scope == "two":
        curves = ("OracleMI", "DbcareMI2") if risk == MI else ("OracleSR", "DbcareSR2")
    else:
        curves = ("DbcareMIK",) if risk == MI else ("DbcareSRK",)
    header = ["grid_value", "lower", "regime", *(_CURVE_COLUMNS[c] for c in curves)]
    rows = []
    for d in grid:
        if scope == "two":
            lb = (bounds.hardmi_two_arm if risk == MI else bounds.hardsr_two_arm)(d, sigma, cost)
            q = bounds.BoundQuery.two_arm(d, sigma, cost, B)
        else:
            H = (K - 1) / d**2
            lb = bounds.hardmi_k(H, sigma, cost) if risk == MI else bounds.hardsr_k(H, d, sigma, cost)
            q = bounds.BoundQuery.k_arm(H, d, K, sigma, cost, B)
        rows.append([d, lb.value, lb.regime.value, *(bounds.upper_curve(c, q) for c in curves)])
    if risk == SR:
        k = 2 if scope == "two" else K
        rows.append(["minimax", bounds.hardsr_star(k, sigma, cost), "minimax",
                     *(bounds.upper_minimax(c, k, sigma, cost) for c in curves)])
    return header, rows


def cmd_bounds(args) -> int:
    if args.scope == "two" and args.K is not None:
        print("error: --K only applies to --scope k", file=sys.stderr)
        return EXIT_INVALID
    if args.scope == "k" and (args.K is None or args.K < 2):
        print("error: --scope k needs --K >= 2", file=sys.stderr)
        return EXIT_INVALID
    if args.risk == SR and args.B is None:
        print("error: --risk sr needs --B for the upper-bound curves", file=sys.stderr)
        return EXIT_INVALID
    if args.risk == MI and args.B is not None:
        print("error: --B only applies to --risk sr", file=sys.stderr)
        return EXIT_INVALID
    try:
        grid = parse_grid(args.grid)
        if any(g <= 0 for g in grid):
            raise ConfigError("grid values must be positive gaps")
        header, rows = bounds_table(args.risk, args.scope, args.sigma, args.cost, grid, args.B, args.K)
    except (ConfigError, InvalidParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        if args.out:
            fh.close()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dbcare", description="Cost-aware best-arm identification lab.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    s.add_argument("--config", required=True, help="config path or bundled config name")
    s.add_argument("--out", help="output directory")
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, help=f"worker processes (default ${harness.WORKERS_ENV} or 1)")
    s.add_argument("--plot", action="store_true", help="also write SVG plots")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("run", help="single run of one policy on one instance")
    r.add_argument("--policy", required=True)
    r.add_argument("--instance", required=True)
    r.add_argument("--risk", choices=(MI, SR), default=MI)
    r.add_argument("--cost", type=float, default=1e-4)
    r.add_argument("--B", type=float)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bounds", help="tabulate lower and upper risk bounds")
    b.add_argument("--risk", choices=(MI, SR), required=True)
    b.add_argument("--scope", choices=("two", "k"), required=True)
    b.add_argument("--sigma", type=float, default=1.0)
    b.add_argument("--cost", type=float, required=True)
    b.add_argument("--grid", required=True, help="lin:a:b:n, log:a:b:n or comma list of gaps")
    b.add_argument("--B", type=float)
    b.add_argument("--K", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
