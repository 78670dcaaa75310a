"""Command line driver: `mmconc run`, `mmconc validate`, `mmconc sample`.

Exit codes: 0 success, 2 configuration error, 3 infeasible experiment.
The environment variable MMCONC_SEED overrides any configured seed.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__, bounds, csvio, experiments, sampling
from .errors import ConfigError, InfeasibleError, MmconcError

FIELD_NAMES = {"r": "R", "c": "C", "h": "H"}


def _parse_fields(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok not in FIELD_NAMES:
            raise ConfigError("unknown field %r (choose from r, c, h)" % tok)
        out.append(FIELD_NAMES[tok])
    return tuple(out)


def _parse_int_list(text, key):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError("key %r: expected comma-separated integers" % key)


def _parse_float_list(text, key):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError("key %r: expected comma-separated reals" % key)


def _apply_env_seed(seed):
    env = os.environ.get("MMCONC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("MMCONC_SEED must be an integer, got %r" % env)
    return seed


def build_config(args, experiment=None):
    cfg = experiments.ExperimentConfig(
        experiment=experiment or getattr(args, "experiment", ""),
        fields=_parse_fields(args.field),
        N_list=_parse_int_list(args.N, "N"),
        n_rule=args.n,
        kappa_list=_parse_float_list(args.kappa, "kappa"),
        samples=args.samples,
        seed=_apply_env_seed(args.seed),
        eps=args.eps,
        condition=args.condition,
        a=args.a,
        workers=args.workers,
        out=args.out,
    )
    bounds.parse_rule(cfg.n_rule)  # fail early on a malformed rule
    cfg.condition_obj()
    if cfg.samples < 1:
        raise ConfigError("samples must be >= 1")
    if not 0.0 < cfg.eps < 1.0:
        raise ConfigError("eps must lie in (0, 1)")
    return cfg


def cmd_run(args):
    cfg = build_config(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    try:
        result = experiments.run_experiment(cfg)
    except InfeasibleError as exc:
        extra = ""
        try:
            N = cfg.N_list[0]
            n = cfg.n_for(N)
            sch = bounds.make_schedule(N, n, cfg.condition_obj())
            vb = bounds.v_bound(N, n, sch, field=cfg.fields[0])
            extra = " (analytic mass lower bound %.4e at N=%d, n=%d)" % (
                vb.product_lower,
                N,
                n,
            )
        except MmconcError:
            pass
        raise InfeasibleError(str(exc) + extra)
    os.makedirs(cfg.out, exist_ok=True)
    digest = cfg.digest()
    header = result.header + ["run_digest"]
    rows = [row + [digest] for row in result.rows]
    csv_path = os.path.join(cfg.out, "%s.csv" % result.name)
    csv_digest = csvio.write_csv(csv_path, header, rows)
    extra_files = {}
    if result.extra_json:
        extra_path = os.path.join(cfg.out, "%s.json" % result.name)
        csvio.write_json(extra_path, result.extra_json)
        extra_files[os.path.basename(extra_path)] = True
    manifest = {
        "experiment": result.name,
        "version": __version__,
        "config": {
            "fields": list(cfg.fields),
            "N": list(cfg.N_list),
            "n": cfg.n_rule,
            "kappa": list(cfg.kappa_list),
            "samples": cfg.samples,
            "seed": cfg.seed,
            "eps": cfg.eps,
            "condition": cfg.condition,
            "a": cfg.a,
            "workers": cfg.workers,
        },
        "run_digest": digest,
        "outputs": {os.path.basename(csv_path): csv_digest},
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    csvio.write_json(os.path.join(cfg.out, "manifest.json"), manifest)
    for line in result.summaries:
        print(line)
    print("wrote %s (sha256 %s...)" % (csv_path, csv_digest[:12]))
    return 0


def parse_config_file(path):
    """Flat INI-style key = value lines; '#' starts a comment."""
    if not os.path.exists(path):
        raise ConfigError("config file %r does not exist" % path)
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    "%s:%d: expected 'key = value', got %r" % (path, lineno, raw.strip())
                )
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError("%s:%d: empty key" % (path, lineno))
            values[key] = value
    return values


_CONFIG_KEYS = {
    "experiment": str,
    "field": str,
    "N": str,
    "n": str,
    "kappa": str,
    "samples": int,
    "seed": int,
    "eps": float,
    "condition": str,
    "a": float,
    "workers": int,
    "out": str,
}


def resolve_config(values):
    ns = argparse.Namespace(
        experiment="",
        field="r",
        N="100",
        n="const:1",
        kappa="0.5",
        samples=10000,
        seed=0,
        eps=0.5,
        condition="condi",
        a=0.5,
        workers=1,
        out=".",
    )
    for key, value in values.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError("unknown config key %r" % key)
        caster = _CONFIG_KEYS[key]
        try:
            setattr(ns, key, caster(value))
        except ValueError:
            raise ConfigError("key %r: cannot parse %r as %s" % (key, value, caster.__name__))
    return build_config(ns, experiment=ns.experiment)


def cmd_validate(args):
    values = parse_config_file(args.config)
    cfg = resolve_config(values)
    print("config OK:")
    for key in sorted(values):
        print("  %s = %s" % (key, values[key]))
    print("resolved: fields=%s N=%s n=%s seed=%d samples=%d" % (
        ",".join(cfg.fields), ",".join(map(str, cfg.N_list)), cfg.n_rule,
        cfg.seed, cfg.samples,
    ))
    warned = False
    rule = cfg.n_rule
    if rule.startswith("power:"):
        p = float(rule.split(":", 1)[1])
        if p >= 1.0 / 3.0:
            print(
                "warning: n rule %s has exponent p = %g >= 1/3; the growth "
                "condition only holds for p < 1/3" % (rule, p)
            )
            warned = True
    try:
        report = bounds.condition_check(
            rule, max(cfg.N_list + (10**6,)), cfg.condition_obj()
        )
        print(
            "condition check: sup=%.4f at N=%d trend=%s"
            % (report.sup_value, report.sup_at, report.trend)
        )
        if report.trend == "increasing" and not warned:
            print("warning: condition expression still increasing at N_max")
    except MmconcError as exc:
        print("warning: condition check skipped (%s)" % exc)
    return 0


def cmd_sample(args):
    seed = _apply_env_seed(args.seed)
    fields = _parse_fields(args.field)
    if len(fields) != 1:
        raise ConfigError("sample takes exactly one field")
    try:
        cfg = sampling.SamplerConfig(
            fields[0], args.N, args.n, scaled=not args.unscaled, seed=seed,
            count=args.count,
        )
    except MmconcError as exc:
        raise ConfigError(str(exc))
    if args.kind == "gaussian":
        comps = sampling.gaussian_comps(cfg)
    else:
        comps = sampling.haar_comps(cfg)
    digest = sampling.write_samples_csv(args.out, cfg, comps)
    print("wrote %d %s samples to %s (sha256 %s...)" % (
        args.count, args.kind, args.out, digest[:12],
    ))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mmconc",
        description="Monte Carlo experiments on matrix manifolds over R, C, H",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("experiment", choices=sorted(experiments.EXPERIMENTS))
    run.add_argument("--field", default="r", help="comma list from r, c, h")
    run.add_argument("--N", default="100", help="comma list of ambient dimensions")
    run.add_argument("--n", default="const:1", help="rule const:k | power:p | powerlog:p | table:path")
    run.add_argument("--kappa", default="0.5", help="comma list of mass defects")
    run.add_argument("--samples", type=int, default=10000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--eps", type=float, default=0.5)
    run.add_argument("--condition", choices=("condi", "ass"), default="condi")
    run.add_argument("--a", type=float, default=0.5, help="exponent for the ass condition")
    run.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    run.add_argument("--out", default=".")
    run.set_defaults(fn=cmd_run)

    val = sub.add_parser("validate", help="validate a flat key = value config file")
    val.add_argument("config")
    val.set_defaults(fn=cmd_validate)

    samp = sub.add_parser("sample", help="dump raw samples as CSV")
    samp.add_argument("--kind", choices=("gaussian", "haar"), default="gaussian")
    samp.add_argument("--field", default="r")
    samp.add_argument("--N", type=int, required=True)
    samp.add_argument("--n", type=int, required=True)
    samp.add_argument("--count", type=int, default=1024)
    samp.add_argument("--seed", type=int, default=0)
    samp.add_argument("--unscaled", action="store_true")
    samp.add_argument("--out", default="samples.csv")
    samp.set_defaults(fn=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print("infeasible: %s" % exc, file=sys.stderr)
        return 3
    except MmconcError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
