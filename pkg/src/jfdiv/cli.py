"""Command-line front end.

Exit status: 0 on success, 2 on invalid input, 3 when an integral fails to
converge within its subdivision budget.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time

from . import __version__
from .densities import (
    make_gamma_like,
    make_gaussian,
    make_rakhmanov_hermite,
    make_sinusoidal,
    make_smooth_uniform,
    make_uniform,
    load_grid_density,
)
from .divergences import (
    Path,
    classic_debruijn_check,
    debruijn_check,
    directed_jfd,
    fisher_divergence_g,
    fisher_information,
    jfd,
    jsd,
    kl_divergence,
    relative_fisher,
    shannon_entropy,
)
from .errors import NotConvergedError
from .experiments import FIGURES, run_figure
from .quadrature import QuadConfig

CONFIG_ENV = "JFDIV_CONFIG"
EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3

_FAMILIES = {
    "sinusoidal": (make_sinusoidal, {"n": int}),
    "gamma": (make_gamma_like, {"beta": float}),
    "hermite": (make_rakhmanov_hermite, {"n": int}),
    "gaussian": (make_gaussian, {"mean": float, "sigma": float}),
    "uniform": (make_uniform, {"lower": float, "upper": float}),
    "smooth_uniform": (make_smooth_uniform, {"half_width": float, "softness": float}),
    "grid": (load_grid_density, {"path": str, "renormalize": "flag"}),
}

_PAIR_MEASURES = {
    "jsd": lambda a, b, c, p: jsd(a, b, c),
    "jfd": lambda a, b, c, p: jfd(a, b, c, p),
    "kl": lambda a, b, c, p: kl_divergence(a, b, c),
    "klrev": lambda a, b, c, p: kl_divergence(b, a, c),
    "frel": lambda a, b, c, p: relative_fisher(a, b, c),
    "frelrev": lambda a, b, c, p: relative_fisher(b, a, c),
    "g": lambda a, b, c, p: fisher_divergence_g(a, b, c),
    "fbar": lambda a, b, c, p: directed_jfd(a, b, c),
}
_INFO_MEASURES = {
    "entropy": lambda d, c: shannon_entropy(d, c),
    "fisher": lambda d, c: fisher_information(d, c),
}
_CONFIG_KEYS = {"abs_tol": float, "rel_tol": float, "max_subdivisions": int, "divergence_cap": float}


class UsageError(ValueError):
    pass


def _flag(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def parse_density_spec(text):
    """Build a density from ``family:key=value[,key=value]``."""
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family not in _FAMILIES:
        raise UsageError(f"unknown density family {family!r}; choose from {', '.join(_FAMILIES)}")
    make, fields = _FAMILIES[family]
    kwargs = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in fields:
            raise UsageError(f"{family} takes {', '.join(f'{k}=...' for k in fields)}; got {item!r}")
        kind = fields[key]
        try:
            kwargs[key] = _flag(value) if kind == "flag" else kind(value.strip())
        except ValueError as exc:
            raise UsageError(f"bad value for {family}.{key}: {value!r}") from exc
    try:
        return make(**kwargs)
    except TypeError as exc:
        raise UsageError(f"{family} needs {next(iter(fields))}=...") from exc


def _key_values(lines, origin):
    out = {}
    for number, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{origin}:{number}: expected key=value, got {line!r}")
        out[key.strip()] = value.strip()
    return out


def load_config(path):
    """Read quadrature settings from a ``key=value`` file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = _key_values(fh, path)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from exc
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise UsageError(f"{path}: unknown keys {', '.join(sorted(unknown))}")
    try:
        return {k: _CONFIG_KEYS[k](v) for k, v in raw.items()}
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def resolve_config(args):
    """Defaults, then the config file (flag or environment), then explicit flags."""
    settings = {}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        settings.update(load_config(path))
    if args.abs_tol is not None:
        settings["abs_tol"] = args.abs_tol
    if args.rel_tol is not None:
        settings["rel_tol"] = args.rel_tol
    return QuadConfig(**settings)


# -- output ------------------------------------------------------------------------


def _fmt(value, precision):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return format(value, f".{precision}g")
    return str(value)


def _json_value(value, precision):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(format(value, f".{precision}g"))
    return value


def render(columns, rows, metadata, fmt, precision):
    if fmt == "json":
        records = [{c: _json_value(v, precision) for c, v in zip(columns, row)} for row in rows]
        return json.dumps({"metadata": metadata, "records": records}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v, precision) for v in row])
    return buf.getvalue()


def emit(args, columns, rows, metadata):
    text = render(columns, rows, metadata, args.format, args.precision)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _metadata(args, config, **extra):
    meta = {
        "command": args.command,
        "version": __version__,
        "abs_tol": config.abs_tol,
        "rel_tol": config.rel_tol,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    meta.update(extra)
    return meta


def _report_row(name, report):
    return [name, float(report.value), float(report.error_estimate), report.status.value, report.path.value]


def _measures(text, allowed):
    names = [m.strip().lower() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in allowed]
    if bad or not names:
        raise UsageError(f"unknown measures {', '.join(bad) or '(none)'}; choose from {', '.join(allowed)}")
    return names


# -- subcommands ---------------------------------------------------------------------


def cmd_divergence(args):
    config = resolve_config(args)
    names = _measures(args.measures, _PAIR_MEASURES)
    rho1, rho2 = parse_density_spec(args.spec1), parse_density_spec(args.spec2)
    path = Path(args.path)
    rows = [_report_row(m, _PAIR_MEASURES[m](rho1, rho2, config, path)) for m in names]
    meta = _metadata(args, config, spec1=args.spec1, spec2=args.spec2)
    emit(args, ["measure", "value", "error_estimate", "status", "path"], rows, meta)


def cmd_info(args):
    config = resolve_config(args)
    names = _measures(args.measures, _INFO_MEASURES)
    rho = parse_density_spec(args.spec)
    rows = [_report_row(m, _INFO_MEASURES[m](rho, config)) for m in names]
    emit(args, ["measure", "value", "error_estimate", "status", "path"], rows, _metadata(args, config, spec=args.spec))


def _overrides(items):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def cmd_sweep(args):
    config = resolve_config(args)
    overrides = _overrides(args.set)
    table = run_figure(args.figure, overrides, config=config, workers=args.workers)
    series = any(r.series for r in table.records)
    columns = (["series"] if series else []) + list(table.index_names) + ["jsd", "jfd", "jsd_err", "jfd_err"]
    rows = [
        ([r.series] if series else []) + list(r.index) + [r.jsd, r.jfd, r.jsd_err, r.jfd_err]
        for r in table.records
    ]
    meta = _metadata(args, config, figure=args.figure, overrides=overrides)
    meta.update({k: v for k, v in table.metadata.items() if k not in meta and k != "created"})
    emit(args, columns, rows, meta)


def _epsilons(text):
    try:
        return [float(e) for e in text.split(",") if e.strip()]
    except ValueError as exc:
        raise UsageError(f"bad smoothing list {text!r}") from exc


def cmd_debruijn(args):
    config = resolve_config(args)
    eps = _epsilons(args.epsilons)
    rho1 = parse_density_spec(args.spec1)
    if args.spec2 is None:
        res = classic_debruijn_check(rho1, eps)
        kind = "entropy-fisher"
    else:
        res = debruijn_check(rho1, parse_density_spec(args.spec2), eps)
        kind = "jsd-jfd"
    meta = _metadata(args, config, spec1=args.spec1, spec2=args.spec2, epsilons=eps, identity=kind)
    emit(args, ["identity", "lhs_slope", "rhs", "relative_gap"], [[kind, res.lhs_slope, res.rhs, res.relative_gap]], meta)


# -- parser ------------------------------------------------------------------------------


def _precision(text):
    value = int(text)
    if not 4 <= value <= 17:
        raise argparse.ArgumentTypeError(f"precision must be between 4 and 17, got {value}")
    return value


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output file (default: standard output)")
    common.add_argument("--precision", type=_precision, default=12, help="significant digits, 4-17")
    common.add_argument("--abs-tol", type=_positive, default=None)
    common.add_argument("--rel-tol", type=_positive, default=None)
    common.add_argument("--config", default=None, help=f"key=value file of quadrature settings (or ${CONFIG_ENV})")

    parser = argparse.ArgumentParser(prog="jfdiv", description="Jensen-Fisher and related divergences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    spec_help = "density spec family:key=value[,...], e.g. sinusoidal:n=3 or gaussian:mean=0,sigma=1"
    p = sub.add_parser("divergence", parents=[common], help="divergences between two densities")
    p.add_argument("spec1", help=spec_help)
    p.add_argument("spec2", help=spec_help)
    p.add_argument("--measures", default="jsd,jfd", help=f"comma list from {','.join(_PAIR_MEASURES)}")
    p.add_argument("--path", choices=[x.value for x in Path], default=Path.FUNCTIONAL.value,
                   help="JFD evaluation path")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("info", parents=[common], help="entropy and Fisher information of one density")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--measures", default="entropy,fisher")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("sweep", parents=[common], help="figure sweeps")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a sweep parameter")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("debruijn", parents=[common], help="check the deBruijn-type identities")
    p.add_argument("spec1", help=spec_help)
    p.add_argument("spec2", nargs="?", default=None, help="second density; omit for the entropy-Fisher identity")
    p.add_argument("--epsilons", default="1e-2,5e-3,2.5e-3", help="decreasing smoothing variances")
    p.set_defaults(func=cmd_debruijn)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NotConvergedError as exc:
        print(f"jfdiv: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ValueError, OSError) as exc:
        print(f"jfdiv: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
