"""Command-line front end.

Every run echoes its fully resolved configuration in a manifest; feeding the
manifest back with ``--from-manifest`` reproduces the output byte for byte.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from . import __version__
from .admissible import (
    LinearSystem,
    TupleH,
    choose_g,
    greedy_survivors,
    greedy_tuple,
    is_admissible,
    survivor_bound,
    tuple_count_bound,
)
from .census import (
    compare_to_poisson,
    equidistribution_defect,
    poisson_prediction,
    prime_density_check,
    progression_table,
    run_census,
)
from .errors import DomainError
from .prime_engine import arithmetic_functions, primes_up_to
from .sieve_bounds import (
    SieveParams,
    bound_evaluators,
    lemma31_sum,
    selberg_error_sum,
    selberg_J,
    singular_series,
)
from .window_search import exact_m_census_floor, scan_good_n, scan_table, slide_to_exact_m

COMMANDS = (
    "census",
    "predict",
    "compare",
    "admissible",
    "greedy",
    "scan",
    "slide",
    "bounds",
    "density-check",
    "defect",
    "sums",
)
TABULAR_DEFAULT = {"census", "compare", "greedy", "predict"}


@dataclass
class RunConfig:
    command: str
    x: int = 10**6
    lam: float = 1.0
    m: int = 1
    k: int = 3
    B: int = 1
    y_override: int | None = None
    seed: int = 0
    out_format: str | None = None
    out_path: str | None = None
    threads: int | None = None
    tuple: list[int] | None = None
    g: int | None = None
    W: int | None = None
    D: int | None = None
    Q: int | None = None
    tuple_window: int | None = None
    c: float = 0.5
    c0: float = 1.0
    c_lambda: float = 1.0
    omega_prime: int = 0

    def resolved_format(self) -> str:
        if self.out_format:
            return self.out_format
        return "csv" if self.command in TABULAR_DEFAULT else "json"

    def manifest(self) -> dict:
        cfg = asdict(self)
        cfg["out_format"] = self.resolved_format()
        cfg.pop("out_path")
        return {"tool": "sipl", "version": __version__, "config": cfg}

    @classmethod
    def from_manifest(cls, doc: dict) -> "RunConfig":
        cfg = doc.get("manifest", doc).get("config")
        if cfg is None:
            raise DomainError("manifest has no 'config' block")
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in cfg.items() if k in names})


# =============================================================================
# Formatting
# =============================================================================


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.10g}"
    return str(v)


def jsonable(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return {"exact": str(v), "value": jsonable(float(v))}
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return fmt(v)
        return float(f"{v:.10g}")
    if isinstance(v, int):
        return v
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return str(v)


@dataclass
class Output:
    header: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    doc: dict = field(default_factory=dict)
    bare: str | None = None  # single-value CSV output

    def render(self, fmt_name: str, manifest: dict) -> str:
        if fmt_name == "json":
            body = dict(self.doc)
            body["manifest"] = manifest
            return json.dumps(jsonable(body), indent=2, sort_keys=False) + "\n"
        if self.bare is not None:
            return self.bare + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def _kv_output(doc: dict) -> Output:
    rows = [[k, v] for k, v in doc.items() if not isinstance(v, (list, dict))]
    return Output(header=["key", "value"], rows=rows, doc=doc)


# =============================================================================
# Commands
# =============================================================================


def _tuple(cfg: RunConfig) -> TupleH | None:
    if cfg.tuple:
        return TupleH.of(cfg.tuple)
    window = cfg.tuple_window if cfg.tuple_window is not None else math.floor(cfg.lam * math.log(cfg.x))
    return greedy_tuple(window, cfg.k)


def _system(cfg: RunConfig, t: TupleH) -> LinearSystem:
    g = cfg.g if cfg.g is not None else choose_g(cfg.x, cfg.B)
    return LinearSystem(g=g, B=cfg.B, tuple=t, x_scale=cfg.x)


def _params(cfg: RunConfig, k: int) -> SieveParams:
    return SieveParams(
        k=k,
        m=cfg.m,
        x=cfg.x,
        lam=cfg.lam,
        c=cfg.c,
        c0=cfg.c0,
        c_lambda=cfg.c_lambda,
        B=cfg.B,
        y_override=cfg.y_override,
    )


def cmd_census(cfg: RunConfig) -> Output:
    h = run_census(cfg.x, cfg.lam)
    rows = []
    for m in range(h.max_m + 1):
        frac = h.fraction(m)
        pois = poisson_prediction(cfg.lam, m)
        rows.append([m, h.counts.get(m, 0), frac, pois, abs(frac - pois)])
    doc = {
        "x": cfg.x,
        "lambda": cfg.lam,
        "total": h.total,
        "rows": [dict(zip(["m", "count", "fraction", "poisson", "abs_dev"], r)) for r in rows],
    }
    return Output(header=["m", "count", "fraction", "poisson", "abs_dev"], rows=rows, doc=doc)


def cmd_predict(cfg: RunConfig) -> Output:
    v = poisson_prediction(cfg.lam, cfg.m)
    return Output(doc={"lambda": cfg.lam, "m": cfg.m, "poisson": v}, bare=fmt(v))


def cmd_compare(cfg: RunConfig) -> Output:
    rep = compare_to_poisson(run_census(cfg.x, cfg.lam))
    header = ["m", "count", "fraction", "poisson", "abs_dev", "rel_dev"]
    rows = [[r.m, r.count, r.fraction, r.poisson, r.abs_dev, r.rel_dev] for r in rep.rows]
    rows.append(["tv", "", "", "", rep.tv_distance, ""])
    doc = {
        "x": cfg.x,
        "lambda": cfg.lam,
        "rows": [asdict(r) for r in rep.rows],
        "tv_distance": rep.tv_distance,
    }
    return Output(header=header, rows=rows, doc=doc)


def cmd_admissible(cfg: RunConfig) -> Output:
    if not cfg.tuple:
        raise DomainError("admissible needs --tuple h1,h2,...")
    offs = sorted(cfg.tuple)
    ok = is_admissible(offs)
    doc = {"tuple": offs, "k": len(offs), "admissible": ok}
    covered = [int(p) for p in primes_up_to(len(offs)) if len({h % int(p) for h in offs}) == int(p)]
    doc["covered_primes"] = covered
    if ok:
        limit = max(len(offs), 1000)
        ss = singular_series(offs, cfg.B, limit)
        doc["singular_series"] = ss.value
        doc["singular_series_p_limit"] = limit
    return _kv_output(doc)


def cmd_greedy(cfg: RunConfig) -> Output:
    W = cfg.W if cfg.W is not None else math.floor(cfg.lam * math.log(cfg.x))
    if W < 2:
        raise DomainError(f"window W={W} < 2; pass --W or a larger --lambda/--x")
    s = greedy_survivors(W, cfg.k)
    bound = survivor_bound(W - 1, cfg.k)
    floor_bound = math.floor(bound) - len(primes_up_to(cfg.k))
    doc = {
        "W": W,
        "k": cfg.k,
        "survivors": s,
        "survivor_count": len(s),
        "survivor_bound": bound,
        "floor_bound": floor_bound,
    }
    if len(s) >= cfg.k:
        tc = tuple_count_bound(len(s), cfg.k)
        doc["admissible_k_subsets"] = tc.binomial
        doc["power_lower_bound"] = tc.power_bound
    rows = [[h] for h in s]
    return Output(header=["h"], rows=rows, doc=doc)


def _scan(cfg: RunConfig):
    t = _tuple(cfg)
    if t is None:
        return None, None, None, None
    sys_ = _system(cfg, t)
    params = _params(cfg, t.k)
    table = scan_table(sys_, params)
    windows = scan_good_n(sys_, params, cfg.m, table=table)
    return sys_, params, table, windows


def _window_doc(w) -> dict:
    return {"n": w.n, "start": w.start, "end": w.end, "prime_offsets": list(w.prime_offsets)}


def cmd_scan(cfg: RunConfig) -> Output:
    sys_, params, _, windows = _scan(cfg)
    if sys_ is None:
        return Output(doc={"good_n": [], "note": "no admissible tuple fits in the tuple window"})
    doc = {
        "g": sys_.g,
        "tuple": list(sys_.tuple.offsets),
        "W": params.scan_width,
        "y": params.y,
        "flags": windows.flags,
        "good_n": [w.n for w in windows],
        "windows": [_window_doc(w) for w in windows],
    }
    if not windows:
        doc["note"] = "no qualifying windows"
    return Output(doc=doc)


def cmd_slide(cfg: RunConfig) -> Output:
    sys_, params, table, windows = _scan(cfg)
    if sys_ is None or not windows:
        return Output(doc={"good_n": [], "note": "no qualifying windows"})
    results = [slide_to_exact_m(w.n, sys_, cfg.lam, cfg.m, table) for w in windows]
    doc = {
        "g": sys_.g,
        "tuple": list(sys_.tuple.offsets),
        "W": params.scan_width,
        "y": params.y,
        "flags": windows.flags,
        "good_n": [w.n for w in windows],
        "results": [
            {"n": r.start_n, "j_star": r.j_star, "N_star": r.N_star, "count": r.count, "trace": [list(s) for s in r.trace]}
            for r in results
        ],
        "exact_m_floor": exact_m_census_floor(results, cfg.x),
    }
    return Output(doc=doc)


def cmd_bounds(cfg: RunConfig) -> Output:
    rep = bound_evaluators(_params(cfg, cfg.k), omega_prime=cfg.omega_prime)
    doc = rep.as_dict()
    out = _kv_output(doc)
    out.rows.append(["flags", ";".join(rep.flags)])
    return out


def _forms(cfg: RunConfig) -> LinearSystem:
    t = TupleH.of(cfg.tuple) if cfg.tuple else TupleH.of([2, 6, 8])
    return _system(cfg, t)


def cmd_density(cfg: RunConfig) -> Output:
    sys_ = _forms(cfg)
    rows = prime_density_check(sys_, cfg.x, progression_table(sys_, cfg.x))
    header = ["h", "count", "lhs", "rhs", "pass", "degenerate"]
    table_rows = [[r.h, r.count, r.lhs, r.rhs, r.passed, r.degenerate] for r in rows]
    doc = {"x": cfg.x, "g": sys_.g, "B": sys_.B, "rows": [dict(zip(header, r)) for r in table_rows]}
    return Output(header=header, rows=table_rows, doc=doc)


def cmd_defect(cfg: RunConfig) -> Output:
    sys_ = _forms(cfg)
    Q = cfg.Q if cfg.Q is not None else max(1, math.floor(cfg.x ** (1 / 8)))
    reps = equidistribution_defect(sys_, cfg.x, Q, progression_table(sys_, cfg.x))
    header = ["h", "Q", "defect", "main_term", "ratio", "flagged_q"]
    rows = [[r.h, r.Q, r.defect, r.main_term, r.ratio, " ".join(map(str, r.flagged_q))] for r in reps]
    doc = {"x": cfg.x, "g": sys_.g, "rows": [dict(zip(header, r), flagged_q=r_.flagged_q) for r, r_ in zip(rows, reps)]}
    return Output(header=header, rows=rows, doc=doc)


def cmd_sums(cfg: RunConfig) -> Output:
    sys_ = _forms(cfg)
    W = cfg.W if cfg.W is not None else math.floor(5 * cfg.lam * math.log(cfg.x))
    D = cfg.D if cfg.D is not None else math.floor(4 * math.log(cfg.x) ** 2)
    lem = lemma31_sum(sys_, W)
    doc = {
        "g": sys_.g,
        "tuple": list(sys_.tuple.offsets),
        "W": W,
        "D": D,
        "lemma31_sum": lem.value,
        "lemma31_terms": lem.terms,
        "lemma31_ratio": lem.ratio,
        "selberg_J": selberg_J(sys_.g, D),
        "g_over_phi_g": Fraction(sys_.g, arithmetic_functions(sys_.g).phi),
        "selberg_error_sum": selberg_error_sum(sys_.g, D),
        "four_pow_omega_g": 4 ** arithmetic_functions(sys_.g).omega,
    }
    return _kv_output(doc)


HANDLERS = {
    "census": cmd_census,
    "predict": cmd_predict,
    "compare": cmd_compare,
    "admissible": cmd_admissible,
    "greedy": cmd_greedy,
    "scan": cmd_scan,
    "slide": cmd_slide,
    "bounds": cmd_bounds,
    "density-check": cmd_density,
    "defect": cmd_defect,
    "sums": cmd_sums,
}


# =============================================================================
# Argument parsing
# =============================================================================


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"\n{self.prog}: error: {message}\n")


def _int_list(s: str) -> list[int]:
    try:
        return [int(v) for v in s.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _scale(s: str) -> int:
    """Integer scale; also accepts exact powers such as ``1e100`` or ``10^30``."""
    s = s.strip().replace("_", "")
    try:
        if "^" in s:
            base, exp = s.split("^")
            return int(base) ** int(exp)
        if "e" in s.lower():
            mant, exp = s.lower().split("e")
            e = int(exp)
            if "." in mant:
                whole, frac = mant.split(".")
                mant, e = whole + frac, e - len(frac)
            if e < 0:
                raise ValueError
            return int(mant) * 10**e
        return int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer such as 1000000 or 1e6, got {s!r}")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--x", type=_scale, default=10**6, help="scale x (default 10^6)")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0, help="window factor lambda")
    common.add_argument("--m", type=int, default=1, help="target prime count m")
    common.add_argument("--k", type=int, default=3, help="tuple size k")
    common.add_argument("--B", type=_positive_int, default=1, help="exceptional modulus (default 1)")
    common.add_argument("--y", dest="y_override", type=int, default=None, help="smoothness cut override")
    common.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    common.add_argument("--format", dest="out_format", choices=("csv", "json"), default=None)
    common.add_argument("--out", dest="out_path", default=None, help="write results here instead of stdout")
    common.add_argument("--threads", type=_positive_int, default=None, help="cap worker threads")
    common.add_argument("--tuple", type=_int_list, default=None, help="offsets h1,h2,...")
    common.add_argument("--g", type=int, default=None, help="multiplier g (default: choose_g(x, B))")
    common.add_argument("--W", type=int, default=None, help="window width for greedy/sums")
    common.add_argument("--D", type=int, default=None, help="Selberg level D (default 4 log^2 x)")
    common.add_argument("--Q", type=int, default=None, help="largest modulus (default x^(1/8))")
    common.add_argument("--tuple-window", type=int, default=None, help="offsets must be below this")
    common.add_argument("--c", type=float, default=0.5)
    common.add_argument("--c0", type=float, default=1.0)
    common.add_argument("--c-lambda", dest="c_lambda", type=float, default=1.0)
    common.add_argument("--omega-prime", dest="omega_prime", type=int, default=0)

    parser = _Parser(prog="sipl", description="Short-interval prime laboratory")
    parser.add_argument("--version", action="version", version=f"sipl {__version__}")
    parser.add_argument("--from-manifest", dest="from_manifest", default=None, help="re-run a recorded manifest")
    parser.add_argument("--out", dest="manifest_out", default=None, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"{name} command")
    return parser


def _set_threads(n: int | None) -> None:
    if not n:
        return
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:  # pragma: no cover
        pass


def execute(cfg: RunConfig) -> str:
    _set_threads(cfg.threads)
    if cfg.resolved_format() not in ("csv", "json"):
        raise DomainError(f"unknown format {cfg.out_format!r}")
    out = HANDLERS[cfg.command](cfg)
    return out.render(cfg.resolved_format(), cfg.manifest())


def _emit(cfg: RunConfig, text: str) -> None:
    manifest = json.dumps(cfg.manifest(), indent=2) + "\n"
    if cfg.out_path:
        path = Path(cfg.out_path)
        path.write_text(text, encoding="utf-8", newline="\n")
        if cfg.resolved_format() == "csv":
            Path(str(path) + ".manifest.json").write_text(manifest, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
        if cfg.resolved_format() == "csv":
            sys.stderr.write(json.dumps(cfg.manifest(), sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.from_manifest:
            doc = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))
            cfg = RunConfig.from_manifest(doc)
            if args.manifest_out:
                cfg.out_path = args.manifest_out
        else:
            if args.command is None:
                parser.error("a command is required")
            kwargs = {f.name: getattr(args, f.name) for f in fields(RunConfig) if hasattr(args, f.name)}
            cfg = RunConfig(**kwargs)
        if cfg.command not in HANDLERS:
            raise DomainError(f"unknown command {cfg.command!r}")
        text = execute(cfg)
        _emit(cfg, text)
    except DomainError as exc:
        sys.stderr.write(f"sipl: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
