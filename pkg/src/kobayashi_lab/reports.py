"""Config-driven experiment runner with deterministic CSV/JSON/SVG output.

An experiment config is a JSON object:

    {
      "experiment": "visibility",          # metric-eval | geodesic | visibility |
                                           # gehring-hayman | lower-bounds | shells | sweep
      "domain":  {"kind": "disc"},
      "profile": {"omega": {"form": "power", "C": 1.0, "a": 0.5}, "c_metric": 0.5},
      "solver":  {"h0": 0.08},             # optional SolverConfig overrides
      "pairs":   {"mode": "band", "count": 20, "band": [0.01, 0.5]},
      "constants": {"c_ntr": 1.0},
      "curves": "solver",                  # or "disc-oracle" for exact disc arcs
      "seed": 7,
      "out": "out"
    }

Pair rules: ``band`` (seeded rejection sampling in a boundary-distance band,
optional "separation" range), ``disc-theta`` (boundary pairs r e^{+-i theta}
on a log-spaced theta grid), ``ellipsoid-flat`` (pairs straddling the flat
boundary point of the egg domain), and ``explicit`` (verbatim coordinates).

Runs are deterministic for a fixed (config, seed): per-row seeds derive from
the root seed and the row index, rows are emitted in index order by a single
writer, floats serialise with round-trip-exact ``repr``, and the SVG backend
uses a fixed hash salt with no date metadata.  ``KOBAYASHI_LAB_THREADS`` caps
the worker pool for row computation (default 1).
"""

from __future__ import annotations

import concurrent.futures as cf
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import domains as domains_mod
from . import gauges as gauges_mod
from .domains import Domain, DomainError, Ellipsoid, PairRule, UnitBall, UnitDisc
from .gauges import GaugeError, GaugeProfile, OmegaSpec
from .geodesics import (
    Curve,
    SolverConfig,
    build_lattice,
    default_config,
    exact_disc_geodesic,
    solve_geodesic,
)
from .inequalities import (
    VerificationRecord,
    check_shell_invariants,
    measure_max_c,
    shell_decompose,
    verify_gehring_hayman,
    verify_lower_bounds,
    verify_shells,
    verify_visibility,
)
from .metrics import (
    BoundConstants,
    MetricField,
    exact_distance,
    has_exact_distance,
    kappa_bounds,
    kappa_exact,
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


EXPERIMENTS = (
    "metric-eval",
    "geodesic",
    "visibility",
    "gehring-hayman",
    "lower-bounds",
    "shells",
    "sweep",
)

CSV_COLUMNS = (
    "id,domain,m,"
    "x_re,x_im,x2_re,x2_im,x3_re,x3_im,"
    "y_re,y_im,y2_re,y2_im,y3_re,y3_im,"
    "dist_euclid,delta_x,delta_y,D,L_e,k_up,k_low_best,g_xy,c_vis,C_gh,lambda_cert,pass"
).split(",")


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    experiment: str
    domain: Domain
    profile: GaugeProfile | None
    solver_overrides: dict
    pairs_rule: dict
    constants: BoundConstants
    curves: str
    seed: int
    out: str | None
    raw: dict
    sub_experiments: list = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode("utf-8")
        ).hexdigest()


def default_profile(domain: Domain) -> GaugeProfile:
    """Gauge matched to the model: sqrt for disc/ball, t^(1/(2m)) for eggs."""
    if isinstance(domain, Ellipsoid) and domain.m > 1:
        return GaugeProfile(
            OmegaSpec(form="power", C=1.6, a=1.0 / (2.0 * domain.m), c_metric=0.5)
        )
    return gauges_mod.sqrt_gauge()


def parse_config(payload: dict | str) -> ExperimentConfig:
    """Validate a raw config payload; raises ConfigError on any problem."""
    if isinstance(payload, str):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    experiment = payload.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    subs = []
    if experiment == "sweep":
        raw_subs = payload.get("experiments")
        if not isinstance(raw_subs, list) or not raw_subs:
            raise ConfigError("sweep config needs a nonempty 'experiments' list")
        base_seed = int(payload.get("seed", 0))
        for k, sub in enumerate(raw_subs):
            sub = dict(sub)
            sub.setdefault("seed", base_seed + 1000 * (k + 1))
            parsed = parse_config(sub)
            if parsed.experiment == "sweep":
                raise ConfigError("sweep experiments cannot nest")
            subs.append(parsed)
        return ExperimentConfig(
            experiment="sweep",
            domain=subs[0].domain,
            profile=subs[0].profile,
            solver_overrides={},
            pairs_rule={},
            constants=BoundConstants(),
            curves="solver",
            seed=base_seed,
            out=payload.get("out"),
            raw=payload,
            sub_experiments=subs,
        )

    try:
        domain = domains_mod.from_descriptor(payload.get("domain", {"kind": "disc"}))
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain descriptor: {exc}") from exc

    prof_payload = payload.get("profile")
    try:
        if prof_payload is None:
            profile = default_profile(domain)
        else:
            spec = gauges_mod.from_descriptor(prof_payload)
            profile = GaugeProfile(spec, require_admissible=not spec.allow_steep)
    except (GaugeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad profile descriptor: {exc}") from exc

    solver_overrides = payload.get("solver", {})
    if not isinstance(solver_overrides, dict):
        raise ConfigError("'solver' must be an object of SolverConfig overrides")

    pairs_rule = payload.get("pairs", {"mode": "band", "count": 8, "band": [0.05, 0.5]})
    if not isinstance(pairs_rule, dict) or "mode" not in pairs_rule:
        raise ConfigError("'pairs' must be an object with a 'mode'")
    if pairs_rule["mode"] not in ("band", "disc-theta", "ellipsoid-flat", "explicit"):
        raise ConfigError(f"unknown pairs mode {pairs_rule['mode']!r}")

    cpay = payload.get("constants", {})
    try:
        constants = BoundConstants(
            c_ntr=float(cpay.get("c_ntr", 1.0)),
            c_depth=float(cpay.get("c_depth", 1.0)),
            c_gauge=float(cpay.get("c_gauge", 1.0)),
            c_combined=(
                float(cpay["c_combined"]) if "c_combined" in cpay else None
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad constants: {exc}") from exc

    curves = payload.get("curves", "solver")
    if curves not in ("solver", "disc-oracle"):
        raise ConfigError("'curves' must be 'solver' or 'disc-oracle'")
    if curves == "disc-oracle" and not isinstance(domain, UnitDisc):
        raise ConfigError("'disc-oracle' curves require the disc domain")

    return ExperimentConfig(
        experiment=experiment,
        domain=domain,
        profile=profile,
        solver_overrides=dict(solver_overrides),
        pairs_rule=dict(pairs_rule),
        constants=constants,
        curves=curves,
        seed=int(payload.get("seed", 0)),
        out=payload.get("out"),
        raw=payload,
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return parse_config(payload)


# ---------------------------------------------------------------------------
# Pair generation
# ---------------------------------------------------------------------------


def generate_pairs(config: ExperimentConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    rule = config.pairs_rule
    mode = rule["mode"]
    domain = config.domain
    if mode == "band":
        band = rule.get("band", [0.05, 0.5])
        sep = rule.get("separation")
        pr = PairRule(
            count=int(rule.get("count", 8)),
            band=(float(band[0]), float(band[1])),
            separation=tuple(float(s) for s in sep) if sep else None,
            seed=config.seed,
        )
        return domains_mod.sample_pairs(domain, pr)
    if mode == "disc-theta":
        if domain.dim != 1 and not isinstance(domain, UnitBall):
            raise ConfigError("disc-theta pairs need the disc (or ball) domain")
        r = float(rule.get("r", 0.99))
        t0, t1 = (float(t) for t in rule.get("theta", [0.01, 1.0]))
        count = int(rule.get("count", 20))
        thetas = np.geomspace(t0, t1, count)
        pairs = []
        for th in thetas:
            a = r * np.exp(1j * th)
            b = r * np.exp(-1j * th)
            if domain.dim == 1:
                pairs.append((np.array([a]), np.array([b])))
            else:
                pad = np.zeros(domain.dim - 1, dtype=np.complex128)
                pairs.append((np.concatenate([[a], pad]), np.concatenate([[b], pad])))
        return pairs
    if mode == "ellipsoid-flat":
        if not isinstance(domain, Ellipsoid):
            raise ConfigError("ellipsoid-flat pairs need the egg domain")
        depth = float(rule.get("depth", 0.02))
        t0, t1 = (float(t) for t in rule.get("t", [0.05, 0.5]))
        count = int(rule.get("count", 12))
        pairs = []
        for t in np.geomspace(t0, t1, count):
            u = math.sqrt(max(0.0, 1.0 - t ** (2.0 * domain.m))) - depth
            x = np.array([u, t], dtype=np.complex128)
            y = np.array([u, -t], dtype=np.complex128)
            if domain.contains(x) and domain.contains(y):
                pairs.append((x, y))
        if not pairs:
            raise ConfigError("ellipsoid-flat rule produced no interior pairs")
        return pairs
    if mode == "explicit":
        out = []
        for pair in rule.get("points", []):
            x = np.array([complex(re, im) for re, im in pair[0]], dtype=np.complex128)
            y = np.array([complex(re, im) for re, im in pair[1]], dtype=np.complex128)
            out.append((x, y))
        if not out:
            raise ConfigError("explicit pairs rule has no points")
        return out
    raise ConfigError(f"unknown pairs mode {mode!r}")


# ---------------------------------------------------------------------------
# Report bundle
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def _record_csv_row(rec: VerificationRecord, dim_hint: int = 3) -> list[str]:
    def coords(plist):
        slots = [""] * 6
        if plist:
            flat = [v for pt in plist for v in pt]
            for i, v in enumerate(flat[:6]):
                slots[i] = repr(float(v))
        return slots

    ex = rec.extras
    row = [rec.inequality, rec.domain, _fmt(rec.m)]
    row += coords(rec.x)
    row += coords(rec.y)
    row += [
        _fmt(ex.get("dist_euclid")),
        _fmt(ex.get("delta_x")),
        _fmt(ex.get("delta_y")),
        _fmt(ex.get("D")),
        _fmt(ex.get("L_e")),
        _fmt(ex.get("k_up")),
        _fmt(ex.get("k_low_best")),
        _fmt(ex.get("g_xy")),
        _fmt(ex.get("c_vis")),
        _fmt(ex.get("C_gh")),
        _fmt(ex.get("lambda_cert")),
        "true" if rec.passed else "false",
    ]
    return row


@dataclass
class ReportBundle:
    rows: list
    summary: dict
    provenance: dict

    @property
    def violations(self) -> int:
        return self.summary.get("violations", 0)

    def to_json(self) -> dict:
        return {
            "rows": [r.to_json() for r in self.rows],
            "summary": self.summary,
            "provenance": self.provenance,
        }

    def write_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def emit_csv(bundle: ReportBundle, path: str) -> None:
    """Fixed-schema CSV projection; UTF-8, LF endings, round-trip floats."""
    lines = [",".join(CSV_COLUMNS)]
    for rec in bundle.rows:
        lines.append(",".join(_record_csv_row(rec)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _loglog_fit(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log y against log x with its standard error."""
    lx = np.log(xs)
    ly = np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    sol, res, _, _ = np.linalg.lstsq(A, ly, rcond=None)
    slope = float(sol[0])
    n = len(lx)
    if n > 2:
        fit = A @ sol
        s2 = float(np.sum((ly - fit) ** 2)) / (n - 2)
        denom = float(np.sum((lx - np.mean(lx)) ** 2))
        stderr = math.sqrt(s2 / denom) if denom > 0 else math.inf
    else:
        stderr = math.inf
    return slope, stderr


def emit_plots(bundle: ReportBundle, out_dir: str) -> list[str]:
    """Static SVG figures for the sweep: depth and length log-log scatters.

    Skips (with a summary note) when fewer than 3 usable rows exist.  Byte
    determinism: fixed svg hash salt, no date metadata, glyphs as paths.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = bundle.provenance.get("config_hash", "kobayashi-lab")

    written: list[str] = []

    def scatter(xs, ys, xlabel, ylabel, fname, annotate):
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        ax.loglog(xs, ys, "o", markersize=4)
        slope, err = _loglog_fit(np.asarray(xs), np.asarray(ys))
        lx = np.log(xs)
        ly = np.log(ys)
        b = float(np.mean(ly) - slope * np.mean(lx))
        xs_line = np.geomspace(min(xs), max(xs), 64)
        ax.loglog(xs_line, np.exp(b) * xs_line**slope, "-", linewidth=1)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.annotate(
            f"{annotate}: slope {slope:.2f} ± {err:.2f}",
            xy=(0.03, 0.95),
            xycoords="axes fraction",
            fontsize=9,
            va="top",
        )
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)

    vis = [
        (r.extras["dist_euclid"], r.extras["D"])
        for r in bundle.rows
        if r.extras.get("dist_euclid") and r.extras.get("D")
    ]
    if len(vis) >= 3:
        xs, ys = zip(*vis)
        scatter(xs, ys, "pair separation", "penetration depth",
                "depth_vs_separation.svg", "depth fit")
    else:
        bundle.summary.setdefault("plot_notes", []).append(
            "depth plot skipped: fewer than 3 usable rows"
        )
    gh = [
        (r.extras["g_xy"], r.extras["L_e"])
        for r in bundle.rows
        if r.extras.get("g_xy") and r.extras.get("L_e")
    ]
    if len(gh) >= 3:
        xs, ys = zip(*gh)
        scatter(xs, ys, "gauge of separation g(|x-y|)", "Euclidean length",
                "length_vs_gauge.svg", "length fit")
    else:
        bundle.summary.setdefault("plot_notes", []).append(
            "length plot skipped: fewer than 3 usable rows"
        )
    return written


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------


def _worker_count() -> int:
    raw = os.environ.get("KOBAYASHI_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _row_seed(root: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=(root, index)).generate_state(1)[0])


def _parallel_rows(jobs, fn):
    """Run ``fn(job) -> list[record]`` over indexed jobs, order-preserving."""
    workers = _worker_count()
    if workers == 1 or len(jobs) <= 1:
        results = [fn(job) for job in jobs]
    else:
        with cf.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, jobs))
    out = []
    for recs in results:
        out.extend(recs)
    return out


def _solve_pairs(config: ExperimentConfig, pairs):
    """Curves for each pair, via the solver (shared lattice) or exact arcs."""
    domain = config.domain
    if config.curves == "disc-oracle":
        curves = []
        for x, y in pairs:
            curves.append((exact_disc_geodesic(complex(x[0]), complex(y[0]), 513), None))
        return curves
    field = MetricField(domain, profile=config.profile)
    solver_cfg = default_config(domain, **config.solver_overrides)
    lattice = build_lattice(domain, solver_cfg, field)

    def one(job):
        idx, (x, y) = job
        res = solve_geodesic(domain, x, y, solver_cfg, field, lattice=lattice,
                             constants=config.constants)
        return [(res.curve, res)]

    out = _parallel_rows(list(enumerate(pairs)), one)
    return out


def _summary_core(items: list[dict]) -> dict:
    """Statistics over row projections; shared by the live path and the
    CSV-recompute path so the two agree bit for bit."""

    def stats(vals):
        vals = sorted(vals)
        return {
            "min": vals[0],
            "median": vals[len(vals) // 2] if len(vals) % 2 else 0.5 * (vals[len(vals) // 2 - 1] + vals[len(vals) // 2]),
            "max": vals[-1],
            "count": len(vals),
        }

    summary: dict = {
        "rows": len(items),
        "violations": sum(1 for it in items if not it["passed"]),
    }
    for key, label in (("c_vis", "c_vis"), ("C_gh", "C_gh"), ("lambda_cert", "lambda_cert")):
        vals = [it[key] for it in items if isinstance(it.get(key), float) and math.isfinite(it[key])]
        if vals:
            summary[label] = stats(vals)
    if "C_gh" in summary:
        med = summary["C_gh"]["median"]
        summary["C_gh"]["max_over_median"] = summary["C_gh"]["max"] / med if med > 0 else math.inf
    vis_pts = [
        (it["dist_euclid"], it["D"])
        for it in items
        if it.get("dist_euclid") and it.get("D")
    ]
    if len(vis_pts) >= 3:
        xs, ys = zip(*vis_pts)
        slope, err = _loglog_fit(np.asarray(xs), np.asarray(ys))
        summary["depth_fit"] = {"slope": slope, "stderr": err}
    gh_pts = [
        (it["g_xy"], it["L_e"])
        for it in items
        if it.get("g_xy") and it.get("L_e")
    ]
    if len(gh_pts) >= 3:
        xs, ys = zip(*gh_pts)
        slope, err = _loglog_fit(np.asarray(xs), np.asarray(ys))
        summary["length_fit"] = {"slope": slope, "stderr": err}
    return summary


_SUMMARY_KEYS = ("c_vis", "C_gh", "lambda_cert", "dist_euclid", "D", "g_xy", "L_e")


def _summarise(rows: list, config_hash: str) -> dict:
    items = [
        {"passed": r.passed, **{k: r.extras.get(k) for k in _SUMMARY_KEYS}}
        for r in rows
    ]
    summary = _summary_core(items)
    summary["config_hash"] = config_hash
    return summary


def summary_from_csv(path: str) -> dict:
    """Recompute the statistical summary from an emitted CSV report."""
    import csv as _csv

    items = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError("CSV header does not match the report schema")
        for row in reader:
            item = {"passed": row["pass"] == "true"}
            for k in _SUMMARY_KEYS:
                item[k] = float(row[k]) if row[k] else None
            items.append(item)
    return _summary_core(items)


def run(config: ExperimentConfig) -> ReportBundle:
    """Execute the experiment; deterministic under (config, seed)."""
    domain = config.domain
    profile = config.profile
    rows: list[VerificationRecord] = []

    if config.experiment == "sweep":
        for sub in config.sub_experiments:
            rows.extend(run(sub).rows)
    elif config.experiment == "metric-eval":
        field = MetricField(domain, profile=profile)
        rng = np.random.default_rng(config.seed)
        count = int(config.pairs_rule.get("count", 64))
        band = config.pairs_rule.get("band", [1e-3, 0.9])
        pts = domain.sample_in_band(rng, count, (float(band[0]), float(band[1])))
        dirs = domains_mod._unit_vectors(rng, count, domain.dim)
        for i in range(count):
            est = kappa_bounds(field, pts[i], dirs[i])
            if field.exact:
                val = kappa_exact(field, pts[i], dirs[i])
                lhs, rhs = est.lower, val
                note = "sandwich lower vs exact"
                ok = VerificationRecord.judge(est.lower, val) and VerificationRecord.judge(val, est.upper)
            else:
                lhs, rhs = est.lower, est.upper
                note = est.provenance
                ok = VerificationRecord.judge(lhs, rhs)
            rows.append(
                VerificationRecord(
                    inequality="metric-sandwich",
                    domain=domain.label,
                    m=getattr(domain, "m", 1.0),
                    x=[[float(c.real), float(c.imag)] for c in pts[i]],
                    y=None,
                    lhs=lhs,
                    rhs=rhs,
                    measured_constant=lhs / rhs if rhs else math.inf,
                    passed=ok,
                    notes=note,
                    extras={"k_low_best": est.lower, "k_up": est.upper},
                )
            )
    elif config.experiment == "geodesic":
        pairs = generate_pairs(config)
        solved = _solve_pairs(config, pairs)
        for (curve, res) in solved:
            recs = verify_gehring_hayman(res if res is not None else curve, profile, domain)
            vis = verify_visibility(res if res is not None else curve, profile, domain)
            if vis is not None:
                recs.append(vis)
            if res is not None:
                for r in recs:
                    r.extras.setdefault("k_up", res.upper_length)
                    r.extras.setdefault("k_low_best", res.lower_distance)
                    r.extras.setdefault("lambda_cert", res.lambda_cert)
            rows.extend(recs)
    elif config.experiment == "visibility":
        pairs = generate_pairs(config)
        solved = _solve_pairs(config, pairs)
        for (curve, res) in solved:
            rec = verify_visibility(res if res is not None else curve, profile, domain,
                                    c_floor=float(config.pairs_rule.get("c_floor", 1e-3)))
            if rec is not None:
                rows.append(rec)
    elif config.experiment == "gehring-hayman":
        pairs = generate_pairs(config)
        solved = _solve_pairs(config, pairs)
        for (curve, res) in solved:
            rows.extend(
                verify_gehring_hayman(res if res is not None else curve, profile, domain)
            )
    elif config.experiment == "lower-bounds":
        pairs = generate_pairs(config)
        uppers = None
        if not has_exact_distance(domain):
            solved = _solve_pairs(config, pairs)
            uppers = [res.upper_length for _, res in solved]
        rows.extend(
            verify_lower_bounds(
                domain, profile, pairs,
                k_reference="auto",
                constants=config.constants,
                upper_lengths=uppers,
                finite_type_order=config.pairs_rule.get("finite_type_order"),
            )
        )
    elif config.experiment == "shells":
        pairs = generate_pairs(config)
        solved = _solve_pairs(config, pairs)
        for (curve, res) in solved:
            if curve.degenerate:
                continue
            dec = shell_decompose(curve, domain)
            inv = check_shell_invariants(dec, domain)
            rows.append(
                VerificationRecord(
                    inequality="shell-invariants",
                    domain=domain.label,
                    m=getattr(domain, "m", 1.0),
                    x=[[float(c.real), float(c.imag)] for c in curve.vertices[0]],
                    y=[[float(c.real), float(c.imag)] for c in curve.vertices[-1]],
                    lhs=inv["piece_max_ratio"],
                    rhs=1.0,
                    measured_constant=inv["piece_max_ratio"],
                    passed=bool(inv["pieces_ok"] and inv["cuts_ok"] and inv["lengths_ok"]),
                    notes=f"pieces={len(dec.pieces)} length_gap={inv['length_gap']:.2e}",
                    extras={"D": dec.D, "L_e": curve.length()},
                )
            )
            rows.extend(verify_shells(dec, profile, domain))
    else:  # pragma: no cover
        raise ConfigError(f"unhandled experiment {config.experiment!r}")

    summary = _summarise(rows, config.config_hash)
    if config.experiment == "lower-bounds" and has_exact_distance(domain):
        pairs = generate_pairs(config)
        summary["measured_max_c_ntr"] = measure_max_c(domain, pairs, "ntr")
        if profile is not None:
            summary["measured_max_c_final_h"] = measure_max_c(
                domain, pairs, "final_h", profile=profile
            )
    provenance = {
        "config_hash": config.config_hash,
        "package_version": __version__,
        "experiment": config.experiment,
        "domain": domain.label,
    }
    bundle = ReportBundle(rows=rows, summary=summary, provenance=provenance)

    if config.out:
        os.makedirs(config.out, exist_ok=True)
        emit_csv(bundle, os.path.join(config.out, "report.csv"))
        emit_plots(bundle, config.out)  # may add plot notes to the summary
        bundle.write_json(os.path.join(config.out, "report.json"))
    return bundle
