"""Experiment orchestration: configs, deterministic runs, CSV artifacts.

A run is described by a JSON config, split into work units that are
fixed by the config alone, and executed by any number of workers; the
aggregated rows are therefore identical whether one thread or eight do
the work.  Results land in commented CSV files written atomically, with
enough metadata to re-derive every number.
"""

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .evc import EvcResult, shift_identity_experiment, wegner_one_volume, wegner_two_volume
from .geometry import Cube, config
from .model import ModelSpec, derive_seed, sample_disorder
from .msa import (
    ScaleParams,
    classify_bad_good,
    dominated_bound,
    efc_decay_experiment,
    estimate_singularity_prob,
    etv_energy_sweep,
    generate_dominated_instances,
    implication_experiment,
    require_valid,
    wi_tensor_check,
)

KINDS = (
    "wegner1",
    "wegner2",
    "shift-test",
    "ss-prob",
    "bad-good",
    "dominated",
    "wi-tensor",
    "etv",
    "efc-decay",
    "gri-measure",
)

# trials per work unit; the split depends only on the config, never on
# the worker count, so aggregation is order-independent
_UNIT_TRIALS = {
    "wegner1": 100,
    "wegner2": 50,
    "shift-test": 25,
    "ss-prob": 50,
    "bad-good": 5,
    "dominated": 500,
    "wi-tensor": 25,
    "etv": 10,
    "gri-measure": 25,
}

_REQUIRED = {
    "wegner1": (("centers", 1), "radius", "energy", "s_grid"),
    "wegner2": (("centers", 2), "radius", "s_grid"),
    "shift-test": (),
    "ss-prob": ("n", "k", "energy"),
    "bad-good": (("centers", 1), "radius", "energy"),
    "dominated": (),
    "wi-tensor": (("centers", 1), "radius"),
    "etv": (("centers", 1), "radius"),
    "efc-decay": ("separations",),
    "gri-measure": ("k", "energy"),
}


def _as_center(raw):
    """Normalize one configuration to a tuple of coordinate tuples."""
    pts = []
    for p in raw:
        if isinstance(p, (int, np.integer)):
            pts.append((int(p),))
        else:
            pts.append(tuple(int(c) for c in p))
    return tuple(pts)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    spec: ModelSpec
    params: ScaleParams
    trials: int
    seed: int
    out: str
    centers: tuple = ()
    radius: int | None = None
    energy: float | None = None
    separations: tuple = ()
    s_grid: tuple = ()
    n: int | None = None
    k: int | None = None
    family: str = "aligned"
    interacting: bool = True
    independent: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(_as_center(c) for c in self.centers))
        object.__setattr__(self, "separations", tuple(int(r) for r in self.separations))
        object.__setattr__(self, "s_grid", tuple(float(s) for s in self.s_grid))

    def validate(self):
        """List of problems; empty means runnable."""
        out = []
        if self.kind not in KINDS:
            out.append(f"unknown experiment kind {self.kind!r}")
            return out
        if self.trials < 1:
            out.append("trials must be >= 1")
        if not isinstance(self.seed, int):
            out.append("seed must be an integer")
        if not self.out:
            out.append("output path is required")
        if self.workers < 1:
            out.append("workers must be >= 1")
        for req in _REQUIRED[self.kind]:
            if isinstance(req, tuple):
                name, count = req
                if len(self.centers) != count:
                    out.append(f"{self.kind} needs exactly {count} center(s)")
            elif getattr(self, req) in (None, ()):
                out.append(f"{self.kind} needs {req.replace('_', ' ')}")
        if self.s_grid and (np.diff(np.asarray(self.s_grid)) <= 0).any():
            out.append("s_grid must be strictly increasing")
        if self.kind == "efc-decay" and self.family not in ("aligned", "hausdorff-null"):
            out.append(f"unknown family {self.family!r}")
        return out


_TOP_DEFAULTS = {
    "centers": (), "radius": None, "energy": None, "separations": (),
    "s_grid": (), "n": None, "k": None, "family": "aligned",
    "interacting": True, "independent": False, "workers": 1,
}


def serialize_config(cfg):
    """Canonical JSON text; stable key order so configs diff cleanly."""
    doc = {
        "kind": cfg.kind,
        "spec": asdict(cfg.spec),
        "params": asdict(cfg.params),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "out": cfg.out,
    }
    for name, default in _TOP_DEFAULTS.items():
        value = getattr(cfg, name)
        if value != default:
            doc[name] = list(value) if isinstance(value, tuple) else value
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_config(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"config is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    known = {"kind", "spec", "params", "trials", "seed", "out", *_TOP_DEFAULTS}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValueError(f"unknown config fields: {', '.join(unknown)}")
    missing = sorted({"kind", "spec", "params", "trials", "seed", "out"} - set(doc))
    if missing:
        raise ValueError(f"missing config fields: {', '.join(missing)}")
    if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool):
        raise ValueError("seed must be an integer")
    try:
        spec = ModelSpec(**doc["spec"])
    except TypeError as err:
        raise ValueError(f"bad model spec: {err}") from None
    try:
        params = ScaleParams(**doc["params"])
    except TypeError as err:
        raise ValueError(f"bad scale params: {err}") from None
    kwargs = {k: doc[k] for k in _TOP_DEFAULTS if k in doc}
    for name in ("centers", "separations", "s_grid"):
        if name in kwargs:
            kwargs[name] = tuple(kwargs[name])
    return ExperimentConfig(kind=doc["kind"], spec=spec, params=params,
                            trials=int(doc["trials"]), seed=doc["seed"],
                            out=str(doc["out"]), **kwargs)


def load_config(path):
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def config_hash(cfg):
    compact = json.dumps(json.loads(serialize_config(cfg)),
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(compact.encode()).hexdigest()


def content_id(body):
    """Git-style blob id of the data portion (header plus rows)."""
    raw = body.encode()
    return hashlib.sha1(b"blob %d\0" % len(raw) + raw).hexdigest()


# ---------------------------------------------------------------------------
# work units


def _blocks(trials, size):
    starts = range(0, trials, size)
    return [(i, s, min(size, trials - s)) for i, s in enumerate(starts)]


def _unit_plan(cfg):
    if cfg.kind == "efc-decay":
        return [("sep", j, sep) for j, sep in enumerate(cfg.separations)]
    return [("block",) + b for b in _blocks(cfg.trials, _UNIT_TRIALS[cfg.kind])]


def _cube(cfg, which=0):
    return Cube(config(*cfg.centers[which]), cfg.radius)


def _unit_seed(cfg, index):
    return derive_seed(cfg.seed, f"{cfg.kind}-unit", index)


def _run_unit(cfg, unit):
    kind = cfg.kind
    if kind == "wegner1":
        _, i, start, count = unit
        res = wegner_one_volume(_cube(cfg), cfg.energy, cfg.spec,
                                np.asarray(cfg.s_grid), count,
                                _unit_seed(cfg, i), interacting=cfg.interacting)
        return {"counts": res.counts, "empty": res.metadata["empty_window"]}
    if kind == "wegner2":
        _, i, start, count = unit
        res = wegner_two_volume(_cube(cfg, 0), _cube(cfg, 1), cfg.spec,
                                np.asarray(cfg.s_grid), count,
                                _unit_seed(cfg, i), interacting=cfg.interacting,
                                independent=cfg.independent)
        return {"counts": res.counts, "empty": res.metadata["empty_window"]}
    if kind == "shift-test":
        _, i, start, count = unit
        rows = shift_identity_experiment(cfg.spec, count, _unit_seed(cfg, i))
        for row in rows:
            row["trial"] += start
        return rows
    if kind == "ss-prob":
        _, i, start, count = unit
        est = estimate_singularity_prob(cfg.n, cfg.k, cfg.energy, cfg.params,
                                        cfg.spec, count, _unit_seed(cfg, i))
        return {"unit": i, "trials": count, "singular": est.count,
                "bound": est.bound}
    if kind == "bad-good":
        _, i, start, count = unit
        cube = _cube(cfg)
        region = cube.support_sites()
        rows = []
        for t in range(start, start + count):
            sample = sample_disorder(region, derive_seed(cfg.seed, "bad-good", t),
                                     cfg.spec)
            rep = classify_bad_good(cube, cfg.energy, cfg.params, sample, cfg.spec)
            witness = rep.witness["kind"] if rep.witness else ""
            rows.append({"trial": t, "verdict": rep.verdict,
                         "witness_kind": witness, "n_singular": rep.n_singular,
                         "n_scanned": rep.n_scanned})
        return rows
    if kind == "dominated":
        _, i, start, count = unit
        n_hold = n_sing = 0
        for gf, annuli in generate_dominated_instances(count, _unit_seed(cfg, i)):
            res = dominated_bound(gf, annuli)
            n_hold += res.holds
            n_sing += bool(gf.singular)
        return {"unit": i, "instances": count, "holds": n_hold,
                "singular_instances": n_sing}
    if kind == "wi-tensor":
        _, i, start, count = unit
        cube = _cube(cfg)
        region = cube.support_sites()
        beta = cfg.params.beta if cfg.energy is not None else None
        rows = []
        for t in range(start, start + count):
            sample = sample_disorder(region, derive_seed(cfg.seed, "wi-tensor", t),
                                     cfg.spec)
            rep = wi_tensor_check(cube, sample, cfg.spec, energy=cfg.energy,
                                  beta=beta)
            rows.append({"trial": t, "gap": rep.gap, "cross_norm": rep.cross_norm,
                         "cross_bound": rep.cross_bound,
                         "cross_bound_gap": rep.cross_bound_gap,
                         "offdiag_dev": rep.offdiag_dev,
                         "diag_dev": rep.diag_dev,
                         "eigensum_dev": rep.eigensum_dev})
        return rows
    if kind == "etv":
        _, i, start, count = unit
        cube = _cube(cfg)
        region = cube.support_sites()
        rows = []
        for t in range(start, start + count):
            sample = sample_disorder(region, derive_seed(cfg.seed, "etv", t),
                                     cfg.spec)
            rep = etv_energy_sweep(cube, cfg.params, sample, cfg.spec)
            rows.append({"trial": t, "covered": int(rep.covered),
                         "n_exceed": rep.n_exceed, "n_grid": rep.n_grid,
                         "budget": rep.budget})
        return rows
    if kind == "efc-decay":
        _, j, sep = unit
        rep = efc_decay_experiment(cfg.spec, cfg.params, [sep], cfg.trials,
                                   cfg.seed, family=cfg.family)
        pt = rep.points[0]
        return {"separation": pt.separation, "sym_dist": pt.sym_dist,
                "hausdorff_dist": pt.hausdorff_dist, "mean": pt.mean,
                "stderr": pt.stderr, "trials": pt.trials,
                "mean_amp": pt.mean_amp, "amp_margin": pt.amp_margin,
                "gk_bound": pt.gk_bound}
    if kind == "gri-measure":
        _, i, start, count = unit
        rep = implication_experiment(cfg.params, cfg.spec, cfg.k, cfg.energy,
                                     count, _unit_seed(cfg, i))
        return {"unit": i, "trials": rep.trials,
                "premises_met": rep.premises_met,
                "violations": len(rep.violations), "c_gri": rep.c_gri,
                "n_good": rep.n_good, "n_nr": rep.n_nr}
    raise ValueError(f"unknown experiment kind {kind!r}")


def fit_decay(separations, means):
    """Least-squares decay profile of mean values against separation.

    Fits log(mean) both linearly in d (slope, p-value) and against
    d**kappa over a kappa grid (stretched-exponential rate); returns a
    dict of the fitted quantities with NaNs when there is not enough
    signal to fit.
    """
    d = np.asarray(separations, dtype=float)
    m = np.asarray(means, dtype=float)
    keep = m > 0
    out = {"slope": math.nan, "pvalue": math.nan, "nu_hat": math.nan,
           "kappa_hat": math.nan, "r2": math.nan}
    if keep.sum() < 3:
        return out
    d, logm = d[keep], np.log(m[keep])
    lin = stats.linregress(d, logm)
    out["slope"] = float(lin.slope)
    out["pvalue"] = float(lin.pvalue)
    best = None
    for kappa in np.arange(0.1, 1.01, 0.05):
        fit = stats.linregress(d**kappa, logm)
        r2 = fit.rvalue**2
        if best is None or r2 > best[0]:
            best = (r2, float(kappa), float(-fit.slope))
    out["r2"], out["kappa_hat"], out["nu_hat"] = best
    return out


def fitted_constant(s, p, exponent, lo=1e-4, hi=1e-1):
    """Smallest C with p <= C*s**exponent over the fitting window."""
    s = np.asarray(s, dtype=float)
    p = np.asarray(p, dtype=float)
    mask = (s >= lo) & (s <= hi) & (p > 0)
    if not mask.any():
        return 0.0
    return float((p[mask] / s[mask] ** exponent).max())


_COLUMNS = {
    "wegner1": ("s", "count", "prob", "stderr"),
    "wegner2": ("s", "count", "prob", "stderr"),
    "shift-test": ("trial", "n_particles", "radius", "shift", "n_x", "n_y",
                   "residual"),
    "ss-prob": ("unit", "trials", "singular", "bound"),
    "bad-good": ("trial", "verdict", "witness_kind", "n_singular", "n_scanned"),
    "dominated": ("unit", "instances", "holds", "singular_instances"),
    "wi-tensor": ("trial", "gap", "cross_norm", "cross_bound", "cross_bound_gap",
                  "offdiag_dev", "diag_dev", "eigensum_dev"),
    "etv": ("trial", "covered", "n_exceed", "n_grid", "budget"),
    "efc-decay": ("separation", "sym_dist", "hausdorff_dist", "mean", "stderr",
                  "trials", "mean_amp", "amp_margin", "gk_bound"),
    "gri-measure": ("unit", "trials", "premises_met", "violations", "c_gri",
                    "n_good", "n_nr"),
}

WEGNER2_EXPONENT = 2.0 / 3.0


def _finalize(cfg, payloads):
    kind = cfg.kind
    if kind in ("wegner1", "wegner2"):
        counts = np.sum([p["counts"] for p in payloads], axis=0)
        evc = EvcResult(np.asarray(cfg.s_grid), counts, cfg.trials,
                        {"kind": kind})
        rows = list(evc.rows())
        empty = sum(p["empty"] for p in payloads)
        if kind == "wegner1":
            theta, half = evc.slope_fit()
            summary = {"trials": cfg.trials, "theta_hat": theta,
                       "theta_halfwidth": half, "empty_window": empty}
        else:
            p = evc.empirical_prob
            c_hat = fitted_constant(evc.s_grid, p, WEGNER2_EXPONENT)
            viol = int((p > c_hat * evc.s_grid**WEGNER2_EXPONENT * (1 + 1e-12)).sum())
            summary = {"trials": cfg.trials, "c_hat": c_hat,
                       "exponent": WEGNER2_EXPONENT, "violations": viol,
                       "empty_window": empty}
        return rows, summary
    if kind in ("shift-test", "bad-good", "wi-tensor", "etv"):
        rows = [row for unit_rows in payloads for row in unit_rows]
        rows.sort(key=lambda r: r["trial"])
    else:
        rows = sorted(payloads, key=lambda r: r.get("unit", r.get("separation", 0)))

    if kind == "shift-test":
        summary = {"trials": cfg.trials,
                   "max_residual": max(r["residual"] for r in rows)}
    elif kind == "ss-prob":
        singular = sum(r["singular"] for r in rows)
        p_hat = singular / cfg.trials
        summary = {"trials": cfg.trials, "singular": singular, "p_hat": p_hat,
                   "stderr": math.sqrt(p_hat * (1 - p_hat) / cfg.trials),
                   "bound": rows[0]["bound"]}
    elif kind == "bad-good":
        n_bad = sum(r["verdict"] == "bad" for r in rows)
        summary = {"trials": cfg.trials, "n_bad": n_bad,
                   "n_good": cfg.trials - n_bad}
    elif kind == "dominated":
        instances = sum(r["instances"] for r in rows)
        holds = sum(r["holds"] for r in rows)
        summary = {"instances": instances, "holds": holds,
                   "all_hold": holds == instances}
    elif kind == "wi-tensor":
        ok = sum(r["cross_norm"] <= r["cross_bound_gap"] and
                 r["eigensum_dev"] <= 1e-9 for r in rows)
        summary = {"trials": cfg.trials, "n_ok": ok,
                   "max_eigensum_dev": max(r["eigensum_dev"] for r in rows),
                   "max_cross_norm": max(r["cross_norm"] for r in rows)}
    elif kind == "etv":
        viol = sum(1 - r["covered"] for r in rows)
        freq = viol / cfg.trials
        summary = {"trials": cfg.trials, "violations": viol, "freq": freq,
                   "stderr": math.sqrt(freq * (1 - freq) / cfg.trials),
                   "budget": rows[0]["budget"]}
    elif kind == "efc-decay":
        fit = fit_decay([r["separation"] for r in rows],
                        [r["mean"] for r in rows])
        summary = {"trials": cfg.trials,
                   "max_amp_margin": max(r["amp_margin"] for r in rows), **fit}
    elif kind == "gri-measure":
        summary = {"trials": cfg.trials,
                   "premises_met": sum(r["premises_met"] for r in rows),
                   "violations": sum(r["violations"] for r in rows),
                   "c_gri_max": max(r["c_gri"] for r in rows)}
    return rows, summary


# ---------------------------------------------------------------------------
# persistence


def _format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _rows_to_body(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_value(row[c]) for c in columns])
    return buf.getvalue()


@dataclass
class ResultRecord:
    kind: str
    config_hash: str
    content_id: str
    columns: tuple
    rows: list
    summary: dict
    wall_time: float
    path: str = ""


def write_result(path, record, cfg):
    meta = [
        "# anderson-lab result v1",
        f"# kind: {record.kind}",
        f"# config_sha256: {record.config_hash}",
        f"# content_id: {record.content_id}",
        f"# summary: {json.dumps(record.summary, sort_keys=True)}",
        f"# config: {json.dumps(json.loads(serialize_config(cfg)), sort_keys=True, separators=(',', ':'))}",
        f"# wall_time_s: {record.wall_time:.3f}",
    ]
    body = _rows_to_body(record.columns, record.rows)
    text = "\n".join(meta) + "\n" + body
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = os.path.join(directory, f".{os.path.basename(path)}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)


def read_result(path):
    """Parse a result file into (metadata, columns, rows); verifies the id."""
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    meta = {}
    data_lines = []
    for line in text.split("\n"):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            if value:
                meta[key.strip()] = value.strip()
        elif line:
            data_lines.append(line)
    body = "\n".join(data_lines) + "\n" if data_lines else ""
    if "content_id" in meta and content_id(body) != meta["content_id"]:
        raise ValueError(f"{path}: content id mismatch; file corrupted or edited")
    reader = csv.reader(io.StringIO(body))
    table = list(reader)
    if not table:
        raise ValueError(f"{path}: no data rows")
    columns = tuple(table[0])
    rows = [{c: _parse_value(v) for c, v in zip(columns, row)} for row in table[1:]]
    return meta, columns, rows


def _parse_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


# ---------------------------------------------------------------------------
# orchestration


def run(cfg, workers=None, strict=False):
    """Execute one configured experiment and write its result file."""
    problems = cfg.validate()
    if problems:
        raise ValueError("; ".join(problems))
    require_valid(cfg.params, strict=strict)
    n_workers = cfg.workers if workers is None else workers
    if n_workers < 1:
        raise ValueError("workers must be >= 1")
    plan = _unit_plan(cfg)
    t0 = time.perf_counter()
    if n_workers == 1 or len(plan) == 1:
        payloads = [_run_unit(cfg, u) for u in plan]
    else:
        payloads = [None] * len(plan)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = {pool.submit(_run_unit, cfg, u): j for j, u in enumerate(plan)}
            for fut in as_completed(futures):
                payloads[futures[fut]] = fut.result()
    rows, summary = _finalize(cfg, payloads)
    wall = time.perf_counter() - t0
    columns = _COLUMNS[cfg.kind]
    body = _rows_to_body(columns, rows)
    record = ResultRecord(kind=cfg.kind, config_hash=config_hash(cfg),
                          content_id=content_id(body), columns=columns,
                          rows=rows, summary=summary, wall_time=wall,
                          path=cfg.out)
    write_result(cfg.out, record, cfg)
    return record


# ---------------------------------------------------------------------------
# reporting


def _col(rows, name):
    return np.asarray([r[name] for r in rows])


def _plot_data(kind, rows):
    """(x, y[, yerr]) series for external plotting."""
    if kind in ("wegner1", "wegner2"):
        return ("s", "prob", "stderr"), [
            (r["s"], r["prob"], r["stderr"]) for r in rows]
    if kind == "shift-test":
        return ("trial", "residual"), [(r["trial"], r["residual"]) for r in rows]
    if kind == "ss-prob":
        return ("unit", "p_hat"), [
            (r["unit"], r["singular"] / r["trials"]) for r in rows]
    if kind == "bad-good":
        return ("trial", "is_bad"), [
            (r["trial"], int(r["verdict"] == "bad")) for r in rows]
    if kind == "dominated":
        return ("unit", "hold_fraction"), [
            (r["unit"], r["holds"] / r["instances"]) for r in rows]
    if kind == "wi-tensor":
        return ("trial", "eigensum_dev"), [
            (r["trial"], r["eigensum_dev"]) for r in rows]
    if kind == "etv":
        return ("trial", "n_exceed"), [(r["trial"], r["n_exceed"]) for r in rows]
    if kind == "efc-decay":
        return ("separation", "mean", "stderr"), [
            (r["separation"], r["mean"], r["stderr"]) for r in rows]
    if kind == "gri-measure":
        return ("unit", "c_gri"), [(r["unit"], r["c_gri"]) for r in rows]
    raise ValueError(f"unknown experiment kind {kind!r}")


def _judge(kind, rows):
    """Re-derive headline statistics from rows; (metric, value, threshold, status)."""
    checks = []
    if kind == "wegner1":
        trials = _trials_from_prob(rows)
        evc = EvcResult(_col(rows, "s"), _col(rows, "count"), trials, {})
        theta = evc.theta_hat
        checks.append(("theta_hat", theta, ">= 0.9",
                       _status(theta >= 0.9, math.isnan(theta))))
    elif kind == "wegner2":
        s, p = _col(rows, "s"), _col(rows, "prob")
        c_hat = fitted_constant(s, p, WEGNER2_EXPONENT)
        viol = int((p > c_hat * s**WEGNER2_EXPONENT * (1 + 1e-12)).sum())
        checks.append(("c_hat", c_hat, "", "info"))
        checks.append(("grid_violations", viol, "== 0", _status(viol == 0)))
    elif kind == "shift-test":
        worst = float(_col(rows, "residual").max())
        checks.append(("max_residual", worst, "< 1e-09", _status(worst < 1e-9)))
    elif kind == "ss-prob":
        trials = int(_col(rows, "trials").sum())
        p_hat = float(_col(rows, "singular").sum()) / trials
        checks.append(("p_hat", p_hat, "", "info"))
    elif kind == "bad-good":
        n_bad = int((_col(rows, "verdict") == "bad").sum())
        checks.append(("n_bad", n_bad, "", "info"))
    elif kind == "dominated":
        inst = int(_col(rows, "instances").sum())
        holds = int(_col(rows, "holds").sum())
        checks.append(("holds", holds, f"== {inst}", _status(holds == inst)))
    elif kind == "wi-tensor":
        excess = (_col(rows, "cross_norm") - _col(rows, "cross_bound_gap")).max()
        worst = float(_col(rows, "eigensum_dev").max())
        checks.append(("cross_excess", float(excess), "<= 0",
                       _status(excess <= 0)))
        checks.append(("max_eigensum_dev", worst, "<= 1e-09",
                       _status(worst <= 1e-9)))
    elif kind == "etv":
        covered = _col(rows, "covered")
        freq = float(1.0 - covered.mean())
        stderr = math.sqrt(freq * (1 - freq) / covered.size)
        budget = float(rows[0]["budget"])
        checks.append(("violation_freq", freq,
                       f"<= {budget + 3 * stderr:.6g}",
                       _status(freq <= budget + 3 * stderr)))
    elif kind == "efc-decay":
        means = _col(rows, "mean")
        fit = fit_decay(_col(rows, "separation"), means)
        mono = bool((np.diff(means) < 0).all())
        checks.append(("monotone_decrease", int(mono), "strict", _status(mono)))
        checks.append(("slope", fit["slope"], "< 0",
                       _status(fit["slope"] < 0, math.isnan(fit["slope"]))))
        checks.append(("slope_pvalue", fit["pvalue"], "< 0.01",
                       _status(fit["pvalue"] < 0.01, math.isnan(fit["pvalue"]))))
        checks.append(("nu_hat", fit["nu_hat"], "", "info"))
        checks.append(("kappa_hat", fit["kappa_hat"], "", "info"))
        margin = float(_col(rows, "amp_margin").max())
        checks.append(("max_amp_margin", margin, "<= 1e-12",
                       _status(margin <= 1e-12)))
    elif kind == "gri-measure":
        viol = int(_col(rows, "violations").sum())
        checks.append(("violations", viol, "== 0", _status(viol == 0)))
        checks.append(("c_gri_max", float(_col(rows, "c_gri").max()), "", "info"))
    return checks


def _trials_from_prob(rows):
    for r in rows:
        if r["prob"] > 0:
            return max(1, round(r["count"] / r["prob"]))
    return max(1, int(_col(rows, "count").max()))


def _status(ok, undecided=False):
    if undecided:
        return "n/a"
    return "pass" if ok else "FAIL"


def report(paths, out_dir=None, figures=True):
    """Summarize result files; write summary, plot data, and figures.

    Returns the summary rows.  Raises on empty input or unreadable
    files.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("no result files given")
    out_dir = out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    summary_rows = []
    for path in paths:
        meta, columns, rows = read_result(path)
        kind = meta.get("kind", "")
        if kind not in KINDS:
            raise ValueError(f"{path}: unknown or missing experiment kind {kind!r}")
        stem = os.path.splitext(os.path.basename(path))[0]
        header, series = _plot_data(kind, rows)
        plot_path = os.path.join(out_dir, f"{stem}-plotdata.csv")
        _write_plotdata(plot_path, header, series)
        for metric, value, threshold, status in _judge(kind, rows):
            summary_rows.append({"file": os.path.basename(path), "kind": kind,
                                 "metric": metric, "value": value,
                                 "threshold": threshold, "status": status})
        if figures:
            from . import figures as figmod
            figmod.render(kind, meta, rows, os.path.join(out_dir, f"{stem}.png"))
    _write_summary(os.path.join(out_dir, "summary.csv"), summary_rows)
    return summary_rows


def _write_plotdata(path, header, series):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for point in series:
        writer.writerow([_format_value(v) for v in point])
    tmp = f"{path}.{os.getpid()}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())
    os.replace(tmp, path)


def _write_summary(path, summary_rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("file", "kind", "metric", "value", "threshold", "status"))
    for row in summary_rows:
        writer.writerow([_format_value(row[c]) for c in
                         ("file", "kind", "metric", "value", "threshold", "status")])
    tmp = f"{path}.{os.getpid()}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())
    os.replace(tmp, path)


def format_summary(summary_rows):
    """Aligned text table of report rows for terminal output."""
    headers = ("file", "kind", "metric", "value", "threshold", "status")
    table = [headers]
    for row in summary_rows:
        value = row["value"]
        shown = f"{value:.6g}" if isinstance(value, float) else str(value)
        table.append((row["file"], row["kind"], row["metric"], shown,
                      row["threshold"], row["status"]))
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
             for r in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
