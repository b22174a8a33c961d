"""Figure rendering for result files; one PNG per experiment kind."""

import json
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import WEGNER2_EXPONENT, fit_decay, fitted_constant


def _summary(meta):
    try:
        return json.loads(meta.get("summary", "{}"))
    except json.JSONDecodeError:
        return {}


def _col(rows, name):
    return np.asarray([r[name] for r in rows])


def _wegner(ax, meta, rows, kind):
    s = _col(rows, "s")
    p = _col(rows, "prob")
    err = _col(rows, "stderr")
    ax.errorbar(s, p, yerr=err, fmt="o-", ms=3, lw=1, label="empirical")
    keep = p > 0
    if kind == "wegner1":
        theta = _summary(meta).get("theta_hat")
        if theta is not None and math.isfinite(theta) and keep.any():
            anchor = p[keep][-1] / s[keep][-1] ** theta
            ax.plot(s, anchor * s**theta, "--", lw=1,
                    label=f"slope {theta:.2f}")
    else:
        c_hat = fitted_constant(s, p, WEGNER2_EXPONENT)
        if c_hat > 0:
            ax.plot(s, c_hat * s**WEGNER2_EXPONENT, "--", lw=1,
                    label=f"{c_hat:.3g} s^(2/3)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("s")
    ax.set_ylabel("P(dist <= s)")
    ax.legend(fontsize=8)


def _shift(ax, meta, rows):
    ax.semilogy(_col(rows, "trial"), np.maximum(_col(rows, "residual"), 1e-18),
                ".", ms=4)
    ax.axhline(1e-9, ls="--", lw=1, color="tab:red", label="1e-9")
    ax.set_xlabel("trial")
    ax.set_ylabel("shift-identity residual")
    ax.legend(fontsize=8)


def _ss_prob(ax, meta, rows):
    units = _col(rows, "unit")
    p = _col(rows, "singular") / _col(rows, "trials")
    ax.bar(units, p, width=0.8)
    bound = rows[0]["bound"]
    ax.axhline(bound, ls="--", lw=1, color="tab:red",
               label=f"target bound {bound:.3g}")
    ax.set_xlabel("work unit")
    ax.set_ylabel("singular fraction")
    ax.legend(fontsize=8)


def _bad_good(ax, meta, rows):
    verdicts = [r["verdict"] for r in rows]
    counts = [verdicts.count("good"), verdicts.count("bad")]
    ax.bar(["good", "bad"], counts, color=["tab:green", "tab:red"])
    ax.set_ylabel("samples")


def _dominated(ax, meta, rows):
    units = _col(rows, "unit")
    frac = _col(rows, "holds") / _col(rows, "instances")
    ax.plot(units, frac, "o-", ms=3)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("work unit")
    ax.set_ylabel("bound-holds fraction")


def _wi_tensor(ax, meta, rows):
    t = _col(rows, "trial")
    ax.semilogy(t, np.maximum(_col(rows, "eigensum_dev"), 1e-18), "o", ms=3,
                label="eigensum deviation")
    ax.semilogy(t, np.maximum(_col(rows, "cross_norm"), 1e-18), "s", ms=3,
                label="cross norm")
    ax.axhline(max(rows[0]["cross_bound_gap"], 1e-18), ls="--", lw=1,
               color="tab:red", label="cross bound")
    ax.set_xlabel("trial")
    ax.set_ylabel("magnitude")
    ax.legend(fontsize=8)


def _etv(ax, meta, rows):
    t = _col(rows, "trial")
    ax.plot(t, _col(rows, "n_exceed"), "o", ms=3, label="grid exceedances")
    covered = _col(rows, "covered")
    bad = t[covered == 0]
    if bad.size:
        ax.plot(bad, np.zeros_like(bad), "rx", ms=8, label="not covered")
    ax.set_xlabel("trial")
    ax.set_ylabel("count")
    ax.legend(fontsize=8)


def _efc(ax, meta, rows):
    d = _col(rows, "separation")
    m = _col(rows, "mean")
    err = _col(rows, "stderr")
    ax.errorbar(d, np.maximum(m, 1e-300), yerr=err, fmt="o", ms=4,
                label="mean correlator")
    fit = fit_decay(d, m)
    if math.isfinite(fit["nu_hat"]):
        xs = np.linspace(d.min(), d.max(), 100)
        keep = m > 0
        logc = (np.log(m[keep]) + fit["nu_hat"] * d[keep] ** fit["kappa_hat"]).mean()
        ax.plot(xs, np.exp(logc - fit["nu_hat"] * xs ** fit["kappa_hat"]), "--",
                lw=1, label=f"nu {fit['nu_hat']:.2f}, kappa {fit['kappa_hat']:.2f}")
    ax.set_yscale("log")
    ax.set_xlabel("separation")
    ax.set_ylabel("mean correlator")
    ax.legend(fontsize=8)


def _gri(ax, meta, rows):
    ax.bar(_col(rows, "unit"), _col(rows, "c_gri"), width=0.8)
    ax.set_xlabel("work unit")
    ax.set_ylabel("measured interface constant")


def render(kind, meta, rows, path):
    """Render one result file to a PNG at the given path."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0), dpi=120)
    if kind in ("wegner1", "wegner2"):
        _wegner(ax, meta, rows, kind)
    elif kind == "shift-test":
        _shift(ax, meta, rows)
    elif kind == "ss-prob":
        _ss_prob(ax, meta, rows)
    elif kind == "bad-good":
        _bad_good(ax, meta, rows)
    elif kind == "dominated":
        _dominated(ax, meta, rows)
    elif kind == "wi-tensor":
        _wi_tensor(ax, meta, rows)
    elif kind == "etv":
        _etv(ax, meta, rows)
    elif kind == "efc-decay":
        _efc(ax, meta, rows)
    elif kind == "gri-measure":
        _gri(ax, meta, rows)
    else:
        plt.close(fig)
        raise ValueError(f"unknown experiment kind {kind!r}")
    ax.set_title(kind)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
