"""Delimited output and matplotlib rendering for experiment results.

CSV carries 6 significant digits (human-diffable); JSON keeps full
precision.  Figures are rendered to files next to the delimited output and
never to an interactive backend.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .bounds import BoundReport
from .experiments import SweepResult


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def sweep_to_csv(sweep: SweepResult) -> str:
    lines = ["n,trials,failures,pe_hat,ci_low,ci_high"]
    for n, est in zip(sweep.n_grid, sweep.estimates):
        lines.append(",".join(_fmt(v) for v in
                              (n, est.trials, est.failures, est.pe_hat,
                               est.ci_low, est.ci_high)))
    return "\n".join(lines) + "\n"


def sweep_to_json(sweep: SweepResult) -> str:
    return json.dumps({
        "n_grid": list(sweep.n_grid),
        "estimates": [asdict(e) for e in sweep.estimates],
        "n_star_formula": sweep.n_star_formula,
        "n_cross": sweep.n_cross,
    })


def figure1_to_csv(rows) -> str:
    lines = ["pi_id,r,f_r"]
    for pi_id, r, f_r in rows:
        lines.append(f"{pi_id},{r},{_fmt(f_r)}")
    return "\n".join(lines) + "\n"


def bounds_to_csv(reports: list[BoundReport]) -> str:
    lines = ["name,n_bound,argmax,regime_note"]
    for rep in reports:
        argmax = "" if rep.argmax is None else str(rep.argmax).replace(",", ";")
        lines.append(f"{rep.name},{_fmt(rep.n_bound)},{argmax},{rep.regime_note}")
    return "\n".join(lines) + "\n"


def bounds_to_json(reports: list[BoundReport]) -> str:
    return json.dumps([rep.to_dict() for rep in reports])


def render_figure1(rows, path: str) -> None:
    """Entropy-gap ratio f(r) versus r, one line per proportion vector."""
    by_id: dict[str, list[tuple[int, float]]] = {}
    for pi_id, r, f_r in rows:
        by_id.setdefault(pi_id, []).append((r, f_r))
    fig, ax = plt.subplots(figsize=(6, 4))
    for pi_id, pts in by_id.items():
        pts.sort()
        ax.plot([r for r, _ in pts], [f for _, f in pts], marker="o", label=pi_id)
    ax.set_xlabel("r")
    ax.set_ylabel("f(r)  [nats]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(sweep: SweepResult, path: str) -> None:
    """Estimated error probability versus number of tests, with 95%
    intervals and the formula threshold marked."""
    ns = sweep.n_grid
    pe = [e.pe_hat for e in sweep.estimates]
    lo = [e.pe_hat - e.ci_low for e in sweep.estimates]
    hi = [e.ci_high - e.pe_hat for e in sweep.estimates]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(ns, pe, yerr=[lo, hi], marker="o", capsize=3, label="pe_hat")
    if min(ns) <= sweep.n_star_formula <= max(ns):
        ax.axvline(sweep.n_star_formula, color="k", linestyle="--",
                   label="n* (formula)")
    ax.set_xlabel("number of tests n")
    ax.set_ylabel("error probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
