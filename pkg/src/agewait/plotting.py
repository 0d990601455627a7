"""Figure rendering for sweep results."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_LABELS = {
    "inv_f_max": "1 / f_max",
    "rho": "lag-1 correlation",
    "sigma": "log-normal scale",
    "alpha": "penalty shape",
}

_STYLES = {
    "optimal": dict(marker="o", color="tab:blue"),
    "zero_wait": dict(marker="s", color="tab:orange"),
    "constant_wait": dict(marker="^", color="tab:green"),
    "minimum_wait": dict(marker="d", color="tab:red"),
}


def plot_sweep(rows, variable: str, path) -> None:
    """Render average penalty vs. the sweep variable, one line per policy."""
    by_policy: dict[str, tuple[list, list]] = {}
    for row in rows:
        if row.analytic is None:
            continue
        xs, ys = by_policy.setdefault(row.policy, ([], []))
        xs.append(row.value)
        ys.append(row.analytic)

    fig, ax = plt.subplots(figsize=(6, 4))
    for policy, (xs, ys) in by_policy.items():
        style = _STYLES.get(policy, {})
        ax.plot(xs, ys, label=policy.replace("_", " "), **style)
    ax.set_xlabel(_LABELS.get(variable, variable))
    ax.set_ylabel("average age penalty")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
