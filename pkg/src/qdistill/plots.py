"""Figure rendering for the report path.

Saved-to-file matplotlib figures only: 3D bar plots of the density
matrices before and after distillation, and a before/after bar chart of
the entanglement and CHSH measures with bootstrap error bars.
"""

import numpy as np

_TICKS = ["HH", "HV", "VH", "VV"]


def _bars(ax, values, title):
    xs, ys = np.meshgrid(range(4), range(4), indexing="ij")
    ax.bar3d(
        xs.ravel() - 0.35,
        ys.ravel() - 0.35,
        np.zeros(16),
        0.7,
        0.7,
        values.ravel(),
        color="#4878cf",
        edgecolor="black",
        linewidth=0.3,
        shade=True,
    )
    ax.set_zlim(-0.5, 1.0)
    ax.set_xticks(range(4), _TICKS, fontsize=7)
    ax.set_yticks(range(4), _TICKS, fontsize=7)
    ax.tick_params(axis="z", labelsize=7)
    ax.set_title(title, fontsize=9)


def save_state_figure(path, rho_before, rho_after=None) -> None:
    """Real and imaginary parts of the density matrices as 3D bar plots."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    states = [("before", rho_before)]
    if rho_after is not None:
        states.append(("after", rho_after))
    fig = plt.figure(figsize=(7, 3.4 * len(states)))
    for row, (label, rho) in enumerate(states):
        for col, (part, values) in enumerate(
            (("Re", np.real(rho)), ("Im", np.imag(rho)))
        ):
            ax = fig.add_subplot(
                len(states), 2, 2 * row + col + 1, projection="3d"
            )
            _bars(ax, values, f"{part}(rho) {label}")
    fig.subplots_adjust(left=0.02, right=0.98, bottom=0.04, top=0.94, wspace=0.1)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_measures_figure(path, report) -> None:
    """Before/after measures with error bars and the CHSH bounds."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    mb, ma = report.measures_before, report.measures_after
    eb, ea = report.errors_before, report.errors_after
    names = ["concurrence", "eof", "s_value"]
    before = [mb.concurrence, mb.eof, mb.s_value]
    after = [ma.concurrence, ma.eof, ma.s_value] if ma else [np.nan] * 3
    err_b = [eb.get(n, 0.0) for n in names]
    err_a = [ea.get(n, 0.0) for n in names]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 3.2))
    x = np.arange(2)
    width = 0.38
    ax1.bar(x - width / 2, before[:2], width, yerr=[err_b[0], err_b[1]],
            capsize=3, label="before", color="#bbbbbb", edgecolor="black")
    ax1.bar(x + width / 2, after[:2], width, yerr=[err_a[0], err_a[1]],
            capsize=3, label="after", color="#4878cf", edgecolor="black")
    ax1.set_xticks(x, ["concurrence", "EoF"])
    ax1.set_ylim(0, 1.05)
    ax1.legend(frameon=False, fontsize=8)
    ax1.set_title("entanglement", fontsize=9)

    ax2.bar([0 - width / 2], [before[2]], width, yerr=[err_b[2]], capsize=3,
            color="#bbbbbb", edgecolor="black")
    ax2.bar([0 + width / 2], [after[2]], width, yerr=[err_a[2]], capsize=3,
            color="#4878cf", edgecolor="black")
    ax2.axhline(2.0, color="black", linestyle="--", linewidth=0.8)
    ax2.axhline(2 * np.sqrt(2), color="black", linestyle=":", linewidth=0.8)
    ax2.text(0.42, 2.0, " local bound", fontsize=7, va="bottom")
    ax2.text(0.42, 2 * np.sqrt(2), " quantum max", fontsize=7, va="top")
    ax2.set_xticks([0], ["CHSH S"])
    ax2.set_xlim(-0.6, 1.0)
    ax2.set_ylim(0, 3.0)
    ax2.set_title("nonlocality", fontsize=9)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
