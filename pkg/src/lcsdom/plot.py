"""Static SVG line charts of trajectories (needs the optional matplotlib)."""

import numpy as np

__all__ = ["write_svg"]


def write_svg(path, t, series, labels, title="", xlabel="t [s]"):
    """Write one line per column of ``series`` against ``t``.

    Layout is fixed (8x4.5 in, legend upper right) and the SVG hash salt and
    date are pinned, so the same data always produces the same file.
    """
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("SVG output needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = np.atleast_2d(np.asarray(series, dtype=float))
    if series.shape[0] != len(t):
        series = series.T
    with matplotlib.rc_context({"svg.hashsalt": "lcsdom", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for col, label in zip(series.T, labels):
            ax.plot(t, col, linewidth=1.0, label=label)
        ax.set_xlabel(xlabel)
        ax.set_title(title)
        ax.grid(True, linewidth=0.3)
        ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
