"""
SVG line plots for sweep reports
"""
import io

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from io_utils import write_text

COLORS = ("#348ABD", "#E24A33", "#8EBA42", "#988ED5", "#777777")

# Fixed ids and no date stamp: identical inputs give identical files
plt.rcParams["svg.hashsalt"] = "geolab"


def clean_ax(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)


def line_plot(series, title='', x_label='', y_label=''):
    """
    Render series as an SVG document.

    Args:
        series: list of (label, xs, ys) with finite numbers
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for index, (label, xs, ys) in enumerate(series):
        ax.plot(list(xs), list(ys), marker='o', color=COLORS[index % len(COLORS)], label=label)
    ax.set_title(title)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    clean_ax(ax)
    if any(len(xs) for _, xs, _ in series):
        ax.legend(frameon=False)

    buffer = io.StringIO()
    fig.savefig(buffer, format='svg', bbox_inches='tight', metadata={'Date': None})
    plt.close(fig)
    return buffer.getvalue()


def write_line_plot(path, series, title='', x_label='', y_label=''):
    write_text(path, line_plot(series, title, x_label, y_label))
