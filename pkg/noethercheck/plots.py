"""
Line plots of charge series and of the discrete energy, saved as SVG.
"""

import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from noethercheck.artifacts import atomic_path


def _save(figure, output_directory, filename):
    path = os.path.join(output_directory, filename)
    with atomic_path(path) as temporary:
        figure.savefig(temporary, format="svg", bbox_inches="tight")
    plt.close(figure)
    logging.info(f"The plot {filename} is saved in {output_directory}.")
    return path


def plot_charges(series, output_directory, filename="charges.svg", relative=True):
    """
    Plots charge series over time.

    Parameters
    ----------
    series: list of :class:`~.diagnostics.ChargeSeries`
    output_directory: str
        directory the SVG file is saved in
    filename: str
        Default: "charges.svg"
    relative: bool
        if True, C(t) - C(t0) is plotted, which keeps charges of very
        different size readable in one figure. Default: True

    Returns
    -------
    str
        path of the SVG file
    """
    figure, axis = plt.subplots(figsize=(8, 5))
    for s in series:
        values = s.values - s.values[0] if relative else s.values
        axis.plot(s.times, values, label=s.name)
    axis.set_xlabel("t")
    axis.set_ylabel("C(t) - C(t0)" if relative else "C(t)")
    axis.set_title("Charges")
    if series:
        axis.legend(bbox_to_anchor=(1.05, 1), loc=2, borderaxespad=0.0)
    return _save(figure, output_directory, filename)


def plot_energy(series, output_directory, filename="energy.svg"):
    """Plots the discrete energy E(t) of a run."""
    figure, axis = plt.subplots(figsize=(8, 5))
    axis.plot(series.times, series.values, color="black")
    axis.set_xlabel("t")
    axis.set_ylabel("E(t)")
    axis.set_title("Energy")
    return _save(figure, output_directory, filename)
