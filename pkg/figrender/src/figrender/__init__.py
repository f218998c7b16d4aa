"""Offline renderer turning bandit-lan histogram CSVs into figure grids.

Reads the ``hist_<policy>_<stat>_m1_<m1>.csv`` files written by
``bandit-lan reproduce-fig`` and draws one row per mean offset: suboptimal
arm pull counts followed by the three studentized statistics, with an
optional standard-normal overlay. All numbers come from the CSVs; this
package computes nothing statistical.
"""

from .render import FigureSpec, PanelReport, load_histogram_csv, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "PanelReport", "load_histogram_csv", "render"]
