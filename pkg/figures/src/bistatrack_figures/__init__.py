"""Offline rendering of simulator CSV outputs into the standard figure set.

The scripts plot logged columns only and never recompute physics, keeping
the simulation package's results independently checkable.
"""

__version__ = "0.1.0"
