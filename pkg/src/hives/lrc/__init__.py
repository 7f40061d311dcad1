"""Littlewood-Richardson coefficients as integer-hive counts."""

from .lattice import lattice_lrc, max_lp_hive, unique_accumulate
from .oracle import exact_lrc
from .rounded import continuum_volume, hit_and_run, rounded_lrc

__all__ = ["exact_lrc", "lattice_lrc", "max_lp_hive", "unique_accumulate", "continuum_volume",
           "hit_and_run", "rounded_lrc"]
