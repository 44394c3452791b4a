"""SOS upper bounds on time averages in polynomial ODEs.

The heavy lifting lives in the compiled ``_ergobound`` extension; this
package adds readers for the files the command-line tool writes.
"""

from ._ergobound import *  # noqa: F401,F403
from ._ergobound import RegionGrid
from .formats import read_bound_summary, read_csv_columns, read_gap_report, read_region_grid

__all__ = [name for name in dir() if not name.startswith("_")]
