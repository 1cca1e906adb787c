"""
CSV export of curves, traces, unit tables and replicate vectors.
"""

from .writers import replicates_frame, write_curve, write_replicates, write_trace, write_unit_table

__all__ = ['replicates_frame', 'write_curve', 'write_replicates', 'write_trace', 'write_unit_table']
