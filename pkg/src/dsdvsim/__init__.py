"""Discrete-event simulator for DSDV routing under pluggable link-quality metrics."""

__version__ = "0.1.0"
