"""qpvlab: a toolkit for the single-qubit quantum position-verification protocol."""

__version__ = "0.3.0"
