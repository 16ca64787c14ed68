"""qikit - quantum instruments as outcome-indexed Pauli transfer matrices."""

__version__ = "0.1.0"
