"""Second-order program checker: parse, run, tier inference and size-change analysis."""

__version__ = "0.1.0"
