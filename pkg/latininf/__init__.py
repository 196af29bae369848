"""latininf - infinite Latin squares, terraces and strong complete mappings."""

__version__ = "0.1.0"
