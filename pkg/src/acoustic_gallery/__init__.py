"""Gallery modes, wave packets and Strichartz scaling ladders for a degenerate wave equation."""

__version__ = "0.1.0"
