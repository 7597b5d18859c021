"""zetalab: desk-scale numerics for the first moment of zeta on the critical line."""

__version__ = "0.1.0"
