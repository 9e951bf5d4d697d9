"""Numerical laboratory for scale-free unique continuation, random breather
potentials, Wegner estimates and heat-equation observability."""

__version__ = "0.1.0"
