"""Classical simulation of an adiabatic-inspired QLSA for tensor-format linear systems."""

__version__ = "0.1.0"
