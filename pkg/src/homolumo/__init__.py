"""HOMO-LUMO gaps of graphs and optimal bridging of two graphs."""

__version__ = "0.1.0"
