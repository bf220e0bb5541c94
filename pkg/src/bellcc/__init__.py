"""Bell-inequality violation as the criterion for quantum advantage in one-bit-broadcast
communication complexity problems."""

__version__ = "0.1.0"
