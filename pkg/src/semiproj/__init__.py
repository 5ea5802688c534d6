"""Phase-space numerics for projection operators in the semiclassical regime."""

__version__ = "0.1.0"
