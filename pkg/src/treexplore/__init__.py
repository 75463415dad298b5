"""Online exploration of unknown trees by energy-constrained agents."""

__version__ = "0.1.0"
