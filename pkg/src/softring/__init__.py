"""Design-space exploration toolkit for soft ring-frame quadrotors."""

__version__ = "0.1.0"

G = 9.80665
