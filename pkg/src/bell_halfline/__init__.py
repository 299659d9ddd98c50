"""Bell-CHSH correlators on the half-line via Carleman and Hankel forms."""

__version__ = "0.1.0"
