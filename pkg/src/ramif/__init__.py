"""Real analytic modular forms as truncated bigraded Fourier expansions."""

__version__ = "0.1.0"
