"""Large-deviation error rates for sums in the domain of an alpha=1 stable law."""

__version__ = "0.1.0"
