"""gammakit: numerical tools for the symmetrized polydisc."""

__version__ = "0.1.0"
