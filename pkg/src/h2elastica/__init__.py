"""H^2(ds) Sobolev gradient flow of the modified elastic energy for closed curves."""

__version__ = "0.1.0"
