"""Dynamic well-linked superbranch decompositions, protrusion decompositions
and problem kernels for sparse graphs."""

__version__ = "0.1.0"
