"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GraftFlatError(Exception):
    """Base class for every error raised by the package."""


class IntersectingOrAsymptotic(GraftFlatError):
    """Two geodesics meet in H^2 or share an ideal endpoint."""


class NoSolution(GraftFlatError):
    """A root-finding problem has no admissible solution."""


class InvalidRegion(GraftFlatError):
    """A requested planar region is empty or not of the expected shape."""


class InvalidDecomposition(GraftFlatError, ValueError):
    """Pants-decomposition combinatorics are inconsistent."""


class BudgetExceeded(GraftFlatError):
    """A distance net would exceed the configured node cap."""


class PartialSupport(GraftFlatError):
    """Deflation needs a weight on every decomposition curve."""


class DegenerateSpine(GraftFlatError):
    """A pants spine is a figure-eight, which deflation does not glue."""


class InconsistentGluing(GraftFlatError):
    """Arc identifications on a flat complex do not close up."""


class InconsistentWidths(GraftFlatError):
    """Flat arc data is not the deflation of any pants-multicurve surface."""


class ConfigError(GraftFlatError):
    """Experiment configuration failed schema validation."""


class ContractViolation(GraftFlatError):
    """A numerical contract checked by an experiment failed."""
