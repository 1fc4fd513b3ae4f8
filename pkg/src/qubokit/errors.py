"""Exception types shared across the package."""
from __future__ import annotations


class QubokitError(ValueError):
    """Base class for domain errors raised by this package."""


class DimensionError(QubokitError):
    """A vector or matrix has the wrong shape for the operation."""


class DomainError(QubokitError):
    """A value lies outside the domain the operation is defined on."""


class ParameterError(QubokitError):
    """A configuration or formulation parameter is invalid."""


class CapacityError(QubokitError):
    """Problem size exceeds a hard capacity limit of the operation."""


class EmptyInputError(QubokitError):
    """An operation that needs at least one element received none."""


class FormatError(QubokitError):
    """A file or text payload does not conform to the expected format."""


class InventoryError(QubokitError):
    """An order requires a product that no stored item provides."""
