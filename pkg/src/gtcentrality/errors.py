"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed or inconsistent input (network files, partitions, configs)."""


class CapacityError(ValueError):
    """Instance exceeds the size cap of an exact or bitmask-based routine."""
