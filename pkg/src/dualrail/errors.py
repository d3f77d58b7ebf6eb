class DualRailError(Exception):
    """Base class for all errors raised by the package."""


class DimensionError(DualRailError, ValueError):
    pass


class NullBranchError(DualRailError):
    """A conditioned branch has zero probability and cannot be normalized."""


class IntegrationError(DualRailError, RuntimeError):
    """The time integrator could not meet its accuracy target."""


class ConfigError(DualRailError, ValueError):
    pass
