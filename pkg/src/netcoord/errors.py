class NetCoordError(Exception):
    pass


class ParameterError(NetCoordError, ValueError):
    """Invalid arguments to a generator or protocol operation."""


class GenerationError(NetCoordError, RuntimeError):
    """A random generator exhausted its retry budget."""


class StructureError(NetCoordError, ValueError):
    """A graph does not have the structure an operation requires."""


class EnvelopeParseError(NetCoordError, ValueError):
    """Agent output did not contain a usable flat JSON message object."""


class BackendError(NetCoordError, RuntimeError):
    """An agent backend failed to produce output (transport, quota, ...)."""


class RunFailedError(NetCoordError, RuntimeError):
    """A run was abandoned after a backend kept failing."""


class ConfigError(NetCoordError, ValueError):
    pass
