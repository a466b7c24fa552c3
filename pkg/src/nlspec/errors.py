"""Exception hierarchy. Every error carries the module that raised it."""


class NlspecError(Exception):
    module = "nlspec"

    def __str__(self) -> str:
        return f"{self.module}: {super().__str__()}"


class KernelError(NlspecError, ValueError):
    module = "kernel"


class AssemblyError(NlspecError, ValueError):
    module = "discretization"


class PencilError(NlspecError, ValueError):
    module = "pencil"


class InadmissibleIndexError(PencilError):
    pass


class MinimaxError(NlspecError, ValueError):
    module = "minimax"


class ExperimentError(NlspecError, ValueError):
    module = "experiments"


class ConfigError(NlspecError, ValueError):
    module = "cli"
