from ._commands import BenchCommand
from ._commands import BenchSystem
from ._commands import ConvergeCommand
from ._commands import RunCommand
from ._config import ConfigFromDict
from ._config import ConfigToDict
from ._config import ConfigurationError
from ._config import ParseConfig
from ._config import RunMethod
from ._config import SimulationConfig
from ._main import main
from ._outputs import RunManifest

__all__ = [
    "BenchCommand",
    "BenchSystem",
    "ConfigFromDict",
    "ConfigToDict",
    "ConfigurationError",
    "ConvergeCommand",
    "ParseConfig",
    "RunCommand",
    "RunManifest",
    "RunMethod",
    "SimulationConfig",
    "main",
]
