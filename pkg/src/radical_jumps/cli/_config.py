# mypy: disallow-untyped-defs
"""
Configuration files of the command line.

A configuration is a YAML document (JSON documents are YAML too) with the sections ``system``,
``run`` and ``output`` and the optional ``convergence`` and ``bench``. A run manifest written by
a previous run is accepted as well; its ``config`` member is used. Every problem is reported as
a :class:`ConfigurationError` naming the dotted path of the offending entry.
"""
from typing import Any
from typing import Optional

import attr
import enum
import math
import numpy as np
import os
import yaml
from collections.abc import Mapping
from pathlib import Path

from radical_jumps.mcwf import InitialStateStrategy
from radical_jumps.model import DEFAULT_G_FACTOR
from radical_jumps.model import DIRECTION_NORM_TOLERANCE
from radical_jumps.model import AxialHyperfine
from radical_jumps.model import DissipationSpec
from radical_jumps.model import FieldSpec
from radical_jumps.model import IsotropicHyperfine
from radical_jumps.model import KineticsSpec
from radical_jumps.model import NucleusSpec
from radical_jumps.model import SpecError
from radical_jumps.model import SpinSystemSpec

OUTPUT_DIR_VARIABLE = "RADICAL_JUMPS_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "radical_jumps_output"
OUTPUT_FORMATS = ("csv", "gnuplot")
GRID_DIVISION_TOLERANCE = 1e-9


class ConfigurationError(SpecError):
    """
    An invalid configuration file. ``field`` is the dotted path of the offending entry.
    """


class RunMethod(enum.Enum):
    MCWF = "mcwf"
    ME = "me"
    COMPARE = "compare"


@attr.s(auto_attribs=True, frozen=True)
class RunSettings:
    method: RunMethod = RunMethod.MCWF
    n_samples: int = 1000
    master_seed: int = 0
    t_max: float = 10.0
    grid_dt: float = 1e-3
    strategy: InitialStateStrategy = InitialStateStrategy.SPIN_COHERENT
    worker_count: int = 1
    factor_kf: bool = False
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    me_abs_tol: float = 1e-8
    me_rel_tol: float = 1e-8
    me_dim_cap: int = 4096

    def __attrs_post_init__(self) -> None:
        for name in ("t_max", "grid_dt", "abs_tol", "rel_tol", "me_abs_tol", "me_rel_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"run.{name}", f"must be positive, got {value}.")
        for name in ("n_samples", "worker_count", "me_dim_cap"):
            if getattr(self, name) < 1:
                raise ConfigurationError(
                    f"run.{name}", f"must be at least 1, got {getattr(self, name)}."
                )
        if self.master_seed < 0:
            raise ConfigurationError(
                "run.master_seed", f"must be non-negative, got {self.master_seed}."
            )
        if self.grid_dt > self.t_max:
            raise ConfigurationError("run.grid_dt", "must not exceed run.t_max.")
        steps = self.t_max / self.grid_dt
        if abs(steps - round(steps)) > GRID_DIVISION_TOLERANCE * steps:
            raise ConfigurationError(
                "run.grid_dt", f"must divide run.t_max = {self.t_max} into whole steps."
            )

    def Grid(self) -> np.ndarray:
        """
        Output times ``0, grid_dt, ..., t_max`` in us.
        """
        steps = int(round(self.t_max / self.grid_dt))
        return np.linspace(0.0, self.t_max, steps + 1)


@attr.s(auto_attribs=True, frozen=True)
class OutputSettings:
    directory: str = attr.ib(
        factory=lambda: os.environ.get(OUTPUT_DIR_VARIABLE, DEFAULT_OUTPUT_DIR)
    )
    formats: tuple[str, ...] = ("csv",)

    def __attrs_post_init__(self) -> None:
        for index, name in enumerate(self.formats):
            if name not in OUTPUT_FORMATS:
                raise ConfigurationError(
                    f"output.formats[{index}]",
                    f"unknown format {name!r}, expected one of {list(OUTPUT_FORMATS)}.",
                )
        if "csv" not in self.formats:
            raise ConfigurationError("output.formats", "csv output cannot be disabled.")


@attr.s(auto_attribs=True, frozen=True)
class ConvergenceSettings:
    sample_sizes: tuple[int, ...] = (100, 1000, 10000, 100000)
    repeats: int = 8

    def __attrs_post_init__(self) -> None:
        sizes = self.sample_sizes
        if len(sizes) < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
            raise ConfigurationError(
                "convergence.sample_sizes",
                f"needs at least two strictly increasing positive sizes, got {list(sizes)}.",
            )
        if self.repeats < 1:
            raise ConfigurationError(
                "convergence.repeats", f"must be at least 1, got {self.repeats}."
            )


@attr.s(auto_attribs=True, frozen=True)
class BenchSettings:
    max_added_protons: int = 4
    proton_hyperfine_mT: float = 0.4
    n_samples: int = 64
    t_max: float = 2.0

    def __attrs_post_init__(self) -> None:
        if self.max_added_protons < 1:
            raise ConfigurationError(
                "bench.max_added_protons", "needs at least one added proton to fit growth."
            )
        if self.n_samples < 1:
            raise ConfigurationError("bench.n_samples", "must be at least 1.")
        if not self.t_max > 0:
            raise ConfigurationError("bench.t_max", f"must be positive, got {self.t_max}.")


@attr.s(auto_attribs=True, frozen=True)
class SimulationConfig:
    """
    A fully validated configuration with every default applied.
    """

    system: SpinSystemSpec
    run: RunSettings = attr.ib(factory=RunSettings)
    output: OutputSettings = attr.ib(factory=OutputSettings)
    convergence: ConvergenceSettings = attr.ib(factory=ConvergenceSettings)
    bench: BenchSettings = attr.ib(factory=BenchSettings)

    def WithOverrides(
        self,
        seed: Optional[int] = None,
        samples: Optional[int] = None,
        workers: Optional[int] = None,
        out: Optional[str] = None,
    ) -> "SimulationConfig":
        """
        Applies the command-line overrides of the matching entries.
        """
        run = self.run
        if seed is not None:
            run = attr.evolve(run, master_seed=seed)
        if samples is not None:
            run = attr.evolve(run, n_samples=samples)
        if workers is not None:
            run = attr.evolve(run, worker_count=workers)
        output = self.output if out is None else attr.evolve(self.output, directory=out)
        return attr.evolve(self, run=run, output=output)


_TOP_LEVEL = ("system", "run", "output", "convergence", "bench")


def _Mapping(value: Any, path: str) -> Mapping[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigurationError(path, f"expected a mapping, got {type(value).__name__}.")
    return value


def _CheckKeys(data: Mapping[str, Any], path: str, allowed: tuple[str, ...]) -> None:
    for key in data:
        if key not in allowed:
            prefix = f"{path}." if path else ""
            raise ConfigurationError(
                f"{prefix}{key}", f"unknown key, expected one of {list(allowed)}."
            )


def _Number(data: Mapping[str, Any], key: str, path: str, default: Any = None) -> float:
    value = data.get(key, default)
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a dot, such as 1e-3, as strings.
        try:
            return float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}.{key}", f"expected a number, got {value!r}.")
    return float(value)


def _Integer(data: Mapping[str, Any], key: str, path: str, default: Any = None) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{path}.{key}", f"expected an integer, got {value!r}.")
    return value


def _Vector(value: Any, path: str, length: int = 3) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigurationError(path, f"expected a list of {length} numbers, got {value!r}.")
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigurationError(path, f"expected numbers, got {item!r}.")
    return tuple(float(v) for v in value)


def _Enum(enum_type: Any, data: Mapping[str, Any], key: str, path: str, default: Any) -> Any:
    value = data.get(key, default.value)
    try:
        return enum_type(value)
    except ValueError:
        choices = [member.value for member in enum_type]
        raise ConfigurationError(
            f"{path}.{key}", f"unknown value {value!r}, expected one of {choices}."
        ) from None


def _ParseField(data: Mapping[str, Any]) -> FieldSpec:
    path = "system.field"
    magnitude = _Number(data, "magnitude_mT", path, 0.0)
    if "direction" in data:
        _CheckKeys(data, path, ("magnitude_mT", "direction"))
        direction = np.asarray(_Vector(data["direction"], f"{path}.direction"))
        norm = float(np.linalg.norm(direction))
        if norm == 0:
            raise ConfigurationError(f"{path}.direction", "must be a non-zero vector.")
        if abs(norm - 1) > DIRECTION_NORM_TOLERANCE:
            direction = direction / norm
        return FieldSpec(magnitude, direction)
    if "theta" in data or "phi" in data:
        _CheckKeys(data, path, ("magnitude_mT", "theta", "phi"))
        return FieldSpec.FromAngles(
            magnitude, _Number(data, "theta", path, 0.0), _Number(data, "phi", path, 0.0)
        )
    _CheckKeys(data, path, ("magnitude_mT",))
    return FieldSpec(magnitude)


def _ParseKinetics(data: Mapping[str, Any]) -> KineticsSpec:
    path = "system.kinetics"
    if "k_s" in data or "k_t" in data:
        _CheckKeys(data, path, ("k_s", "k_t"))
        return KineticsSpec.FromChannelRates(
            _Number(data, "k_s", path, 0.0), _Number(data, "k_t", path, 0.0)
        )
    _CheckKeys(data, path, ("k_b", "k_f"))
    return KineticsSpec.FromRecombination(
        _Number(data, "k_b", path, 0.0), _Number(data, "k_f", path, 0.0)
    )


def _ParseDissipation(data: Mapping[str, Any]) -> DissipationSpec:
    path = "system.dissipation"
    _CheckKeys(data, path, ("gamma_st", "gamma_rf"))
    gamma_rf = _Vector(data.get("gamma_rf", [0.0, 0.0]), f"{path}.gamma_rf", length=2)
    return DissipationSpec(_Number(data, "gamma_st", path, 0.0), gamma_rf)


def _ParseHyperfine(value: Any, path: str) -> Any:
    try:
        return _HyperfineTensor(value, path)
    except ConfigurationError:
        raise
    except SpecError as e:
        raise ConfigurationError(path, e.message) from e


def _HyperfineTensor(value: Any, path: str) -> Any:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return IsotropicHyperfine(float(value))
    data = _Mapping(value, path)
    if "tensor" in data:
        _CheckKeys(data, path, ("tensor",))
        rows = data["tensor"]
        if not isinstance(rows, (list, tuple)) or len(rows) != 3:
            raise ConfigurationError(f"{path}.tensor", "expected three rows of three numbers.")
        return [_Vector(row, f"{path}.tensor[{i}]") for i, row in enumerate(rows)]
    _CheckKeys(data, path, ("isotropic", "axial", "axis"))
    isotropic = _Number(data, "isotropic", path, 0.0)
    if "axial" in data or "axis" in data:
        axis = _Vector(data.get("axis", [0.0, 0.0, 1.0]), f"{path}.axis")
        return AxialHyperfine(isotropic, _Number(data, "axial", path, 0.0), axis)
    return IsotropicHyperfine(isotropic)


def _ParseNucleus(data: Any, index: int) -> NucleusSpec:
    path = f"system.nuclei[{index}]"
    item = _Mapping(data, path)
    _CheckKeys(item, path, ("label", "multiplicity", "electron", "hyperfine"))
    label = str(item.get("label", f"n{index}"))
    hyperfine = _ParseHyperfine(item.get("hyperfine", 0.0), f"{path}.hyperfine")
    multiplicity = _Integer(item, "multiplicity", path, 2)
    electron = _Integer(item, "electron", path, 0)
    try:
        return NucleusSpec(label, multiplicity, electron, hyperfine)
    except SpecError as e:
        raise ConfigurationError(f"{path}.{e.field}", e.message) from e


def _ParseSystem(data: Mapping[str, Any]) -> SpinSystemSpec:
    path = "system"
    _CheckKeys(data, path, ("g_factors", "field", "kinetics", "dissipation", "nuclei"))
    nuclei_data = data.get("nuclei") or []
    if not isinstance(nuclei_data, list):
        raise ConfigurationError("system.nuclei", "expected a list of nuclei.")
    g_factors = _Vector(
        data.get("g_factors", [DEFAULT_G_FACTOR, DEFAULT_G_FACTOR]),
        "system.g_factors",
        length=2,
    )
    return SpinSystemSpec(
        nuclei=[_ParseNucleus(item, i) for i, item in enumerate(nuclei_data)],
        field=_ParseField(_Mapping(data.get("field"), "system.field")),
        kinetics=_ParseKinetics(_Mapping(data.get("kinetics"), "system.kinetics")),
        dissipation=_ParseDissipation(
            _Mapping(data.get("dissipation"), "system.dissipation")
        ),
        g_factors=g_factors,
    )


def _ParseRun(data: Mapping[str, Any]) -> RunSettings:
    path = "run"
    defaults = RunSettings()
    fields = attr.fields_dict(RunSettings)
    _CheckKeys(data, path, tuple(fields))
    values: dict[str, Any] = {}
    for name in fields:
        default = getattr(defaults, name)
        if name == "method":
            values[name] = _Enum(RunMethod, data, name, path, default)
        elif name == "strategy":
            values[name] = _Enum(InitialStateStrategy, data, name, path, default)
        elif name == "factor_kf":
            flag = data.get(name, default)
            if not isinstance(flag, bool):
                raise ConfigurationError(
                    f"{path}.{name}", f"expected true or false, got {flag!r}."
                )
            values[name] = flag
        elif isinstance(default, int):
            values[name] = _Integer(data, name, path, default)
        else:
            values[name] = _Number(data, name, path, default)
    return RunSettings(**values)


def _ParseOutput(data: Mapping[str, Any]) -> OutputSettings:
    _CheckKeys(data, "output", ("directory", "formats"))
    kwargs: dict[str, Any] = {}
    if "directory" in data:
        kwargs["directory"] = str(data["directory"])
    if "formats" in data:
        formats = data["formats"]
        if not isinstance(formats, list):
            raise ConfigurationError("output.formats", "expected a list of formats.")
        kwargs["formats"] = tuple(str(f) for f in formats)
    return OutputSettings(**kwargs)


def _ParseConvergence(data: Mapping[str, Any]) -> ConvergenceSettings:
    path = "convergence"
    _CheckKeys(data, path, ("sample_sizes", "repeats"))
    defaults = ConvergenceSettings()
    sizes = data.get("sample_sizes", list(defaults.sample_sizes))
    if not isinstance(sizes, list) or not all(
        isinstance(n, int) and not isinstance(n, bool) for n in sizes
    ):
        raise ConfigurationError(f"{path}.sample_sizes", "expected a list of integers.")
    return ConvergenceSettings(tuple(sizes), _Integer(data, "repeats", path, defaults.repeats))


def _ParseBench(data: Mapping[str, Any]) -> BenchSettings:
    path = "bench"
    defaults = BenchSettings()
    _CheckKeys(data, path, tuple(attr.fields_dict(BenchSettings)))
    return BenchSettings(
        max_added_protons=_Integer(data, "max_added_protons", path, defaults.max_added_protons),
        proton_hyperfine_mT=_Number(
            data, "proton_hyperfine_mT", path, defaults.proton_hyperfine_mT
        ),
        n_samples=_Integer(data, "n_samples", path, defaults.n_samples),
        t_max=_Number(data, "t_max", path, defaults.t_max),
    )


def ConfigFromDict(data: Any) -> SimulationConfig:
    """
    Validates a configuration already loaded into Python objects.

    :raises ConfigurationError:
    """
    document = _Mapping(data, "<document>")
    if "system" not in document and "config" in document:
        document = _Mapping(document["config"], "config")
    _CheckKeys(document, "", _TOP_LEVEL)
    if "system" not in document:
        raise ConfigurationError("system", "the system section is required.")
    try:
        config = SimulationConfig(
            system=_ParseSystem(_Mapping(document["system"], "system")),
            run=_ParseRun(_Mapping(document.get("run"), "run")),
            output=_ParseOutput(_Mapping(document.get("output"), "output")),
            convergence=_ParseConvergence(
                _Mapping(document.get("convergence"), "convergence")
            ),
            bench=_ParseBench(_Mapping(document.get("bench"), "bench")),
        )
    except ConfigurationError:
        raise
    except SpecError as e:
        raise ConfigurationError(f"system.{e.field}", e.message) from e
    if config.run.factor_kf and not config.system.kinetics.is_recombination_form:
        raise ConfigurationError(
            "run.factor_kf", "needs system.kinetics given as k_b and k_f."
        )
    return config


def ParseConfig(path: os.PathLike | str) -> SimulationConfig:
    """
    Reads and validates the configuration (or run manifest) at ``path``.

    :raises ConfigurationError: if the file cannot be read, parsed or validated.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError("<file>", f"cannot read {path}: {e.strerror}.") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigurationError("<file>", f"{path} is not valid YAML: {e}") from e
    return ConfigFromDict(data)


def _NucleusToDict(nucleus: NucleusSpec) -> dict[str, Any]:
    return {
        "label": nucleus.label,
        "multiplicity": nucleus.multiplicity,
        "electron": nucleus.coupled_electron,
        "hyperfine": {"tensor": [list(row) for row in nucleus.hyperfine]},
    }


def ConfigToDict(config: SimulationConfig) -> dict[str, Any]:
    """
    The resolved configuration, with hyperfine couplings expanded to full tensors. Parsing the
    result gives back an equal configuration.
    """
    system = config.system
    kinetics = system.kinetics
    if kinetics.is_recombination_form:
        kinetics_data = {"k_b": kinetics.k_b, "k_f": kinetics.k_f}
    else:
        kinetics_data = {"k_s": kinetics.k_s, "k_t": kinetics.k_t}
    run = attr.asdict(config.run)
    run["method"] = config.run.method.value
    run["strategy"] = config.run.strategy.value
    return {
        "system": {
            "g_factors": list(system.g_factors),
            "field": {
                "magnitude_mT": system.field.magnitude,
                "direction": list(system.field.direction),
            },
            "kinetics": kinetics_data,
            "dissipation": {
                "gamma_st": system.dissipation.gamma_st,
                "gamma_rf": list(system.dissipation.gamma_rf),
            },
            "nuclei": [_NucleusToDict(n) for n in system.nuclei],
        },
        "run": run,
        "output": {
            "directory": config.output.directory,
            "formats": list(config.output.formats),
        },
        "convergence": {
            "sample_sizes": list(config.convergence.sample_sizes),
            "repeats": config.convergence.repeats,
        },
        "bench": attr.asdict(config.bench),
    }
