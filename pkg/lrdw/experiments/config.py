from __future__ import annotations

__all__ = ["ExperimentConfig", "EXPERIMENT_DEFAULTS", "ECHO_EXCLUDED"]

import math
from dataclasses import asdict, dataclass, replace
from types import MappingProxyType
from typing import Any, Dict, Final, Mapping, Tuple

from ..covariance.synth import NoiseKind, Normalization
from ..covariance.whiten import Gammas
from ..settings import DefaultVars, ExperimentName
from ..utils.tools import ConfigError

_TABLE1_SPIKES: Final = (10.0, 10.0, 6.0, 4.0, 4.0, 4.0)

# published geometry of every experiment; user values override entries here
EXPERIMENT_DEFAULTS: Final[Mapping[ExperimentName, Mapping[str, Any]]] = (
    MappingProxyType(
        {
            ExperimentName.TABLE1: {
                "M": 833,
                "N": 500,
                "a": 0.7,
                "reps": 1000,
                "spikes": _TABLE1_SPIKES,
                "normalize": Normalization.TRACE_N,
                "noise": NoiseKind.GAUSSIAN_COMPLEX,
            },
            ExperimentName.TABLE2: {
                "M": 833,
                "N": 500,
                "a": 0.7,
                "reps": 1000,
                "noise": NoiseKind.GAUSSIAN_COMPLEX,
            },
            ExperimentName.TABLE3: {
                "a_grid": (0.9, 0.7, 0.5, 0.3, 0.1),
                "m_grid": (250, 500, 1000, 2000),
                "reps": 500,
                "noise": NoiseKind.GAUSSIAN_REAL,
            },
            ExperimentName.ESD_RATIO: {
                "M": 1000,
                "N": 2000,
                "a": 0.9,
                "reps": 1,
                "noise": NoiseKind.GAUSSIAN_REAL,
            },
            ExperimentName.PSEUDO_SPIKES: {
                "M": 1000,
                "n_grid": (8000, 3000, 800),
                "a": 0.9,
                "reps": 1,
                "noise": NoiseKind.GAUSSIAN_REAL,
            },
            ExperimentName.CALIBRATE: {
                "M": 833,
                "N": 500,
                "a": 0.7,
                "reps": 1000,
                "noise": NoiseKind.GAUSSIAN_COMPLEX,
            },
            ExperimentName.PCA_DEMO: {
                "M": 833,
                "N": 500,
                "a": 0.7,
                "reps": 1,
                "noise": NoiseKind.GAUSSIAN_COMPLEX,
            },
        }
    )
)

# run-time knobs that do not change a single number of the output
ECHO_EXCLUDED: Final[Tuple[str, ...]] = ("out", "threads")

_FROM_SETTINGS: Final[Mapping[str, str]] = MappingProxyType(
    {
        "M": DefaultVars.M,
        "N": DefaultVars.N,
        "a": DefaultVars.A,
        "reps": DefaultVars.REPS,
        "seed": DefaultVars.SEED,
        "spikes": DefaultVars.SPIKES,
        "sigma2": DefaultVars.SIGMA2,
        "normalize": DefaultVars.NORMALIZE,
        "noise": DefaultVars.NOISE,
        "out": DefaultVars.OUT,
        "threads": DefaultVars.THREADS,
        "gammas": DefaultVars.GAMMAS,
        "calibrate_reps": DefaultVars.CALIBRATE_REPS,
        "k_max": DefaultVars.K_MAX,
        "bins": DefaultVars.BINS,
        "a_grid": DefaultVars.A_GRID,
        "m_grid": DefaultVars.M_GRID,
        "n_grid": DefaultVars.N_GRID,
    }
)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Fully resolved and validated parameters of one experiment run.
    Fields an experiment does not use keep their neutral value.
    """

    experiment: ExperimentName
    M: int = 0
    N: int = 0
    a: float = 0.7
    reps: int = 1
    seed: int = 0
    spikes: Tuple[float, ...] | None = None
    sigma2: float = 1.0
    normalize: Normalization = Normalization.NONE
    noise: NoiseKind = NoiseKind.GAUSSIAN_COMPLEX
    out: str | None = None
    threads: int | str = 1
    gammas: Gammas | None = None
    calibrate_reps: int | None = None
    k_max: int = 50
    bins: int = 50
    a_grid: Tuple[float, ...] = ()
    m_grid: Tuple[int, ...] = ()
    n_grid: Tuple[int, ...] = ()

    @classmethod
    def resolve(
        cls, experiment: ExperimentName | str, settings: DefaultVars | Mapping
    ) -> ExperimentConfig:
        """
        Merges the published defaults of an experiment with the user settings
        (a DefaultVars or its vars mapping) and validates the result.

        :raise ConfigError: on an unknown experiment or invalid parameters
        """
        try:
            experiment = ExperimentName(experiment)
        except ValueError as e:
            raise ConfigError(f"unknown experiment {experiment!r}") from e

        values: Mapping = settings.vars if isinstance(settings, DefaultVars) else settings
        fields: Dict[str, Any] = dict(EXPERIMENT_DEFAULTS[experiment])
        for name, var in _FROM_SETTINGS.items():
            value = values.get(var, None)
            if value is not None:
                fields[name] = value

        try:
            fields = cls._coerce(fields)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

        config = cls(experiment=experiment, **fields)
        config.validate()
        return config

    @staticmethod
    def _coerce(fields: Dict[str, Any]) -> Dict[str, Any]:
        if "normalize" in fields:
            fields["normalize"] = Normalization(fields["normalize"])
        if "noise" in fields:
            fields["noise"] = NoiseKind(fields["noise"])
        if fields.get("spikes") is not None:
            fields["spikes"] = tuple(float(s) for s in fields["spikes"])
        if fields.get("gammas") is not None:
            gammas = tuple(float(g) for g in fields["gammas"])
            if len(gammas) != 3:
                raise ValueError(f"gammas need exactly three values, got {len(gammas)}")
            fields["gammas"] = Gammas(*gammas)
        for name, kind in (("a_grid", float), ("m_grid", int), ("n_grid", int)):
            if name in fields:
                fields[name] = tuple(dict.fromkeys(kind(v) for v in fields[name]))
        return fields

    def _fail(self, field: str, msg: str):
        raise ConfigError(msg, field=field)

    def validate(self) -> None:
        """
        :raise ConfigError: the first violated constraint
        """
        uses_grid = self.experiment is ExperimentName.TABLE3
        uses_n_grid = self.experiment is ExperimentName.PSEUDO_SPIKES

        if not uses_grid:
            if self.M < 2:
                self._fail("M", f"M must be at least 2, got {self.M}")
            if not 0 < self.a < 1:
                self._fail("a", f"a must lie in (0, 1), got {self.a}")
        if not uses_grid and not uses_n_grid and self.N < 1:
            self._fail("N", f"N must be positive, got {self.N}")

        if self.reps < 1:
            self._fail("reps", f"reps must be positive, got {self.reps}")
        if not 0 <= self.seed < 2**64:
            self._fail("seed", f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            self._fail("sigma2", f"sigma2 must be positive, got {self.sigma2}")
        if self.k_max < 0:
            self._fail("k_max", f"k_max must be non-negative, got {self.k_max}")
        if self.bins < 1:
            self._fail("bins", f"bins must be positive, got {self.bins}")
        if isinstance(self.threads, int) and self.threads < 1:
            self._fail("threads", f"threads must be positive, got {self.threads}")

        if self.gammas is not None and self.calibrate_reps is not None:
            self._fail("gammas", "give either gammas or calibrate_reps, not both")
        if self.gammas is not None and any(g < 1 for g in self.gammas):
            self._fail("gammas", f"eigenvalue ratio thresholds are >= 1, got {self.gammas}")
        if self.calibrate_reps is not None and self.calibrate_reps < 1:
            self._fail("calibrate_reps", f"must be positive, got {self.calibrate_reps}")

        if self.spikes is not None:
            if any(s <= 1 for s in self.spikes):
                self._fail("spikes", f"spike strengths must exceed 1, got {self.spikes}")
            if not uses_grid and len(self.spikes) > self.N:
                self._fail("spikes", f"{len(self.spikes)} spikes do not fit in N={self.N}")

        detects = (ExperimentName.TABLE2, ExperimentName.CALIBRATE, ExperimentName.PCA_DEMO)
        if self.experiment in detects:
            if self.N < 4:
                self._fail("N", f"detection needs N >= 4, got {self.N}")

        if uses_grid:
            if not self.a_grid or not self.m_grid:
                self._fail("a_grid", "the a and M grids must not be empty")
            if any(not 0 < a < 1 for a in self.a_grid):
                self._fail("a_grid", f"every a must lie in (0, 1), got {self.a_grid}")
            if any(m < 2 for m in self.m_grid):
                self._fail("m_grid", f"every M must be at least 2, got {self.m_grid}")
        if uses_n_grid:
            if not self.n_grid or any(n < 1 for n in self.n_grid):
                self._fail("n_grid", f"the N grid must hold positive sizes, got {self.n_grid}")

    def with_values(self, **changes) -> ExperimentConfig:
        config = replace(self, **changes)
        config.validate()
        return config

    def echo(self) -> Dict[str, Any]:
        """
        The configuration as written in CSV headers
        """
        return {k: v for k, v in asdict(self).items() if k not in ECHO_EXCLUDED}
