from __future__ import annotations

import abc
import contextlib
import sys as _sys
import time
import warnings
from logging import Logger
from typing import (
    Any,
    Callable,
    Generic,
    List,
    Mapping,
    NoReturn,
    Sequence,
    Type,
    TypeAlias,
    TypeVar,
)

from ..covariance.errors import NumericalError
from ..experiments import ExperimentConfig, Sections, run_experiment
from ..settings import ControllerOptionNames, DefaultVars, ErrorCode, ExperimentName
from .recorder import CsvRecorder
from .tools import ConfigError

__all__ = [
    "Controller",
    "ExperimentController",
    "RunnerError",
    "LayerContext",
    "ControllerResultAnnouncer",
]

LAYER_TYPE: TypeAlias = "Callable[[Controller], None]"

_T = TypeVar("_T")
_CTRL_SELF = TypeVar("_CTRL_SELF", bound="Controller")


class LayerContext(contextlib.AbstractContextManager):
    __slots__ = ["_ctrl"]

    def __init__(self, controller: Controller):
        self._ctrl = controller

    @abc.abstractmethod
    def enter(self) -> None:
        ...

    @abc.abstractmethod
    def exit(self) -> None:
        ...

    def __enter__(self):
        self.enter()

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.exit()


class _TimingLayer(LayerContext):
    __slots__ = ["_start"]

    def __init__(self, controller: Controller):
        super().__init__(controller)
        self._start: float | None = None

    def enter(self) -> None:
        self._start = time.perf_counter()

    def exit(self) -> None:
        if self._start is not None:
            elapsed = time.perf_counter() - self._start
            self._ctrl.logger.info(f"run finished in {elapsed:.3f} seconds")
            self._start = None


class _WarningCaptureLayer(LayerContext):
    """
    Numerical warnings raised during the run are re-emitted through the
    controller's logger instead of going to stderr unformatted.
    """

    __slots__ = ["_catcher", "_records"]

    def __init__(self, controller: Controller):
        super().__init__(controller)
        self._catcher: warnings.catch_warnings | None = None
        self._records: List[warnings.WarningMessage] = []

    def enter(self) -> None:
        self._catcher = warnings.catch_warnings(record=True)
        self._records = self._catcher.__enter__()
        warnings.simplefilter("always")
        self._ctrl.logger.debug("capturing warnings")

    def exit(self) -> None:
        if self._catcher is None:
            return
        self._catcher.__exit__(None, None, None)
        self._catcher = None
        for record in self._records:
            self._ctrl.logger.warning(
                f"{record.category.__name__}: {record.message} "
                f"({record.filename}:{record.lineno})"
            )
        self._records = []


class ControllerResultAnnouncer:
    __slots__ = ["_out", "_err"]

    def __init__(self, output=None, error=None):
        self._out = output or _sys.stdout
        self._err = error or _sys.stderr

    def write(self, s: str) -> None:
        self._err.write(s)

    def show_error(
        self,
        exception: BaseException,
        trace: str = None,
        error_code: ErrorCode = ErrorCode.RUNNER_ERROR_CODE,
    ) -> NoReturn:
        message = (
            f"An error occurs with exit code {error_code.value} ({error_code.name}). "
            f"Error: {exception}\n"
        )
        if trace:
            message += f"trace: \n{trace}"
        self.write(message)
        raise SystemExit(error_code.value) from exception

    def show_result(self, result: CsvRecorder, out: str | None = None) -> List[str]:
        return result.write(out, self._out)


class RunnerError(Exception):
    def __init__(self, msg):
        super(RunnerError, self).__init__(msg)


def _error_code_of(exception: BaseException, fallback: ErrorCode) -> ErrorCode:
    if isinstance(exception, ConfigError):
        return ErrorCode.CONFIG_ERROR_CODE
    if isinstance(exception, NumericalError):
        return ErrorCode.NUMERIC_ERROR_CODE
    return fallback


class Controller(Generic[_T]):
    """
    Controller class that controls the execution of some `runner` function
    """

    __slots__ = [
        "_announcer",
        "_in_context",
        "_runner",
        "_context_layers",
        "_init_layers",
        "_logger",
        "_default_settings",
        "_options",
    ]

    _DEFAULT_CONTEXT_LAYERS: Sequence[Type[LayerContext]] = (
        _TimingLayer,
        _WarningCaptureLayer,
    )

    def __init__(
        self,
        *,
        runner: Callable[..., _T],
        context_layers: Sequence[Type[LayerContext]] = (),
        default_settings: DefaultVars = None,
        options: Mapping = None,
        **kwargs,
    ) -> None:
        """
        initializer of a controller
        each controller is designed to be single use
        :param runner: the function run inside the context layers
        :param context_layers: extra layers entered before the default ones
        :param default_settings: settings the options are merged onto
        :param options: overrides of settings and controller options
        :param kwargs: more overrides
        """
        default_settings = default_settings or DefaultVars()
        self._options = {**default_settings.vars, **(options or {}), **kwargs}
        self._default_settings = default_settings

        # register logger
        self._logger: Logger = self._options.get(
            ControllerOptionNames.LOGGER, self._options.get(default_settings.LOGGER)
        )

        # register control layers
        self._init_layers: List[LAYER_TYPE] = [*self._make_init_layers()]
        self._logger.debug(f"registered init layers: {self._init_layers}")

        self._context_layers: List[LayerContext] = [
            *(layer(self) for layer in context_layers),
            *(layer(self) for layer in self._DEFAULT_CONTEXT_LAYERS),
        ]
        self._logger.debug(f"registered context layers: {self._context_layers}")

        # register runner
        self._runner: Callable[..., _T] = runner
        self._logger.debug("registered runner")

        self._in_context: bool = False

        self._announcer: ControllerResultAnnouncer = self._options.get(
            ControllerOptionNames.ANNOUNCER,
            ControllerResultAnnouncer(self._options.get(ControllerOptionNames.STDOUT)),
        )

    # ===== layer makers  =====

    @classmethod
    def _make_init_layers(cls) -> Sequence[LAYER_TYPE]:
        """
        init layer maker, should be overwritten by subclasses if necessary
        :return: sequence of layer functions
        """
        return ()

    # ===== processes =====
    def _init_process(self) -> None:
        for init_fn in self._init_layers:
            init_fn(self)
        self._logger.debug("finished executing init process")

    def _prep_process(self) -> None:
        for layer in self._context_layers:
            layer.enter()
        self._logger.debug("finished executing prep process")

    def _post_process(self) -> None:
        for layer in reversed(self._context_layers):
            layer.exit()
        self._logger.debug("finished executing post process")

    # ===== basic structures =====

    def __call__(self, *args, **kwargs) -> _CTRL_SELF:
        """
        init process caller
        intended to usage: `controller_instance().main()`
        :return: self
        """
        try:
            self._init_process()
        except Exception as e:
            self._announcer.show_error(
                e, error_code=_error_code_of(e, ErrorCode.INIT_ERROR_CODE)
            )

        return self

    def __enter__(self) -> Controller[_T]:
        self._in_context = True
        try:
            self._prep_process()
        except Exception as e:
            self._announcer.show_error(e, error_code=ErrorCode.PREP_ERROR_CODE)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self._in_context = False
        try:
            self._post_process()
        except Exception as e:
            self._announcer.show_error(e, error_code=ErrorCode.POST_ERROR_CODE)

    def _run(self, *args, **kwargs) -> _T:
        """
        run the internal runner
        :return: whatever the runner returns
        """
        self._logger.debug(f"start runner with args: {args} and kwargs: {kwargs}")
        try:
            result = self._runner(*args, **kwargs)
        except Exception as e:
            from traceback import format_exc

            self._logger.debug("exception occurs in runner execution")
            code = _error_code_of(e, ErrorCode.RUNNER_ERROR_CODE)
            if code is ErrorCode.RUNNER_ERROR_CODE:
                self._announcer.show_error(
                    RunnerError(e), trace=format_exc(), error_code=code
                )
            self._announcer.show_error(e, error_code=code)

        self._logger.debug("finished runner successfully")
        return result

    def format_result(self, result: _T) -> Any:
        return result

    def init(self, *args, **kwargs) -> _CTRL_SELF:
        """
        same as `__call__`, but probably looks nicer
        intended usage: `controller_instance.init().main()`
        """
        return self(*args, **kwargs)

    def announce(self, result: Any) -> None:
        self._announcer.show_result(result)

    def main(
        self,
        *args,
        formats: bool = False,
        announces: bool = False,
        **kwargs,
    ) -> Any:
        """
        The main function to be called
        :param formats: pass the runner result through `format_result`
        :param announces: hand the (formatted) result to the announcer
        :return: whatever the runner returns, formatted if asked
        """
        self._logger.debug(f"started main with args: {args} and kwargs: {kwargs}")
        with self as ctrl:
            result = ctrl._run(*args, **kwargs)

        if formats:
            self._logger.debug("formatting result from main")
            try:
                result = self.format_result(result)
            except Exception as e:
                self._announcer.show_error(e, error_code=ErrorCode.POST_ERROR_CODE)

        if announces:
            self._logger.debug("announcing result from main")
            try:
                self.announce(result)
            except OSError as e:
                self._announcer.show_error(e, error_code=ErrorCode.POST_ERROR_CODE)

        return result

    @property
    def logger(self) -> Logger:
        return self._logger

    @property
    def announcer(self) -> ControllerResultAnnouncer:
        return self._announcer

    @property
    def in_context(self) -> bool:
        return self._in_context

    @property
    def options(self) -> Mapping:
        return self._options


class ExperimentController(Controller[Sections]):
    """
    Runs one named experiment: resolves its configuration, runs it inside the
    context layers and hands the resulting CSV bundle to the announcer.
    """

    __slots__ = ["_experiment", "_config"]

    def __init__(
        self,
        experiment: ExperimentName | str,
        *,
        default_settings: DefaultVars = None,
        options: Mapping = None,
        **kwargs,
    ) -> None:
        self._experiment = experiment
        self._config: ExperimentConfig | None = None
        super().__init__(
            runner=self._experiment_runner,
            default_settings=default_settings,
            options=options,
            **kwargs,
        )

    def _resolve_config(self) -> None:
        self._config = ExperimentConfig.resolve(self._experiment, self._options)
        self._logger.debug(f"resolved configuration {self._config}")

    @classmethod
    def _make_init_layers(cls) -> Sequence[LAYER_TYPE]:
        return (cls._resolve_config, *super()._make_init_layers())

    def _experiment_runner(self) -> Sections:
        if self._config is None:
            raise RunnerError("the controller must be initialized before running")
        return run_experiment(self._config, self._logger)

    def format_result(self, result: Sections) -> CsvRecorder:
        return CsvRecorder(
            self._config.experiment, self._config.echo(), self._logger
        ).add_sections(result)

    def announce(self, result: CsvRecorder) -> None:
        self._announcer.show_result(result, self._config.out)

    @property
    def config(self) -> ExperimentConfig | None:
        return self._config
