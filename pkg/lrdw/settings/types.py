from __future__ import annotations

__all__ = ["VarClass", "VarDict", "VarFieldNames"]

from logging import Logger
from typing import (
    TypedDict,
    List,
    TypeVar,
    Dict,
    Protocol,
    Sequence,
    ClassVar,
    Tuple,
    Mapping,
    TYPE_CHECKING,
)

if TYPE_CHECKING:
    # noinspection PyProtectedMember
    from .variables import _VarGetter


class VarDict(TypedDict):
    # None means "the experiment's own default"
    M: int | None
    N: int | None
    A: float | None
    REPS: int | None
    SEED: int
    SPIKES: List[float] | None
    SIGMA2: float | None
    NORMALIZE: str | None
    NOISE: str | None
    OUT: str | None
    THREADS: int | str
    GAMMAS: List[float] | None
    CALIBRATE_REPS: int | None
    K_MAX: int
    BINS: int
    A_GRID: List[float] | None
    M_GRID: List[int] | None
    N_GRID: List[int] | None
    LOGGER: Logger


_VarProtocol = TypeVar("_VarProtocol", bound=Dict)


class VarFieldNames(Protocol[_VarProtocol]):
    """
    To be used in intelli scenes
    """

    __slots__: Sequence = ()

    M: ClassVar[str]
    N: ClassVar[str]
    A: ClassVar[str]
    REPS: ClassVar[str]
    SEED: ClassVar[str]
    SPIKES: ClassVar[str]
    SIGMA2: ClassVar[str]
    NORMALIZE: ClassVar[str]
    NOISE: ClassVar[str]
    OUT: ClassVar[str]
    THREADS: ClassVar[str]
    GAMMAS: ClassVar[str]
    CALIBRATE_REPS: ClassVar[str]
    K_MAX: ClassVar[str]
    BINS: ClassVar[str]
    A_GRID: ClassVar[str]
    M_GRID: ClassVar[str]
    N_GRID: ClassVar[str]
    LOGGER: ClassVar[str]


# Shell Variables
class VarClass(Protocol[_VarProtocol]):
    __slots__: Sequence = ()

    _vars: _VarProtocol
    _default_vars: ClassVar[_VarProtocol]
    general_shell_var: ClassVar[Dict[str, Tuple[Tuple, Mapping]]]

    v: "_VarGetter"

    @property
    def vars(self) -> _VarProtocol:
        raise NotImplementedError

    def __getitem__(self, item: str):
        ...

    def read_from_env(self, *args, all_args: bool = False) -> None:
        ...

    @classmethod
    def get_var_arg_name(cls, var_field: str) -> str:
        ...

    @classmethod
    def __class_getitem__(cls, item):
        ...
