from __future__ import annotations

__all__ = ["CsvRecorder", "sibling_path"]

import sys
from io import StringIO
from logging import Logger
from pathlib import Path
from typing import Any, Dict, List, Mapping, TextIO

import pandas as pd

from ..settings import CSV_SCHEMA
from .logger import void_logger
from .tools import config_json


def sibling_path(out: str | Path, section: str) -> Path:
    """
    results/t1.csv + "summary" -> results/t1.summary.csv
    """
    out = Path(out)
    return out.with_name(f"{out.stem}.{section}.csv")


class CsvRecorder:
    """
    Collects the tables of one experiment run and writes them as a CSV bundle.
    Every table is preceded by comment lines naming the schema, the experiment,
    the section and the configuration.
    """

    __slots__ = ["_experiment", "_config", "_sections", "_logger"]

    def __init__(
        self,
        experiment: str,
        config: Mapping[str, Any],
        logger: Logger = void_logger,
    ) -> None:
        self._experiment = str(getattr(experiment, "value", experiment))
        self._config = dict(config)
        self._sections: Dict[str, pd.DataFrame] = {}
        self._logger = logger

    def add_section(self, name: str, frame: pd.DataFrame) -> None:
        if name in self._sections:
            raise ValueError(f"section {name!r} is already recorded")
        self._sections[name] = frame
        self._logger.debug(f"recorded section {name} with {len(frame)} rows")

    def add_sections(self, sections: Mapping[str, pd.DataFrame]) -> CsvRecorder:
        for name, frame in sections.items():
            self.add_section(name, frame)
        return self

    @property
    def sections(self) -> List[str]:
        return list(self._sections)

    @property
    def primary(self) -> str:
        if not self._sections:
            raise ValueError("nothing has been recorded")
        return next(iter(self._sections))

    def frame(self, name: str) -> pd.DataFrame:
        return self._sections[name]

    def header(self, section: str) -> str:
        return (
            f"# schema: {CSV_SCHEMA}\n"
            f"# experiment: {self._experiment}\n"
            f"# section: {section}\n"
            f"# config: {config_json(self._config)}\n"
        )

    def render(self, section: str) -> str:
        buffer = StringIO()
        buffer.write(self.header(section))
        self._sections[section].to_csv(buffer, index=False)
        return buffer.getvalue()

    def write(self, out: str | Path | None = None, stdout: TextIO = None) -> List[str]:
        """
        Writes the primary section to `out` and every other section to its
        sibling file. Without `out` (or with "-") all sections go to stdout,
        one after the other.

        :return: the destinations written, in section order
        """
        if out is None or str(out) == "-":
            stream = stdout or sys.stdout
            for section in self._sections:
                stream.write(self.render(section))
            self._logger.debug(f"wrote {len(self._sections)} section(s) to stdout")
            return ["-" for _ in self._sections]

        destinations = []
        for section in self._sections:
            path = Path(out) if section == self.primary else sibling_path(out, section)
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="") as f:
                f.write(self.render(section))
            self._logger.info(f"wrote section {section} to {path}")
            destinations.append(str(path))
        return destinations
