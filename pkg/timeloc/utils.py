import hashlib
from dataclasses import fields
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Literal, Sequence

import numpy as np
from numpy.lib.recfunctions import structured_to_unstructured

from timeloc.errors import ConfigurationError

if TYPE_CHECKING:
    from timeloc.serializable_abc import Serializable

CODE_VERSION = "0.4.0"
FLOAT_FORMAT = "%.10e"

StreamName = Literal["drive", "line", "classical"]
_STREAM_IDS: dict[StreamName, int] = {"drive": 0, "line": 1, "classical": 2}


def make_rng(seed: int, stream: StreamName, realization: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by (seed, stream, realization).
    Draws are consumed in index order, so the i-th value of a stream never depends on how many are drawn."""
    if seed < 0 or seed >= 2**64:
        raise ConfigurationError(f"Seeds must fit in 64 unsigned bits, got {seed}")
    sequence = np.random.SeedSequence(seed, spawn_key=(_STREAM_IDS[stream], realization))
    return np.random.Generator(np.random.Philox(sequence))


def wrap_angle(theta: np.ndarray | float) -> Any:
    """Maps angles onto [-pi, pi)."""
    return np.mod(np.asarray(theta) + np.pi, 2 * np.pi) - np.pi


def uniform_ring_grid(points: int) -> np.ndarray:
    return -np.pi + 2 * np.pi * np.arange(points) / points


# ========================================================================================================


def get_fields_metadata(cls: type[Any]) -> dict[str, dict[str, Any]]:
    return {field_obj.name: dict(field_obj.metadata) for field_obj in fields(cls)}


def get_section_field_names(cls: type[Any], section: str) -> list[str]:
    """Returns the names of the fields whose "section" metadata matches, in declaration order."""
    return [field_name for field_name, metadata in get_fields_metadata(cls).items() if metadata.get("section") == section]


def get_reference_defaults(cls: type[Any]) -> dict[str, Any]:
    """Returns a mapping of field name -> value quoted in the source for that field (fields without one are skipped)."""
    return {name: metadata["reference_default"] for name, metadata in get_fields_metadata(cls).items() if "reference_default" in metadata}


def get_serializable_variables() -> dict[str, type["Serializable"]]:  # We do this to avoid circular imports
    """This returns a mapping of class name (str) to the class type. This is used to rebuild nested results from JSON."""
    from timeloc.models import (  # type: ignore[attr-defined]  # pylint: disable=possibly-unused-variable
        BandReport, BornInput, BornResult, ChainSpectrum, ClassicalState, ComparisonReport, DriveCoefficients, DriveSpec,
        EffectiveDisorderCoefficients, EffectiveModelSpec, EigenSolution, FloquetBasisWindow, IntegratorConfig, LatticeSpec,
        LevelPair, LinePotential, LyapunovEstimate, PlaneWaveBasis, PoincareSection, QuasienergySpectrum, RingSystem,
        SecondOrderCheck, SecondOrderCorrection, TailFit, TightBindingChain, Trajectory,  # fmt: skip
    )

    return locals()


# ========================================================================================================


def _column_format(cells: np.ndarray) -> str:
    if any(isinstance(cell, str) for cell in cells):
        return "%s"
    if all(isinstance(cell, (bool, int, np.bool_, np.integer)) for cell in cells):
        return "%d"
    return FLOAT_FORMAT


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], comments: Sequence[str] = ()) -> Path:
    """Writes a CSV whose first line is the `#`-prefixed header, then the comment block (units, provenance), then the rows.
    Integer and boolean columns are written as integers, booleans as 1/0."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.array(list(rows), dtype=object).reshape(-1, len(columns))
    formats = [_column_format(table[:, column]) for column in range(len(columns))]
    np.savetxt(path, table, fmt=formats, delimiter=",", header="\n".join([",".join(columns), *comments]), comments="# ", encoding="utf-8")
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Reads back a CSV written by `write_csv` as (columns, 2-D float table); non-numeric cells become nan."""
    data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True, comments="#", dtype=float, encoding="utf-8"))
    columns = list(data.dtype.names or ())
    return columns, structured_to_unstructured(data).reshape(len(data), len(columns))


def file_checksum(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
