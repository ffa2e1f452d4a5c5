"""File formats: delimited tables, manifests, state checkpoints.

Tables are tab-separated with a comment header carrying metadata
(config hash included) followed by one plain header line of column names.
Numbers are written with 17 significant digits so that values round-trip
exactly.  Manifests are plain `key = value` text; checkpoints are npz
archives with an explicit format version.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TABLE_FORMAT = "wellcollider-table-1"
MANIFEST_FORMAT = "wellcollider-manifest-1"
CHECKPOINT_FORMAT = 1


class StorageError(RuntimeError):
    """Raised for malformed or inconsistent on-disk data."""


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


@dataclass
class TableData:
    meta: dict[str, str]
    columns: list[str]
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise StorageError(f"column {name!r} not present; have {self.columns}") from None
        return self.data[:, idx]


def write_table(path: Path, meta: dict[str, str], columns: list[str], rows) -> None:
    """Write a delimited table with a self-describing header."""
    path = Path(path)
    lines = [f"# {TABLE_FORMAT}"]
    for key, value in meta.items():
        lines.append(f"# {key} = {value}")
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(format_float(value) for value in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_table(path: Path) -> TableData:
    path = Path(path)
    meta: dict[str, str] = {}
    columns: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if columns is None:
                columns = line.split("\t")
                continue
            rows.append([float(field) for field in line.split("\t")])
    if columns is None:
        raise StorageError(f"{path} contains no header line")
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(columns))
    if data.shape[1] != len(columns):
        raise StorageError(f"{path}: row width {data.shape[1]} != {len(columns)} columns")
    return TableData(meta=meta, columns=columns, data=data)


def write_manifest(path: Path, entries: dict[str, str]) -> None:
    lines = [f"format = {MANIFEST_FORMAT}"]
    for key, value in entries.items():
        lines.append(f"{key} = {value}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_manifest(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise StorageError(f"{path}: malformed manifest line {line!r}")
        entries[key.strip()] = value.strip()
    if entries.get("format") != MANIFEST_FORMAT:
        raise StorageError(f"{path}: unknown manifest format {entries.get('format')!r}")
    return entries


@dataclass
class StateFile:
    psi: np.ndarray
    t: float
    config_hash: str
    well_fingerprint: str


def save_state(path: Path, psi: np.ndarray, t: float, config_hash: str, well_fingerprint: str) -> None:
    np.savez(
        Path(path),
        format_version=np.asarray(CHECKPOINT_FORMAT),
        psi=psi,
        t=np.asarray(float(t)),
        config_hash=np.asarray(config_hash),
        well_fingerprint=np.asarray(well_fingerprint),
    )


def load_state(path: Path) -> StateFile:
    with np.load(Path(path)) as archive:
        version = int(archive["format_version"])
        if version != CHECKPOINT_FORMAT:
            raise StorageError(f"{path}: unsupported checkpoint version {version}")
        return StateFile(
            psi=np.ascontiguousarray(archive["psi"]),
            t=float(archive["t"]),
            config_hash=str(archive["config_hash"]),
            well_fingerprint=str(archive["well_fingerprint"]),
        )
