"""Quadrature datasets and their text file format."""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

FORMAT_TAG = "#quadrature-dataset"
FORMAT_VERSION = 1
SIGNIFICANT_DIGITS = 9


def round_significant(values, digits: int = SIGNIFICANT_DIGITS) -> np.ndarray:
    """Round to the decimal text representation written to disk."""
    arr = np.asarray(values, dtype=float)
    return np.char.mod(f"%.{digits}g", arr).astype(float)


@dataclass(frozen=True, eq=False)
class QuadratureDataset:
    """Homodyne records (theta_j, x_j) with the measurement metadata."""
    thetas: np.ndarray
    xs: np.ndarray
    gamma_h: float
    seed: int
    source_label: str = ""

    def __post_init__(self):
        thetas = np.array(self.thetas, dtype=float, copy=True).ravel()
        xs = np.array(self.xs, dtype=float, copy=True).ravel()
        if thetas.size == 0:
            raise ValueError("dataset must contain at least one record")
        if thetas.shape != xs.shape:
            raise ValueError(f"got {thetas.size} phases but {xs.size} quadrature values")
        if not 0.0 <= self.gamma_h < 1.0:
            raise ValueError(f"gamma_h must be in [0, 1), got {self.gamma_h}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if "," in self.source_label or "\n" in self.source_label or "=" in self.source_label:
            raise ValueError(f"source_label may not contain ',', '=' or newlines: {self.source_label!r}")

        thetas.setflags(write=False)
        xs.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "gamma_h", float(self.gamma_h))
        object.__setattr__(self, "seed", int(self.seed))

    def __len__(self) -> int:
        return self.xs.size

    @property
    def records(self) -> List[Tuple[float, float]]:
        return list(zip(self.thetas.tolist(), self.xs.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"theta": self.thetas, "x": self.xs})

    def header(self) -> str:
        return (f"{FORMAT_TAG},version={FORMAT_VERSION},gamma_h={self.gamma_h!r},"
                f"seed={self.seed},source_label={self.source_label},count={len(self)}")


def save_dataset(data: QuadratureDataset, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(data.header() + "\n")
        data.to_frame().to_csv(f, header=False, index=False,
                               float_format=f"%.{SIGNIFICANT_DIGITS}g", lineterminator="\n")
    return path


def _parse_header(line: str) -> dict:
    fields = line.strip().split(",")
    if fields[0] != FORMAT_TAG:
        raise ValueError(f"not a quadrature dataset header: {line.strip()!r}")
    meta = dict(field.split("=", 1) for field in fields[1:])
    if int(meta.get("version", -1)) != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset version {meta.get('version')}")
    return meta


def load_dataset(path: Union[str, Path]) -> QuadratureDataset:
    path = Path(path)
    with open(path) as f:
        meta = _parse_header(f.readline())

    body = pd.read_csv(path, skiprows=1, header=None, names=["theta", "x"],
                       float_precision="round_trip")
    count = int(meta["count"])
    if len(body) != count:
        raise ValueError(f"{path} declares {count} records but holds {len(body)}")

    return QuadratureDataset(
        thetas=body["theta"].to_numpy(),
        xs=body["x"].to_numpy(),
        gamma_h=float(meta["gamma_h"]),
        seed=int(meta["seed"]),
        source_label=meta.get("source_label", ""),
    )
