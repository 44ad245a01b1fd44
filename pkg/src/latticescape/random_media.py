"""Seeded disorder potentials: Bernoulli, uniform, constant, and file-backed.

Generation is keyed by a counter-based Philox stream, so a (seed, kind,
geometry) triple reproduces the same field bit-for-bit regardless of
traversal order or platform thread count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DimensionMismatch, InvalidPotential
from .lattice import LatticeGeometry
from .operators import PotentialField


@dataclass(frozen=True)
class Bernoulli:
    low: float
    high: float
    p_low: float

    def __post_init__(self):
        if not 0.0 <= self.low < self.high:
            raise InvalidPotential(f"need 0 <= low < high, got low={self.low}, high={self.high}")
        if not 0.0 <= self.p_low <= 1.0:
            raise InvalidPotential(f"p_low must be in [0, 1], got {self.p_low}")


@dataclass(frozen=True)
class Uniform:
    v_max: float

    def __post_init__(self):
        if self.v_max <= 0.0:
            raise InvalidPotential(f"uniform v_max must be positive, got {self.v_max}")


@dataclass(frozen=True)
class Constant:
    c: float

    def __post_init__(self):
        if self.c < 0.0:
            raise InvalidPotential(f"constant potential must be nonnegative, got {self.c}")


@dataclass(frozen=True)
class FromFile:
    path: Union[str, Path]


PotentialKind = Union[Bernoulli, Uniform, Constant, FromFile]


@dataclass(frozen=True)
class PotentialSpec:
    kind: PotentialKind
    seed: int = 0


def _read_field_file(path: Path, n_sites: int) -> np.ndarray:
    """Plain text (one value per line) or the CLI field CSV (column 'v')."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        fh.seek(0)
        if any(c.isalpha() for c in first):
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "v" not in reader.fieldnames:
                raise InvalidPotential(f"{path}: CSV file lacks a 'v' column")
            values = np.array([float(row["v"]) for row in reader])
        else:
            values = np.loadtxt(fh, dtype=np.float64, ndmin=1)
    if values.shape != (n_sites,):
        raise DimensionMismatch(
            f"{path}: file has {values.size} values, lattice has {n_sites} sites"
        )
    return values


def generate(spec: PotentialSpec, geom: LatticeGeometry) -> PotentialField:
    """Deterministic potential field for (spec, geom); values in [0, V_max].

    A periodic lattice with an identically-zero draw is repaired by setting
    one uniformly-chosen site (from the same stream) to V_max; file-backed
    all-zero periodic potentials are rejected outright.
    """
    n = geom.n_sites
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    kind = spec.kind

    if isinstance(kind, Bernoulli):
        u = rng.random(n)
        values = np.where(u < kind.p_low, kind.low, kind.high)
        v_max = kind.high
    elif isinstance(kind, Uniform):
        values = rng.random(n) * kind.v_max
        v_max = kind.v_max
    elif isinstance(kind, Constant):
        if geom.is_periodic and kind.c == 0.0:
            raise InvalidPotential("constant zero potential is not invertible on a torus")
        values = np.full(n, kind.c)
        v_max = kind.c
    elif isinstance(kind, FromFile):
        values = _read_field_file(Path(kind.path), n)
        if values.min() < 0.0:
            raise InvalidPotential(f"{kind.path}: potential values must be nonnegative")
        v_max = float(values.max())
        if geom.is_periodic and v_max == 0.0:
            raise InvalidPotential(f"{kind.path}: identically-zero potential on a torus")
    else:
        raise TypeError(f"unknown potential kind {kind!r}")

    if geom.is_periodic and v_max > 0.0 and not values.any():
        values = values.copy()
        values[int(rng.integers(0, n))] = v_max
    return PotentialField(geom, values, v_max)
