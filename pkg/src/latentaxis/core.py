"""Domain types and arithmetic for latent-space attribute editing.

The engine works in two vector spaces: the generator's native latent space
(``dim`` entries, 512 by default) and its layer-extended form (one native
vector per generator layer, 18 by default).  An :class:`AttributeAxis` is a
unit direction in the native space; a score is the scalar projection of a
latent onto that axis.

All types are immutable and all operations are pure, so they are safe to
share across threads without coordination.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "DEFAULT_DIM",
    "DEFAULT_LAYERS",
    "Score",
    "Sex",
    "LatentVector",
    "ExtendedLatent",
    "AttributeAxis",
    "project_w",
    "project_wplus",
    "apply_edit",
    "scores_w",
    "scores_wplus",
]

DEFAULT_DIM = 512
DEFAULT_LAYERS = 18

#: Scalar position on an attribute axis (dimensionless).
Score = float


class Sex(Enum):
    """Two-class attribute label.  Enum values double as the on-disk label byte."""

    FEMALE = 0
    MALE = 1

    @property
    def json_value(self) -> str:
        return self.name.lower()

    @classmethod
    def from_json(cls, value: str) -> "Sex":
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValueError(f"unknown label {value!r}") from None


def _readonly_array(values, *, ndim: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim or arr.size == 0:
        raise ValueError(f"{what} must be a non-empty {ndim}-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LatentVector:
    """A point in the generator's native latent space."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _readonly_array(self.values, ndim=1, what="latent"))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class ExtendedLatent:
    """A layer-extended latent: one native-space vector per generator layer."""

    values: np.ndarray  # shape (layers, dim)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _readonly_array(self.values, ndim=2, what="extended latent"))

    @classmethod
    def from_blocks(cls, blocks: Iterable[LatentVector]) -> "ExtendedLatent":
        rows = [b.values for b in blocks]
        if not rows:
            raise ValueError("extended latent needs at least one block")
        dims = {r.shape[0] for r in rows}
        if len(dims) != 1:
            raise ValueError(f"blocks must share one dimension, got {sorted(dims)}")
        return cls(np.stack(rows))

    @classmethod
    def tiled(cls, w: LatentVector, layers: int = DEFAULT_LAYERS) -> "ExtendedLatent":
        """Repeat a native-space latent once per layer."""
        if layers <= 0:
            raise ValueError("layers must be positive")
        return cls(np.tile(w.values, (layers, 1)))

    @property
    def layers(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def blocks(self) -> tuple[LatentVector, ...]:
        return tuple(LatentVector(row) for row in self.values)

    def __array__(self, dtype=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class AttributeAxis:
    """Unit direction in the native latent space along which an attribute varies.

    ``norm_raw`` keeps the magnitude of the vector the direction was derived
    from (e.g. the separating hyperplane normal before normalization), so the
    original scale stays recoverable.  ``meta`` records provenance such as
    training-set size and solver settings.
    """

    direction: np.ndarray
    norm_raw: float
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        arr = _readonly_array(self.direction, ndim=1, what="axis direction")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"axis direction must have unit norm, got {norm!r}")
        if not (self.norm_raw > 0.0):
            raise ValueError("norm_raw must be positive")
        object.__setattr__(self, "direction", arr)
        object.__setattr__(self, "meta", dict(self.meta))

    @classmethod
    def from_raw(cls, vector, meta: Mapping[str, object] | None = None) -> "AttributeAxis":
        """Normalize an arbitrary non-zero vector into an axis."""
        arr = np.asarray(vector, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("cannot build an axis from a zero or non-finite vector")
        return cls(arr / norm, norm, dict(meta or {}))

    @property
    def dim(self) -> int:
        return self.direction.shape[0]

    @property
    def fingerprint(self) -> str:
        """Short hex digest identifying this direction (sha-256 of its float64 bytes)."""
        return hashlib.sha256(self.direction.tobytes()).hexdigest()[:16]


def _check_dim(dim: int, axis: AttributeAxis) -> None:
    if axis.dim != dim:
        raise ValueError(f"dimension mismatch: latent dim {dim} vs axis dim {axis.dim}")


def project_w(v: LatentVector, axis: AttributeAxis) -> Score:
    """Scalar position of a native-space latent on the axis."""
    _check_dim(v.dim, axis)
    return float(v.values @ axis.direction)


def project_wplus(v: ExtendedLatent, axis: AttributeAxis) -> Score:
    """Mean per-layer projection of an extended latent on the axis.

    Averaging (rather than summing) keeps scores commensurate between the two
    spaces: an extended latent whose layers all equal ``w`` scores exactly
    ``project_w(w)``, and :func:`apply_edit` moves the score by exactly its
    delta.
    """
    _check_dim(v.dim, axis)
    return float(np.mean(v.values @ axis.direction))


def apply_edit(v: ExtendedLatent, axis: AttributeAxis, delta: float) -> ExtendedLatent:
    """Shift every layer of ``v`` by ``delta`` along the axis."""
    _check_dim(v.dim, axis)
    if not np.isfinite(delta):
        raise ValueError("delta must be finite")
    if delta == 0.0:
        return v
    return ExtendedLatent(v.values + delta * axis.direction)


def scores_w(matrix, axis: AttributeAxis) -> np.ndarray:
    """Vectorized :func:`project_w` over the rows of an (n, dim) array."""
    X = np.asarray(matrix, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected an (n, dim) array, got shape {X.shape}")
    _check_dim(X.shape[1], axis)
    return X @ axis.direction


def scores_wplus(array, axis: AttributeAxis) -> np.ndarray:
    """Vectorized :func:`project_wplus` over an (n, layers, dim) array."""
    X = np.asarray(array, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"expected an (n, layers, dim) array, got shape {X.shape}")
    _check_dim(X.shape[2], axis)
    return (X @ axis.direction).mean(axis=1)
