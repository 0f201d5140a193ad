"""Trivial configuration bundle over the time line.

The configuration of N point particles in d spatial dimensions at time t is a
point (t, x) with x a flat vector of d*N coordinates, blocked per particle.
The translation group R^{dN} acts by adding a shift to x at fixed t; a
time-dependent shift X(t) is a gauge field (extended Galilean transformation,
covering boosts X(t) = v*t and accelerations).  The shift group splits into an
"external" diagonal part (all particles moved identically) and an "internal"
remainder, with two anchoring conventions for the internal representative.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ModelParams",
    "Config",
    "Shift",
    "ShiftDecomposition",
    "GaugeField",
    "right_action",
    "gauge_apply",
    "decompose_shift",
]


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ModelParams:
    """Particle count, spatial dimension, masses and hbar."""

    n_particles: int
    spatial_dim: int
    masses: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "masses", _frozen_array(self.masses))
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.spatial_dim < 1:
            raise ValueError("spatial_dim must be >= 1")
        if self.masses.shape != (self.n_particles,):
            raise ValueError("need one mass per particle")
        if not np.all(self.masses > 0):
            raise ValueError("masses must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def dim(self) -> int:
        return self.n_particles * self.spatial_dim

    @cached_property
    def mass_vector(self) -> np.ndarray:
        """Per-coordinate masses, shape (dim,)."""
        return _frozen_array(np.repeat(self.masses, self.spatial_dim))

    def block(self, i: int) -> slice:
        """Coordinate slice of particle i (0-based)."""
        if not 0 <= i < self.n_particles:
            raise IndexError(f"particle index {i} out of range")
        d = self.spatial_dim
        return slice(i * d, (i + 1) * d)

    def replicate(self, a: np.ndarray) -> np.ndarray:
        """Tile a single-particle vector (d,) across all N blocks."""
        a = np.asarray(a, dtype=float)
        if a.shape != (self.spatial_dim,):
            raise ValueError("expected a single-particle vector")
        return np.tile(a, self.n_particles)

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelParams":
        return cls(
            n_particles=int(obj["n_particles"]),
            spatial_dim=int(obj["spatial_dim"]),
            masses=np.asarray(obj["masses"], dtype=float),
            hbar=float(obj.get("hbar", 1.0)),
        )

    def to_dict(self) -> dict:
        return {
            "n_particles": self.n_particles,
            "spatial_dim": self.spatial_dim,
            "masses": self.masses.tolist(),
            "hbar": self.hbar,
        }


@dataclass(frozen=True)
class Config:
    """A point (t, x) of the trivialised bundle."""

    t: float
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x))
        if not np.isfinite(self.t) or not np.all(np.isfinite(self.x)):
            raise ValueError("configuration entries must be finite")

    @property
    def dim(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class Shift:
    """An element of the translation group R^{dN} (also its Lie algebra)."""

    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _frozen_array(self.v))
        if not np.all(np.isfinite(self.v)):
            raise ValueError("shift entries must be finite")

    @property
    def dim(self) -> int:
        return self.v.size

    def __add__(self, other: "Shift") -> "Shift":
        return Shift(self.v + other.v)

    def __neg__(self) -> "Shift":
        return Shift(-self.v)

    def __rmul__(self, scalar: float) -> "Shift":
        return Shift(float(scalar) * self.v)


@dataclass(frozen=True)
class ShiftDecomposition:
    """Split of a shift into internal + external (diagonal) parts."""

    internal: Shift
    external: Shift
    anchor: int | str


def right_action(p: Config, X: Shift) -> Config:
    """Translate a configuration: (t, x) -> (t, x + X)."""
    if p.dim != X.dim:
        raise ValueError(f"dimension mismatch: config {p.dim} vs shift {X.dim}")
    return Config(p.t, p.x + X.v)


def decompose_shift(params: ModelParams, X: Shift, anchor: int | str = 0) -> ShiftDecomposition:
    """Split X into internal and external parts.

    With an integer anchor the external part replicates that particle's block,
    so the internal part has an exactly zero anchor block.  With anchor="mean"
    the external part replicates the per-axis mean over particles.
    """
    if X.dim != params.dim:
        raise ValueError("shift dimension does not match model")
    blocks = X.v.reshape(params.n_particles, params.spatial_dim)
    if anchor == "mean":
        a = blocks.mean(axis=0)
    else:
        i = int(anchor)
        if not 0 <= i < params.n_particles:
            raise IndexError(f"anchor particle {i} out of range")
        a = blocks[i]
    external = params.replicate(a)
    return ShiftDecomposition(Shift(X.v - external), Shift(external), anchor)


def _smooth_bump(s: np.ndarray) -> np.ndarray:
    # sin^2 profile: exactly zero at s=0,1
    return np.sin(np.pi * np.clip(s, 0.0, 1.0)) ** 2


@dataclass(frozen=True)
class GaugeField:
    """A sampled time-dependent shift X(t), interpolated linearly.

    If ``support=(t0, t1)`` is given, the field vanishes identically at and
    outside the window (samples there must be exactly zero); this realises the
    subgroup of transformations frozen at the path endpoints.  Outside the
    sample range without a support window the edge value is held constant.
    """

    times: np.ndarray
    values: np.ndarray
    support: tuple[float, float] | None = None

    def __post_init__(self):
        times = _frozen_array(self.times)
        values = _frozen_array(self.values)
        if values.ndim != 2 or values.shape[0] != times.size:
            raise ValueError("values must have shape (n_samples, dim)")
        if times.size == 0:
            raise ValueError("gauge field needs at least one sample")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.support is not None:
            t0, t1 = self.support
            if not t0 < t1:
                raise ValueError("support window must satisfy t0 < t1")
            outside = (times <= t0) | (times >= t1)
            if np.any(values[outside] != 0.0):
                raise ValueError("samples at/outside the support window must be zero")
            object.__setattr__(self, "support", (float(t0), float(t1)))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def value_at(self, t) -> np.ndarray:
        """Evaluate X(t); scalar t gives (dim,), array t gives (nt, dim)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t_arr.size, self.dim))
        for j in range(self.dim):
            out[:, j] = np.interp(t_arr, self.times, self.values[:, j])
        if self.support is not None:
            t0, t1 = self.support
            out[(t_arr <= t0) | (t_arr >= t1)] = 0.0
        return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    @classmethod
    def from_function(cls, fn: Callable[[float], np.ndarray], times: Sequence[float],
                      support: tuple[float, float] | None = None) -> "GaugeField":
        times = np.asarray(times, dtype=float)
        values = np.stack([np.asarray(fn(t), dtype=float) for t in times])
        return cls(times, values, support)

    @classmethod
    def boost(cls, v: np.ndarray, t0: float, t1: float, n: int = 2) -> "GaugeField":
        """Linear-in-time field X(t) = v * t (exact under linear interpolation)."""
        v = np.asarray(v, dtype=float)
        times = np.linspace(t0, t1, n)
        return cls(times, times[:, None] * v[None, :])

    @classmethod
    def constant(cls, v: np.ndarray, t0: float = 0.0, t1: float = 1.0) -> "GaugeField":
        v = np.asarray(v, dtype=float)
        return cls(np.array([t0, t1]), np.stack([v, v]))

    @classmethod
    def bump(cls, direction: np.ndarray, t0: float, t1: float, n: int = 65) -> "GaugeField":
        """Smooth single bump supported on (t0, t1), zero at the endpoints."""
        direction = np.asarray(direction, dtype=float)
        times = np.linspace(t0, t1, n)
        prof = _smooth_bump((times - t0) / (t1 - t0))
        prof[0] = 0.0
        prof[-1] = 0.0
        return cls(times, prof[:, None] * direction[None, :], support=(t0, t1))

    @classmethod
    def random_bump(cls, dim: int, t0: float, t1: float, rng: np.random.Generator,
                    n_modes: int = 4, n: int = 65, scale: float = 1.0) -> "GaugeField":
        """Random superposition of sine modes vanishing at the window endpoints."""
        times = np.linspace(t0, t1, n)
        s = (times - t0) / (t1 - t0)
        values = np.zeros((n, dim))
        for k in range(1, n_modes + 1):
            coeff = rng.normal(size=dim) * scale / k
            values += np.sin(k * np.pi * s)[:, None] * coeff[None, :]
        values[0] = 0.0
        values[-1] = 0.0
        return cls(times, values, support=(t0, t1))

    @classmethod
    def from_dict(cls, obj: dict) -> "GaugeField":
        support = obj.get("support")
        return cls(
            np.asarray(obj["times"], dtype=float),
            np.asarray(obj["values"], dtype=float),
            tuple(support) if support is not None else None,
        )

    def to_dict(self) -> dict:
        out = {"times": self.times.tolist(), "values": self.values.tolist()}
        if self.support is not None:
            out["support"] = list(self.support)
        return out


def gauge_apply(p: Config, G: GaugeField) -> Config:
    """Apply the time-dependent shift: (t, x) -> (t, x + X(t))."""
    if p.dim != G.dim:
        raise ValueError("dimension mismatch between config and gauge field")
    return Config(p.t, p.x + G.value_at(p.t))
