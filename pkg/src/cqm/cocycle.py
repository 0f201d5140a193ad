"""The Lagrangian-induced translation cocycle and its U(1) lift.

For the free N-particle Lagrangian, translating a configuration with velocity
v by a shift whose velocity is W changes the Lagrangian density by

    c(v, W) = sum_k m_k ( <v_k, W_k> + |W_k|^2 / 2 ),

which satisfies the defining composition law c(p, X+Y) = c(p, X) + c(p+X, Y)
once the velocity at the translated point is taken to be v + W(X).  Integrated
over a discretised history the value lifts to the unit-modulus phase
exp(-i c / hbar) that multiplies wave functions under gauge transformations.

Discrete convention: path integrals of the cocycle use per-interval finite
differences of both the positions and the shift samples at the path's own
nodes, so the composition law, the action splitting and the boost boundary
term all hold exactly in exact arithmetic (roundoff only in floating point).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bundle import Config, GaugeField, ModelParams, Shift

__all__ = [
    "LagrangianModel",
    "CocycleAccumulator",
    "cocycle_density",
    "pointwise_cocycle",
    "cocycle_property_residual",
    "linear_cocycle",
    "path_cocycle",
    "path_linear_cocycle",
    "boost_phase",
]


@dataclass(frozen=True)
class LagrangianModel:
    """Free kinetic model, optionally with a potential V(x).

    A translation-invariant potential (one depending only on coordinate
    differences) drops out of the cocycle for external shifts; the flag is
    probe-checked at construction.
    """

    params: ModelParams
    potential: Callable[[np.ndarray], float] | None = None
    potential_grad: Callable[[np.ndarray], np.ndarray] | None = None
    potential_hess: Callable[[np.ndarray], np.ndarray] | None = None
    translation_invariant: bool = True

    def __post_init__(self):
        if self.potential is not None and self.translation_invariant:
            rng = np.random.default_rng(171)
            for _ in range(8):
                x = rng.normal(size=self.params.dim)
                a = rng.normal(size=self.params.spatial_dim)
                shifted = x + self.params.replicate(a)
                if abs(self.potential(shifted) - self.potential(x)) > 1e-12 * (
                    1.0 + abs(self.potential(x))
                ):
                    raise ValueError(
                        "potential marked translation-invariant fails probe check"
                    )

    @property
    def kind(self) -> str:
        return "free" if self.potential is None else "free+potential"

    @classmethod
    def free(cls, params: ModelParams) -> "LagrangianModel":
        return cls(params)

    def potential_values(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate V on an array of configurations, shape (..., dim)."""
        xs = np.asarray(xs, dtype=float)
        flat = xs.reshape(-1, xs.shape[-1])
        vals = np.array([self.potential(x) for x in flat])
        return vals.reshape(xs.shape[:-1])

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self.potential_grad is not None:
            return np.asarray(self.potential_grad(x), dtype=float)
        # central differences, adequate for smooth test potentials
        eps = 1e-6
        g = np.empty_like(x)
        for c in range(x.size):
            e = np.zeros_like(x)
            e[c] = eps
            g[c] = (self.potential(x + e) - self.potential(x - e)) / (2 * eps)
        return g

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self.potential_hess is not None:
            return np.asarray(self.potential_hess(x), dtype=float)
        eps = 1e-5
        h = np.empty((x.size, x.size))
        for c in range(x.size):
            e = np.zeros_like(x)
            e[c] = eps
            h[:, c] = (self.gradient(x + e) - self.gradient(x - e)) / (2 * eps)
        return 0.5 * (h + h.T)


@dataclass(frozen=True)
class CocycleAccumulator:
    """Path-integrated cocycle value and its unit-modulus phase."""

    real_value: float
    hbar: float
    phase: complex

    @classmethod
    def from_value(cls, value: float, hbar: float) -> "CocycleAccumulator":
        return cls(float(value), float(hbar), np.exp(-1j * value / hbar))

    @property
    def inverse_phase(self) -> complex:
        return np.conj(self.phase)


def _as_vec(v) -> np.ndarray:
    return v.v if isinstance(v, Shift) else np.asarray(v, dtype=float)


def cocycle_density(model: LagrangianModel, v, W) -> float:
    """Kinetic cocycle density sum_k m_k(<v_k, W_k> + |W_k|^2/2)."""
    v = _as_vec(v)
    W = _as_vec(W)
    mv = model.params.mass_vector
    if v.shape != (model.params.dim,) or W.shape != (model.params.dim,):
        raise ValueError("dimension mismatch in cocycle density")
    return float(np.dot(mv * v, W) + 0.5 * np.dot(mv * W, W))


def pointwise_cocycle(model: LagrangianModel, p: Config, v, X) -> float:
    """Cocycle density at a configuration, including the potential difference.

    The shift X doubles as the velocity it induces; with a potential the
    density picks up -(V(x + X) - V(x)).
    """
    val = cocycle_density(model, v, X)
    if model.potential is not None:
        X = _as_vec(X)
        val -= model.potential(p.x + X) - model.potential(p.x)
    return val


def cocycle_property_residual(model: LagrangianModel, p: Config, v, X, Y) -> float:
    """Residual of c(p, X+Y) = c(p, X) + c(p+X, Y).

    The density at the translated point uses the transformed velocity v + X.
    Identically zero in exact arithmetic; the return value is pure rounding.
    """
    v = _as_vec(v)
    X = _as_vec(X)
    Y = _as_vec(Y)
    lhs = pointwise_cocycle(model, p, v, X + Y)
    shifted = Config(p.t, p.x + X)
    rhs = pointwise_cocycle(model, p, v, X) + pointwise_cocycle(model, shifted, v + X, Y)
    return abs(lhs - rhs)


def linear_cocycle(model: LagrangianModel, v, chi) -> float:
    """Linearised cocycle sum_k m_k <v_k, chi_k> (the classical anomaly density)."""
    v = _as_vec(v)
    chi = _as_vec(chi)
    return float(np.dot(model.params.mass_vector * v, chi))


def _field_at_nodes(field, t: np.ndarray, dim: int) -> np.ndarray:
    """Resolve a gauge field / frame shift / raw sample array to path-node values."""
    if isinstance(field, GaugeField):
        return field.value_at(t)
    values = getattr(field, "values", field)
    values = np.asarray(values, dtype=float)
    if values.shape != (t.size, dim):
        raise ValueError("sampled shift does not match path nodes")
    return values


def path_cocycle(model: LagrangianModel, path, field) -> CocycleAccumulator:
    """Integrate the cocycle of a time-dependent shift along a discrete path.

    ``field`` may be a GaugeField, a FrameShift-like object with per-node
    samples, or a raw (M+1, dim) array of node values.  Velocities of both the
    path and the shift are per-interval finite differences at the path nodes.
    """
    t = np.asarray(path.t, dtype=float)
    x = np.asarray(path.x, dtype=float)
    if t.size < 2:
        raise ValueError("path needs at least 2 samples")
    Xn = _field_at_nodes(field, t, model.params.dim)
    dt = np.diff(t)
    dx = np.diff(x, axis=0)
    dX = np.diff(Xn, axis=0)
    mv = model.params.mass_vector
    kinetic = float(np.sum(((dx * dX + 0.5 * dX * dX) @ mv) / dt))
    value = kinetic
    if model.potential is not None:
        g = -(model.potential_values(x + Xn) - model.potential_values(x))
        value += float(np.sum(0.5 * (g[:-1] + g[1:]) * dt))
    return CocycleAccumulator.from_value(value, model.params.hbar)


def path_linear_cocycle(model: LagrangianModel, path, field) -> float:
    """Integral of the linearised cocycle sum_k m_k <x'_k, chi'_k> along a path."""
    t = np.asarray(path.t, dtype=float)
    x = np.asarray(path.x, dtype=float)
    chin = _field_at_nodes(field, t, model.params.dim)
    dt = np.diff(t)
    dx = np.diff(x, axis=0)
    dchi = np.diff(chin, axis=0)
    return float(np.sum(((dx * dchi) @ model.params.mass_vector) / dt))


def boost_phase(model: LagrangianModel, p: Config, vboost) -> complex:
    """Boundary-term phase of a rigid boost X(t) = v*t.

    Returns exp{(i/hbar) sum_k m_k (<x_k, v_k> + |v_k|^2 t / 2)}, the factor by
    which wave functions transform under Galilean boosts.
    """
    v = _as_vec(vboost)
    mv = model.params.mass_vector
    delta = float(np.dot(mv * p.x, v) + 0.5 * np.dot(mv * v, v) * p.t)
    return np.exp(1j * delta / model.params.hbar)
