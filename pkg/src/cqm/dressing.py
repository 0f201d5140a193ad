"""Particle-anchored relational description via dressing.

Anchoring on particle i subtracts its position from every block, producing
coordinates of the configuration "from within": the anchor block is
identically zero and external (diagonal) shifts drop out by construction.
The anchor's trajectory enters bare-frame formulas as the sampled shift
X(t) = -x_i(t); it is deliberately *not* a GaugeField (it depends on the
configuration, not just on time), but the cocycle machinery consumes its
node samples the same way.

Changing the anchor from particle i to particle j is the frame shift
Z_ij(t) = x_i(t) - x_j(t) replicated across blocks; all transformation laws
under internal shifts and frame changes reduce to the cocycle composition
rule and hold exactly at the discrete level.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bundle import Config, GaugeField, ModelParams
from .classical import (DiscretePath, action, shift_path_nodes,
                        solve_critical_path)
from .cocycle import LagrangianModel, path_cocycle

__all__ = [
    "DressingChoice",
    "RelationalConfig",
    "FrameShift",
    "dress_config",
    "dress_path",
    "dressing_field_along",
    "frame_shift",
    "dressed_action",
    "residual_first_kind",
    "identity_suite",
    "dressed_critical_path",
]


@dataclass(frozen=True)
class DressingChoice:
    """Anchor-particle selection (0-based index)."""

    anchor_particle: int

    def validate(self, params: ModelParams) -> int:
        i = self.anchor_particle
        if not 0 <= i < params.n_particles:
            raise IndexError(f"anchor particle {i} out of range")
        return i


def _anchor_index(anchor, params: ModelParams) -> int:
    if isinstance(anchor, DressingChoice):
        return anchor.validate(params)
    i = int(anchor)
    DressingChoice(i).validate(params)
    return i


@dataclass(frozen=True)
class RelationalConfig:
    """Relational coordinates: anchor block exactly zero."""

    t: float
    xbar: np.ndarray
    anchor: int

    def __post_init__(self):
        xbar = np.array(self.xbar, dtype=float)
        xbar.setflags(write=False)
        object.__setattr__(self, "xbar", xbar)

    def as_config(self) -> Config:
        return Config(self.t, self.xbar)


@dataclass(frozen=True)
class FrameShift:
    """Replicated anchor-change samples Z_ij(t) = x_i(t) - x_j(t) along a path."""

    times: np.ndarray
    values: np.ndarray
    i: int
    j: int
    identity: bool = False

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


def dress_config(params: ModelParams, p: Config, anchor) -> RelationalConfig:
    """Subtract the anchor particle's block from every block; time unchanged."""
    i = _anchor_index(anchor, params)
    blocks = p.x.reshape(params.n_particles, params.spatial_dim)
    xbar = blocks - blocks[i]
    return RelationalConfig(p.t, xbar.ravel(), i)


def dress_path(params: ModelParams, path: DiscretePath, anchor) -> DiscretePath:
    """Nodewise dressing; the result is flagged relational with its anchor."""
    i = _anchor_index(anchor, params)
    xb = path.x.reshape(path.t.size, params.n_particles, params.spatial_dim)
    xbar = (xb - xb[:, i:i + 1, :]).reshape(path.x.shape)
    return replace(path, x=xbar, anchor=i)


def dressing_field_along(params: ModelParams, path: DiscretePath, anchor) -> np.ndarray:
    """Node samples X(t) = -x_i(t), replicated; feeds the cocycle integrals."""
    i = _anchor_index(anchor, params)
    xb = path.x.reshape(path.t.size, params.n_particles, params.spatial_dim)
    return np.tile(-xb[:, i, :], (1, params.n_particles))


def frame_shift(params: ModelParams, path: DiscretePath, i, j) -> FrameShift:
    """Anchor-change samples Z_ij(t) = x_i(t) - x_j(t), replicated per block."""
    i = _anchor_index(i, params)
    j = _anchor_index(j, params)
    xb = path.x.reshape(path.t.size, params.n_particles, params.spatial_dim)
    z = np.tile(xb[:, i, :] - xb[:, j, :], (1, params.n_particles))
    return FrameShift(path.t, z, i, j, identity=(i == j))


def dressed_action(model: LagrangianModel, path: DiscretePath, anchor,
                   cross_check_tol: float = 1e-9) -> float:
    """Action of the relational history.

    Computed two ways and cross-checked: (a) the bare action functional on the
    dressed path (the anchor's kinetic term vanishes with its block), and
    (b) bare action plus the cocycle integral of the anchor field -x_i(t).
    """
    i = _anchor_index(anchor, model.params)
    direct = action(model, dress_path(model.params, path, i))
    split = action(model, path) + path_cocycle(
        model, path, dressing_field_along(model.params, path, i)).real_value
    scale = 1.0 + abs(direct) + abs(split)
    if abs(direct - split) > cross_check_tol * scale:
        raise RuntimeError(
            f"dressed action cross-check failed: {direct!r} vs {split!r}")
    return direct


def residual_first_kind(params: ModelParams, rel_path: DiscretePath,
                        G: GaugeField) -> DiscretePath:
    """Surviving internal-shift action on a relational path.

    Adds Ybar(t) = Y(t) - Y_i(t) nodewise; the anchor block stays exactly
    zero, so the result is again relational with the same anchor.
    """
    if rel_path.anchor is None:
        raise ValueError("residual_first_kind expects a relational path")
    i = rel_path.anchor
    Y = G.value_at(rel_path.t)
    Yb = Y.reshape(rel_path.t.size, params.n_particles, params.spatial_dim)
    Ybar = (Yb - Yb[:, i:i + 1, :]).reshape(Y.shape)
    return shift_path_nodes(rel_path, Ybar)


def _internal_part(params: ModelParams, values: np.ndarray, i: int) -> np.ndarray:
    vb = values.reshape(values.shape[0], params.n_particles, params.spatial_dim)
    return (vb - vb[:, i:i + 1, :]).reshape(values.shape)


def identity_suite(model: LagrangianModel, path: DiscretePath, i, j,
                   G: GaugeField) -> dict[str, float]:
    """Residuals of the dressed-cocycle transformation laws on one path.

    Every law is evaluated as path-integrated cocycle values, left and right
    sides computed independently; residuals are pure quadrature roundoff.
    Requires i != j.  ``G`` supplies internal-shift samples Y(t); its external
    part is split off with the particle-i anchoring.
    """
    params = model.params
    i = _anchor_index(i, params)
    j = _anchor_index(j, params)
    if i == j:
        raise ValueError("identity suite needs two distinct anchors")
    t = path.t
    Y = G.value_at(t)
    pc = lambda pth, fld: path_cocycle(model, pth, fld).real_value

    u_i = dressing_field_along(params, path, i)
    u_j = dressing_field_along(params, path, j)
    rel_i = dress_path(params, path, i)
    rel_j = dress_path(params, path, j)
    z_ij = frame_shift(params, path, i, j).values
    ybar_i = _internal_part(params, Y, i)
    ybar_j = _internal_part(params, Y, j)

    out: dict[str, float] = {}

    # external shift of the dressing cocycle: c(u)^X = c(u) - c(X)
    ext = params.replicate(np.linspace(0.3, -0.2, params.spatial_dim)
                           if params.spatial_dim > 1 else np.array([0.37]))
    Xext = np.outer(np.sin(1.7 * t) + 0.4 * t, ext)
    path_X = shift_path_nodes(path, Xext)
    lhs = pc(path_X, dressing_field_along(params, path_X, i))
    rhs = pc(path, u_i) - pc(path, Xext)
    out["dressing-cocycle-external-shift"] = abs(lhs - rhs)

    # internal shift: c(u)^Y = c(u + Ybar) - c(Y)
    path_Y = shift_path_nodes(path, Y)
    lhs = pc(path_Y, dressing_field_along(params, path_Y, i))
    rhs = pc(path, u_i + ybar_i) - pc(path, Y)
    out["dressing-cocycle-internal-shift"] = abs(lhs - rhs)

    # expanded form: c(u + Ybar) = c(u) + c(f_u(.), Ybar)
    lhs = pc(path, u_i + ybar_i)
    rhs = pc(path, u_i) + pc(rel_i, ybar_i)
    out["dressing-cocycle-internal-shift-expanded"] = abs(lhs - rhs)

    # frame change of the dressing cocycle: c(u_j) = c(u_i) + c(f_{u_i}(.), Z)
    lhs = pc(path, u_j)
    rhs = pc(path, u_i) + pc(rel_i, z_ij)
    out["dressing-cocycle-frame-shift"] = abs(lhs - rhs)

    # internal transformation of the frame shift: Z^Y = Z + (Y_i - Y_j)
    z_transformed = frame_shift(params, path_Y, i, j).values
    diff = Y.reshape(t.size, params.n_particles, params.spatial_dim)
    yi_minus_yj = np.tile(diff[:, i, :] - diff[:, j, :], (1, params.n_particles))
    out["frame-shift-internal-transform"] = float(
        np.abs(z_transformed - (z_ij + yi_minus_yj)).max())

    # c(f_{u_i}(.), Z)^Y = c(f_{u_i}(.), Z) + c(f_{u_j}(.), Ybar^j) - c(f_{u_i}(.), Ybar^i)
    rel_i_Y = dress_path(params, path_Y, i)
    lhs = pc(rel_i_Y, z_transformed)
    rhs = pc(rel_i, z_ij) + pc(rel_j, ybar_j) - pc(rel_i, ybar_i)
    out["frame-cocycle-internal-shift"] = abs(lhs - rhs)

    # frame covariance of the dressed action: S^{u_j} = S^{u_i} + c(f_{u_i}(.), Z)
    lhs = dressed_action(model, path, j)
    rhs = dressed_action(model, path, i) + pc(rel_i, z_ij)
    out["dressed-action-frame-covariance"] = abs(lhs - rhs)

    # first-kind residual of the dressed action: S[(gamma^u)^Ybar] = S^u + c_{gamma^u}(Ybar)
    lhs = action(model, shift_path_nodes(rel_i, ybar_i))
    rhs = dressed_action(model, path, i) + pc(rel_i, ybar_i)
    out["dressed-action-internal-shift"] = abs(lhs - rhs)

    return out


def dressed_critical_path(model: LagrangianModel, q0: RelationalConfig,
                          q1: RelationalConfig, M: int,
                          tol: float = 1e-10) -> DiscretePath:
    """Critical path of the dressed action on the reduced coordinates.

    The anchor block is frozen at zero.  For the free model the non-anchor
    blocks are straight lines; with a (translation-invariant) potential the
    reduced boundary-value problem is solved by the same Newton iteration.
    """
    if q0.anchor != q1.anchor:
        raise ValueError("endpoints must share the anchor")
    params = model.params
    i = q0.anchor
    d = params.spatial_dim
    keep = [k for k in range(params.n_particles) if k != i]

    if model.potential is None:
        path = DiscretePath.straight(q0.as_config(), q1.as_config(), M)
        return replace(path, anchor=i)

    # reduced model over the non-anchor blocks, anchor block pinned at zero
    red_params = ModelParams(params.n_particles - 1, d,
                             params.masses[keep], params.hbar)

    def embed(xred: np.ndarray) -> np.ndarray:
        full = np.zeros(params.dim)
        for a, k in enumerate(keep):
            full[k * d:(k + 1) * d] = xred[a * d:(a + 1) * d]
        return full

    def restrict(g: np.ndarray) -> np.ndarray:
        return np.concatenate([g[k * d:(k + 1) * d] for k in keep])

    red_model = LagrangianModel(
        red_params,
        potential=lambda xr: model.potential(embed(xr)),
        potential_grad=lambda xr: restrict(model.gradient(embed(xr))),
        translation_invariant=False,
    )
    sel = np.concatenate([np.arange(k * d, (k + 1) * d) for k in keep])
    red_path = solve_critical_path(
        red_model, Config(q0.t, q0.xbar[sel]), Config(q1.t, q1.xbar[sel]),
        M, tol=tol)
    xfull = np.zeros((M + 1, params.dim))
    xfull[:, sel] = red_path.x
    return DiscretePath.from_nodes(red_path.t, xfull, anchor=i)
