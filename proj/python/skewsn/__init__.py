"""Invariant graphs and saddle-node bifurcations of forced monotone interval maps."""

from ._skewsn import (
    BaseSystem,
    FibreFamily,
    GraphEscaped,
    NotInvariant,
    PreconditionFailed,
    closed_form_betac,
    find_beta_c,
    find_beta_c_restricted,
    golden_mean,
    graph,
    linear_flow_map,
    lyapunov,
    pinching,
    saddle_node_arctan,
    torus_orbit_m1,
    torus_orbit_m2,
)


def grid(n, dim=1):
    """Uniform base samples: i/n on the circle, or an n x n grid on the torus."""
    if dim == 1:
        return [[i / n] for i in range(n)]
    return [[i / n, k / n] for i in range(n) for k in range(n)]


__all__ = [
    "BaseSystem",
    "FibreFamily",
    "GraphEscaped",
    "NotInvariant",
    "PreconditionFailed",
    "closed_form_betac",
    "find_beta_c",
    "find_beta_c_restricted",
    "golden_mean",
    "graph",
    "grid",
    "linear_flow_map",
    "lyapunov",
    "pinching",
    "saddle_node_arctan",
    "torus_orbit_m1",
    "torus_orbit_m2",
]
