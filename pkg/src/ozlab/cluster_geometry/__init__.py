"""Clusters, dual surfaces, minimal surfaces, break/cone points and slabs."""
from .breakpoints import (BreakPointData, DecompositionCheck, IrreducibleDecomposition,
                          break_points, check_decompositions, cone_data, cone_points, extremes,
                          irreducible_decomposition, strip_component)
from .clusters import (Cluster, Components, DualSurface, boundary_edges, components,
                       connected_parts, external_boundary_and_surface, filled_vertices)
from .minimal import SearchBudgetError, phi, phi_psi_oracle, phi_t_oracle
from .slabs import (SlabReport, classify_slabs, correct_points, default_c_plus, m_r_sequences,
                    slab_levels, surface_of)

__all__ = [
    "BreakPointData", "DecompositionCheck", "IrreducibleDecomposition", "break_points",
    "check_decompositions", "cone_data", "cone_points", "extremes",
    "irreducible_decomposition", "strip_component", "Cluster", "Components", "DualSurface",
    "boundary_edges", "components", "connected_parts", "external_boundary_and_surface",
    "filled_vertices", "SearchBudgetError", "phi", "phi_psi_oracle", "phi_t_oracle",
    "SlabReport", "classify_slabs", "correct_points", "default_c_plus", "m_r_sequences",
    "slab_levels", "surface_of",
]
