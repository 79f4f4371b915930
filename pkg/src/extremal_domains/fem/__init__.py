"""P2 finite elements for the mixed eigenproblem on planar boundary-edge domains."""

from .eigen import EigensolverError, FluxTrace, MixedEigenpair, recover_flux, solve_first_eigenpair
from .mesh import DIRICHLET, NEUMANN, DomainSpec, SimplicialMesh, mesh_domain, read_mesh, rectangle_mesh, write_mesh
from .p2 import P2Space, assemble, boundary_mass, volume

__all__ = [
    "DIRICHLET",
    "NEUMANN",
    "DomainSpec",
    "SimplicialMesh",
    "mesh_domain",
    "rectangle_mesh",
    "read_mesh",
    "write_mesh",
    "P2Space",
    "assemble",
    "boundary_mass",
    "volume",
    "EigensolverError",
    "FluxTrace",
    "MixedEigenpair",
    "recover_flux",
    "solve_first_eigenpair",
]
