"""Pointwise numerics for twisted Dirac structures on quadratic Lie groups,
quasi-Poisson bivectors and their group-valued moment maps."""

__version__ = "0.1.0"

from .quadratic_lie import QuadraticLieAlgebra, builtin, validate
from .group_geometry import GroupPoint, make_group, sample_point
from .dirac_linear import LinearDirac, Subspace
from .cartan_quasi import cartan_dirac, quasi_poisson_bivector, verify_structure_identities
from .correspondence import RealizationPoint, direct_construct, inverse_construct
from .groupoid_amm import Arrow, amm_form
