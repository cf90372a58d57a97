"""Discrete varifold toolbox: meshes with junctions, bending energy, densities,
spherical links, geodesic nets, and boundary conormal integrals."""

from .boundary import (
    BoundaryDatum,
    CircleSpec,
    admissibility_check,
    boundary_measure,
    circle_conormal_integral,
    circle_conormal_integral_quad,
    load_datum,
    make_datum,
    save_datum,
    sup_conormal_integral,
)
from .curvature import (
    concentrated_volume,
    enclosed_volume,
    euler_characteristic,
    first_variation_residual,
    gauss_curvature,
    helfrich_energy,
    mean_curvature,
    second_fundamental_norm,
    willmore_energy,
)
from .blowup import (
    ball_mass,
    ball_mass_ladder,
    classify_density,
    density,
    li_yau_check,
    monotonicity_check,
    spherical_link,
)
from .generators import (
    GENERATORS,
    gen_branched_patch,
    gen_cap,
    gen_double_bubble,
    gen_double_bubble_flat,
    gen_flat_disk,
    gen_singular_pair,
    gen_sphere,
    gen_torus,
    gen_triple_bubble,
)
from .mesh import (
    DiscreteVarifold,
    MeshError,
    edge_topology,
    load_mesh_file,
    load_obj,
    load_varifold,
    make_varifold,
    refine,
    save_varifold,
    total_mass,
)
from .nets import (
    GeodesicNet,
    NetError,
    balance_residual,
    catalogue,
    load_net,
    make_net,
    match_link,
    relax,
    save_net,
    total_length,
)
from .reports import TOOL_VERSION as __version__

__all__ = [
    "BoundaryDatum",
    "CircleSpec",
    "DiscreteVarifold",
    "GENERATORS",
    "GeodesicNet",
    "MeshError",
    "NetError",
    "admissibility_check",
    "balance_residual",
    "ball_mass",
    "ball_mass_ladder",
    "boundary_measure",
    "catalogue",
    "circle_conormal_integral",
    "circle_conormal_integral_quad",
    "classify_density",
    "concentrated_volume",
    "density",
    "edge_topology",
    "enclosed_volume",
    "euler_characteristic",
    "first_variation_residual",
    "gauss_curvature",
    "gen_branched_patch",
    "gen_cap",
    "gen_double_bubble",
    "gen_double_bubble_flat",
    "gen_flat_disk",
    "gen_singular_pair",
    "gen_sphere",
    "gen_torus",
    "gen_triple_bubble",
    "helfrich_energy",
    "li_yau_check",
    "load_datum",
    "load_mesh_file",
    "load_net",
    "load_obj",
    "load_varifold",
    "make_datum",
    "make_net",
    "make_varifold",
    "match_link",
    "mean_curvature",
    "monotonicity_check",
    "refine",
    "relax",
    "save_datum",
    "save_net",
    "save_varifold",
    "second_fundamental_norm",
    "spherical_link",
    "sup_conormal_integral",
    "total_length",
    "total_mass",
    "willmore_energy",
    "__version__",
]
