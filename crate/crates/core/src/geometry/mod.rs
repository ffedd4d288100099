//! Meshes, surface extraction, and signed-distance grids.

mod sdf;
mod shapes;
mod surface;
mod tet_mesh;

pub use sdf::{build_sdf_grid, load_sdf, save_sdf, sdf_query, SdfGrid, SdfSample};
pub use shapes::{
    box_shell, crescent_prism, cylinder_shell, extrude_profile, icosphere, triangle_prism,
};
pub use surface::{
    extract_surface, load_obj, save_obj, signed_distance_to_shell, ShellNormals, SurfaceMesh,
};
pub use tet_mesh::{build_gel_pad, load_tet_file, save_tet_file, TetMesh};
