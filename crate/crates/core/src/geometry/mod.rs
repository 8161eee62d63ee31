//! Aperture shapes, triangulations, quadrature and degrees of freedom.

mod aperture;
pub mod dofs;
mod mesh;
pub mod quadrature;

pub(crate) use aperture::orient;
pub use aperture::ApertureSpec;
pub use dofs::DofTable;
pub use mesh::{build_mesh, build_mesh_with, ApertureMesh, MeshDocument, MeshOptions};
pub(crate) use mesh::{dist, point_segment_distance};
pub use quadrature::{cell_quadrature, QuadratureRule};
