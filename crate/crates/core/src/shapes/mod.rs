//! Procedural test and demo geometry: primitives, surfaces of revolution,
//! signed-distance solids meshed with surface nets, and the parametric
//! quadruped creature used as the pipeline's reference input.

mod primitives;
mod quadruped;
mod sdf;
mod surface_nets;

pub use primitives::{cuboid, cube, cylinder, dumbbell, extrude_polygon, icosphere, l_prism, lathe};
pub use quadruped::{synthetic_quadruped, QuadrupedParams};
pub use sdf::Sdf;
pub use surface_nets::mesh_sdf;
