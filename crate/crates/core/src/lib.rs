//! Mesh-to-walking-robot pipeline: geometry processing, quadruped
//! segmentation, URDF export, physics rollout scoring, and evolutionary
//! morphology/gait co-optimization.
//!
//! The pipeline turns a static quadruped-like triangle mesh into an
//! articulated robot model (9 links, 8 revolute joints) and then searches
//! jointly over morphology variants and gait parameters against a
//! user-selected performance preference.
//!
//! Top-level flow:
//!
//! 1. [`mesh`] — load, repair, and measure watertight triangle meshes.
//! 2. [`segmentation`] — find separation planes by cross-section minima,
//!    split base + four legs, place shoulder and knee joints.
//! 3. [`model`] — assemble the kinetic model, export URDF + link meshes,
//!    generate the 30-variant augmented bank.
//! 4. [`eval`] — score locomotion with a physics rollout under a PD
//!    sinusoid gait, or delegate to an external evaluator process.
//! 5. [`evo`] — outer genetic loop over morphologies with symmetric
//!    mutation/crossover and preference-scaled fitness.
//!
//! All internal units are SI (meters, kilograms, seconds, radians).

pub mod config;
pub mod error;
pub mod eval;
pub mod evo;
pub mod mesh;
pub mod model;
pub mod pipeline;
pub mod reward;
pub mod rng;
pub mod segmentation;
pub mod shapes;
pub mod sim;

pub use error::{Error, Result};
pub use mesh::{CrossSection, MassProperties, Plane, TriangleMesh};
