//! Finite-dimensional laboratory for periodic nonautonomous evolution problems.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*F64`/`*F32` aliases below fix the scalar type.

pub mod averaging;
pub mod degree;
pub mod error;
pub mod evolsys;
pub mod exprlang;
pub mod linop;
pub mod mild;
pub mod quad;
pub mod scalar;
pub mod semigroup;
pub mod wave;

pub use error::{Error, Result};
pub use linop::{Matrix, Metric, Vector};
pub use scalar::Real;

pub type MatrixF64 = Matrix<f64>;
pub type MatrixF32 = Matrix<f32>;
pub type VectorF64 = Vector<f64>;
pub type VectorF32 = Vector<f32>;
pub type MetricF64 = Metric<f64>;
pub type GeneratorFamilyF64 = evolsys::GeneratorFamily<f64>;
pub type GeneratorFamilyF32 = evolsys::GeneratorFamily<f32>;
pub type EvolutionSystemF64 = evolsys::EvolutionSystem<f64>;
pub type EvolutionSystemF32 = evolsys::EvolutionSystem<f32>;
pub type NonlinearFieldF64 = mild::NonlinearField<f64>;
pub type TrajectoryF64 = mild::Trajectory<f64>;
pub type MildProblemF64 = mild::MildProblem<f64>;
pub type RegionF64 = degree::Region<f64>;
pub type WaveModelF64 = wave::WaveModel<f64>;
pub type ChernoffSchemeF64 = semigroup::ChernoffScheme<f64>;
