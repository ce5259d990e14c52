//! Existence certificates for periodic solutions of `x'' = -V'(x)` from the
//! SO(2)-equivariant degree with values in `U(SO(2))`, plus Fourier-Galerkin
//! orbit search and branch continuation for numerical corroboration.
//!
//! The usual entry point is [`analyze`] on a [`SystemSpec`] built either
//! with [`build_system`] or from JSON via [`SystemSpec::from_json_str`].

// tolerance checks are written `!(x <= tol)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod eqdeg;
pub mod galerkin;
pub mod ring;
pub mod spectral;
pub mod systems;

pub use certify::{analyze, continuation_certificate, AnalysisConfig, ExistenceCertificate, Verdict};
pub use eqdeg::{index_iv, linear_degree, EquivariantIndex, PointId, RepresentationDescriptor};
pub use galerkin::{find_orbit, search_orbit, trace_branch, FourierLoop, GalerkinConfig, OrbitResult};
pub use ring::{Coord, RingElement, Subgroup};
pub use spectral::{eigen_sym, SpectralData, SymMatrix, Tolerances};
pub use systems::{build_system, CriticalPoint, ModelPotential, Potential, SystemSpec};
