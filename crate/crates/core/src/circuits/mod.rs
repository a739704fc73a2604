//! Encoder, round circuits, and the identities relating them.

pub mod circuit;
pub mod encoder;
pub mod identities;
pub mod injection;

pub use circuit::{
    build_circuit, build_dpl_circuit, build_mekl_circuit, Circuit, Element, Faults, Preparation, ProtocolKind,
};
pub use encoder::{build_encoder, CliffordSpec};
pub use identities::{verify_compression_identities, zero_noise_kraus, CompressionReport};
pub use injection::{injection_plan, round_cocktail, InjectionPlan};
