//! Rigorous upper and lower bounds on entropy numbers of diagonal operators
//! `D_σ: ℓ_p → ℓ_q`, regularity classification of the diagonal sequence, and a
//! brute-force covering oracle for dimensions up to three.
//!
//! Every quantity is carried in log-domain ([`LogReal`]) because the sequences
//! of interest underflow `f64` after a handful of terms.

pub mod bounds;
pub mod conditions;
pub mod error;
pub mod exponent;
pub mod logreal;
pub mod oracle;
pub mod sequence;
pub mod special;

pub use error::{Error, Result};
pub use exponent::{Branch, ExponentPair};
pub use logreal::LogReal;
pub use sequence::{SequenceSpec, TailModel};
