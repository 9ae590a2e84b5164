//! Online learning of updates (OLU).
//!
//! An optimizer `w_t = w_{t-1} + Δ_t` is driven by a one-dimensional online
//! learner per coordinate that picks the increment `Δ_t` from the gradients
//! seen so far. With the discounted scale-free FTRL learner this is exactly
//! Adam without debiasing or ε; with the discount set to 1 it is scale-free
//! FTRL.
//!
//! The crate is organised bottom-up:
//!
//! * [`moments`], [`stream`], [`rng`]: shared state and sequences.
//! * [`learners`]: the 1-D learner family and its coordinate-wise wrapper.
//! * [`regret`]: static, dynamic and discounted regret, the
//!   discounted-to-dynamic conversion and the explicit regret bounds.
//! * [`driver`]: the OLU loop, the direct Adam formula and the telescoping
//!   identity check.
//! * [`adversarial`]: the two-dimensional lower-bound instance and sweeps.
//! * [`bench`]: the sparse hinge-loss classification experiment.
//! * [`io`] and [`plot`]: CSV/JSON artifacts and SVG figures.
//!
//! All numeric code is generic over [`Scalar`]; the aliases below pin the
//! common instantiations, including the double-double [`Extended`] used by
//! the literal-FTRL reference.

pub mod adversarial;
pub mod bench;
pub mod driver;
pub mod error;
pub mod io;
pub mod learners;
pub mod moments;
pub mod plot;
pub mod regret;
pub mod rng;
pub mod scalar;
pub mod stream;

pub use error::{OluError, Result};
pub use learners::{AlphaSchedule, Learner, LearnerConfig, LearnerKind, LearnerSpec, VectorLearner};
pub use moments::DiscountedMoments;
pub use regret::{Partition, RegretLedger};
pub use rng::SeededRng;
pub use scalar::{Scalar, Tolerance};
pub use stream::{ComparatorSequence, LossSequence};

/// Double-precision learner.
pub type Learner64 = Learner<f64>;
/// Single-precision learner.
pub type Learner32 = Learner<f32>;
/// Double-precision learner configuration.
pub type LearnerConfig64 = LearnerConfig<f64>;
/// Double-precision discounted moments.
pub type Moments64 = DiscountedMoments<f64>;
/// Single-precision discounted moments.
pub type Moments32 = DiscountedMoments<f32>;
/// Double-precision regret ledger.
pub type Ledger64 = RegretLedger<f64>;
/// Double-precision partition.
pub type Partition64 = Partition<f64>;
/// Double-precision trajectory.
pub type Trajectory64 = driver::Trajectory<f64>;
/// Double-double scalar (about 32 significant digits) for reference computations.
pub type Extended = twofloat::TwoFloat;
/// Double-double learner.
pub type LearnerExt = Learner<Extended>;
