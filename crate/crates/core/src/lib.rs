//! Mixed extensions of finite normal-form games.
//!
//! A game with `m` players and `n_i + 1` pure strategies per player is stored
//! as utility tensors. Its mixed extension lives on the product of simplices
//! `G` inside the affine space `A`, which in turn is a chart of a product of
//! projective spaces. On top of that the crate provides:
//!
//! * the multilinear payoff forms and their `κ`/`λ` and homogeneous `K`/`Λ`
//!   decompositions ([`multilinear`]),
//! * the chart atlas and the defining maps of coordinate hyperplanes and
//!   payoff-difference hypersurfaces ([`atlas`]),
//! * Nash equilibrium enumeration by supports ([`equilibrium`]),
//! * good families and numerical transversality checks ([`genericity`]),
//! * the `mixext` command-line front end ([`cli`]).

pub mod atlas;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod format;
pub mod game;
pub mod genericity;
pub mod linalg;
pub mod multilinear;
pub mod newton;
pub mod scalar;
pub mod tensor;

pub use atlas::{ChartId, ChartPoint, Hypersurface, StrategyLabel};
pub use equilibrium::{enumerate_nash, enumerate_nash_with, EquilibriumCertificate, NashReport, SolverOptions};
pub use error::{Error, Result};
pub use game::{random_game, FiniteGame, MixedProfile, NumericMode, PayoffDistribution, SupportProfile};
pub use genericity::{is_good, transversal_at, GoodFamily, TransversalityReport};
