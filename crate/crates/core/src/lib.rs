//! Algebraic computation trees over the rationals and the machinery for
//! bounding their height by the topology of the sets they decide.
//!
//! The crate is organized bottom-up:
//!
//! - [`poly`]: exact sparse polynomials.
//! - [`tree`]: the tree representation with its validator and evaluator.
//! - [`extract`]: leaf sets as sign-condition formulas and their statistics.
//! - [`families`]: closed relaxations `S_δ`, `S_{δ,ε}`, `T_m(S)` and fibered products at the formula level.
//! - [`transforms`]: the corresponding tree-to-tree constructions.
//! - [`topology`]: GF(2) homology of sets sampled on cubical grids.
//! - [`bounds`]: explicit-constant bound calculators.
//! - [`problems`]: generators for the worked instances.

pub mod bounds;
pub mod error;
pub mod extract;
pub mod families;
pub mod poly;
pub mod problems;
pub mod topology;
pub mod transforms;
pub mod tree;

pub use error::{Error, Result};
pub use extract::{dnf_stats, leaf_dnf, BasicSet, Dnf, DnfStats, Sign, SignCondition};
pub use families::{AmbientMode, EpsDelta, FiberSpec, Schedule};
pub use poly::{Polynomial, Rational};
pub use topology::{BettiVector, GridBox, OccupancyGrid};
pub use tree::{evaluate, Operand, Tree, TreeBuilder, VertexId, VertexKind};
