//! Regular simplicial partitions in R^d.
//!
//! * [`geometry`]: points, simplices, volume, longest edge, regularity ratio.
//! * [`cone`]: tangent cones, Monte-Carlo solid-angle fractions and the
//!   intersection-number bound `(1/η)(2eπ/d)^{d/2}`.
//! * [`partition`]: refinement forests built by longest-edge bisection,
//!   valence counting and the end-to-end bound audit in [`audit`].
//! * [`optimizer`]: simplicial branch-and-bound for Lipschitz objectives.
//! * [`io`] and [`cli`]: JSON/CSV formats and the command-line front end.

pub mod audit;
pub mod cli;
pub mod cone;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod partition;
pub mod sampling;

pub use cone::{FractionEstimate, MonteCarloConfig, VertexCone};
pub use error::{Error, Result};
pub use geometry::{Point, Simplex, SimplexKind};
pub use partition::{Partition, RefineStrategy};
