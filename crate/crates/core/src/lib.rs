//! Extremal graph constructions over prime fields.
//!
//! * [`gf`]: prime-field arithmetic.
//! * [`geom3`]: points, canonical lines and line duality in `F_q^3`.
//! * [`evasive`]: pruned zero sets of random polynomials meeting every line
//!   in at most `t` points.
//! * [`subgraph`]: bitset graphs, `K_{s,m}`-freeness and biclique counting.
//! * [`incidence`]: the `K_{2,t+1}`-free point–plane incidence graph with
//!   many `K_{t,t}` copies.
//! * [`furedi`]: Füredi's graph `G_t(q)`.
//! * [`report`]: the `report-v1` experiment record.

pub mod evasive;
pub mod furedi;
pub mod geom3;
pub mod gf;
pub mod incidence;
pub mod report;
pub mod subgraph;

pub use evasive::{EvasiveSample, PointSet, SeededStream, TriPoly, UniPoly};
pub use furedi::FurediGraph;
pub use geom3::{AffineLine, Point3};
pub use gf::{FieldCtx, FieldElement};
pub use incidence::IncidenceConstruction;
pub use report::{StatsReport, TrialRecord};
pub use subgraph::{BitGraph, Freeness, Witness};
