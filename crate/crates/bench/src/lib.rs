//! Fixed inputs shared by the benchmarks.

use eil_core::evasive::{sample_poly, zero_set, SeededStream};
use eil_core::incidence::{build_incidence, derive_seed_y};
use eil_core::{FieldCtx, IncidenceConstruction, PointSet, TriPoly};

pub const SEED: u64 = 2024;

pub fn field(q: u32) -> FieldCtx {
    FieldCtx::new(q).expect("prime")
}

/// A sampled polynomial and its unpruned zero set.
pub fn poly_and_zeros(q: u32, t: u32) -> (FieldCtx, TriPoly, PointSet) {
    let ctx = field(q);
    let f = sample_poly(&ctx, t, &mut SeededStream::new(SEED)).expect("valid degree");
    let x0 = zero_set(&f, &ctx);
    (ctx, f, x0)
}

pub fn incidence(q: u32, t: u32) -> IncidenceConstruction {
    build_incidence(q, t, SEED, derive_seed_y(SEED)).expect("valid parameters")
}
