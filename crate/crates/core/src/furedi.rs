//! Füredi's `K_{2,t+1}`-free graph `G_t(q)`.
//!
//! Vertices are the orbits of `F_q^2 \ {0}` under scaling by the order-`t`
//! subgroup `H` of `F_q^*`; `[a,b] ~ [x,y]` iff `ax + by ∈ H`. Self-adjacent
//! classes are dropped to get a simple graph, which leaves every degree at
//! `q` or `q - 1`. The graph also has no `K_{3,t}`.

use thiserror::Error;

use crate::gf::{FieldCtx, FieldElement, GfError};
use crate::report::{Aggregate, Params, ReportKind, StatsReport, TrialRecord};
use crate::subgraph::{choose, BitGraph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FurediError {
    #[error("t must be at least 2 (got {0})")]
    OrderTooSmall(u32),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct FurediGraph {
    pub ctx: FieldCtx,
    pub t: u32,
    pub subgroup: Vec<FieldElement>,
    /// Lexicographically smallest member of each orbit, in increasing order.
    pub classes: Vec<(FieldElement, FieldElement)>,
    pub graph: BitGraph,
    in_h: Vec<bool>,
}

impl FurediGraph {
    pub fn n(&self) -> usize {
        self.classes.len()
    }

    pub fn in_subgroup(&self, x: FieldElement) -> bool {
        self.in_h[x.value() as usize]
    }

    /// The defining relation on representatives.
    pub fn related(
        &self,
        u: (FieldElement, FieldElement),
        v: (FieldElement, FieldElement),
    ) -> bool {
        self.in_subgroup(u.0 * v.0 + u.1 * v.1)
    }

    /// Sidecar mapping vertex index to representative: `index a b` per line.
    pub fn vertex_map_text(&self) -> String {
        self.classes
            .iter()
            .enumerate()
            .map(|(i, (a, b))| format!("{i} {a} {b}\n"))
            .collect()
    }
}

pub fn build_furedi(q: u32, t: u32) -> Result<FurediGraph, FurediError> {
    if t < 2 {
        return Err(FurediError::OrderTooSmall(t));
    }
    let ctx = FieldCtx::new(q)?;
    let subgroup = ctx.subgroup_of_order(t)?;
    let mut in_h = vec![false; q as usize];
    for h in &subgroup {
        in_h[h.value() as usize] = true;
    }

    // Scanning pairs in lexicographic order, the first unvisited member of an
    // orbit is its smallest.
    let qs = q as usize;
    let mut visited = vec![false; qs * qs];
    let mut classes = Vec::new();
    for a in ctx.elements() {
        for b in ctx.elements() {
            let key = a.value() as usize * qs + b.value() as usize;
            if key == 0 || visited[key] {
                continue;
            }
            for &h in &subgroup {
                let (x, y) = (h * a, h * b);
                visited[x.value() as usize * qs + y.value() as usize] = true;
            }
            classes.push((a, b));
        }
    }

    let n = classes.len();
    let mut graph = BitGraph::general(n);
    for u in 0..n {
        for v in u + 1..n {
            let (a, b) = classes[u];
            let (x, y) = classes[v];
            if in_h[(a * x + b * y).value() as usize] {
                graph.add_edge(u, v)?;
            }
        }
    }
    Ok(FurediGraph {
        ctx,
        t,
        subgroup,
        classes,
        graph,
        in_h,
    })
}

pub fn degree_profile(g: &FurediGraph) -> Vec<usize> {
    (0..g.n()).map(|v| g.graph.degree(v)).collect()
}

fn independent(u: (FieldElement, FieldElement), v: (FieldElement, FieldElement)) -> bool {
    !(u.0 * v.1 - u.1 * v.0).is_zero()
}

/// Runs every structural check on `G_t(q)`: vertex count, degrees,
/// `K_{2,t+1}`- and `K_{3,t}`-freeness, the `K_{t,t}` count, codegrees and
/// linear independence of representatives sharing a neighbour.
pub fn verify_appendix(g: &FurediGraph, force: bool) -> Result<StatsReport, FurediError> {
    let q = g.ctx.q();
    let t = g.t as usize;
    let n = g.n();
    let graph = &g.graph;

    let degrees = degree_profile(g);
    let (dmin, dmax) = (
        degrees.iter().copied().min().unwrap_or(0),
        degrees.iter().copied().max().unwrap_or(0),
    );
    let edges = degrees.iter().sum::<usize>() / 2;
    let k2 = graph.is_ksm_free(2, t + 1, force)?;
    let k3 = graph.is_ksm_free(3, t, force)?;
    let ktt = graph.count_biclique_general(t, t)?;
    let bound = choose(n, 2);

    let mut max_codegree = 0;
    let mut dependent_pair = None;
    for u in 0..n {
        for v in u + 1..n {
            let c = graph.common_neighbors(&[u, v])?.len();
            max_codegree = max_codegree.max(c);
            if c > 0 && dependent_pair.is_none() && !independent(g.classes[u], g.classes[v]) {
                dependent_pair = Some((u, v));
            }
        }
    }

    let mut witnesses = Vec::new();
    if let Some(w) = &k2.witness {
        witnesses.push(format!("K_{{2,{}}}: {w}", t + 1));
    }
    if let Some(w) = &k3.witness {
        witnesses.push(format!("K_{{3,{t}}}: {w}"));
    }
    if ktt > bound {
        witnesses.push(format!("ktt={ktt} exceeds C({n},2)={bound}"));
    }
    let trial = TrialRecord {
        trial: 0,
        q: Some(q),
        n: Some(n),
        edges: Some(edges),
        ktt_count: Some(ktt),
        free_left: Some(k2.free),
        k3t_free: Some(k3.free),
        upper_bound_ok: Some(ktt <= bound),
        degree_min: Some(dmin),
        degree_max: Some(dmax),
        witness: (!witnesses.is_empty()).then(|| witnesses.join("; ")),
        ..TrialRecord::default()
    };

    let mut report = StatsReport::new(
        ReportKind::Furedi,
        Params {
            q: vec![q],
            t: Some(g.t),
            trials: 1,
            ..Params::default()
        },
    );
    let expected_n = (q as usize * q as usize - 1) / t;
    report.check("vertex_count", n == expected_n, || {
        format!("n={n}, (q^2-1)/t={expected_n}")
    });
    let qd = q as usize;
    let bad_deg = degrees.iter().position(|&d| d != qd && d + 1 != qd);
    report.check("degrees", bad_deg.is_none(), || {
        let v = bad_deg.unwrap();
        format!("vertex {v} has degree {}", degrees[v])
    });
    report.check("k2t1_free", k2.free, || {
        k2.witness.clone().unwrap().to_string()
    });
    report.check("k3t_free", k3.free, || {
        k3.witness.clone().unwrap().to_string()
    });
    if t >= 3 {
        report.check("ktt_zero", ktt == 0, || format!("ktt={ktt}"));
    }
    report.check("ktt_upper_bound", ktt <= bound, || {
        format!("ktt={ktt} exceeds C({n},2)={bound}")
    });
    report.check("codegree_max_is_t", max_codegree == t, || {
        format!("largest codegree {max_codegree}, expected {t}")
    });
    report.check("pairwise_independent", dependent_pair.is_none(), || {
        let (u, v) = dependent_pair.unwrap();
        format!(
            "classes {u} {:?} and {v} {:?} are dependent but share a neighbour",
            g.classes[u], g.classes[v]
        )
    });

    let density = edges as f64 / (n as f64).powf(1.5);
    report.aggregates = vec![
        Aggregate::plain("ktt_mean", Some(q), ktt as f64),
        Aggregate::plain("ktt_min", Some(q), ktt as f64),
        Aggregate::plain("ktt_max", Some(q), ktt as f64),
        Aggregate {
            target: Some((t as f64).sqrt() / 2.0),
            ..Aggregate::plain("edges_over_n15", Some(q), density)
        },
        Aggregate::plain("max_codegree", Some(q), max_codegree as f64),
    ];
    report.trials.push(trial);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts() {
        assert_eq!(build_furedi(7, 3).unwrap().n(), 16);
        assert_eq!(build_furedi(5, 2).unwrap().n(), 12);
        assert_eq!(build_furedi(13, 4).unwrap().n(), 42);
        assert!(matches!(
            build_furedi(7, 4),
            Err(FurediError::Field(GfError::SubgroupOrder { .. }))
        ));
        assert!(matches!(
            build_furedi(7, 1),
            Err(FurediError::OrderTooSmall(1))
        ));
    }

    #[test]
    fn orbits_partition_the_punctured_plane() {
        for (q, t) in [(5u32, 2u32), (7, 3), (13, 4), (13, 3)] {
            let g = build_furedi(q, t).unwrap();
            let mut seen = std::collections::HashSet::new();
            for &(a, b) in &g.classes {
                let orbit: Vec<_> = g.subgroup.iter().map(|&h| (h * a, h * b)).collect();
                assert_eq!(orbit.iter().min(), Some(&(a, b)));
                for p in orbit {
                    assert!(seen.insert(p), "orbits overlap");
                }
            }
            assert_eq!(seen.len(), (q * q - 1) as usize);
            assert!(g.classes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn degrees() {
        for (q, t) in [(7u32, 3u32), (5, 2)] {
            let g = build_furedi(q, t).unwrap();
            let d = degree_profile(&g);
            assert!(d.iter().all(|&x| x == q as usize || x == q as usize - 1));
        }
    }

    #[test]
    fn relation_is_well_defined_on_classes() {
        let g = build_furedi(13, 3).unwrap();
        let mut rng = crate::evasive::SeededStream::new(5);
        for _ in 0..50 {
            let pick = |rng: &mut crate::evasive::SeededStream| {
                g.subgroup[(rng.next_u64() % g.subgroup.len() as u64) as usize]
            };
            let scaled: Vec<_> = g
                .classes
                .iter()
                .map(|&(a, b)| {
                    let h = pick(&mut rng);
                    (h * a, h * b)
                })
                .collect();
            for u in 0..g.n() {
                for v in u + 1..g.n() {
                    assert_eq!(g.related(scaled[u], scaled[v]), g.graph.has_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn structural_report_small() {
        let g = build_furedi(7, 3).unwrap();
        let r = verify_appendix(&g, false).unwrap();
        r.validate().unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks());
        assert_eq!(r.trials[0].ktt_count, Some(0));
        assert_eq!(r.trials[0].k3t_free, Some(true));
    }

    #[test]
    fn sidecar() {
        let g = build_furedi(5, 2).unwrap();
        let text = g.vertex_map_text();
        assert_eq!(text.lines().count(), 12);
        assert!(text.starts_with("0 0 1\n"));
    }
}
