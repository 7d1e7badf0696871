//! The experiments behind each subcommand, as library functions returning
//! reports and file contents. Nothing here touches the filesystem.

use eil_core::evasive::{
    binomial, build_evasive, exact_probabilities, line_histogram, reference_line, restrict_to_line,
};
use eil_core::furedi::{build_furedi, verify_appendix};
use eil_core::geom3::line_count;
use eil_core::gf::{is_prime, FieldCtx};
use eil_core::incidence::{
    build_incidence, derive_seed_y, incidence_trial, summarize_incidence, verify_theorem,
};
use eil_core::report::{Aggregate, Params, ReportKind, StatsReport, TrialRecord};
use eil_core::subgraph::{BitGraph, Side};
use rayon::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceConfig {
    pub q: u32,
    pub t: u32,
    pub seed: u64,
    pub seed_y: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FurediConfig {
    pub q: u32,
    pub t: u32,
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub q: u32,
    pub t: u32,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub qs: Vec<u32>,
    pub t: u32,
    pub trials: usize,
    pub seed: u64,
}

/// Named output files in the order they are written.
pub type Files = Vec<(String, String)>;

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

fn check_prime(q: u32) -> Result<(), CliError> {
    if !is_prime(q) {
        return Err(invalid(format!("q must be prime (got {q})")));
    }
    if q > eil_core::gf::MAX_MODULUS {
        return Err(invalid(format!(
            "q must be at most {} (got {q})",
            eil_core::gf::MAX_MODULUS
        )));
    }
    Ok(())
}

fn check_degree(q: u32, t: u32) -> Result<(), CliError> {
    check_prime(q)?;
    if t < 3 {
        return Err(invalid(format!("t must be at least 3 (got {t})")));
    }
    if t > q {
        return Err(invalid(format!("t must not exceed q (got t={t}, q={q})")));
    }
    Ok(())
}

impl IncidenceConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_degree(self.q, self.t)?;
        if self.seed_y == Some(self.seed) {
            return Err(invalid(format!(
                "seed and seed-y must differ (both {})",
                self.seed
            )));
        }
        Ok(())
    }

    pub fn seed_y(&self) -> u64 {
        self.seed_y.unwrap_or_else(|| derive_seed_y(self.seed))
    }
}

impl FurediConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_prime(self.q)?;
        if self.t < 2 {
            return Err(invalid(format!("t must be at least 2 (got {})", self.t)));
        }
        if !(self.q - 1).is_multiple_of(self.t) {
            return Err(invalid(format!(
                "t must divide q-1 (got t={}, q={})",
                self.t, self.q
            )));
        }
        Ok(())
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_degree(self.q, self.t)?;
        if self.trials < 100 {
            return Err(invalid(format!(
                "trials must be at least 100 (got {})",
                self.trials
            )));
        }
        Ok(())
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.qs.len() < 2 {
            return Err(invalid("sweep needs at least two values of q".into()));
        }
        let mut sorted = self.qs.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("values of q must be distinct".into()));
        }
        for &q in &self.qs {
            check_degree(q, self.t)?;
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn construct_incidence(cfg: &IncidenceConfig) -> Result<(Files, StatsReport), CliError> {
    cfg.validate()?;
    let c = build_incidence(cfg.q, cfg.t, cfg.seed, cfg.seed_y())
        .map_err(|e| invalid(e.to_string()))?;
    let report = verify_theorem(&c);
    let files = vec![
        ("graph.txt".to_string(), c.graph.to_text()),
        ("vertices.txt".to_string(), c.vertex_map_text()),
        ("x.points".to_string(), c.x.set.to_text()),
        ("y.points".to_string(), c.y.set.to_text()),
        ("fx.poly".to_string(), c.x.poly.to_text() + "\n"),
        ("fy.poly".to_string(), c.y.poly.to_text() + "\n"),
    ];
    Ok((files, report))
}

pub fn construct_furedi(cfg: &FurediConfig) -> Result<(Files, StatsReport), CliError> {
    cfg.validate()?;
    let g = build_furedi(cfg.q, cfg.t).map_err(|e| invalid(e.to_string()))?;
    let report = verify_appendix(&g, cfg.force).map_err(|e| invalid(e.to_string()))?;
    let files = vec![
        ("graph.txt".to_string(), g.graph.to_text()),
        ("vertices.txt".to_string(), g.vertex_map_text()),
    ];
    Ok((files, report))
}

/// `K_{s,m}`-freeness of a parsed graph. For a bipartite graph each
/// orientation is recorded separately.
pub fn verify_graph(
    g: &BitGraph,
    s: usize,
    m: usize,
    force: bool,
) -> Result<StatsReport, CliError> {
    let to_invalid = |e: eil_core::subgraph::GraphError| invalid(e.to_string());
    let (left, right) = if g.is_bipartite() {
        let (a, b) = (s.min(m), s.max(m));
        let l = g
            .is_ksm_free_side(Side::Left, a, b, force)
            .map_err(to_invalid)?;
        let r = g
            .is_ksm_free_side(Side::Right, a, b, force)
            .map_err(to_invalid)?;
        (l, Some(r))
    } else {
        (g.is_ksm_free(s, m, force).map_err(to_invalid)?, None)
    };
    let free = left.free && right.as_ref().is_none_or(|r| r.free);
    let witness = [&Some(left.clone()), &right]
        .into_iter()
        .flatten()
        .find_map(|f| f.witness.as_ref())
        .map(|w| w.to_string());

    let mut report = StatsReport::new(
        ReportKind::Graph,
        Params {
            trials: 1,
            s: Some(s),
            m: Some(m),
            ..Params::default()
        },
    );
    report.trials.push(TrialRecord {
        n: Some(g.n()),
        edges: Some(g.edge_count()),
        free_left: Some(left.free),
        free_right: right.as_ref().map(|r| r.free),
        witness: witness.clone(),
        ..TrialRecord::default()
    });
    report.check("ksm_free", free, || witness.clone().unwrap_or_default());
    Ok(report)
}

fn evasive_trial(ctx: &FieldCtx, t: u32, seed: u64, trial: usize) -> TrialRecord {
    let s = build_evasive(ctx, t, seed).expect("parameters validated");
    let line = reference_line(ctx);
    let bad = line
        .point_indices()
        .any(|i| s.zero_set.contains(i) && !s.set.contains(i));
    TrialRecord {
        trial,
        q: Some(ctx.q()),
        seed_x: Some(seed),
        x0_size: Some(s.zero_set.len()),
        x_size: Some(s.set.len()),
        max_line_hits: Some(line_histogram(&s.set, ctx).max_hits()),
        line_hits_x0: Some(s.zero_set.count_on(&line)),
        line_hits_x: Some(s.set.count_on(&line)),
        line_vanishes: Some(restrict_to_line(&s.poly, &line).is_zero()),
        line_bad: Some(bad),
        vanishing_lines: Some(s.vanishing_lines.len()),
        ..TrialRecord::default()
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Bernoulli proportion with the standard error taken at the target rate.
fn proportion(name: &str, q: u32, hits: &[bool], target: f64) -> Aggregate {
    let n = hits.len() as f64;
    let p = hits.iter().filter(|&&b| b).count() as f64 / n;
    Aggregate::estimate(
        name,
        Some(q),
        p,
        target,
        (target * (1.0 - target) / n).sqrt(),
    )
}

fn z_check(report: &mut StatsReport, name: &str, q: u32) {
    let a = report
        .aggregate(name, Some(q))
        .expect("aggregate present")
        .clone();
    let ok = a.z.is_some_and(|z| z.abs() <= 3.0);
    report.check(&format!("{name}_within_3se"), ok, || {
        format!(
            "value {} target {:?} se {:?} z {:?}",
            a.value, a.target, a.std_err, a.z
        )
    });
}

/// Independent evasive constructions with seeds `seed + i`, compared with
/// the closed-form line statistics on the reference line.
pub fn montecarlo(cfg: &MonteCarloConfig) -> Result<StatsReport, CliError> {
    cfg.validate()?;
    let ctx = FieldCtx::new(cfg.q).expect("validated prime");
    let (q, t, n) = (cfg.q, cfg.t, cfg.trials);
    let trials: Vec<TrialRecord> = (0..n)
        .into_par_iter()
        .map(|i| evasive_trial(&ctx, t, cfg.seed.wrapping_add(i as u64), i))
        .collect();

    let exact = exact_probabilities(q, t).expect("validated t <= q");
    let hits: Vec<usize> = trials.iter().map(|r| r.line_hits_x0.unwrap()).collect();
    let mut report = StatsReport::new(
        ReportKind::Evasive,
        Params {
            q: vec![q],
            t: Some(t),
            seed: Some(cfg.seed),
            trials: n,
            ..Params::default()
        },
    );

    let is_t: Vec<bool> = hits.iter().map(|&h| h == t as usize).collect();
    report
        .aggregates
        .push(proportion("p_exact_t", q, &is_t, exact.p_exact_t));

    let binoms: Vec<f64> = hits.iter().map(|&h| binomial(h as u64, t as u64)).collect();
    let (mean, se) = mean_and_se(&binoms);
    report.aggregates.push(Aggregate::estimate(
        "e_binom",
        Some(q),
        mean,
        exact.e_binom,
        se,
    ));

    let vanishes: Vec<bool> = trials.iter().map(|r| r.line_vanishes.unwrap()).collect();
    report
        .aggregates
        .push(proportion("p_vanish", q, &vanishes, exact.p_vanish));

    // Lines vanish together (every line of a vanishing plane does), so the
    // pooled rate's error comes from the per-polynomial rates.
    let lines = line_count(q) as f64;
    let rates: Vec<f64> = trials
        .iter()
        .map(|r| r.vanishing_lines.unwrap() as f64 / lines)
        .collect();
    let (pooled, mut se) = mean_and_se(&rates);
    if se == 0.0 {
        se = (exact.p_vanish * (1.0 - exact.p_vanish) / (n as f64 * lines)).sqrt();
    }
    report.aggregates.push(Aggregate::estimate(
        "p_vanish_pooled",
        Some(q),
        pooled,
        exact.p_vanish,
        se,
    ));

    let bad: Vec<bool> = trials.iter().map(|r| r.line_bad.unwrap()).collect();
    let p_bad = bad.iter().filter(|&&b| b).count() as f64 / n as f64;
    let qf = q as f64;
    let bound = (qf.powi(3) + qf.powi(2) + 1.0) * qf.powi(-(t as i32) - 1);
    let se_bad = (p_bad * (1.0 - p_bad) / n as f64).sqrt();
    report
        .aggregates
        .push(Aggregate::estimate("p_bad", Some(q), p_bad, bound, se_bad));

    z_check(&mut report, "p_exact_t", q);
    z_check(&mut report, "e_binom", q);
    z_check(&mut report, "p_vanish_pooled", q);
    report.check("p_bad_within_bound", p_bad - 3.0 * se_bad <= bound, || {
        format!("p_bad {p_bad} (se {se_bad}) exceeds {bound}")
    });
    let over = trials
        .iter()
        .find(|r| r.max_line_hits.unwrap() > t as usize);
    report.check("evasive", over.is_none(), || {
        let r = over.unwrap();
        format!(
            "trial {} has {} points on a line",
            r.trial,
            r.max_line_hits.unwrap()
        )
    });
    report.trials = trials;
    Ok(report)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn factorial(t: u32) -> f64 {
    (1..=t).map(f64::from).product()
}

/// Incidence constructions for every `q`, seeds `seed + i` within each `q`.
/// Returns the report and a per-`q` CSV table.
pub fn sweep(cfg: &SweepConfig) -> Result<(StatsReport, String), CliError> {
    cfg.validate()?;
    let t = cfg.t;
    let jobs: Vec<(u32, u64)> = cfg
        .qs
        .iter()
        .flat_map(|&q| (0..cfg.trials).map(move |i| (q, cfg.seed.wrapping_add(i as u64))))
        .collect();
    let trials: Vec<TrialRecord> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(q, seed))| {
            let c = build_incidence(q, t, seed, derive_seed_y(seed)).expect("parameters validated");
            incidence_trial(&c, k)
        })
        .collect();

    let params = Params {
        q: cfg.qs.clone(),
        t: Some(t),
        seed: Some(cfg.seed),
        trials: cfg.trials,
        ..Params::default()
    };
    let mut report = summarize_incidence(params, t, trials);

    let qs = &cfg.qs;
    let mut table = csv::Writer::from_writer(Vec::new());
    let header = [
        "q",
        "trials",
        "n_mean",
        "ktt_mean",
        "ktt_min",
        "ktt_max",
        "ktt_over_n2",
        "ktt_over_q4",
        "positive_fraction",
        "all_free",
    ];
    table
        .write_record(header)
        .map_err(|e| CliError::Io(e.to_string()))?;
    let (mut log_q, mut log_mean) = (Vec::new(), Vec::new());
    let mut zero_mean = None;
    for &q in qs {
        let rs: Vec<&TrialRecord> = report.trials.iter().filter(|r| r.q == Some(q)).collect();
        let get = |name: &str| {
            report
                .aggregate(name, Some(q))
                .map(|a| a.value)
                .unwrap_or(0.0)
        };
        let mean = get("ktt_mean");
        let over_q4 = mean / (q as f64).powi(4);
        let positive =
            rs.iter().filter(|r| r.ktt_count.unwrap_or(0) > 0).count() as f64 / rs.len() as f64;
        let all_free = rs
            .iter()
            .all(|r| r.free_left == Some(true) && r.free_right == Some(true));
        let row = [
            q.to_string(),
            rs.len().to_string(),
            get("n_mean").to_string(),
            mean.to_string(),
            get("ktt_min").to_string(),
            get("ktt_max").to_string(),
            get("ktt_over_n2").to_string(),
            over_q4.to_string(),
            positive.to_string(),
            all_free.to_string(),
        ];
        table
            .write_record(&row)
            .map_err(|e| CliError::Io(e.to_string()))?;
        report
            .aggregates
            .push(Aggregate::plain("ktt_over_q4", Some(q), over_q4));
        report
            .aggregates
            .push(Aggregate::plain("positive_fraction", Some(q), positive));
        if mean > 0.0 {
            log_q.push((q as f64).ln());
            log_mean.push(mean.ln());
        } else {
            zero_mean.get_or_insert(q);
        }
    }
    let table = String::from_utf8(
        table
            .into_inner()
            .map_err(|e| CliError::Io(e.to_string()))?,
    )
    .expect("csv output is utf-8");

    let largest = *qs.iter().max().expect("at least two q");
    let mean = report
        .aggregate("ktt_mean", Some(largest))
        .map_or(0.0, |a| a.value);
    let floor = 0.25 * (largest as f64).powi(4) / factorial(t).powi(2);
    report.aggregates.push(Aggregate {
        target: Some(floor),
        ..Aggregate::plain("ktt_floor", Some(largest), mean)
    });
    report.check("ktt_mean_floor", mean >= floor, || {
        format!("mean K_{{t,t}} count {mean} at q={largest} is below 0.25 q^4/(t!)^2 = {floor}")
    });
    let positive = report
        .aggregate("positive_fraction", Some(largest))
        .map_or(0.0, |a| a.value);
    report.check("ktt_positive", positive >= 0.95, || {
        format!("only {positive} of trials at q={largest} have a K_{{t,t}}")
    });

    if let Some(q) = zero_mean {
        report.check("loglog_slope", false, || {
            format!("mean count is 0 at q={q}")
        });
    } else {
        let s = slope(&log_q, &log_mean);
        report
            .aggregates
            .push(Aggregate::plain("loglog_slope", None, s));
        report.check("loglog_slope", (3.0..=5.0).contains(&s), || {
            format!("slope {s} of log mean count against log q is outside [3, 5]")
        });
    }
    Ok((report, table))
}
