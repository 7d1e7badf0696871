//! Line-evasive sets from the zero set of a random low-degree polynomial.
//!
//! A uniformly random trivariate polynomial `f` of total degree at most `t`
//! restricts to a uniformly random univariate polynomial of degree at most
//! `t` on every line. Its zero set therefore meets a line in at most `t`
//! points unless `f` vanishes on the whole line; removing every point of
//! such fully vanishing lines leaves a set meeting every line in at most
//! `t` points, while each fixed line still carries exactly `t` points with
//! probability close to `1/t!`.

use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom3::{all_lines, line_count, AffineLine, Point3};
use crate::gf::{FieldCtx, FieldElement, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvasiveError {
    #[error("t must be at least 3 (got {0})")]
    DegreeTooSmall(u32),
    #[error("t must not exceed q (t={t}, q={q})")]
    DegreeExceedsField { q: u32, t: u32 },
    #[error("expected {expected} coefficients for degree {t}, got {got}")]
    CoefficientCount { t: u32, expected: usize, got: usize },
    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Deterministic random stream keyed by a 64-bit seed.
///
/// Field elements are drawn by rejection sampling from 64-bit words so every
/// residue is exactly equally likely.
#[derive(Debug, Clone)]
pub struct SeededStream {
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64) -> SeededStream {
        SeededStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn next_element(&mut self, ctx: &FieldCtx) -> FieldElement {
        let q = ctx.q() as u64;
        // 2^64 mod q; words below it would bias the low residues.
        let reject_below = q.wrapping_neg() % q;
        loop {
            let w = self.rng.next_u64();
            if w >= reject_below {
                return ctx.elem(w % q);
            }
        }
    }
}

/// Number of monomials of total degree at most `t` in three variables.
pub fn monomial_count(t: u32) -> usize {
    let t = t as usize;
    (t + 1) * (t + 2) * (t + 3) / 6
}

/// Exponent triples `(i, j, k)` with `i + j + k <= t`, ordered by total
/// degree and then lexicographically by `(i, j, k)`.
pub fn monomials(t: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(monomial_count(t));
    for d in 0..=t {
        for i in 0..=d {
            for j in 0..=d - i {
                out.push([i, j, d - i - j]);
            }
        }
    }
    out
}

/// A polynomial in `x1, x2, x3` of total degree at most `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriPoly {
    ctx: FieldCtx,
    t: u32,
    coeffs: Vec<FieldElement>,
    // (t+1)^3 lookup from exponent triple to coefficient slot
    slot: Vec<Option<usize>>,
}

impl TriPoly {
    /// Coefficients in [`monomials`] order.
    pub fn from_coeffs(
        ctx: &FieldCtx,
        t: u32,
        coeffs: Vec<FieldElement>,
    ) -> Result<TriPoly, EvasiveError> {
        if t < 3 {
            return Err(EvasiveError::DegreeTooSmall(t));
        }
        let expected = monomial_count(t);
        if coeffs.len() != expected {
            return Err(EvasiveError::CoefficientCount {
                t,
                expected,
                got: coeffs.len(),
            });
        }
        if let Some(bad) = coeffs.iter().find(|c| c.modulus() != ctx.q()) {
            return Err(GfError::FieldMismatch(ctx.q(), bad.modulus()).into());
        }
        let side = t as usize + 1;
        let mut slot = vec![None; side * side * side];
        for (n, [i, j, k]) in monomials(t).into_iter().enumerate() {
            slot[(i as usize * side + j as usize) * side + k as usize] = Some(n);
        }
        Ok(TriPoly {
            ctx: *ctx,
            t,
            coeffs,
            slot,
        })
    }

    /// Builds a polynomial from `(exponents, coefficient)` terms; repeated
    /// monomials accumulate.
    pub fn from_terms(
        ctx: &FieldCtx,
        t: u32,
        terms: &[([u32; 3], u64)],
    ) -> Result<TriPoly, EvasiveError> {
        let mut f = TriPoly::from_coeffs(ctx, t, vec![ctx.zero(); monomial_count(t)])?;
        for &(e, c) in terms {
            let n = f.slot_of(e).ok_or_else(|| EvasiveError::Parse {
                what: "term",
                detail: format!("monomial {e:?} exceeds degree {t}"),
            })?;
            f.coeffs[n] = f.coeffs[n] + ctx.elem(c);
        }
        Ok(f)
    }

    pub fn zero(ctx: &FieldCtx, t: u32) -> Result<TriPoly, EvasiveError> {
        TriPoly::from_terms(ctx, t, &[])
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn degree_bound(&self) -> u32 {
        self.t
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    fn slot_of(&self, [i, j, k]: [u32; 3]) -> Option<usize> {
        let side = self.t as usize + 1;
        if i + j + k > self.t {
            return None;
        }
        self.slot[(i as usize * side + j as usize) * side + k as usize]
    }

    #[inline]
    fn coeff(&self, i: u32, j: u32, k: u32) -> u64 {
        let side = self.t as usize + 1;
        let n = self.slot[(i as usize * side + j as usize) * side + k as usize]
            .expect("exponent within degree bound");
        self.coeffs[n].value() as u64
    }

    pub fn coefficient(&self, exps: [u32; 3]) -> Option<FieldElement> {
        self.slot_of(exps).map(|n| self.coeffs[n])
    }

    /// Comma-separated residues in [`monomials`] order.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        parts.join(",")
    }

    pub fn parse(ctx: &FieldCtx, s: &str) -> Result<TriPoly, EvasiveError> {
        let vals: Vec<u64> = s
            .trim()
            .split(',')
            .map(|x| x.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|e| EvasiveError::Parse {
                what: "polynomial",
                detail: e.to_string(),
            })?;
        if let Some(v) = vals.iter().find(|&&v| v >= ctx.q() as u64) {
            return Err(EvasiveError::Parse {
                what: "polynomial",
                detail: format!("coefficient {v} is not a residue mod {}", ctx.q()),
            });
        }
        let t = (3..64)
            .find(|&t| monomial_count(t) >= vals.len())
            .filter(|&t| monomial_count(t) == vals.len())
            .ok_or_else(|| EvasiveError::Parse {
                what: "polynomial",
                detail: format!("{} coefficients is not C(t+3,3) for any t >= 3", vals.len()),
            })?;
        TriPoly::from_coeffs(ctx, t, vals.into_iter().map(|v| ctx.elem(v)).collect())
    }
}

/// Draws every coefficient independently and uniformly, in [`monomials`]
/// order.
pub fn sample_poly(
    ctx: &FieldCtx,
    t: u32,
    rng: &mut SeededStream,
) -> Result<TriPoly, EvasiveError> {
    if t < 3 {
        return Err(EvasiveError::DegreeTooSmall(t));
    }
    let coeffs = (0..monomial_count(t))
        .map(|_| rng.next_element(ctx))
        .collect();
    TriPoly::from_coeffs(ctx, t, coeffs)
}

fn powers(x: u64, t: u32, q: u64) -> Vec<u64> {
    let mut p = Vec::with_capacity(t as usize + 1);
    let mut acc = 1 % q;
    for _ in 0..=t {
        p.push(acc);
        acc = acc * x % q;
    }
    p
}

pub fn evaluate(f: &TriPoly, p: &Point3) -> FieldElement {
    let q = f.ctx.q() as u64;
    let [x, y, z] = p.values().map(|v| powers(v as u64, f.t, q));
    let mut acc = 0u64;
    for (c, [i, j, k]) in f.coeffs.iter().zip(monomials(f.t)) {
        let term = x[i as usize] * y[j as usize] % q * z[k as usize] % q;
        acc = (acc + c.value() as u64 * term) % q;
    }
    f.ctx.elem(acc)
}

/// A univariate polynomial of degree at most `t`; `coeffs[d]` multiplies
/// `s^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    pub coeffs: Vec<FieldElement>,
}

impl UniPoly {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, s: FieldElement) -> FieldElement {
        self.coeffs
            .iter()
            .rev()
            .fold(s.zero_like(), |acc, &c| acc * s + c)
    }
}

// acc <- acc * (b + d*s), truncating nothing: callers keep degrees <= t.
#[inline]
fn mul_linear(acc: &mut [u64], b: u64, d: u64, q: u64) {
    for n in (0..acc.len()).rev() {
        let lower = if n > 0 { acc[n - 1] } else { 0 };
        acc[n] = (acc[n] * b + lower * d) % q;
    }
}

/// Substitutes `x = base + s*dir` and collects powers of `s`.
///
/// Evaluated as nested Horner schemes in `x3`, then `x2`, then `x1`, where
/// every multiplication is by a linear polynomial in `s`.
pub fn restrict_to_line(f: &TriPoly, line: &AffineLine) -> UniPoly {
    let q = f.ctx.q() as u64;
    let t = f.t;
    let len = t as usize + 1;
    let b = line.base().values().map(|v| v as u64);
    let d = line.dir().values().map(|v| v as u64);

    let mut total = vec![0u64; len];
    for i in (0..=t).rev() {
        let mut hi = vec![0u64; len];
        for j in (0..=t - i).rev() {
            let mut g = vec![0u64; len];
            for k in (0..=t - i - j).rev() {
                mul_linear(&mut g, b[2], d[2], q);
                g[0] = (g[0] + f.coeff(i, j, k)) % q;
            }
            mul_linear(&mut hi, b[1], d[1], q);
            for (h, gv) in hi.iter_mut().zip(&g) {
                *h = (*h + gv) % q;
            }
        }
        mul_linear(&mut total, b[0], d[0], q);
        for (tv, h) in total.iter_mut().zip(&hi) {
            *tv = (*tv + h) % q;
        }
    }
    UniPoly {
        coeffs: total.into_iter().map(|v| f.ctx.elem(v)).collect(),
    }
}

/// A subset of `F_q^3` stored as a bitmask over point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    q: u32,
    words: Vec<u64>,
}

impl PointSet {
    pub fn empty(ctx: &FieldCtx) -> PointSet {
        let n = (ctx.q() as usize).pow(3);
        PointSet {
            q: ctx.q(),
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(ctx: &FieldCtx) -> PointSet {
        let mut s = PointSet::empty(ctx);
        for i in 0..s.universe() {
            s.insert(i);
        }
        s
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn universe(&self) -> usize {
        (self.q as usize).pow(3)
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, idx: usize) {
        assert!(idx < self.universe(), "point index {idx} out of range");
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    #[inline]
    pub fn remove(&mut self, idx: usize) {
        self.words[idx / 64] &= !(1 << (idx % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(n, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(n * 64 + b)
            })
        })
    }

    pub fn points(&self) -> Vec<Point3> {
        let ctx = FieldCtx::new(self.q).expect("valid field");
        self.iter().map(|i| Point3::from_index(&ctx, i)).collect()
    }

    /// `|self ∩ line|`.
    pub fn count_on(&self, line: &AffineLine) -> usize {
        line.point_indices().filter(|&i| self.contains(i)).count()
    }

    /// Header `q=<q> n=<count>` followed by one index per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("q={} n={}\n", self.q, self.len());
        for i in self.iter() {
            s.push_str(&i.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<PointSet, EvasiveError> {
        let err = |detail: String| EvasiveError::Parse {
            what: "point set",
            detail,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err("missing header".into()))?;
        let (q, n) = header
            .strip_prefix("q=")
            .and_then(|r| r.split_once(" n="))
            .and_then(|(q, n)| Some((q.parse::<u32>().ok()?, n.parse::<usize>().ok()?)))
            .ok_or_else(|| err(format!("bad header {header:?}")))?;
        let ctx = FieldCtx::new(q)?;
        let mut set = PointSet::empty(&ctx);
        let mut prev = None;
        for (lineno, l) in lines.enumerate() {
            let idx: usize = l
                .trim()
                .parse()
                .map_err(|_| err(format!("line {}: {l:?}", lineno + 2)))?;
            if idx >= set.universe() || prev.is_some_and(|p| p >= idx) {
                return Err(err(format!(
                    "line {}: index {idx} out of order or range",
                    lineno + 2
                )));
            }
            prev = Some(idx);
            set.insert(idx);
        }
        if set.len() != n {
            return Err(err(format!(
                "header says n={n} but {} indices follow",
                set.len()
            )));
        }
        Ok(set)
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn zero_set(f: &TriPoly, ctx: &FieldCtx) -> PointSet {
    let mut set = PointSet::empty(ctx);
    for idx in 0..set.universe() {
        if evaluate(f, &Point3::from_index(ctx, idx)).is_zero() {
            set.insert(idx);
        }
    }
    set
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    pub set: PointSet,
    pub vanishing_lines: Vec<AffineLine>,
}

/// Removes every point lying on a line where `f` vanishes identically.
///
/// A restriction can only be the zero polynomial if all `q` points of the
/// line are zeros, so only such lines are restricted symbolically.
pub fn prune_bad_lines(f: &TriPoly, x0: &PointSet, ctx: &FieldCtx) -> Pruned {
    let mut vanishing_lines = Vec::new();
    for line in all_lines(ctx) {
        if line.point_indices().all(|i| x0.contains(i)) && restrict_to_line(f, &line).is_zero() {
            vanishing_lines.push(line);
        }
    }
    let mut set = x0.clone();
    for line in &vanishing_lines {
        for i in line.point_indices() {
            set.remove(i);
        }
    }
    Pruned {
        set,
        vanishing_lines,
    }
}

/// Number of lines meeting a set in exactly `k` points, `k = 0..=q`, split
/// by whether the line passes through the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineHistogram {
    pub through_origin: Vec<u64>,
    pub off_origin: Vec<u64>,
}

impl LineHistogram {
    pub fn total(&self, k: usize) -> u64 {
        self.through_origin[k] + self.off_origin[k]
    }

    /// Largest `k` with a nonzero bucket.
    pub fn max_hits(&self) -> usize {
        (0..self.through_origin.len())
            .rev()
            .find(|&k| self.total(k) > 0)
            .unwrap_or(0)
    }

    pub fn merge(&mut self, other: &LineHistogram) {
        for (a, b) in self.through_origin.iter_mut().zip(&other.through_origin) {
            *a += b;
        }
        for (a, b) in self.off_origin.iter_mut().zip(&other.off_origin) {
            *a += b;
        }
    }
}

pub fn line_histogram(x: &PointSet, ctx: &FieldCtx) -> LineHistogram {
    let q = ctx.q() as usize;
    let mut h = LineHistogram {
        through_origin: vec![0; q + 1],
        off_origin: vec![0; q + 1],
    };
    for line in all_lines(ctx) {
        let k = x.count_on(&line);
        if line.passes_origin() {
            h.through_origin[k] += 1;
        } else {
            h.off_origin[k] += 1;
        }
    }
    debug_assert_eq!(
        h.through_origin.iter().chain(&h.off_origin).sum::<u64>() as usize,
        line_count(ctx.q())
    );
    h
}

/// Closed-form line statistics for a uniform degree-`t` polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactProbabilities {
    /// `Pr(f|l == 0) = q^-(t+1)`
    pub p_vanish: f64,
    /// `Pr(|X0 ∩ l| = t) = (1 - 1/q) C(q,t) q^-t`
    pub p_exact_t: f64,
    /// `E[C(|X0 ∩ l|, t)] = C(q,t) q^-t`
    pub e_binom: f64,
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn exact_probabilities(q: u32, t: u32) -> Result<ExactProbabilities, EvasiveError> {
    if t > q {
        return Err(EvasiveError::DegreeExceedsField { q, t });
    }
    let qf = q as f64;
    let e_binom = binomial(q as u64, t as u64) * qf.powi(-(t as i32));
    Ok(ExactProbabilities {
        p_vanish: qf.powi(-(t as i32 + 1)),
        p_exact_t: (1.0 - 1.0 / qf) * e_binom,
        e_binom,
    })
}

/// The fixed line `{(s, 0, 1)}`, which avoids the origin.
pub fn reference_line(ctx: &FieldCtx) -> AffineLine {
    AffineLine::new(Point3::new(ctx, [0, 0, 1]), Point3::new(ctx, [1, 0, 0]))
        .expect("nonzero direction")
}

/// One sampled construction: the polynomial, its zero set and the pruned
/// set.
#[derive(Debug, Clone)]
pub struct EvasiveSample {
    pub poly: TriPoly,
    pub zero_set: PointSet,
    pub set: PointSet,
    pub vanishing_lines: Vec<AffineLine>,
}

pub fn check_params(q: u32, t: u32) -> Result<FieldCtx, EvasiveError> {
    let ctx = FieldCtx::new(q)?;
    if t < 3 {
        return Err(EvasiveError::DegreeTooSmall(t));
    }
    if t > q {
        return Err(EvasiveError::DegreeExceedsField { q, t });
    }
    Ok(ctx)
}

/// Samples `f` from a stream seeded with `seed` and returns its pruned zero
/// set.
pub fn build_evasive(ctx: &FieldCtx, t: u32, seed: u64) -> Result<EvasiveSample, EvasiveError> {
    if t > ctx.q() {
        return Err(EvasiveError::DegreeExceedsField { q: ctx.q(), t });
    }
    let mut rng = SeededStream::new(seed);
    let poly = sample_poly(ctx, t, &mut rng)?;
    let zero_set = zero_set(&poly, ctx);
    let Pruned {
        set,
        vanishing_lines,
    } = prune_bad_lines(&poly, &zero_set, ctx);
    Ok(EvasiveSample {
        poly,
        zero_set,
        set,
        vanishing_lines,
    })
}
