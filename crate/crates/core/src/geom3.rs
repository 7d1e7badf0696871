//! Points and affine lines of `F_q^3`, plane incidence `x . y = 1`, and the
//! line duality `l -> l*` that sends a line avoiding the origin to the set of
//! points whose plane contains it.
//!
//! Lines are kept in a canonical form: the first nonzero coordinate of the
//! direction is 1 (the *pivot*), and the base point has a 0 at the pivot.
//! Two lines are equal as point sets iff their canonical forms are equal.

use std::fmt;

use thiserror::Error;

use crate::gf::{FieldCtx, FieldElement, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("a line needs two distinct points")]
    SamePoint,
    #[error("direction vector must be nonzero")]
    ZeroDirection,
    #[error("line passes through the origin; its dual is not a line")]
    ThroughOrigin,
    #[error("malformed line {0:?}: expected \"b1,b2,b3;d1,d2,d3\"")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point3 {
    pub coords: [FieldElement; 3],
}

impl Point3 {
    pub fn new(ctx: &FieldCtx, c: [u32; 3]) -> Point3 {
        Point3 {
            coords: c.map(|v| ctx.elem(v as u64)),
        }
    }

    pub fn origin(ctx: &FieldCtx) -> Point3 {
        Point3::new(ctx, [0, 0, 0])
    }

    /// Row-major index `x1*q^2 + x2*q + x3`.
    #[inline]
    pub fn index(&self) -> usize {
        let q = self.coords[0].modulus() as usize;
        let [a, b, c] = self.coords.map(|x| x.value() as usize);
        (a * q + b) * q + c
    }

    pub fn from_index(ctx: &FieldCtx, idx: usize) -> Point3 {
        let q = ctx.q() as usize;
        Point3::new(
            ctx,
            [
                (idx / (q * q)) as u32,
                (idx / q % q) as u32,
                (idx % q) as u32,
            ],
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|x| x.is_zero())
    }

    pub fn values(&self) -> [u32; 3] {
        self.coords.map(|x| x.value())
    }

    pub fn dot(&self, other: &Point3) -> FieldElement {
        let [a, b, c] = self.coords;
        let [x, y, z] = other.coords;
        a * x + b * y + c * z
    }

    pub fn add(&self, other: &Point3) -> Point3 {
        Point3 {
            coords: [0, 1, 2].map(|i| self.coords[i] + other.coords[i]),
        }
    }

    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3 {
            coords: [0, 1, 2].map(|i| self.coords[i] - other.coords[i]),
        }
    }

    pub fn scale(&self, s: FieldElement) -> Point3 {
        Point3 {
            coords: self.coords.map(|x| x * s),
        }
    }

    pub fn cross(&self, other: &Point3) -> Point3 {
        let [a, b, c] = self.coords;
        let [x, y, z] = other.coords;
        Point3 {
            coords: [b * z - c * y, c * x - a * z, a * y - b * x],
        }
    }

    fn pivot(&self) -> Option<usize> {
        self.coords.iter().position(|x| !x.is_zero())
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.values();
        write!(f, "({a},{b},{c})")
    }
}

/// Plane incidence: `x` lies on the plane `H_y = {z : y . z = 1}` (and
/// symmetrically).
#[inline]
pub fn incident(x: &Point3, y: &Point3) -> bool {
    x.dot(y).value() == 1
}

/// An affine line `{base + s*dir : s in F_q}` in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineLine {
    base: Point3,
    dir: Point3,
}

impl AffineLine {
    /// Builds the canonical representative of the line through `base` with
    /// direction `dir`.
    pub fn new(base: Point3, dir: Point3) -> Result<AffineLine, GeomError> {
        let pivot = dir.pivot().ok_or(GeomError::ZeroDirection)?;
        let dir = dir.scale(dir.coords[pivot].inv()?);
        let base = base.sub(&dir.scale(base.coords[pivot]));
        Ok(AffineLine { base, dir })
    }

    pub fn base(&self) -> Point3 {
        self.base
    }

    pub fn dir(&self) -> Point3 {
        self.dir
    }

    pub fn ctx(&self) -> FieldCtx {
        FieldCtx::new(self.base.coords[0].modulus()).expect("line built from a valid field")
    }

    pub fn point_at(&self, s: FieldElement) -> Point3 {
        self.base.add(&self.dir.scale(s))
    }

    /// The `q` points of the line in increasing parameter order.
    pub fn points_on(&self) -> Vec<Point3> {
        let ctx = self.ctx();
        ctx.elements().map(|s| self.point_at(s)).collect()
    }

    /// Point indices (see [`Point3::index`]) in increasing parameter order,
    /// computed without building `Point3` values.
    pub fn point_indices(&self) -> impl Iterator<Item = usize> {
        let q = self.base.coords[0].modulus() as usize;
        let b = self.base.values().map(|v| v as usize);
        let d = self.dir.values().map(|v| v as usize);
        (0..q).map(move |s| {
            let x = (b[0] + s * d[0]) % q;
            let y = (b[1] + s * d[1]) % q;
            let z = (b[2] + s * d[2]) % q;
            (x * q + y) * q + z
        })
    }

    pub fn contains(&self, p: &Point3) -> bool {
        let off = p.sub(&self.base);
        // off must be s*dir with s = off[pivot]
        let pivot = self.dir.pivot().expect("canonical direction is nonzero");
        off == self.dir.scale(off.coords[pivot])
    }

    /// In canonical form the line meets the origin iff the base is zero:
    /// `base + s*dir = 0` forces `s = 0` at the pivot coordinate.
    pub fn passes_origin(&self) -> bool {
        self.base.is_zero()
    }

    /// The dual line `{z : every point y of the line has y . z = 1}`,
    /// obtained by solving `base . z = 1`, `dir . z = 0`.
    pub fn dual_line(&self) -> Result<AffineLine, GeomError> {
        let ctx = self.ctx();
        let zero = ctx.zero();
        let mut m = [
            [
                self.base.coords[0],
                self.base.coords[1],
                self.base.coords[2],
                ctx.one(),
            ],
            [
                self.dir.coords[0],
                self.dir.coords[1],
                self.dir.coords[2],
                zero,
            ],
        ];
        let mut pivots = [0usize; 2];
        let mut col = 0;
        for row in 0..2 {
            loop {
                if col == 3 {
                    return Err(GeomError::ThroughOrigin);
                }
                if let Some(r) = (row..2).find(|&r| !m[r][col].is_zero()) {
                    m.swap(row, r);
                    break;
                }
                col += 1;
            }
            let inv = m[row][col].inv()?;
            for x in m[row].iter_mut() {
                *x = *x * inv;
            }
            let other = 1 - row;
            let factor = m[other][col];
            let pivot_row = m[row];
            for (x, p) in m[other].iter_mut().zip(pivot_row) {
                *x = *x - factor * p;
            }
            pivots[row] = col;
            col += 1;
        }
        let free = (0..3).find(|c| !pivots.contains(c)).unwrap();
        let mut base = [zero; 3];
        let mut dir = [zero; 3];
        dir[free] = ctx.one();
        for row in 0..2 {
            base[pivots[row]] = m[row][3];
            dir[pivots[row]] = -m[row][free];
        }
        AffineLine::new(Point3 { coords: base }, Point3 { coords: dir })
    }

    /// Parses the `"b1,b2,b3;d1,d2,d3"` form and canonicalizes it.
    pub fn parse(ctx: &FieldCtx, s: &str) -> Result<AffineLine, GeomError> {
        let err = || GeomError::Parse(s.to_string());
        let (b, d) = s.trim().split_once(';').ok_or_else(err)?;
        let triple = |part: &str| -> Result<[u32; 3], GeomError> {
            let v: Vec<u32> = part
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| err())?;
            if v.len() != 3 || v.iter().any(|&x| x >= ctx.q()) {
                return Err(err());
            }
            Ok([v[0], v[1], v[2]])
        };
        AffineLine::new(Point3::new(ctx, triple(b)?), Point3::new(ctx, triple(d)?))
    }
}

impl fmt::Display for AffineLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [b1, b2, b3] = self.base.values();
        let [d1, d2, d3] = self.dir.values();
        write!(f, "{b1},{b2},{b3};{d1},{d2},{d3}")
    }
}

pub fn line_through(p: &Point3, r: &Point3) -> Result<AffineLine, GeomError> {
    if p == r {
        return Err(GeomError::SamePoint);
    }
    AffineLine::new(*p, r.sub(p))
}

/// Number of affine lines in `F_q^3`: `q^2 (q^2 + q + 1)`.
pub fn line_count(q: u32) -> usize {
    let q = q as usize;
    q * q * (q * q + q + 1)
}

/// The line with position `idx` in the order of [`all_lines`].
///
/// Lines are grouped by pivot position; within a pivot block the index is
/// `tail * q^2 + base`, where `tail` encodes the direction coordinates after
/// the pivot and `base` the two base coordinates off the pivot.
pub fn line_at(ctx: &FieldCtx, mut idx: usize) -> AffineLine {
    let q = ctx.q() as usize;
    let q2 = q * q;
    assert!(idx < line_count(ctx.q()), "line index out of range");
    let mut pivot = 0;
    let mut block = q2 * q2;
    while idx >= block {
        idx -= block;
        pivot += 1;
        block /= q;
    }
    let mut tail = idx / q2;
    let base_idx = idx % q2;
    let mut dir = [0u32; 3];
    dir[pivot] = 1;
    for c in (pivot + 1..3).rev() {
        dir[c] = (tail % q) as u32;
        tail /= q;
    }
    let others: Vec<usize> = (0..3).filter(|&c| c != pivot).collect();
    let mut base = [0u32; 3];
    base[others[0]] = (base_idx / q) as u32;
    base[others[1]] = (base_idx % q) as u32;
    AffineLine {
        base: Point3::new(ctx, base),
        dir: Point3::new(ctx, dir),
    }
}

/// Every affine line of `F_q^3` exactly once, in canonical form.
pub fn all_lines(ctx: &FieldCtx) -> impl ExactSizeIterator<Item = AffineLine> + '_ {
    (0..line_count(ctx.q())).map(move |i| line_at(ctx, i))
}

/// The `q^2` lines with direction `(1,0,0)`; they partition `F_q^3`.
pub fn parallel_class_partition(ctx: &FieldCtx) -> Vec<AffineLine> {
    let q = ctx.q();
    let dir = Point3::new(ctx, [1, 0, 0]);
    (0..q)
        .flat_map(|b| (0..q).map(move |c| (b, c)))
        .map(|(b, c)| AffineLine {
            base: Point3::new(ctx, [0, b, c]),
            dir,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn f(q: u32) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    fn line(ctx: &FieldCtx, b: [u32; 3], d: [u32; 3]) -> AffineLine {
        AffineLine::new(Point3::new(ctx, b), Point3::new(ctx, d)).unwrap()
    }

    fn all_points(ctx: &FieldCtx) -> Vec<Point3> {
        let q = ctx.q() as usize;
        (0..q * q * q).map(|i| Point3::from_index(ctx, i)).collect()
    }

    // Independent oracle: canonical lines through every pair of points.
    fn pair_dedup_lines(ctx: &FieldCtx) -> HashSet<AffineLine> {
        let pts = all_points(ctx);
        let mut out = HashSet::new();
        for (i, p) in pts.iter().enumerate() {
            for r in &pts[i + 1..] {
                out.insert(line_through(p, r).unwrap());
            }
        }
        out
    }

    #[test]
    fn line_through_examples() {
        let k = f(5);
        let l = line_through(&Point3::new(&k, [0, 0, 0]), &Point3::new(&k, [0, 2, 0])).unwrap();
        assert_eq!(l.base().values(), [0, 0, 0]);
        assert_eq!(l.dir().values(), [0, 1, 0]);
        let p = Point3::new(&k, [1, 1, 0]);
        let r = Point3::new(&k, [1, 1, 3]);
        let l = line_through(&p, &r).unwrap();
        assert_eq!(l.base().values(), [1, 1, 0]);
        assert_eq!(l.dir().values(), [0, 0, 1]);
        assert!(l.points_on().contains(&p) && l.points_on().contains(&r));
        assert_eq!(line_through(&p, &p), Err(GeomError::SamePoint));
    }

    #[test]
    fn line_through_contains_endpoints_exhaustive_q3() {
        let k = f(3);
        let pts = all_points(&k);
        for p in &pts {
            for r in &pts {
                if p != r {
                    let l = line_through(p, r).unwrap();
                    assert!(l.contains(p) && l.contains(r));
                    assert_eq!(l, line_through(r, p).unwrap());
                }
            }
        }
    }

    #[test]
    fn points_on_examples() {
        let k = f(3);
        let pts: Vec<_> = line(&k, [0, 0, 0], [1, 0, 0])
            .points_on()
            .iter()
            .map(|p| p.values())
            .collect();
        assert_eq!(pts, vec![[0, 0, 0], [1, 0, 0], [2, 0, 0]]);
        let k = f(2);
        let pts: Vec<_> = line(&k, [0, 1, 0], [1, 0, 0])
            .points_on()
            .iter()
            .map(|p| p.values())
            .collect();
        assert_eq!(pts, vec![[0, 1, 0], [1, 1, 0]]);
    }

    #[test]
    fn line_counts_match_pair_oracle() {
        for (q, expected) in [(2u32, 28usize), (3, 117), (5, 775)] {
            let k = f(q);
            let lines: Vec<_> = all_lines(&k).collect();
            assert_eq!(lines.len(), expected);
            let set: HashSet<_> = lines.iter().copied().collect();
            assert_eq!(set.len(), expected, "duplicates at q={q}");
            assert_eq!(set, pair_dedup_lines(&k));
            for l in &lines {
                assert_eq!(*l, AffineLine::new(l.base(), l.dir()).unwrap());
                let pts = l.points_on();
                let distinct: HashSet<_> = pts.iter().collect();
                assert_eq!(distinct.len(), q as usize);
                let idx: Vec<_> = l.point_indices().collect();
                assert_eq!(idx, pts.iter().map(|p| p.index()).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn origin_lines() {
        let k = f(3);
        assert!(line(&k, [0, 0, 0], [1, 0, 0]).passes_origin());
        assert!(!line(&k, [0, 1, 0], [1, 0, 0]).passes_origin());
        for q in [2u32, 3, 5] {
            let k = f(q);
            let o = Point3::origin(&k);
            let mut n = 0;
            for l in all_lines(&k) {
                assert_eq!(l.passes_origin(), l.points_on().contains(&o));
                n += l.passes_origin() as usize;
            }
            assert_eq!(n, (q * q + q + 1) as usize);
        }
    }

    #[test]
    fn dual_example() {
        let k = f(5);
        let l = line(&k, [1, 0, 0], [0, 1, 0]);
        let d = l.dual_line().unwrap();
        assert_eq!(d, line(&k, [1, 0, 0], [0, 0, 1]));
        for x in d.points_on() {
            for y in l.points_on() {
                assert!(incident(&x, &y));
            }
        }
        assert_eq!(
            line(&k, [0, 0, 0], [1, 2, 3]).dual_line(),
            Err(GeomError::ThroughOrigin)
        );
    }

    #[test]
    fn duality_exhaustive() {
        for q in [2u32, 3, 5] {
            let k = f(q);
            let mut valid = 0;
            for l in all_lines(&k).filter(|l| !l.passes_origin()) {
                valid += 1;
                let d = l.dual_line().unwrap();
                assert!(!d.passes_origin());
                assert_eq!(d.dual_line().unwrap(), l);
                for x in d.points_on() {
                    for y in l.points_on() {
                        assert!(incident(&x, &y), "q={q} l={l} x={x} y={y}");
                    }
                }
                // the dual is the full solution set, not just part of it
                let solutions = all_points(&k)
                    .into_iter()
                    .filter(|z| l.points_on().iter().all(|y| incident(z, y)))
                    .count();
                assert_eq!(solutions, q as usize);
            }
            if q == 3 {
                assert_eq!(valid, 104);
            }
        }
    }

    #[test]
    fn incidence_examples() {
        let k = f(5);
        assert!(incident(
            &Point3::new(&k, [1, 0, 0]),
            &Point3::new(&k, [1, 0, 0])
        ));
        assert!(!incident(
            &Point3::new(&k, [1, 1, 0]),
            &Point3::new(&k, [2, 3, 0])
        ));
        assert!(incident(
            &Point3::new(&k, [1, 1, 0]),
            &Point3::new(&k, [2, 4, 0])
        ));
        let o = Point3::origin(&k);
        assert!(all_points(&k).iter().all(|y| !incident(&o, y)));
    }

    #[test]
    fn partition_covers_space() {
        for q in [2u32, 3, 5] {
            let k = f(q);
            let part = parallel_class_partition(&k);
            assert_eq!(part.len(), (q * q) as usize);
            let mut seen = HashSet::new();
            for l in &part {
                assert_eq!(l.dir().values(), [1, 0, 0]);
                for p in l.points_on() {
                    assert!(seen.insert(p), "lines overlap at {p}");
                }
            }
            assert_eq!(seen.len(), (q * q * q) as usize);
        }
    }

    #[test]
    fn text_form() {
        let k = f(7);
        let l = line(&k, [3, 2, 1], [2, 4, 6]);
        assert_eq!(l.to_string(), "0,3,6;1,2,3");
        assert_eq!(AffineLine::parse(&k, &l.to_string()).unwrap(), l);
        assert!(AffineLine::parse(&k, "1,2;3,4,5").is_err());
        assert!(AffineLine::parse(&k, "1,2,9;0,0,1").is_err());
        assert_eq!(
            AffineLine::parse(&k, "1,2,3;0,0,0"),
            Err(GeomError::ZeroDirection)
        );
    }

    #[test]
    fn index_round_trip() {
        let k = f(7);
        for i in 0..343 {
            assert_eq!(Point3::from_index(&k, i).index(), i);
        }
    }
}
