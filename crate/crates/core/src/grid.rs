//! The hypergrid `[t]^n`: shape, points, grading, level sizes, width, and
//! the good/normal level predicates.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::exact;

/// The pair `(t, n)` defining the poset `[t]^n = {0..t-1}^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GridShape {
    t: usize,
    n: usize,
}

impl GridShape {
    pub fn new(t: usize, n: usize) -> Result<Self> {
        if t < 2 {
            return Err(Error::Precondition(format!("t must be at least 2, got {t}")));
        }
        if n < 1 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        if t > u32::MAX as usize {
            return Err(Error::Precondition(format!("t = {t} is too large")));
        }
        Ok(GridShape { t, n })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the top level, `(t-1)n`.
    pub fn top(&self) -> usize {
        (self.t - 1) * self.n
    }

    pub fn num_levels(&self) -> usize {
        self.top() + 1
    }

    /// The middle level `m = floor((t-1)n/2)`.
    pub fn middle(&self) -> usize {
        self.top() / 2
    }

    /// `t^n`, saturating at `u128::MAX`.
    pub fn volume(&self) -> u128 {
        let mut v: u128 = 1;
        for _ in 0..self.n {
            v = v.saturating_mul(self.t as u128);
        }
        v
    }

    /// Number of cover edges, `n (t-1) t^(n-1)`, saturating.
    pub fn edge_count(&self) -> u128 {
        let mut v: u128 = (self.n as u128) * (self.t as u128 - 1);
        for _ in 1..self.n {
            v = v.saturating_mul(self.t as u128);
        }
        v
    }

    /// Volume as `usize`, failing if it exceeds `limit`.
    pub fn enumerable(&self, limit: u128) -> Result<usize> {
        guard("number of grid points", self.volume(), limit)?;
        Ok(self.volume() as usize)
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords.len() == self.n && p.coords.iter().all(|&c| (c as usize) < self.t)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Invalid(format!("point {p} is not in [{}]^{}", self.t, self.n)))
        }
    }

    /// Lexicographic index (first coordinate most significant).
    pub fn index(&self, p: &Point) -> usize {
        p.coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.t + c as usize)
    }

    pub fn point(&self, mut index: usize) -> Point {
        let mut coords = vec![0u32; self.n];
        for slot in coords.iter_mut().rev() {
            *slot = (index % self.t) as u32;
            index /= self.t;
        }
        Point { coords }
    }

    /// All points in lexicographic order. Callers should guard the volume.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.volume() as usize).map(move |i| self.point(i))
    }

    pub fn bottom(&self) -> Point {
        Point::new(vec![0; self.n])
    }

    pub fn top_point(&self) -> Point {
        Point::new(vec![(self.t - 1) as u32; self.n])
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]^{}", self.t, self.n)
    }
}

/// A point of the hypergrid; its rank is the coordinate sum `|x|`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    coords: Vec<u32>,
}

impl Point {
    pub fn new(coords: Vec<u32>) -> Self {
        Point { coords }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn rank(&self) -> usize {
        self.coords.iter().map(|&c| c as usize).sum()
    }

    /// Rank of the prefix formed by the first `len` coordinates.
    pub fn prefix_rank(&self, len: usize) -> usize {
        self.coords[..len].iter().map(|&c| c as usize).sum()
    }

    /// Coordinate-wise `self <= other`.
    pub fn precedes(&self, other: &Point) -> bool {
        self.coords.len() == other.coords.len()
            && self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    pub fn step_up(&self, axis: usize) -> Point {
        let mut coords = self.coords.clone();
        coords[axis] += 1;
        Point { coords }
    }

    pub fn step_down(&self, axis: usize) -> Point {
        let mut coords = self.coords.clone();
        coords[axis] -= 1;
        Point { coords }
    }

    /// Parses `"x1,x2,...,xn"`.
    pub fn parse(s: &str) -> Result<Point> {
        let coords = s
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Invalid(format!("bad coordinate {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Point { coords })
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

pub fn comparable(x: &Point, y: &Point) -> bool {
    x.precedes(y) || y.precedes(x)
}

/// All `y = x + e_i` that stay inside the grid, in axis order.
pub fn covers_up(shape: &GridShape, x: &Point) -> Vec<Point> {
    up_axes(shape, x).map(|axis| x.step_up(axis)).collect()
}

pub fn up_axes<'a>(shape: &GridShape, x: &'a Point) -> impl Iterator<Item = usize> + 'a {
    let limit = (shape.t() - 1) as u32;
    x.coords
        .iter()
        .enumerate()
        .filter(move |(_, &c)| c < limit)
        .map(|(i, _)| i)
}

pub fn down_axes(x: &Point) -> impl Iterator<Item = usize> + '_ {
    x.coords
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, _)| i)
}

/// Exact rank sequence `N(0..=top)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    sizes: Vec<BigUint>,
}

impl LevelProfile {
    pub fn from_sizes(sizes: Vec<BigUint>) -> Self {
        LevelProfile { sizes }
    }

    pub fn sizes(&self) -> &[BigUint] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// `N(i)`, zero outside the level range.
    pub fn get(&self, i: i64) -> BigUint {
        if i < 0 || i as usize >= self.sizes.len() {
            BigUint::zero()
        } else {
            self.sizes[i as usize].clone()
        }
    }

    pub fn size(&self, i: usize) -> &BigUint {
        &self.sizes[i]
    }

    pub fn total(&self) -> BigUint {
        self.sizes.iter().sum()
    }

    pub fn max(&self) -> BigUint {
        self.sizes.iter().max().cloned().unwrap_or_default()
    }

    pub fn is_symmetric(&self) -> bool {
        self.sizes.iter().eq(self.sizes.iter().rev())
    }

    pub fn reversed(&self) -> LevelProfile {
        LevelProfile {
            sizes: self.sizes.iter().rev().cloned().collect(),
        }
    }

    /// `N(i)` as `usize`, for enumerable shapes.
    pub fn small(&self, i: usize) -> usize {
        self.sizes[i].to_usize().expect("level size fits in usize")
    }
}

impl Serialize for LevelProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        exact::serde_str::biguint_vec(&self.sizes, s)
    }
}

/// Rank sequence of `[t]^n` for any `n >= 0` by repeated convolution with
/// the all-ones vector of length `t`.
pub fn chain_power_profile(t: usize, n: usize) -> LevelProfile {
    let mut sizes = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); sizes.len() + t - 1];
        // sliding window sum of width t
        let mut window = BigUint::zero();
        for (i, slot) in next.iter_mut().enumerate() {
            if i < sizes.len() {
                window += &sizes[i];
            }
            if i >= t {
                window -= &sizes[i - t];
            }
            *slot = window.clone();
        }
        sizes = next;
    }
    LevelProfile { sizes }
}

pub fn level_sizes(shape: &GridShape) -> LevelProfile {
    chain_power_profile(shape.t(), shape.n())
}

/// Width `alpha(t, n) = N(m)`.
pub fn width(shape: &GridShape) -> BigUint {
    level_sizes(shape).size(shape.middle()).clone()
}

pub fn is_log_concave(profile: &LevelProfile) -> bool {
    let s = profile.sizes();
    (1..s.len().saturating_sub(1)).all(|i| &s[i] * &s[i] >= &s[i - 1] * &s[i + 1])
}

/// A set of grid points with cached per-level counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    shape: GridShape,
    members: BTreeSet<usize>,
    per_level: Vec<usize>,
}

impl VertexSet {
    pub fn new(shape: GridShape) -> Self {
        VertexSet {
            shape,
            members: BTreeSet::new(),
            per_level: vec![0; shape.num_levels()],
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(shape: GridShape, points: I) -> Result<Self> {
        let mut set = VertexSet::new(shape);
        for p in points {
            set.insert(&p)?;
        }
        Ok(set)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(shape: GridShape, indices: I) -> Self {
        let mut set = VertexSet::new(shape);
        for i in indices {
            set.insert_index(i);
        }
        set
    }

    /// The full level `L(i)`.
    pub fn level(shape: GridShape, i: usize) -> Self {
        let mut set = VertexSet::new(shape);
        for (idx, p) in shape.points().enumerate() {
            if p.rank() == i {
                set.insert_index(idx);
            }
        }
        set
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn insert(&mut self, p: &Point) -> Result<bool> {
        self.shape.check(p)?;
        Ok(self.insert_index(self.shape.index(p)))
    }

    pub fn insert_index(&mut self, idx: usize) -> bool {
        let fresh = self.members.insert(idx);
        if fresh {
            self.per_level[self.shape.point(idx).rank()] += 1;
        }
        fresh
    }

    pub fn remove_index(&mut self, idx: usize) -> bool {
        let present = self.members.remove(&idx);
        if present {
            self.per_level[self.shape.point(idx).rank()] -= 1;
        }
        present
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.shape.contains(p) && self.members.contains(&self.shape.index(p))
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.members.contains(&idx)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.members.iter().map(|&i| self.shape.point(i))
    }

    pub fn per_level_counts(&self) -> &[usize] {
        &self.per_level
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::from_indices(self.shape, self.members.union(&other.members).copied())
    }

    pub fn is_antichain(&self) -> bool {
        let pts: Vec<Point> = self.points().collect();
        for (i, x) in pts.iter().enumerate() {
            for y in &pts[i + 1..] {
                if comparable(x, y) {
                    return false;
                }
            }
        }
        true
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pts: Vec<Point> = self.points().collect();
        pts.serialize(s)
    }
}

/// LYM weight `w(A) = sum_i |A ∩ L(i)| / N(i)`.
pub fn lym_weight(profile: &LevelProfile, set: &VertexSet) -> BigRational {
    set.per_level_counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            BigRational::new(BigInt::from(c), BigInt::from(profile.size(i).clone()))
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Rational exponent used by the good/normal thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    pub const THREE_FIFTHS: Exponent = Exponent { num: 3, den: 5 };

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for Exponent {
    fn default() -> Self {
        Exponent::THREE_FIFTHS
    }
}

/// Exact test of `d / 2 <= c * t * n^(num/den)`, i.e.
/// `d^den <= (2 c t)^den * n^num`, with `d = |2 rank - (t-1) n|`.
fn within_threshold(doubled_offset: u64, constant: u64, t: usize, n: usize, e: Exponent) -> bool {
    let lhs = BigUint::from(doubled_offset).pow(e.den);
    let rhs = BigUint::from(2 * constant * t as u64).pow(e.den) * BigUint::from(n).pow(e.num);
    lhs <= rhs
}

pub fn is_good_level(shape: &GridShape, level: usize, exponent: Exponent) -> bool {
    let d = (2 * level as i64 - shape.top() as i64).unsigned_abs();
    within_threshold(d, 1, shape.t(), shape.n(), exponent)
}

/// The good levels `T`: `|i - (t-1)n/2| <= t n^(3/5)` (exponent configurable).
/// Always a non-empty interval around the middle.
pub fn good_levels(shape: &GridShape, exponent: Exponent) -> RangeInclusive<usize> {
    let m = shape.middle();
    let mut lo = m;
    while lo > 0 && is_good_level(shape, lo - 1, exponent) {
        lo -= 1;
    }
    let mut hi = m;
    while hi < shape.top() && is_good_level(shape, hi + 1, exponent) {
        hi += 1;
    }
    lo..=hi
}

/// All points on good levels.
pub fn good_set(shape: &GridShape, exponent: Exponent) -> VertexSet {
    let levels = good_levels(shape, exponent);
    VertexSet::from_indices(
        *shape,
        shape
            .points()
            .enumerate()
            .filter(|(_, p)| levels.contains(&p.rank()))
            .map(|(i, _)| i),
    )
}

/// Is the prefix `x_[m0]` normal in `[t]^m0`:
/// `||x_[m0]| - (t-1) m0 / 2| <= c t m0^(3/5)` (default `c = 2`).
pub fn is_normal_prefix(t: usize, x: &Point, m0: usize, constant: u32, exponent: Exponent) -> bool {
    let rank = x.prefix_rank(m0) as i64;
    let d = (2 * rank - ((t - 1) * m0) as i64).unsigned_abs();
    within_threshold(d, constant as u64, t, m0, exponent)
}

/// One side of the level tail inequality.
#[derive(Debug, Clone, Serialize)]
pub struct TailCheck {
    pub level: i64,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub exact: BigUint,
    pub bound: f64,
    pub holds: bool,
}

/// Checks `N((t-1)n/2 - r) <= t^(n-1) exp(-r^2 / (2 t^2 (n-1)))`. When
/// `(t-1)n` is odd the inequality is checked at both adjacent integer levels.
/// The comparison is exact: `exp` is bracketed by rational Taylor bounds.
pub fn level_tail_check(shape: &GridShape, profile: &LevelProfile, r: i64) -> Result<Vec<TailCheck>> {
    let t = shape.t() as i64;
    let n = shape.n();
    if r.abs() <= t {
        return Err(Error::Precondition(format!("|r| = {} must exceed t = {t}", r.abs())));
    }
    if n < 2 {
        return Err(Error::Precondition("tail bound needs n >= 2".into()));
    }
    let top = shape.top() as i64;
    let levels: Vec<i64> = if top % 2 == 0 {
        vec![top / 2 - r]
    } else {
        vec![top / 2 - r, top / 2 + 1 - r]
    };
    let cap = BigUint::from(shape.t()).pow((n - 1) as u32);
    // x = r^2 / (2 t^2 (n-1))
    let x = BigRational::new(
        BigInt::from(r * r),
        BigInt::from(2 * t * t * (n as i64 - 1)),
    );
    let bound = (exact::ln_big(&cap) - exact::ratio_to_f64(&x)).exp();
    let out = levels
        .into_iter()
        .map(|level| {
            let value = profile.get(level);
            let holds = exp_times_at_most(&value, &x, &cap);
            TailCheck {
                level,
                exact: value,
                bound,
                holds,
            }
        })
        .collect();
    Ok(out)
}

/// Decides `value * exp(x) <= cap` for rational `x >= 0` using Taylor
/// partial sums (lower bounds) and a geometric tail bound (upper bound).
fn exp_times_at_most(value: &BigUint, x: &BigRational, cap: &BigUint) -> bool {
    if value.is_zero() {
        return true;
    }
    let value = BigRational::from_integer(BigInt::from(value.clone()));
    let cap = BigRational::from_integer(BigInt::from(cap.clone()));
    let mut term = BigRational::one();
    let mut partial = BigRational::one();
    let mut k: u64 = 0;
    loop {
        k += 1;
        term = term * x / BigRational::from_integer(BigInt::from(k));
        partial += &term;
        if &value * &partial > cap {
            return false;
        }
        // remainder after the k-th term is at most term * x/(k+1) / (1 - x/(k+2))
        let kk = BigRational::from_integer(BigInt::from(k + 2));
        if x < &kk {
            let ratio = x / &kk;
            let rem = &term * x / BigRational::from_integer(BigInt::from(k + 1))
                / (BigRational::one() - ratio);
            if &value * (&partial + rem) <= cap {
                return true;
            }
        }
        if k > 10_000 {
            // ties are not decidable by bracketing; treat equality as holding
            return true;
        }
    }
}

/// Exhaustive normalized matching check between `L(i)` and `L(i+1)`:
/// `|N(X)| / N(i+1) >= |X| / N(i)` for every `X ⊆ L(i)`.
pub fn normalized_matching_bruteforce(shape: &GridShape, i: usize) -> Result<bool> {
    if i >= shape.top() {
        return Err(Error::Precondition(format!(
            "level {i} has no upper neighbour level in {shape}"
        )));
    }
    let profile = level_sizes(shape);
    let lower_size = profile.size(i).to_u64().unwrap_or(u64::MAX);
    guard("level size for subset enumeration", lower_size as u128, 20)?;
    shape.enumerable(1 << 24)?;
    let lower: Vec<Point> = shape.points().filter(|p| p.rank() == i).collect();
    let upper: Vec<Point> = shape.points().filter(|p| p.rank() == i + 1).collect();
    let words = upper.len().div_ceil(64);
    let nbhd: Vec<Vec<u64>> = lower
        .iter()
        .map(|x| {
            let mut bits = vec![0u64; words];
            for (j, y) in upper.iter().enumerate() {
                if x.precedes(y) {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();
    let a = lower.len() as u64;
    let b = upper.len() as u64;
    fn walk(nbhd: &[Vec<u64>], next: usize, size: u64, acc: &[u64], a: u64, b: u64) -> bool {
        let covered: u64 = acc.iter().map(|w| w.count_ones() as u64).sum();
        if covered * a < size * b {
            return false;
        }
        for j in next..nbhd.len() {
            let merged: Vec<u64> = acc.iter().zip(&nbhd[j]).map(|(x, y)| x | y).collect();
            if !walk(nbhd, j + 1, size + 1, &merged, a, b) {
                return false;
            }
        }
        true
    }
    Ok(walk(&nbhd, 0, 0, &vec![0u64; words], a, b))
}
