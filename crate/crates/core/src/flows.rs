//! Scaled normalized matching flows (SNMF) on `[t]^n`.
//!
//! The flow is built by the product recursion `[t]^m = [t]^(m-1) x [t]`:
//! between levels `k` and `k+1` of the product, each slice
//! `L_P(k-i) x {i}` collapses to one node of a weighted path graph, and the
//! unique flow `g` on that path determines every edge weight. Edge weights
//! are evaluated lazily in closed form; nothing is materialized unless a
//! sweep asks for it.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::analytics::lambda::window_lambda;
use crate::error::{guard, Error, Result};
use crate::exact::{self, big_ratio};
use crate::grid::{self, chain_power_profile, Exponent, GridShape, LevelProfile, Point};
use crate::rng;

/// Default limit on the number of cover edges an exhaustive sweep may visit.
pub const DEFAULT_EDGE_GUARD: u128 = 1_000_000;

/// A cover edge `(x; axis)`: `x` and `x + e_axis`. The axis is 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoverEdge {
    pub base: Point,
    pub axis: usize,
}

impl CoverEdge {
    pub fn new(base: Point, axis: usize) -> Self {
        CoverEdge { base, axis }
    }

    pub fn check(&self, shape: &GridShape) -> Result<()> {
        shape.check(&self.base)?;
        if self.axis >= shape.n() {
            return Err(Error::Invalid(format!(
                "axis {} out of range for {shape}",
                self.axis + 1
            )));
        }
        if self.base.coords()[self.axis] as usize + 1 >= shape.t() {
            return Err(Error::Invalid(format!(
                "no cover edge from {} along axis {}",
                self.base,
                self.axis + 1
            )));
        }
        Ok(())
    }

    pub fn top(&self) -> Point {
        self.base.step_up(self.axis)
    }

    /// Parses `"x1,...,xn:m"` with a 1-based axis `m`.
    pub fn parse(s: &str) -> Result<CoverEdge> {
        let (coords, axis) = s
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("edge {s:?} must look like x1,...,xn:m")))?;
        let axis: usize = axis
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad axis in {s:?}")))?;
        if axis == 0 {
            return Err(Error::Invalid("axis is 1-based".into()));
        }
        Ok(CoverEdge {
            base: Point::parse(coords)?,
            axis: axis - 1,
        })
    }
}

impl Serialize for CoverEdge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CoverEdge", 2)?;
        st.serialize_field("base", &self.base)?;
        st.serialize_field("coord", &(self.axis + 1))?;
        st.end()
    }
}

/// The unique flow `g` on the collapsed path graph `a_0 b_0 a_1 b_1 ...`
/// between levels `k` and `k+1` of `R = P x [t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapsedFlow {
    pub k: i64,
    /// `g(a_l b_l)` for `l` in `0..t`.
    #[serde(serialize_with = "exact::serde_str::ratio_vec")]
    pub diag: Vec<BigRational>,
    /// `g(a_l b_(l+1))` for `l` in `0..t-1`.
    #[serde(serialize_with = "exact::serde_str::ratio_vec")]
    pub off: Vec<BigRational>,
}

fn int(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Node weights of the collapsed graph: `sigma(a_i) = N_P(k-i)` and
/// `sigma(b_i) = N_R(k)/N_R(k+1) * N_P(k+1-i)`.
pub fn collapsed_weights(profile_p: &LevelProfile, k: i64, t: usize) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let scale = product_scale(profile_p, k, t)?;
    let a = (0..t as i64).map(|i| int(profile_p.get(k - i))).collect();
    let b = (0..t as i64)
        .map(|i| &scale * int(profile_p.get(k + 1 - i)))
        .collect();
    Ok((a, b))
}

/// `N_R(k)/N_R(k+1)` for `R = P x [t]`, summing only non-empty slices.
fn product_scale(profile_p: &LevelProfile, k: i64, t: usize) -> Result<BigRational> {
    let len = profile_p.len() as i64;
    let n_r = |level: i64| -> BigUint {
        let lo = (level - len + 1).max(0);
        let hi = level.min(t as i64 - 1);
        (lo..=hi).map(|j| profile_p.get(level - j)).sum()
    };
    let lower = n_r(k);
    let upper = n_r(k + 1);
    if lower.is_zero() || upper.is_zero() {
        return Err(Error::Precondition(format!(
            "levels {k} and {} of the product must be non-empty",
            k + 1
        )));
    }
    Ok(big_ratio(&lower, &upper))
}

/// The part of `g` that can be non-zero: `(lo, diag[lo..=hi], off[lo..=hi])`
/// with `off` truncated at `t - 2`. Outside the window both partial sums are
/// either empty or complete, so `g` vanishes there.
fn collapsed_window(profile_p: &LevelProfile, k: i64, t: usize) -> Result<(usize, Vec<BigRational>, Vec<BigRational>)> {
    let scale = product_scale(profile_p, k, t)?;
    let len = profile_p.len() as i64;
    let lo = (k - len + 1).max(0).min(t as i64 - 1) as usize;
    let hi = (k + 1).clamp(0, t as i64 - 1) as usize;
    let mut diag = Vec::with_capacity(hi + 1 - lo);
    let mut off = Vec::with_capacity(hi + 1 - lo);
    let mut sum_a = BigRational::zero();
    let mut sum_b = BigRational::zero();
    for l in lo..=hi {
        sum_b += &scale * int(profile_p.get(k + 1 - l as i64));
        // g(a_l b_l) = sum_{i<=l} sigma(b_i) - sum_{i<l} sigma(a_i)
        let d = &sum_b - &sum_a;
        if d.is_negative() {
            return Err(Error::NegativeFlow {
                edge: format!("a{l}b{l}"),
                level: k,
            });
        }
        diag.push(d);
        sum_a += int(profile_p.get(k - l as i64));
        if l + 1 < t {
            // g(a_l b_(l+1)) = sum_{i<=l} sigma(a_i) - sum_{i<=l} sigma(b_i)
            let o = &sum_a - &sum_b;
            if o.is_negative() {
                return Err(Error::NegativeFlow {
                    edge: format!("a{l}b{}", l + 1),
                    level: k,
                });
            }
            off.push(o);
        }
    }
    Ok((lo, diag, off))
}

/// Computes `g` by the alternating partial sums of the node weights.
pub fn collapsed_flow(profile_p: &LevelProfile, k: i64, t: usize) -> Result<CollapsedFlow> {
    let (lo, w_diag, w_off) = collapsed_window(profile_p, k, t)?;
    let mut diag = vec![BigRational::zero(); t];
    let mut off = vec![BigRational::zero(); t - 1];
    for (i, g) in w_diag.into_iter().enumerate() {
        diag[lo + i] = g;
    }
    for (i, g) in w_off.into_iter().enumerate() {
        off[lo + i] = g;
    }
    Ok(CollapsedFlow { k, diag, off })
}

impl CollapsedFlow {
    /// Residuals of the four conservation identities (all zero for a flow):
    /// `g(a_0 b_0) = sigma(b_0)`, the split at every `a_l`, the split at
    /// every `b_l`, and the closing identity at `a_(t-1) b_(t-1)`.
    pub fn conservation_residuals(&self, profile_p: &LevelProfile, t: usize) -> Result<Vec<BigRational>> {
        let (a, b) = collapsed_weights(profile_p, self.k, t)?;
        let mut out = vec![&self.diag[0] - &b[0]];
        for l in 0..t - 1 {
            out.push(&self.diag[l] + &self.off[l] - &a[l]);
        }
        for l in 1..t {
            out.push(&self.diag[l] + &self.off[l - 1] - &b[l]);
        }
        out.push(&self.diag[t - 1] - &a[t - 1]);
        Ok(out)
    }
}

/// Per-level edge factors at one stage of the recursion: the collapsed flow
/// divided by the slice sizes `N_P(k-i)`.
#[derive(Debug, Clone)]
struct StageFactors {
    /// Index of the first stored entry; everything outside the stored
    /// window is zero.
    lo: usize,
    /// `g(a_i b_i) / N_P(k-i)`, zero when the slice is empty.
    diag: Vec<BigRational>,
    /// `g(a_i b_(i+1)) / N_P(k-i)`.
    off: Vec<BigRational>,
}

static ZERO: std::sync::LazyLock<BigRational> = std::sync::LazyLock::new(BigRational::zero);

impl StageFactors {
    fn diag(&self, i: u32) -> &BigRational {
        (i as usize).checked_sub(self.lo).and_then(|j| self.diag.get(j)).unwrap_or(&ZERO)
    }

    fn off(&self, i: u32) -> &BigRational {
        (i as usize).checked_sub(self.lo).and_then(|j| self.off.get(j)).unwrap_or(&ZERO)
    }
}

/// A source of edge weights on `[t]^n`.
pub trait FlowSource {
    fn shape(&self) -> &GridShape;

    /// Weight of the cover edge from `x` along `axis`. The edge must exist.
    fn weight(&self, x: &Point, axis: usize) -> BigRational;

    /// All up-edge weights out of `x` as `(axis, weight)`.
    fn out_weights(&self, x: &Point) -> Vec<(usize, BigRational)> {
        grid::up_axes(self.shape(), x)
            .map(|axis| (axis, self.weight(x, axis)))
            .collect()
    }
}

/// The structured SNMF `f_n` of `[t]^n` with `f_1 = 1` on every edge of
/// `[t]` and `f_(m+1) = f_m^(x t)`.
pub struct Snmf {
    shape: GridShape,
    /// `profiles[j]` is the rank sequence of `[t]^j`, `j = 0..=n`.
    profiles: Vec<LevelProfile>,
    /// `stages[j-1][k]` for the product `[t]^j = [t]^(j-1) x [t]`.
    stages: Vec<Vec<OnceLock<StageFactors>>>,
}

impl Snmf {
    pub fn new(shape: GridShape) -> Self {
        let t = shape.t();
        let profiles: Vec<LevelProfile> = (0..=shape.n()).map(|j| chain_power_profile(t, j)).collect();
        let stages = (1..=shape.n())
            .map(|j| (0..(t - 1) * j).map(|_| OnceLock::new()).collect())
            .collect();
        Snmf {
            shape,
            profiles,
            stages,
        }
    }

    pub fn profile(&self, dim: usize) -> &LevelProfile {
        &self.profiles[dim]
    }

    fn stage(&self, dim: usize, k: usize) -> &StageFactors {
        self.stages[dim - 1][k].get_or_init(|| {
            let t = self.shape.t();
            let p = &self.profiles[dim - 1];
            let (lo, diag, off) = collapsed_window(p, k as i64, t).expect("hypergrid profiles are log-concave");
            let norm = |vals: &[BigRational]| -> Vec<BigRational> {
                vals.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let size = p.get(k as i64 - (lo + i) as i64);
                        if size.is_zero() {
                            BigRational::zero()
                        } else {
                            v / int(size)
                        }
                    })
                    .collect()
            };
            StageFactors {
                lo,
                diag: norm(&diag),
                off: norm(&off),
            }
        })
    }

    /// Collapsed flow used at recursion dimension `dim` (1-based) and level `k`.
    pub fn collapsed(&self, dim: usize, k: usize) -> Result<CollapsedFlow> {
        collapsed_flow(&self.profiles[dim - 1], k as i64, self.shape.t())
    }

    /// Right-edge factor `f_m((x_[m]; m))` of the edge at 0-based `axis`.
    pub fn stage_weight(&self, x: &Point, axis: usize) -> BigRational {
        let dim = axis + 1;
        let k = x.prefix_rank(dim);
        self.stage(dim, k).off(x.coords()[axis]).clone()
    }

    pub fn edge_weight(&self, e: &CoverEdge) -> Result<BigRational> {
        e.check(&self.shape)?;
        Ok(self.weight(&e.base, e.axis))
    }
}

impl FlowSource for Snmf {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn weight(&self, x: &Point, axis: usize) -> BigRational {
        let coords = x.coords();
        let mut k = x.prefix_rank(axis + 1);
        let mut w = self.stage(axis + 1, k).off(coords[axis]).clone();
        for j in axis + 1..coords.len() {
            if w.is_zero() {
                break;
            }
            k += coords[j] as usize;
            w *= self.stage(j + 1, k).diag(coords[j]);
        }
        w
    }

    fn out_weights(&self, x: &Point) -> Vec<(usize, BigRational)> {
        let coords = x.coords();
        let n = coords.len();
        let limit = (self.shape.t() - 1) as u32;
        // suffix[j] = product of diag factors for dimensions j+1..n (0-based j)
        let mut prefix = vec![0usize; n + 1];
        for j in 0..n {
            prefix[j + 1] = prefix[j] + coords[j] as usize;
        }
        let mut suffix = vec![BigRational::one(); n + 1];
        for j in (0..n).rev() {
            suffix[j] = if j + 1 < n && prefix[j + 2] < self.stages[j + 1].len() {
                &suffix[j + 1] * self.stage(j + 2, prefix[j + 2]).diag(coords[j + 1])
            } else if j + 1 < n {
                BigRational::zero()
            } else {
                BigRational::one()
            };
        }
        (0..n)
            .filter(|&axis| coords[axis] < limit)
            .map(|axis| {
                let off = self.stage(axis + 1, prefix[axis + 1]).off(coords[axis]);
                (axis, off * &suffix[axis])
            })
            .collect()
    }
}

/// Dense table of all edge weights of a flow, indexed by `point * n + axis`.
pub struct EdgeTable {
    shape: GridShape,
    weights: Vec<BigRational>,
}

impl EdgeTable {
    pub fn build<F: FlowSource>(flow: &F, point_limit: u128) -> Result<Self> {
        let shape = *flow.shape();
        let volume = shape.enumerable(point_limit)?;
        let n = shape.n();
        let mut weights = vec![BigRational::zero(); volume * n];
        for (idx, x) in shape.points().enumerate() {
            for (axis, w) in flow.out_weights(&x) {
                weights[idx * n + axis] = w;
            }
        }
        Ok(EdgeTable { shape, weights })
    }

    pub fn at(&self, index: usize, axis: usize) -> &BigRational {
        &self.weights[index * self.shape.n() + axis]
    }

    /// `f64` copy for sampling.
    pub fn to_f64(&self) -> Vec<f64> {
        self.weights.iter().map(exact::ratio_to_f64).collect()
    }
}

impl FlowSource for EdgeTable {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn weight(&self, x: &Point, axis: usize) -> BigRational {
        self.at(self.shape.index(x), axis).clone()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelResidual {
    pub level: usize,
    /// Largest `|sum of up-weights - 1|` over points of this level.
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub max_out_residual: BigRational,
    /// Largest `|sum of down-weights - N(i-1)/N(i)|` over points of this level.
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub max_in_residual: BigRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConservationReport {
    pub t: usize,
    pub n: usize,
    pub edges_checked: u64,
    pub levels: Vec<LevelResidual>,
    pub violations: Vec<String>,
    pub negative_edges: u64,
    pub pass: bool,
}

/// Exhaustively checks the SNMF identities of any flow source: every
/// `x ∈ L(i)` below the top sends total weight 1 upward, every
/// `y ∈ L(i+1)` receives `N(i)/N(i+1)`.
pub fn verify_flow<F: FlowSource>(flow: &F, edge_guard: u128) -> Result<ConservationReport> {
    let shape = *flow.shape();
    guard("number of cover edges", shape.edge_count(), edge_guard)?;
    let volume = shape.enumerable(u128::MAX)?;
    let n = shape.n();
    let profile = grid::level_sizes(&shape);
    let mut incoming = vec![BigRational::zero(); volume];
    let mut levels: Vec<LevelResidual> = (0..shape.num_levels())
        .map(|level| LevelResidual {
            level,
            max_out_residual: BigRational::zero(),
            max_in_residual: BigRational::zero(),
        })
        .collect();
    let mut violations = Vec::new();
    let mut edges = 0u64;
    let mut negative = 0u64;
    let one = BigRational::one();
    for (idx, x) in shape.points().enumerate() {
        let rank = x.rank();
        let out = flow.out_weights(&x);
        if rank == shape.top() {
            continue;
        }
        let mut total = BigRational::zero();
        for (axis, w) in out {
            if w.is_negative() {
                negative += 1;
                violations.push(format!("negative weight on edge {x}:{}", axis + 1));
            }
            let up = idx + stride(&shape, axis);
            debug_assert_eq!(up, shape.index(&x.step_up(axis)));
            incoming[up] += &w;
            total += w;
            edges += 1;
        }
        let residual = (&total - &one).abs();
        if !residual.is_zero() {
            violations.push(format!("out-sum at {x} is {} (expected 1)", exact::ratio_string(&total)));
        }
        if residual > levels[rank].max_out_residual {
            levels[rank].max_out_residual = residual;
        }
    }
    for (idx, received) in incoming.iter().enumerate() {
        let rank = shape.point(idx).rank();
        if rank == 0 {
            continue;
        }
        let expect = big_ratio(profile.size(rank - 1), profile.size(rank));
        let residual = (received - &expect).abs();
        if !residual.is_zero() {
            violations.push(format!(
                "in-sum at {} is {} (expected {})",
                shape.point(idx),
                exact::ratio_string(received),
                exact::ratio_string(&expect)
            ));
        }
        if residual > levels[rank].max_in_residual {
            levels[rank].max_in_residual = residual;
        }
    }
    let _ = n;
    Ok(ConservationReport {
        t: shape.t(),
        n: shape.n(),
        edges_checked: edges,
        levels,
        pass: violations.is_empty(),
        violations,
        negative_edges: negative,
    })
}

/// Index offset of a unit step along `axis` in lexicographic order.
pub(crate) fn stride(shape: &GridShape, axis: usize) -> usize {
    shape.t().pow((shape.n() - 1 - axis) as u32)
}

pub fn verify_conservation(shape: &GridShape, edge_guard: u128) -> Result<ConservationReport> {
    verify_flow(&Snmf::new(*shape), edge_guard)
}

/// How to evaluate the permutation average `f* = (1/n!) sum_pi f_pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Largest `n` for which exact averaging is allowed.
pub const EXACT_AVERAGING_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl McEstimate {
    pub fn upper(&self, z: f64) -> f64 {
        self.mean + z * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Averaged {
    Exact(BigRational),
    Estimate(McEstimate),
}

/// Key identifying the `S_n`-orbit of an edge: the moving coordinate's
/// value plus the sorted multiset of the other coordinates.
type OrbitKey = (u32, Vec<u32>);

fn orbit_key(x: &Point, axis: usize) -> OrbitKey {
    let mut rest: Vec<u32> = x
        .coords()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != axis)
        .map(|(_, &c)| c)
        .collect();
    rest.sort_unstable();
    (x.coords()[axis], rest)
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every edge in the orbit of `key` under coordinate permutations.
fn orbit_edges(key: &OrbitKey, n: usize) -> Vec<(Point, usize)> {
    let (value, rest) = key;
    let mut arrangement = rest.clone();
    let mut out = Vec::new();
    loop {
        for axis in 0..n {
            let mut coords = Vec::with_capacity(n);
            coords.extend_from_slice(&arrangement[..axis]);
            coords.push(*value);
            coords.extend_from_slice(&arrangement[axis..]);
            out.push((Point::new(coords), axis));
        }
        if !next_permutation(&mut arrangement) {
            break;
        }
    }
    out
}

/// The permutation-averaged flow `f*`. Exact values are computed as the
/// mean of `f` over the edge's orbit, which equals the average over all
/// `n!` permutations because every orbit element is hit equally often.
pub struct AveragedFlow {
    snmf: Snmf,
    cache: Mutex<HashMap<OrbitKey, BigRational>>,
}

impl AveragedFlow {
    pub fn new(shape: GridShape) -> Result<Self> {
        if shape.n() > EXACT_AVERAGING_MAX_N {
            return Err(Error::Guard {
                what: "dimension for exact permutation averaging",
                actual: shape.n() as u128,
                limit: EXACT_AVERAGING_MAX_N as u128,
            });
        }
        Ok(Self::unguarded(shape))
    }

    fn unguarded(shape: GridShape) -> Self {
        AveragedFlow {
            snmf: Snmf::new(shape),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn snmf(&self) -> &Snmf {
        &self.snmf
    }

    fn orbit_mean(&self, key: &OrbitKey) -> BigRational {
        if let Some(v) = self.cache.lock().expect("cache lock").get(key) {
            return v.clone();
        }
        let edges = orbit_edges(key, self.snmf.shape.n());
        let count = edges.len();
        let sum = edges
            .iter()
            .map(|(x, axis)| self.snmf.weight(x, *axis))
            .fold(BigRational::zero(), |a, b| a + b);
        let mean = sum / BigRational::from_integer(BigInt::from(count));
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key.clone(), mean.clone());
        mean
    }
}

impl FlowSource for AveragedFlow {
    fn shape(&self) -> &GridShape {
        &self.snmf.shape
    }

    fn weight(&self, x: &Point, axis: usize) -> BigRational {
        self.orbit_mean(&orbit_key(x, axis))
    }
}

/// Monte Carlo estimate of `f*(e)` from uniformly random coordinate
/// permutations; deterministic for a given seed.
pub fn averaged_edge_weight_mc(snmf: &Snmf, e: &CoverEdge, samples: u64, seed: u64) -> Result<McEstimate> {
    e.check(&snmf.shape)?;
    if samples < 2 {
        return Err(Error::Precondition("Monte Carlo needs at least 2 samples".into()));
    }
    let n = snmf.shape.n();
    let mut rng = rng::stream(seed, 0);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut cache: HashMap<(Vec<u32>, usize), f64> = HashMap::new();
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        perm.shuffle(&mut rng);
        // pi(x)(i) = x(pi(i)); the moved coordinate lands where pi(i) = axis
        let coords: Vec<u32> = perm.iter().map(|&p| e.base.coords()[p]).collect();
        let axis = perm.iter().position(|&p| p == e.axis).expect("permutation");
        let v = *cache
            .entry((coords.clone(), axis))
            .or_insert_with(|| exact::ratio_to_f64(&snmf.weight(&Point::new(coords), axis)));
        sum += v;
        sum_sq += v * v;
    }
    let count = samples as f64;
    let mean = sum / count;
    let var = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / count).sqrt(),
        samples,
    })
}

/// `f*(e)` in the requested mode. Exact mode requires `n <= 8`.
pub fn averaged_edge_weight(shape: &GridShape, e: &CoverEdge, mode: AveragingMode) -> Result<Averaged> {
    e.check(shape)?;
    match mode {
        AveragingMode::Exact => {
            let flow = AveragedFlow::new(*shape)?;
            Ok(Averaged::Exact(flow.weight(&e.base, e.axis)))
        }
        AveragingMode::MonteCarlo { samples, seed } => {
            let snmf = Snmf::new(*shape);
            Ok(Averaged::Estimate(averaged_edge_weight_mc(&snmf, e, samples, seed)?))
        }
    }
}

/// Orbit representatives of every edge whose lower end lies on a good level.
fn good_edge_orbits(shape: &GridShape, exponent: Exponent) -> Vec<OrbitKey> {
    let t = shape.t() as u32;
    let n = shape.n();
    let levels = grid::good_levels(shape, exponent);
    let mut out = Vec::new();
    // multisets of n-1 values as nondecreasing sequences
    let mut rest = vec![0u32; n - 1];
    loop {
        let rest_sum: usize = rest.iter().map(|&c| c as usize).sum();
        for value in 0..t - 1 {
            if levels.contains(&(rest_sum + value as usize)) {
                out.push((value, rest.clone()));
            }
        }
        // next nondecreasing sequence
        let mut i = rest.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if rest[i] + 1 < t {
                let v = rest[i] + 1;
                for slot in rest[i..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxGoodWeight {
    /// Exact `W` in exact mode.
    #[serde(serialize_with = "exact::serde_str::ratio_opt")]
    pub exact: Option<BigRational>,
    /// Largest per-edge Monte Carlo mean (Monte Carlo mode).
    pub estimate: Option<f64>,
    /// Largest per-edge `mean + 3 SE` (Monte Carlo mode).
    pub upper_confidence: Option<f64>,
    pub argmax: CoverEdge,
    pub orbits: usize,
    /// `W n / ln n` from whichever value is available (`None` for `n = 1`).
    pub scaled: Option<f64>,
}

fn scaled_weight(n: usize, w: f64) -> Option<f64> {
    (n > 1).then(|| w * n as f64 / (n as f64).ln())
}

/// `W`: the maximum of `f*` over edges `xy` with `x` on a good level.
pub fn max_good_weight(shape: &GridShape, mode: AveragingMode, exponent: Exponent) -> Result<MaxGoodWeight> {
    let orbits = good_edge_orbits(shape, exponent);
    let first = orbits
        .first()
        .ok_or_else(|| Error::Precondition(format!("{shape} has no good edges")))?;
    let rep = |key: &OrbitKey| {
        let mut coords = vec![key.0];
        coords.extend_from_slice(&key.1);
        CoverEdge::new(Point::new(coords), 0)
    };
    match mode {
        AveragingMode::Exact => {
            guard("number of cover edges", shape.edge_count(), DEFAULT_EDGE_GUARD)?;
            let flow = AveragedFlow::new(*shape)?;
            let mut best = (flow.orbit_mean(first), first);
            for key in &orbits[1..] {
                let v = flow.orbit_mean(key);
                if v > best.0 {
                    best = (v, key);
                }
            }
            let scaled = scaled_weight(shape.n(), exact::ratio_to_f64(&best.0));
            Ok(MaxGoodWeight {
                scaled,
                exact: Some(best.0),
                estimate: None,
                upper_confidence: None,
                argmax: rep(best.1),
                orbits: orbits.len(),
            })
        }
        AveragingMode::MonteCarlo { samples, seed } => {
            let snmf = Snmf::new(*shape);
            let mut best: Option<(McEstimate, &OrbitKey)> = None;
            let mut best_upper = f64::NEG_INFINITY;
            for (i, key) in orbits.iter().enumerate() {
                let est = averaged_edge_weight_mc(&snmf, &rep(key), samples, rng::substream_seed(seed, i as u64))?;
                best_upper = best_upper.max(est.upper(3.0));
                if best.as_ref().is_none_or(|(b, _)| est.mean > b.mean) {
                    best = Some((est, key));
                }
            }
            let (est, key) = best.expect("non-empty orbit list");
            Ok(MaxGoodWeight {
                scaled: scaled_weight(shape.n(), est.mean),
                exact: None,
                estimate: Some(est.mean),
                upper_confidence: Some(best_upper),
                argmax: rep(key),
                orbits: orbits.len(),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalEdgeRow {
    pub m: usize,
    pub normal_edges: u64,
    /// Largest `m * f((x; m))` over normal edges with this moving coordinate.
    pub max_scaled_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalEdgeReport {
    pub t: usize,
    pub n: usize,
    pub rows: Vec<NormalEdgeRow>,
    pub max_scaled_weight: f64,
    /// Edges violating `f((x;m)) <= f_m((x_[m]; m))`.
    pub domination_violations: u64,
    /// Edges violating `f_m((x_[m]; m)) <= Lambda / N_min^2`.
    pub right_edge_violations: u64,
    pub pass: bool,
}

/// Sweeps every normal edge, recording `m * f((x; m))`, and checks the two
/// exact per-edge bounds behind it (domination by the stage weight and the
/// `Lambda / N_min^2` bound on right edges).
pub fn normal_edge_weight_check(shape: &GridShape, edge_guard: u128) -> Result<NormalEdgeReport> {
    guard("number of cover edges", shape.edge_count(), edge_guard)?;
    let snmf = Snmf::new(*shape);
    let t = shape.t();
    let n = shape.n();
    let mut rows: Vec<NormalEdgeRow> = (1..=n)
        .map(|m| NormalEdgeRow {
            m,
            normal_edges: 0,
            max_scaled_weight: 0.0,
        })
        .collect();
    let mut right_bound: HashMap<(usize, usize), BigRational> = HashMap::new();
    let mut domination = 0u64;
    let mut right = 0u64;
    for x in shape.points() {
        for (axis, w) in snmf.out_weights(&x) {
            let m = axis + 1;
            let stage = snmf.stage_weight(&x, axis);
            if w > stage {
                domination += 1;
            }
            let k = x.prefix_rank(m);
            let bound = right_bound.entry((m, k)).or_insert_with(|| {
                let p = snmf.profile(m - 1);
                let (lambda, nmin) = window_lambda(p, k as i64 - t as i64 + 1, k as i64 + 1);
                if nmin.is_zero() {
                    // window leaves the level range; no finite bound
                    BigRational::from_integer(BigInt::from(u64::MAX))
                } else {
                    BigRational::new(lambda, BigInt::from(&nmin * &nmin))
                }
            });
            if &stage > bound {
                right += 1;
            }
            if grid::is_normal_prefix(t, &x, m, 2, Exponent::default()) {
                let row = &mut rows[axis];
                row.normal_edges += 1;
                row.max_scaled_weight = row.max_scaled_weight.max(m as f64 * exact::ratio_to_f64(&w));
            }
        }
    }
    let max_scaled_weight = rows.iter().map(|r| r.max_scaled_weight).fold(0.0, f64::max);
    Ok(NormalEdgeReport {
        t,
        n,
        rows,
        max_scaled_weight,
        domination_violations: domination,
        right_edge_violations: right,
        pass: domination == 0 && right == 0,
    })
}

/// Random coordinate permutation of a point together with the image of an
/// axis, as used by `f_pi(xy) = f(pi(x) pi(y))`.
pub fn permute_edge(e: &CoverEdge, perm: &[usize]) -> CoverEdge {
    let coords: Vec<u32> = perm.iter().map(|&p| e.base.coords()[p]).collect();
    let axis = perm.iter().position(|&p| p == e.axis).expect("permutation");
    CoverEdge::new(Point::new(coords), axis)
}

/// Uniform random permutation of `0..n`.
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}
