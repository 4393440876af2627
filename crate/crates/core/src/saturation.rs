//! Comparability degrees, chain and rectangle partitions, and checks of the
//! supersaturation inequalities.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, binomial, log2_big};
use crate::grid::{self, comparable, Exponent, GridShape, Point, VertexSet};
use crate::matching::hopcroft_karp;

/// Default limit on the ground set of a chain partition.
pub const DEFAULT_PARTITION_GUARD: u128 = 20_000;

/// Comparability degree of every member of `a`, in index order.
pub fn comparability_degrees(a: &VertexSet) -> Vec<(Point, usize)> {
    let points: Vec<Point> = a.points().collect();
    let mut deg = vec![0usize; points.len()];
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if comparable(&points[i], &points[j]) {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }
    points.into_iter().zip(deg).collect()
}

/// `Delta(A)`: maximum degree of the comparability graph induced on `A`.
pub fn comp_max_degree(a: &VertexSet) -> usize {
    comparability_degrees(a).into_iter().map(|(_, d)| d).max().unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainPartition {
    pub t: usize,
    pub n: usize,
    pub chains: Vec<Vec<Point>>,
    pub width: usize,
    pub min_length: usize,
    /// `|P|/(2 alpha) - 1/2`.
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub length_bound: BigRational,
    pub meets_bound: bool,
    pub moves: usize,
}

/// Can `e` join the chain `c` (indices sorted by rank) and keep it a chain?
fn insertion_point(points: &[Point], c: &[usize], e: usize) -> Option<usize> {
    let r = points[e].rank();
    let pos = c.partition_point(|&i| points[i].rank() < r);
    if pos < c.len() && points[c[pos]].rank() == r {
        return None;
    }
    if pos > 0 && !points[c[pos - 1]].precedes(&points[e]) {
        return None;
    }
    if pos < c.len() && !points[e].precedes(&points[c[pos]]) {
        return None;
    }
    Some(pos)
}

/// Partitions `[t]^n` into exactly `alpha` chains: a minimum chain cover
/// from a maximum matching on the comparability relation, then rebalancing
/// moves that hand an element of the longest possible donor to the
/// shortest chain until every chain has length at least
/// `|P|/(2 alpha) - 1/2`. Whether the bound was reached is reported.
pub fn uniform_chain_partition(shape: &GridShape, point_limit: u128) -> Result<ChainPartition> {
    let volume = shape.enumerable(point_limit)?;
    let points: Vec<Point> = shape.points().collect();
    let adj: Vec<Vec<usize>> = (0..volume)
        .map(|u| {
            (0..volume)
                .filter(|&v| v != u && points[u].precedes(&points[v]))
                .collect()
        })
        .collect();
    let mate = hopcroft_karp(&adj, volume);
    let mut has_pred = vec![false; volume];
    for m in mate.iter().flatten() {
        has_pred[*m] = true;
    }
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for start in 0..volume {
        if has_pred[start] {
            continue;
        }
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(next) = mate[cur] {
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    let width = chains.len();
    // |P| - alpha <= 2 alpha len  <=>  len >= |P|/(2 alpha) - 1/2
    let meets = |len: usize| 2 * width * len + width >= volume;
    let mut moves = 0usize;
    loop {
        let (short, short_len) = chains
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.len()))
            .min_by_key(|&(i, len)| (len, i))
            .expect("at least one chain");
        if meets(short_len) {
            break;
        }
        let mut donors: Vec<usize> = (0..chains.len())
            .filter(|&i| chains[i].len() >= short_len + 2)
            .collect();
        donors.sort_by_key(|&i| (std::cmp::Reverse(chains[i].len()), i));
        let mut moved = false;
        'donors: for d in donors {
            // endpoints first, then interior elements
            let len = chains[d].len();
            let mut order: Vec<usize> = vec![0, len - 1];
            order.extend(1..len - 1);
            for pos in order {
                let e = chains[d][pos];
                if let Some(at) = insertion_point(&points, &chains[short], e) {
                    chains[d].remove(pos);
                    chains[short].insert(at, e);
                    moves += 1;
                    moved = true;
                    break 'donors;
                }
            }
        }
        if !moved {
            break;
        }
    }
    let min_length = chains.iter().map(Vec::len).min().unwrap_or(0);
    Ok(ChainPartition {
        t: shape.t(),
        n: shape.n(),
        chains: chains
            .iter()
            .map(|c| c.iter().map(|&i| points[i].clone()).collect())
            .collect(),
        width,
        min_length,
        length_bound: BigRational::new(BigInt::from(volume), BigInt::from(2 * width)) - BigRational::new(1.into(), 2.into()),
        meets_bound: meets(min_length),
        moves,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Rectangle {
    pub first: Vec<Point>,
    pub second: Vec<Point>,
}

impl Rectangle {
    pub fn sides(&self) -> (usize, usize) {
        (self.first.len(), self.second.len())
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.first.iter().flat_map(move |a| {
            self.second.iter().map(move |b| {
                let mut c = a.coords().to_vec();
                c.extend_from_slice(b.coords());
                Point::new(c)
            })
        })
    }

    /// The induced order equals the product order of the two index chains.
    pub fn is_grid(&self) -> bool {
        let pts: Vec<(usize, usize, Point)> = (0..self.first.len())
            .flat_map(|i| (0..self.second.len()).map(move |j| (i, j)))
            .zip(self.points())
            .map(|((i, j), p)| (i, j, p))
            .collect();
        pts.iter().all(|(i1, j1, p1)| {
            pts.iter()
                .all(|(i2, j2, p2)| p1.precedes(p2) == (i1 <= i2 && j1 <= j2))
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RectanglePartition {
    pub t: usize,
    pub n: usize,
    pub split: (usize, usize),
    pub rectangles: Vec<Rectangle>,
    pub side_lengths: Vec<(usize, usize)>,
    pub count: usize,
    pub u: usize,
    pub covered: usize,
    pub disjoint_cover: bool,
    pub all_grids: bool,
    /// Every subdivided piece lies in `[U/2 - 1/2, U]`, `U = t^n_i / w_i`.
    pub piece_sizes_ok: bool,
    pub chain_bounds_met: bool,
}

/// Splits a chain of length `len` into near-equal pieces of length at most `cap`.
fn subdivide(chain: &[Point], cap: &BigRational) -> Vec<Vec<Point>> {
    let len = chain.len();
    if BigRational::from_integer(len.into()) <= *cap {
        return vec![chain.to_vec()];
    }
    let floor_cap = exact::floor_ratio(cap).to_string().parse::<usize>().unwrap_or(1).max(1);
    let pieces = len.div_ceil(floor_cap);
    let (base, extra) = (len / pieces, len % pieces);
    let mut out = Vec::with_capacity(pieces);
    let mut at = 0;
    for p in 0..pieces {
        let size = base + usize::from(p < extra);
        out.push(chain[at..at + size].to_vec());
        at += size;
    }
    out
}

/// Partitions `[t]^n` into rectangles `C x C'` built from chain partitions
/// of `[t]^n1` and `[t]^n2`, `n1 = floor(n/2)` unless overridden.
pub fn rectangle_partition(shape: &GridShape, half_split: Option<usize>, point_limit: u128) -> Result<RectanglePartition> {
    let n = shape.n();
    if n < 2 {
        return Err(Error::Precondition("rectangle partitions need n >= 2".into()));
    }
    let n1 = half_split.unwrap_or(n / 2);
    if n1 == 0 || n1 >= n {
        return Err(Error::Invalid(format!("half split {n1} must lie in 1..{n}")));
    }
    let t = shape.t();
    let halves = [GridShape::new(t, n1)?, GridShape::new(t, n - n1)?];
    let mut piece_sizes_ok = true;
    let mut chain_bounds_met = true;
    let mut pieces: Vec<Vec<Vec<Point>>> = Vec::new();
    for half in &halves {
        let partition = uniform_chain_partition(half, point_limit)?;
        chain_bounds_met &= partition.meets_bound;
        let cap = BigRational::new(BigInt::from(half.volume()), BigInt::from(partition.width));
        let low = &cap / BigRational::from_integer(2.into()) - BigRational::new(1.into(), 2.into());
        let mut list = Vec::new();
        for chain in &partition.chains {
            for piece in subdivide(chain, &cap) {
                let len = BigRational::from_integer(piece.len().into());
                piece_sizes_ok &= len <= cap && len >= low;
                list.push(piece);
            }
        }
        pieces.push(list);
    }
    let mut rectangles = Vec::new();
    for a in &pieces[0] {
        for b in &pieces[1] {
            rectangles.push(Rectangle {
                first: a.clone(),
                second: b.clone(),
            });
        }
    }
    let volume = shape.enumerable(u128::MAX)?;
    let mut seen = vec![0u32; volume];
    for r in &rectangles {
        for p in r.points() {
            seen[shape.index(&p)] += 1;
        }
    }
    let side_lengths: Vec<(usize, usize)> = rectangles.iter().map(Rectangle::sides).collect();
    let max_side = side_lengths.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    Ok(RectanglePartition {
        t,
        n,
        split: (n1, n - n1),
        count: rectangles.len(),
        u: 3 * max_side,
        covered: side_lengths.iter().map(|&(a, b)| a * b).sum(),
        disjoint_cover: seen.iter().all(|&c| c == 1),
        all_grids: rectangles.iter().all(Rectangle::is_grid),
        side_lengths,
        rectangles,
        piece_sizes_ok,
        chain_bounds_met,
    })
}

/// Number of antichains of `[a] x [b]`: `C(a+b, a)`.
pub fn rectangle_antichain_count(a: u64, b: u64) -> Result<BigUint> {
    if a == 0 || b == 0 {
        return Err(Error::Precondition("rectangle sides must be positive".into()));
    }
    Ok(binomial(a + b, a))
}

#[derive(Debug, Clone, Serialize)]
pub struct RectangleBoundReport {
    pub a: u64,
    pub b: u64,
    pub u: u64,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub beta: BigRational,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub count: BigUint,
    pub total_bound_holds: bool,
    pub size: u64,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub size_count: BigUint,
    pub log2_size_count: f64,
    pub log2_size_bound: f64,
    pub size_bound_holds: bool,
}

/// Checks `A([a]x[b]) <= 4^u` and that antichains of size `floor(beta u)`
/// number at most `2^(4 log2(1/beta) beta u)`.
pub fn rectangle_bound_check(a: u64, b: u64, u: u64, beta: &BigRational) -> Result<RectangleBoundReport> {
    if 3 * a > u || 3 * b > u {
        return Err(Error::Precondition(format!("sides {a}, {b} exceed u/3 for u = {u}")));
    }
    if beta.is_negative() || *beta > BigRational::new(1.into(), 3.into()) {
        return Err(Error::Precondition("beta must lie in [0, 1/3]".into()));
    }
    let count = rectangle_antichain_count(a, b)?;
    let total_bound_holds = count <= BigUint::from(4u32).pow(u as u32);
    let size_r = beta * BigRational::from_integer(BigInt::from(u));
    let size: u64 = exact::floor_ratio(&size_r).to_string().parse().expect("small");
    let size_count = binomial(a, size) * binomial(b, size);
    let beta_f = exact::ratio_to_f64(beta);
    let log2_size_bound = if beta_f == 0.0 {
        0.0
    } else {
        4.0 * (1.0 / beta_f).log2() * beta_f * u as f64
    };
    let log2_size_count = log2_big(&size_count);
    Ok(RectangleBoundReport {
        a,
        b,
        u,
        beta: beta.clone(),
        count,
        total_bound_holds,
        size,
        size_bound_holds: log2_size_count <= log2_size_bound + 1e-9,
        size_count,
        log2_size_count,
        log2_size_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RectangleSaturation {
    pub t: usize,
    pub size: usize,
    pub delta: usize,
    /// True when `|A| < 16t` and only `Delta(A) >= 1` is asserted.
    pub direct_branch: bool,
    pub k: Option<usize>,
    pub s: Option<usize>,
    pub witness: Option<Point>,
    /// `|B \ T_v|` for the witness `x ∈ T_v`.
    pub witness_degree: Option<usize>,
    pub holds: bool,
}

/// Replays the pigeonhole argument for `A ⊆ [t]^2`: blocks of side `k`,
/// diagonal block classes, the heaviest class `B`, and a witness in its
/// lightest non-empty block, which is comparable to all of `B` outside its
/// block. Asserts the witness degree is at least `k^2/2`.
pub fn check_rectangle_saturation(t: usize, a: &VertexSet) -> Result<RectangleSaturation> {
    if a.shape().n() != 2 || a.shape().t() != t {
        return Err(Error::Precondition(format!("A must lie in [{t}]^2")));
    }
    let size = a.len();
    if size <= t {
        return Err(Error::Precondition(format!("|A| = {size} must exceed t = {t}")));
    }
    let delta = comp_max_degree(a);
    if size < 16 * t {
        return Ok(RectangleSaturation {
            t,
            size,
            delta,
            direct_branch: true,
            k: None,
            s: None,
            witness: None,
            witness_degree: None,
            holds: delta >= 1,
        });
    }
    let k = size / (16 * t);
    let s = t.div_ceil(k);
    let block = |p: &Point| (p.coords()[0] as usize / k, p.coords()[1] as usize / k);
    // class index j - i + s - 1 in 0..2s-1
    let mut class_sizes = vec![0usize; 2 * s - 1];
    for p in a.points() {
        let (i, j) = block(&p);
        class_sizes[j + s - 1 - i] += 1;
    }
    let class = (0..class_sizes.len())
        .max_by_key(|&c| (class_sizes[c], std::cmp::Reverse(c)))
        .expect("classes");
    let b: Vec<Point> = a
        .points()
        .filter(|p| {
            let (i, j) = block(p);
            j + s - 1 - i == class
        })
        .collect();
    let mut per_block: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for p in &b {
        *per_block.entry(block(p)).or_default() += 1;
    }
    let (&lightest, _) = per_block
        .iter()
        .min_by_key(|&(key, &c)| (c, *key))
        .expect("B is non-empty");
    let witness = b.iter().find(|p| block(p) == lightest).cloned().expect("block member");
    let outside = b.iter().filter(|p| block(p) != lightest).collect::<Vec<_>>();
    debug_assert!(outside.iter().all(|p| comparable(p, &witness)));
    let witness_degree = outside.iter().filter(|p| comparable(p, &witness)).count();
    Ok(RectangleSaturation {
        t,
        size,
        delta,
        direct_branch: false,
        k: Some(k),
        s: Some(s),
        witness: Some(witness),
        witness_degree: Some(witness_degree),
        holds: 2 * witness_degree >= k * k && delta >= witness_degree,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongSaturation {
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub lym: BigRational,
    pub delta: usize,
    pub k: usize,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub slack: BigRational,
    /// `Delta(A) k! (k + delta) W^k`, compared against the slack.
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub lhs: BigRational,
    pub holds: bool,
}

/// Checks `Delta(A) >= slack W^-k / (k! (k + slack))` exactly, for `A`
/// inside the good levels with LYM weight at least `k + slack`.
pub fn check_strong_saturation(
    a: &VertexSet,
    k: usize,
    slack: &BigRational,
    w: &BigRational,
    exponent: Exponent,
) -> Result<StrongSaturation> {
    let shape = a.shape();
    let good = grid::good_levels(shape, exponent);
    if let Some(p) = a.points().find(|p| !good.contains(&p.rank())) {
        return Err(Error::Precondition(format!("{p} is not on a good level")));
    }
    if !w.is_positive() || slack.is_negative() {
        return Err(Error::Precondition("W must be positive and the slack non-negative".into()));
    }
    let lym = grid::lym_weight(&grid::level_sizes(shape), a);
    let need = BigRational::from_integer(BigInt::from(k)) + slack;
    if lym < need {
        return Err(Error::Precondition(format!(
            "LYM weight {} is below k + slack = {}",
            exact::ratio_string(&lym),
            exact::ratio_string(&need)
        )));
    }
    let delta = comp_max_degree(a);
    let lhs = BigRational::from_integer(BigInt::from(delta))
        * BigRational::from_integer(BigInt::from(exact::factorial(k as u64)))
        * &need
        * num_traits::pow(w.clone(), k);
    Ok(StrongSaturation {
        holds: lhs >= *slack,
        lym,
        delta,
        k,
        slack: slack.clone(),
        lhs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakSaturation {
    pub size: usize,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub width: BigUint,
    pub delta: usize,
    pub ratio: f64,
    /// `Delta(A) (alpha/|A|)^2`.
    pub scaled_delta: f64,
    pub holds: bool,
}

/// For `|A| > alpha`: `Delta(A) >= 1`, with the scaled degree recorded.
pub fn check_weak_saturation(a: &VertexSet) -> Result<WeakSaturation> {
    let width = grid::width(a.shape());
    let size = a.len();
    if BigUint::from(size) <= width {
        return Err(Error::Precondition(format!("|A| = {size} must exceed the width {width}")));
    }
    let delta = comp_max_degree(a);
    let ratio = size as f64 / exact::ratio_to_f64(&exact::big_ratio(&width, &BigUint::one()));
    Ok(WeakSaturation {
        size,
        delta,
        ratio,
        scaled_delta: delta as f64 / (ratio * ratio),
        holds: delta >= 1,
        width,
    })
}
