//! The regular chain cover induced by a flow: a maximal chain is grown from
//! the bottom by following up-edges with probability equal to their weight.
//! Since every point below the top sends total weight 1 upward, the chain
//! law is `phi(C) = prod f(x_i x_(i+1))`, and the in-sums `N(i)/N(i+1)`
//! make every point of level `i` appear with probability `1/N(i)`.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::exact::{self, big_ratio, ratio_to_f64};
use crate::flows::{stride, FlowSource, McEstimate, Snmf};
use crate::grid::{self, Exponent, GridShape, Point, VertexSet};
use crate::rng;

/// Largest order interval the mass dynamic programs will fill.
pub const DEFAULT_BOX_GUARD: u128 = 1_000_000;

/// A skipless chain: consecutive points are related by a cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Chain {
    points: Vec<Point>,
}

impl Chain {
    pub fn new(shape: &GridShape, points: Vec<Point>) -> Result<Chain> {
        if points.is_empty() {
            return Err(Error::Invalid("empty chain".into()));
        }
        for p in &points {
            shape.check(p)?;
        }
        for w in points.windows(2) {
            if cover_axis(&w[0], &w[1]).is_none() {
                return Err(Error::Invalid(format!("{} is not covered by {}", w[0], w[1])));
            }
        }
        Ok(Chain { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        let r = p.rank();
        let first = self.points[0].rank();
        r >= first && self.points.get(r - first) == Some(p)
    }
}

/// The axis along which `y` covers `x`, if it does.
pub fn cover_axis(x: &Point, y: &Point) -> Option<usize> {
    let mut axis = None;
    for (i, (&a, &b)) in x.coords().iter().zip(y.coords()).enumerate() {
        if a == b {
            continue;
        }
        if b != a + 1 || axis.is_some() {
            return None;
        }
        axis = Some(i);
    }
    axis
}

/// `phi(C)`: the product of edge weights along the chain.
pub fn chain_mass<F: FlowSource>(flow: &F, c: &Chain) -> BigRational {
    c.points
        .windows(2)
        .map(|w| flow.weight(&w[0], cover_axis(&w[0], &w[1]).expect("validated chain")))
        .fold(BigRational::one(), |acc, w| acc * w)
}

/// Forward mass from `x` to every point of the box `[x, y]`, in the box's
/// own lexicographic order.
fn box_masses<F: FlowSource>(flow: &F, x: &Point, y: &Point, box_guard: u128) -> Result<(Vec<u32>, Vec<BigRational>)> {
    let sides: Vec<u32> = x.coords().iter().zip(y.coords()).map(|(&a, &b)| b - a + 1).collect();
    let volume: u128 = sides.iter().map(|&s| s as u128).product();
    guard("order interval volume", volume, box_guard)?;
    let n = sides.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sides[i + 1] as usize;
    }
    let mut mass = vec![BigRational::zero(); volume as usize];
    mass[0] = BigRational::one();
    let mut offset = vec![0u32; n];
    for idx in 0..volume as usize {
        if !mass[idx].is_zero() {
            let z = Point::new(x.coords().iter().zip(&offset).map(|(&a, &o)| a + o).collect());
            for (axis, w) in flow.out_weights(&z) {
                if offset[axis] + 1 < sides[axis] && !w.is_zero() {
                    let add = &mass[idx] * w;
                    mass[idx + strides[axis]] += add;
                }
            }
        }
        // advance the mixed-radix counter
        for i in (0..n).rev() {
            offset[i] += 1;
            if offset[i] < sides[i] {
                break;
            }
            offset[i] = 0;
        }
    }
    Ok((sides, mass))
}

/// `phi([x, y])`: total mass of skipless chains from `x` to `y`.
pub fn interval_mass<F: FlowSource>(flow: &F, x: &Point, y: &Point) -> Result<BigRational> {
    flow.shape().check(x)?;
    flow.shape().check(y)?;
    if !x.precedes(y) {
        return Err(Error::Precondition(format!("{x} does not precede {y}")));
    }
    let (_, mass) = box_masses(flow, x, y, DEFAULT_BOX_GUARD)?;
    Ok(mass.last().cloned().expect("non-empty box"))
}

/// `phi([0, x])` for every point, indexed like [`GridShape::index`].
pub fn mass_from_bottom<F: FlowSource>(flow: &F, point_limit: u128) -> Result<Vec<BigRational>> {
    let shape = *flow.shape();
    let volume = shape.enumerable(point_limit)?;
    let mut mass = vec![BigRational::zero(); volume];
    mass[0] = BigRational::one();
    for (idx, x) in shape.points().enumerate() {
        for (axis, w) in flow.out_weights(&x) {
            let add = &mass[idx] * w;
            mass[idx + stride(&shape, axis)] += add;
        }
    }
    Ok(mass)
}

/// `P(x, y ∈ C) = phi([0,x]) phi([x,y]) phi([y,1]) = phi([x,y]) / N(rank x)`.
pub fn pair_probability<F: FlowSource>(flow: &F, x: &Point, y: &Point) -> Result<BigRational> {
    let inner = interval_mass(flow, x, y)?;
    let n_x = grid::level_sizes(flow.shape()).size(x.rank()).clone();
    Ok(inner / BigRational::from_integer(BigInt::from(n_x)))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairBoundViolation {
    pub x: Point,
    pub y: Point,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub probability: BigRational,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub bound: BigRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairBoundReport {
    pub t: usize,
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub w: BigRational,
    pub pairs_checked: u64,
    /// Largest `P(x,y ∈ C) / bound` seen.
    pub max_ratio: f64,
    pub violations: Vec<PairBoundViolation>,
    pub pass: bool,
}

/// Checks `P(x,y ∈ C) <= k! W^k / N(rank x)` for every pair of good points
/// `x ⪯ y` with `rank y - rank x >= k`, exactly.
pub fn pair_bound_check<F: FlowSource>(
    flow: &F,
    k: usize,
    w: &BigRational,
    exponent: Exponent,
    point_limit: u128,
) -> Result<PairBoundReport> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let shape = *flow.shape();
    shape.enumerable(point_limit)?;
    let profile = grid::level_sizes(&shape);
    let good = grid::good_levels(&shape, exponent);
    let top = shape.top_point();
    let numerator = BigRational::from_integer(BigInt::from(exact::factorial(k as u64))) * num_traits::pow(w.clone(), k);
    let mut pairs = 0u64;
    let mut max_ratio = 0f64;
    let mut violations = Vec::new();
    for x in shape.points() {
        let rx = x.rank();
        if !good.contains(&rx) {
            continue;
        }
        let bound = &numerator / BigRational::from_integer(BigInt::from(profile.size(rx).clone()));
        let n_x = BigRational::from_integer(BigInt::from(profile.size(rx).clone()));
        let (sides, mass) = box_masses(flow, &x, &top, point_limit)?;
        let mut offset = vec![0u32; sides.len()];
        for m in &mass {
            let dist: usize = offset.iter().map(|&o| o as usize).sum();
            if dist >= k && good.contains(&(rx + dist)) {
                pairs += 1;
                let p = m / &n_x;
                if bound.is_zero() {
                    if !p.is_zero() {
                        max_ratio = f64::INFINITY;
                    }
                } else {
                    max_ratio = max_ratio.max(ratio_to_f64(&(&p / &bound)));
                }
                if p > bound {
                    let y = Point::new(x.coords().iter().zip(&offset).map(|(&a, &o)| a + o).collect());
                    violations.push(PairBoundViolation {
                        x: x.clone(),
                        y,
                        probability: p,
                        bound: bound.clone(),
                    });
                }
            }
            for i in (0..sides.len()).rev() {
                offset[i] += 1;
                if offset[i] < sides[i] {
                    break;
                }
                offset[i] = 0;
            }
        }
    }
    Ok(PairBoundReport {
        t: shape.t(),
        n: shape.n(),
        k,
        w: w.clone(),
        pairs_checked: pairs,
        max_ratio,
        pass: violations.is_empty(),
        violations,
    })
}

/// `E|C ∩ A|` from the exact per-point marginals `phi([0,x])`.
pub fn expected_intersection<F: FlowSource>(flow: &F, set: &VertexSet, point_limit: u128) -> Result<BigRational> {
    let mass = mass_from_bottom(flow, point_limit)?;
    Ok(set.indices().map(|i| mass[i].clone()).fold(BigRational::zero(), |a, b| a + b))
}

/// Draws maximal chains with law `phi`, caching `f64` weights per point.
pub struct ChainSampler<'a, F: FlowSource> {
    flow: &'a F,
    cache: RefCell<HashMap<usize, Vec<(usize, f64)>>>,
}

impl<'a, F: FlowSource> ChainSampler<'a, F> {
    pub fn new(flow: &'a F) -> Self {
        ChainSampler {
            flow,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn step<R: Rng>(&self, x: &Point, rng: &mut R) -> usize {
        let shape = self.flow.shape();
        let idx = shape.index(x);
        let mut cache = self.cache.borrow_mut();
        let options = cache.entry(idx).or_insert_with(|| {
            self.flow
                .out_weights(x)
                .into_iter()
                .map(|(axis, w)| (axis, ratio_to_f64(&w)))
                .filter(|&(_, w)| w > 0.0)
                .collect()
        });
        let mut u: f64 = rng.random::<f64>();
        for &(axis, w) in options.iter() {
            if u < w {
                return axis;
            }
            u -= w;
        }
        options.last().expect("a point below the top has an up-edge").0
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Chain {
        let shape = self.flow.shape();
        let mut x = shape.bottom();
        let mut points = Vec::with_capacity(shape.num_levels());
        points.push(x.clone());
        for _ in 0..shape.top() {
            let axis = self.step(&x, rng);
            x = x.step_up(axis);
            points.push(x.clone());
        }
        Chain { points }
    }

    /// Monte Carlo estimate of `E|C ∩ A|`.
    pub fn mean_intersection(&self, set: &VertexSet, samples: u64, seed: u64) -> McEstimate {
        let mut rng = rng::stream(seed, 0);
        let (mut sum, mut sum_sq) = (0f64, 0f64);
        for _ in 0..samples {
            let c = self.sample(&mut rng);
            let hits = c.points.iter().filter(|p| set.contains(p)).count() as f64;
            sum += hits;
            sum_sq += hits * hits;
        }
        let count = samples as f64;
        let mean = sum / count;
        let var = ((sum_sq - count * mean * mean) / (count - 1.0).max(1.0)).max(0.0);
        McEstimate {
            mean,
            std_error: (var / count).sqrt(),
            samples,
        }
    }
}

/// One maximal chain of the structured flow on `shape`, drawn with `seed`.
pub fn sample_chain(shape: &GridShape, seed: u64) -> Chain {
    let flow = Snmf::new(*shape);
    ChainSampler::new(&flow).sample(&mut rng::stream(seed, 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalRow {
    pub level: usize,
    pub expected: f64,
    /// Largest deviation of a point's empirical frequency from `1/N(level)`,
    /// in units of its binomial standard error.
    pub max_z: f64,
}

/// Empirical per-point marginals of `samples` chains against `1/N(i)`.
pub fn marginal_check<F: FlowSource>(flow: &F, samples: u64, seed: u64, point_limit: u128) -> Result<Vec<MarginalRow>> {
    let shape = *flow.shape();
    let volume = shape.enumerable(point_limit)?;
    let sampler = ChainSampler::new(flow);
    let mut hits = vec![0u64; volume];
    let mut rng = rng::stream(seed, 0);
    for _ in 0..samples {
        for p in sampler.sample(&mut rng).points() {
            hits[shape.index(p)] += 1;
        }
    }
    let profile = grid::level_sizes(&shape);
    let mut rows: Vec<MarginalRow> = (0..shape.num_levels())
        .map(|level| MarginalRow {
            level,
            expected: ratio_to_f64(&big_ratio(&1u32.into(), profile.size(level))),
            max_z: 0.0,
        })
        .collect();
    for (idx, &h) in hits.iter().enumerate() {
        let row = &mut rows[shape.point(idx).rank()];
        let p = row.expected;
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        let freq = h as f64 / samples as f64;
        let z = if se > 0.0 { (freq - p).abs() / se } else { (freq - p).abs() * f64::INFINITY };
        if z > row.max_z {
            row.max_z = z;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio_from_u64 as q;
    use crate::flows::AveragedFlow;

    fn shape(t: usize, n: usize) -> GridShape {
        GridShape::new(t, n).unwrap()
    }

    fn pt(c: &[u32]) -> Point {
        Point::new(c.to_vec())
    }

    #[test]
    fn chain_masses() {
        let s = shape(3, 2);
        let f = Snmf::new(s);
        assert_eq!(chain_mass(&f, &Chain::new(&s, vec![pt(&[1, 1])]).unwrap()), q(1, 1));
        let s = shape(2, 2);
        let f = Snmf::new(s);
        let c = Chain::new(&s, vec![pt(&[0, 0]), pt(&[1, 0]), pt(&[1, 1])]).unwrap();
        assert_eq!(chain_mass(&f, &c), q(1, 2));
        let s = shape(4, 2);
        let f = Snmf::new(s);
        let c = Chain::new(&s, vec![pt(&[0, 0]), pt(&[1, 0]), pt(&[2, 0])]).unwrap();
        assert_eq!(chain_mass(&f, &c), q(1, 3));
        assert!(Chain::new(&s, vec![pt(&[0, 0]), pt(&[1, 1])]).is_err());
        assert!(Chain::new(&s, vec![pt(&[0, 0]), pt(&[2, 0])]).is_err());
    }

    #[test]
    fn interval_identities() {
        let s = shape(3, 3);
        let f = Snmf::new(s);
        let profile = grid::level_sizes(&s);
        for x in s.points() {
            let below = interval_mass(&f, &s.bottom(), &x).unwrap();
            assert_eq!(below, big_ratio(&1u32.into(), profile.size(x.rank())));
            assert_eq!(interval_mass(&f, &x, &s.top_point()).unwrap(), q(1, 1));
            assert_eq!(interval_mass(&f, &x, &x).unwrap(), q(1, 1));
        }
        assert!(interval_mass(&f, &pt(&[1, 0, 0]), &pt(&[0, 1, 0])).is_err());
    }

    #[test]
    fn pair_probabilities() {
        let s = shape(2, 2);
        let f = Snmf::new(s);
        assert_eq!(pair_probability(&f, &s.bottom(), &s.top_point()).unwrap(), q(1, 1));
        assert_eq!(pair_probability(&f, &pt(&[0, 0]), &pt(&[1, 0])).unwrap(), q(1, 2));
        // [3]^2: two chains from (0,0) to (1,1)
        let s = shape(3, 2);
        let f = Snmf::new(s);
        let x = pt(&[0, 0]);
        let y = pt(&[1, 1]);
        let via = |m: &[u32]| chain_mass(&f, &Chain::new(&s, vec![x.clone(), pt(m), y.clone()]).unwrap());
        assert_eq!(pair_probability(&f, &x, &y).unwrap(), via(&[1, 0]) + via(&[0, 1]));
    }

    #[test]
    fn marginals_from_bottom() {
        let s = shape(4, 3);
        let f = Snmf::new(s);
        let profile = grid::level_sizes(&s);
        let mass = mass_from_bottom(&f, 1 << 20).unwrap();
        for (idx, m) in mass.iter().enumerate() {
            assert_eq!(m, &big_ratio(&1u32.into(), profile.size(s.point(idx).rank())));
        }
    }

    #[test]
    fn sampled_chains_are_maximal() {
        let s = shape(3, 4);
        let c = sample_chain(&s, 5);
        assert_eq!(c.len(), s.num_levels());
        assert_eq!(c.points()[0], s.bottom());
        assert_eq!(c.points().last().unwrap(), &s.top_point());
        assert_eq!(sample_chain(&s, 5), c);
        let line = shape(5, 1);
        let c = sample_chain(&line, 9);
        assert_eq!(c.points().iter().map(|p| p.coords()[0]).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn expected_intersection_is_lym_weight() {
        let s = shape(3, 3);
        let f = Snmf::new(s);
        let set = VertexSet::level(s, 2).union(&VertexSet::level(s, 4));
        let profile = grid::level_sizes(&s);
        assert_eq!(expected_intersection(&f, &set, 1 << 20).unwrap(), grid::lym_weight(&profile, &set));
        let est = ChainSampler::new(&f).mean_intersection(&set, 2000, 3);
        assert!((est.mean - 2.0).abs() < 1e-12, "two full levels are always hit exactly twice");
    }

    #[test]
    fn pair_bound_on_small_cube() {
        let s = shape(2, 3);
        let f = AveragedFlow::new(s).unwrap();
        let w = crate::flows::max_good_weight(&s, crate::flows::AveragingMode::Exact, Exponent::default())
            .unwrap()
            .exact
            .unwrap();
        let report = pair_bound_check(&f, 1, &w, Exponent::default(), 1 << 16).unwrap();
        assert!(report.pass);
        assert!(report.pairs_checked > 0);
    }
}
