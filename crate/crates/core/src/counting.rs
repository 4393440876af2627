//! Exact antichain counts of `[t]^n`, closed forms, size-stratified counts,
//! the two-level lower-bound construction, and bound reports.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::seq::{IndexedRandom, SliceRandom};
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::exact::{self, binomial, log2_big};
use crate::grid::{self, GridShape, Point, VertexSet};
use crate::rng;

/// Largest ground set the enumeration engines accept.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 32;
/// Largest number of transfer-matrix states.
pub const DEFAULT_STATE_LIMIT: u128 = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Depth-first enumeration of downsets.
    Enumeration,
    /// Multichains of downsets of `[t]^(n-1)`.
    Transfer,
    /// `t+1`, `C(2t,t)` or the MacMahon product.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountLimits {
    pub enumeration: u128,
    pub states: u128,
}

impl Default for CountLimits {
    fn default() -> Self {
        CountLimits {
            enumeration: DEFAULT_ENUMERATION_LIMIT,
            states: DEFAULT_STATE_LIMIT,
        }
    }
}

/// Points of `[t]^d` (including `d = 0`) with the bitmask of lower covers
/// of each point, in lexicographic order.
fn lower_cover_masks(t: usize, d: usize) -> Vec<u64> {
    let volume = t.pow(d as u32);
    (0..volume)
        .map(|idx| {
            let mut mask = 0u64;
            let mut stride = 1usize;
            let mut rest = idx;
            for _ in 0..d {
                if rest % t > 0 {
                    mask |= 1 << (idx - stride);
                }
                rest /= t;
                stride *= t;
            }
            mask
        })
        .collect()
}

/// Calls `visit` on every downset of a poset given by its lower-cover
/// masks in a linear extension. Stops early once `visit` returns `false`.
fn for_each_downset(covers: &[u64], visit: &mut dyn FnMut(u64) -> bool) {
    fn go(i: usize, set: u64, covers: &[u64], visit: &mut dyn FnMut(u64) -> bool) -> bool {
        if i == covers.len() {
            return visit(set);
        }
        if !go(i + 1, set, covers, visit) {
            return false;
        }
        if covers[i] & !set == 0 {
            return go(i + 1, set | 1 << i, covers, visit);
        }
        true
    }
    go(0, 0, covers, visit);
}

/// Number of downsets by enumeration; requires `t^n <= limit <= 64`.
pub fn count_by_enumeration(shape: &GridShape, limit: u128) -> Result<BigUint> {
    guard("points for enumeration", shape.volume(), limit.min(64))?;
    let covers = lower_cover_masks(shape.t(), shape.n());
    let mut count = 0u64;
    for_each_downset(&covers, &mut |_| {
        count += 1;
        true
    });
    Ok(BigUint::from(count))
}

/// Number of downsets of `[t]^n` as multichains `D_0 ⊇ ... ⊇ D_(t-1)` of
/// downsets of `[t]^(n-1)` (slices along the last coordinate).
pub fn count_by_transfer(shape: &GridShape, state_limit: u128) -> Result<BigUint> {
    let (t, d) = (shape.t(), shape.n() - 1);
    guard("points of the slice poset", (t as u128).pow(d as u32), 64)?;
    let covers = lower_cover_masks(t, d);
    let mut states: Vec<u64> = Vec::new();
    let mut overflow = false;
    for_each_downset(&covers, &mut |set| {
        states.push(set);
        if states.len() as u128 > state_limit {
            overflow = true;
            return false;
        }
        true
    });
    if overflow {
        return Err(Error::Guard {
            what: "transfer-matrix states",
            actual: states.len() as u128,
            limit: state_limit,
        });
    }
    // ways[s] = number of chains of the current length ending in state s
    let mut ways: Vec<BigUint> = vec![BigUint::one(); states.len()];
    for _ in 1..t {
        ways = states
            .iter()
            .map(|&upper| {
                states
                    .iter()
                    .zip(&ways)
                    .filter(|(&lower, _)| lower & !upper == 0)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
    }
    Ok(ways.into_iter().sum())
}

/// `A(t, 2) = C(2t, t)`.
pub fn count_grid2(t: u64) -> BigUint {
    binomial(2 * t, t)
}

/// `prod_{1<=i,j,k<=t} (i+j+k-1)/(i+j+k-2)`, which equals `A(t, 3)`.
pub fn count_macmahon(t: u64) -> BigUint {
    let mut acc = BigRational::one();
    for i in 1..=t {
        for j in 1..=t {
            for k in 1..=t {
                let s = i + j + k;
                acc *= BigRational::new(BigInt::from(s - 1), BigInt::from(s - 2));
            }
        }
    }
    debug_assert!(acc.is_integer());
    acc.to_integer().to_biguint().expect("positive product")
}

/// `A(t, n)` with the engine chosen automatically: enumeration when the
/// grid is small enough, otherwise the transfer matrix.
pub fn count_antichains_exact(shape: &GridShape, limits: CountLimits) -> Result<(BigUint, Engine)> {
    if shape.volume() <= limits.enumeration.min(64) {
        return Ok((count_by_enumeration(shape, limits.enumeration)?, Engine::Enumeration));
    }
    Ok((count_by_transfer(shape, limits.states)?, Engine::Transfer))
}

/// `A(t, n)` from a closed form when one applies (`n <= 3`).
pub fn count_closed_form(shape: &GridShape) -> Option<BigUint> {
    let t = shape.t() as u64;
    match shape.n() {
        1 => Some(BigUint::from(t + 1)),
        2 => Some(count_grid2(t)),
        3 => Some(count_macmahon(t)),
        _ => None,
    }
}

/// Counts antichains of `[t]^n` by size; entry `s` is the number of
/// antichains with exactly `s` elements.
pub fn antichain_size_profile(shape: &GridShape, limit: u128) -> Result<Vec<BigUint>> {
    guard("points for enumeration", shape.volume(), limit.min(64))?;
    let points: Vec<Point> = shape.points().collect();
    let comparable_mask: Vec<u64> = points
        .iter()
        .map(|p| {
            points
                .iter()
                .enumerate()
                .filter(|(_, q)| *q != p && grid::comparable(p, q))
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let mut by_size = vec![0u64; points.len() + 1];
    fn go(i: usize, blocked: u64, size: usize, masks: &[u64], by_size: &mut [u64]) {
        if i == masks.len() {
            by_size[size] += 1;
            return;
        }
        go(i + 1, blocked, size, masks, by_size);
        if blocked >> i & 1 == 0 {
            go(i + 1, blocked | masks[i], size + 1, masks, by_size);
        }
    }
    go(0, 0, 0, &comparable_mask, &mut by_size);
    while by_size.len() > 1 && by_size.last() == Some(&0) {
        by_size.pop();
    }
    Ok(by_size.into_iter().map(BigUint::from).collect())
}

/// Number of antichains with at most `max_size` elements.
pub fn count_antichains_upto(shape: &GridShape, max_size: usize, limit: u128) -> Result<BigUint> {
    Ok(antichain_size_profile(shape, limit)?.into_iter().take(max_size + 1).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBound {
    pub t: usize,
    pub n: usize,
    /// Number of points taken from level `m + 1`.
    pub k: u64,
    /// `k = 0`: the construction degenerates to all subsets of level `m`.
    pub vacuous: bool,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub middle: BigUint,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub above: BigUint,
    pub log2_value: f64,
    /// `C(N(m+1), k) 2^(N(m) - kn)` when small enough to print.
    #[serde(serialize_with = "exact::serde_str::biguint_opt")]
    pub exact: Option<BigUint>,
    /// Sampled `A ∪ B` sets confirmed to be antichains.
    pub independence_checked: usize,
}

/// Largest exponent for which the construction value is kept exactly.
const EXACT_BITS: u64 = 1 << 16;

/// Antichains `A ∪ B` with `A ⊆ L(m+1)`, `|A| = k`, `B ⊆ L(m) \ N(A)`:
/// at least `C(N(m+1), k) 2^(N(m) - kn)` of them, `k = floor(N(m+1)/4^n)`.
pub fn lower_bound_construction(shape: &GridShape, seed: u64, samples: usize) -> Result<LowerBound> {
    let (t, n) = (shape.t(), shape.n());
    if n < 2 {
        return Err(Error::Precondition("the construction needs n >= 2".into()));
    }
    let profile = grid::level_sizes(shape);
    let m = shape.middle();
    let middle = profile.size(m).clone();
    let above = profile.size(m + 1).clone();
    let k_big = &above >> (2 * n);
    let k = k_big
        .to_u64()
        .filter(|&k| k <= 1_000_000)
        .ok_or(Error::Guard {
            what: "construction size k",
            actual: u128::MAX,
            limit: 1_000_000,
        })?;
    let exponent = &middle - BigUint::from(k) * n;
    let choose = match above.to_u64() {
        Some(a) => binomial(a, k),
        None if k == 0 => BigUint::one(),
        None => {
            return Err(Error::Guard {
                what: "level size for the construction",
                actual: u128::MAX,
                limit: u64::MAX as u128,
            })
        }
    };
    let log2_value = log2_big(&choose) + exponent.to_f64().expect("finite");
    let exact = exponent
        .to_u64()
        .filter(|&e| e <= EXACT_BITS)
        .map(|e| &choose << e);

    let mut checked = 0;
    if shape.volume() <= 1 << 16 {
        let upper: Vec<Point> = VertexSet::level(*shape, m + 1).points().collect();
        let lower: Vec<Point> = VertexSet::level(*shape, m).points().collect();
        let mut rng = rng::stream(seed, 0);
        for _ in 0..samples {
            let a: Vec<Point> = upper.choose_multiple(&mut rng, k as usize).cloned().collect();
            let mut free: Vec<Point> = lower
                .iter()
                .filter(|q| a.iter().all(|p| !q.precedes(p)))
                .cloned()
                .collect();
            free.shuffle(&mut rng);
            let take = rand::Rng::random_range(&mut rng, 0..=free.len());
            let set = VertexSet::from_points(*shape, a.into_iter().chain(free.into_iter().take(take)))?;
            if !set.is_antichain() {
                return Err(Error::Invalid("construction produced a comparable pair".into()));
            }
            checked += 1;
        }
    }
    Ok(LowerBound {
        t,
        n,
        k,
        vacuous: k == 0,
        middle,
        above,
        log2_value,
        exact,
        independence_checked: checked,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub t: usize,
    pub n: usize,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub alpha: BigUint,
    #[serde(serialize_with = "exact::serde_str::biguint_opt")]
    pub count: Option<BigUint>,
    pub count_source: Option<Engine>,
    pub log2_count: Option<f64>,
    /// `log2 A / alpha`.
    pub ratio: Option<f64>,
    /// `(1 + c (ln n)^3 / n) alpha`.
    pub main_rhs: f64,
    /// `log2` of the two-level construction (`None` for `n = 1`).
    pub lower_bound: Option<f64>,
    pub construction_k: Option<u64>,
    /// `A >= 2^alpha`, exactly.
    pub trivial_bound_holds: Option<bool>,
    /// Construction value `<= A`, exactly when both are exact.
    pub construction_holds: Option<bool>,
    /// `N_3(n, t) = A(t, n) + 1`.
    #[serde(serialize_with = "exact::serde_str::biguint_opt")]
    pub ramsey: Option<BigUint>,
}

/// Collects width, exact count, bounds and the Ramsey value for one shape.
pub fn bound_report(shape: &GridShape, c: &BigRational, limits: CountLimits) -> Result<BoundRow> {
    let (t, n) = (shape.t(), shape.n());
    let alpha = grid::width(shape);
    let counted = match count_closed_form(shape) {
        Some(a) => Some((a, Engine::ClosedForm)),
        None => count_antichains_exact(shape, limits).ok(),
    };
    let alpha_f = exact::ratio_to_f64(&exact::big_ratio(&alpha, &BigUint::one()));
    let nf = n as f64;
    let main_rhs = (1.0 + exact::ratio_to_f64(c) * nf.ln().powi(3) / nf) * alpha_f;
    let construction = if n >= 2 {
        lower_bound_construction(shape, 0, 0).ok()
    } else {
        None
    };
    let (count, count_source) = match counted {
        Some((a, e)) => (Some(a), Some(e)),
        None => (None, None),
    };
    let log2_count = count.as_ref().map(log2_big);
    let trivial_bound_holds = count.as_ref().and_then(|a| {
        alpha.to_u64().filter(|&e| e <= 1 << 24).map(|e| *a >= BigUint::one() << e)
    });
    let construction_holds = match (&count, &construction) {
        (Some(a), Some(lb)) => match &lb.exact {
            Some(v) => Some(v <= a),
            None => Some(lb.log2_value <= log2_big(a) + 1e-9),
        },
        _ => None,
    };
    Ok(BoundRow {
        t,
        n,
        ratio: log2_count.map(|l| l / alpha_f),
        ramsey: count.as_ref().map(|a| a + 1u32),
        alpha,
        log2_count,
        count,
        count_source,
        main_rhs,
        lower_bound: construction.as_ref().map(|l| l.log2_value),
        construction_k: construction.as_ref().map(|l| l.k),
        trivial_bound_holds,
        construction_holds,
    })
}

/// Writes bound rows as CSV with columns
/// `t,n,alpha,log2A,ratio,main_rhs,lower_bound`, followed by the exact
/// count `A` (empty when not computed).
pub fn bound_rows_csv<W: std::io::Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Invalid(format!("csv output failed: {e}"));
    w.write_record(["t", "n", "alpha", "log2A", "ratio", "main_rhs", "lower_bound", "A"])
        .map_err(io)?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.n.to_string(),
            r.alpha.to_string(),
            opt(r.log2_count),
            opt(r.ratio),
            format!("{:.6}", r.main_rhs),
            opt(r.lower_bound),
            r.count.as_ref().map(|c| c.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("csv output failed: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallAntichainRow {
    pub k: usize,
    pub max_size: usize,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub count: BigUint,
    pub log2_count: f64,
    /// `log2(count) k / (log2(k) alpha)`.
    pub implied_constant: f64,
}

/// For each `k >= 2`: the number of antichains of size at most
/// `floor(alpha/k)` and the constant it implies.
pub fn small_antichain_bound_sweep(shape: &GridShape, ks: &[usize], limit: u128) -> Result<Vec<SmallAntichainRow>> {
    let by_size = antichain_size_profile(shape, limit)?;
    let alpha = grid::width(shape).to_usize().expect("enumerable width");
    ks.iter()
        .map(|&k| {
            if k < 2 {
                return Err(Error::Precondition("k must be at least 2".into()));
            }
            let max_size = alpha / k;
            let count: BigUint = by_size.iter().take(max_size + 1).sum();
            let log2_count = log2_big(&count);
            Ok(SmallAntichainRow {
                k,
                max_size,
                implied_constant: log2_count * k as f64 / ((k as f64).log2() * alpha as f64),
                log2_count,
                count,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(t: usize, n: usize) -> GridShape {
        GridShape::new(t, n).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn small_counts() {
        let lim = CountLimits::default();
        assert_eq!(count_antichains_exact(&shape(7, 1), lim).unwrap().0, big(8));
        assert_eq!(count_antichains_exact(&shape(2, 3), lim).unwrap().0, big(20));
        assert_eq!(count_antichains_exact(&shape(2, 4), lim).unwrap().0, big(168));
        assert_eq!(count_antichains_exact(&shape(3, 3), lim).unwrap().0, big(980));
        assert_eq!(count_by_transfer(&shape(3, 3), 10_000).unwrap(), big(980));
        assert_eq!(count_by_transfer(&shape(100, 1), 10).unwrap(), big(101));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(count_grid2(2), big(6));
        assert_eq!(count_macmahon(2), big(20));
        assert_eq!(count_macmahon(3), big(980));
        assert_eq!(count_macmahon(1), big(2));
    }

    #[test]
    fn guards() {
        assert!(matches!(count_by_enumeration(&shape(3, 4), 32), Err(Error::Guard { .. })));
        assert!(matches!(count_by_transfer(&shape(9, 3), 5_000), Err(Error::Guard { .. })));
    }

    #[test]
    fn stratified_counts() {
        let s = shape(2, 3);
        assert_eq!(count_antichains_upto(&s, 0, 32).unwrap(), big(1));
        assert_eq!(count_antichains_upto(&s, 1, 32).unwrap(), big(9));
        assert_eq!(count_antichains_upto(&s, 2, 32).unwrap(), big(18));
        assert_eq!(count_antichains_upto(&s, 3, 32).unwrap(), big(20));
    }

    #[test]
    fn construction() {
        let lb = lower_bound_construction(&shape(3, 3), 1, 10).unwrap();
        assert!(lb.vacuous);
        assert_eq!(lb.exact, Some(big(128)));
        let lb = lower_bound_construction(&shape(5, 6), 1, 5).unwrap();
        assert!(lb.exact.is_some());
        assert_eq!(lb.independence_checked, 5);
    }

    #[test]
    fn report_rows() {
        let c = BigRational::one();
        let row = bound_report(&shape(2, 2), &c, CountLimits::default()).unwrap();
        assert_eq!(row.count, Some(big(6)));
        assert!((row.ratio.unwrap() - 6f64.log2() / 2.0).abs() < 1e-12);
        let row = bound_report(&shape(3, 3), &c, CountLimits::default()).unwrap();
        assert_eq!(row.ramsey, Some(big(981)));
        assert_eq!(row.trivial_bound_holds, Some(true));
        assert_eq!(row.construction_holds, Some(true));
        let mut out = Vec::new();
        bound_rows_csv(&[row], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,n,alpha,log2A,ratio,main_rhs,lower_bound,A\n3,3,7,") && text.contains(",980\n"));
    }

    #[test]
    fn small_antichain_rows() {
        let rows = small_antichain_bound_sweep(&shape(2, 4), &[2, 3], 32).unwrap();
        assert_eq!(rows[0].max_size, 3);
        assert!(rows[0].count > rows[1].count);
    }
}
