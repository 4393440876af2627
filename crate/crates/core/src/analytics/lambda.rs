//! The local log-concavity defect `Lambda / N_min^2` of a rank sequence
//! over a window of `t + 1` consecutive levels.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, big_ratio};
use crate::grid::{chain_power_profile, LevelProfile};

/// `Lambda = max N(z1)N(z2) - N(z3)N(z4)` over `z1 + z2 = z3 + z4` in
/// `[lo, hi]`, and the smallest `N(z)` there. Levels outside the profile
/// count as empty.
pub fn window_lambda(profile: &LevelProfile, lo: i64, hi: i64) -> (BigInt, BigUint) {
    let sizes: Vec<BigInt> = (lo..=hi).map(|z| BigInt::from(profile.get(z))).collect();
    let w = sizes.len();
    let mut best = BigInt::zero();
    // best and worst product for every index sum
    for sum in 0..2 * w.saturating_sub(1) + 1 {
        let mut hi_p: Option<BigInt> = None;
        let mut lo_p: Option<BigInt> = None;
        for a in sum.saturating_sub(w - 1)..=sum.min(w - 1) {
            let b = sum - a;
            if b < a {
                break;
            }
            let p = &sizes[a] * &sizes[b];
            if hi_p.as_ref().is_none_or(|h| &p > h) {
                hi_p = Some(p.clone());
            }
            if lo_p.as_ref().is_none_or(|l| &p < l) {
                lo_p = Some(p);
            }
        }
        if let (Some(h), Some(l)) = (hi_p, lo_p) {
            let d = h - l;
            if d > best {
                best = d;
            }
        }
    }
    let nmin = sizes
        .iter()
        .map(|s| s.magnitude().clone())
        .min()
        .unwrap_or_default();
    (best, nmin)
}

/// Which rank sequence the window is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaProfile {
    /// Levels of `[t]^n` itself.
    #[default]
    Own,
    /// Levels of the factor `[t]^(n-1)` used when building `[t]^n`.
    Factor,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaRatio {
    pub t: usize,
    pub n: usize,
    pub k: i64,
    pub profile: LambdaProfile,
    /// Window actually used, after clamping to the level range.
    pub window: (i64, i64),
    pub clamped: bool,
    #[serde(serialize_with = "lambda_str")]
    pub lambda: BigInt,
    #[serde(serialize_with = "exact::serde_str::biguint")]
    pub n_min: BigUint,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub ratio_exact: BigRational,
    pub ratio: f64,
}

fn lambda_str<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// `Lambda / N_min^2` over the window `[k - t + 1, k + 1]`.
pub fn lambda_ratio(t: usize, n: usize, k: i64, profile: LambdaProfile) -> Result<LambdaRatio> {
    if t < 2 {
        return Err(Error::Precondition("t must be at least 2".into()));
    }
    let dim = match profile {
        LambdaProfile::Own => n,
        LambdaProfile::Factor => n
            .checked_sub(1)
            .ok_or_else(|| Error::Precondition("factor profile needs n >= 1".into()))?,
    };
    let p = chain_power_profile(t, dim);
    let top = (p.len() - 1) as i64;
    let (lo, hi) = (k - t as i64 + 1, k + 1);
    let (clo, chi) = (lo.max(0), hi.min(top));
    if clo > chi {
        return Err(Error::Precondition(format!("window around level {k} misses every level")));
    }
    let (lambda, n_min) = window_lambda(&p, clo, chi);
    let ratio_exact = BigRational::new(lambda.clone(), BigInt::from(&n_min * &n_min));
    let _ = big_ratio;
    Ok(LambdaRatio {
        t,
        n,
        k,
        profile,
        window: (clo, chi),
        clamped: (clo, chi) != (lo, hi),
        ratio: exact::ratio_to_f64(&ratio_exact),
        lambda,
        n_min,
        ratio_exact,
    })
}
