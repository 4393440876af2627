//! Small exact-arithmetic helpers shared across modules: binomials,
//! factorials, base-2 logarithms of big integers, and the string forms used
//! for lossless interchange (decimal big integers, `p/q` rationals).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `log2(x)` from the bit length plus a 64-bit mantissa; `-inf` for zero.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return x.to_u64().map(|v| (v as f64).log2()).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 significant bits");
    (top as f64).log2() + shift as f64
}

/// Natural log of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    log2_big(x) * std::f64::consts::LN_2
}

/// Converts a non-negative rational to `f64` without overflowing on huge
/// numerators/denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = r.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let sign = if r.numer().sign() == num_bigint::Sign::Minus {
        -1.0
    } else {
        1.0
    };
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    sign * (log2_big(num) - log2_big(den)).exp2()
}

pub fn big_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn ratio_from_u64(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical `p/q` form, always with an explicit denominator.
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// `floor(x)` for a non-negative rational as an integer.
pub fn floor_ratio(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Serde adapters for big integers and rationals as strings.
pub mod serde_str {
    use num_bigint::BigUint;
    use num_rational::BigRational;
    use serde::{Serialize, Serializer};

    pub fn biguint<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_str_radix(10))
    }

    pub fn biguint_vec<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = xs.iter().map(|x| x.to_str_radix(10)).collect();
        strs.serialize(s)
    }

    pub fn biguint_opt<S: Serializer>(x: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.to_str_radix(10)),
            None => s.serialize_none(),
        }
    }

    pub fn ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::ratio_string(r))
    }

    pub fn ratio_vec<S: Serializer>(rs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = rs.iter().map(super::ratio_string).collect();
        strs.serialize(s)
    }

    pub fn ratio_opt<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.serialize_some(&super::ratio_string(v)),
            None => s.serialize_none(),
        }
    }
}
