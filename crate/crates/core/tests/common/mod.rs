//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own aggregation code: level sizes come from direct
//! polynomial products, antichains from a branching search, chain masses
//! from explicit chain enumeration.

#![allow(dead_code)]

use hypergrid::flows::FlowSource;
use hypergrid::{GridShape, Point};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficients of `(1 + x + ... + x^(t-1))^n`.
pub fn level_sizes(t: usize, n: usize) -> Vec<BigUint> {
    let mut poly = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); poly.len() + t - 1];
        for (i, c) in poly.iter().enumerate() {
            for j in 0..t {
                next[i + j] += c;
            }
        }
        poly = next;
    }
    poly
}

pub fn all_points(t: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..t as u32).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn leq(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn comparable(a: &[u32], b: &[u32]) -> bool {
    leq(a, b) || leq(b, a)
}

/// Number of antichains of `[t]^n` by branching on points (volume <= 128).
pub fn brute_antichains(t: usize, n: usize) -> u64 {
    let pts = all_points(t, n);
    assert!(pts.len() <= 128);
    let masks: Vec<u128> = pts
        .iter()
        .map(|p| {
            pts.iter()
                .enumerate()
                .filter(|(_, q)| comparable(p, q))
                .fold(0u128, |m, (j, _)| m | (1u128 << j))
        })
        .collect();
    fn go(i: usize, blocked: u128, masks: &[u128]) -> u64 {
        if i == masks.len() {
            return 1;
        }
        let skip = go(i + 1, blocked, masks);
        if blocked >> i & 1 == 1 {
            skip
        } else {
            skip + go(i + 1, blocked | masks[i], masks)
        }
    }
    go(0, 0, &masks)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Plane partitions in a `t x t x t` box.
pub fn macmahon(t: u64) -> BigUint {
    let mut r = BigRational::one();
    for i in 1..=t {
        for j in 1..=t {
            for k in 1..=t {
                r *= BigRational::new((i + j + k - 1).into(), (i + j + k - 2).into());
            }
        }
    }
    assert!(r.is_integer());
    r.to_integer().to_biguint().unwrap()
}

/// Every maximal chain of the shape as a list of points.
pub fn maximal_chains(shape: &GridShape) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![shape.bottom()]];
    while let Some(chain) = stack.pop() {
        let last = chain.last().unwrap().clone();
        let ups: Vec<usize> = hypergrid::grid::up_axes(shape, &last).collect();
        if ups.is_empty() {
            out.push(chain);
            continue;
        }
        for axis in ups {
            let mut c = chain.clone();
            c.push(last.step_up(axis));
            stack.push(c);
        }
    }
    out
}

/// Probability of a maximal chain: the product of its edge weights.
pub fn chain_probability<F: FlowSource>(flow: &F, chain: &[Point]) -> BigRational {
    chain.windows(2).fold(BigRational::one(), |acc, w| {
        let axis = (0..w[0].dim()).find(|&i| w[0].coords()[i] != w[1].coords()[i]).unwrap();
        acc * flow.weight(&w[0], axis)
    })
}

/// Largest number of other points of `set` comparable to one of its points.
pub fn brute_max_degree(set: &[Vec<u32>]) -> usize {
    set.iter()
        .map(|p| set.iter().filter(|q| *q != p && comparable(p, q)).count())
        .max()
        .unwrap_or(0)
}

pub fn is_antichain(set: &[Vec<u32>]) -> bool {
    brute_max_degree(set) == 0
}
