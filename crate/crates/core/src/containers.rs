//! The fingerprint/container algorithm: repeatedly take the least
//! maximum-degree vertex of the comparability graph on the remaining set;
//! vertices of the input antichain go into the fingerprint together with
//! the removal of their neighbourhood, the others are simply discarded.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact;
use crate::grid::{self, comparable, Exponent, GridShape, Point, VertexSet};
use crate::rng;

/// Largest good set for which the comparability graph is built.
pub const DEFAULT_GRAPH_GUARD: u128 = 1 << 14;

/// Total order used to break ties between maximum-degree vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexOrder {
    /// Lexicographic on coordinates.
    #[default]
    Lex,
    /// By rank first, then lexicographic.
    RankLex,
}

impl std::str::FromStr for VertexOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(VertexOrder::Lex),
            "rank-lex" => Ok(VertexOrder::RankLex),
            other => Err(Error::Invalid(format!("unknown order {other:?} (lex | rank-lex)"))),
        }
    }
}

/// `1 + 1/n`, the default stopping factor.
pub fn default_stop_factor(n: usize) -> BigRational {
    BigRational::one() + BigRational::new(1.into(), BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub vertex: Point,
    pub degree: usize,
    pub increment: bool,
    /// `|A_(i-1)|`, the size before the step.
    pub size_before: usize,
    pub size_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainerResult {
    pub fingerprint: VertexSet,
    pub body: VertexSet,
    pub trace: Vec<TraceStep>,
}

impl ContainerResult {
    /// The trace as JSON lines, one step per line.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|s| serde_json::to_string(s).expect("trace serializes") + "\n")
            .collect()
    }
}

/// The comparability graph on the good levels, with vertices listed in the
/// tie-breaking order. Reusable across runs on the same shape.
pub struct ContainerGraph {
    shape: GridShape,
    order: VertexOrder,
    /// Grid indices of the good points, in tie-breaking order.
    vertices: Vec<usize>,
    position: HashMap<usize, usize>,
    adjacency: Vec<Vec<usize>>,
    width: BigUint,
}

impl ContainerGraph {
    pub fn new(shape: GridShape, order: VertexOrder, point_limit: u128) -> Result<Self> {
        shape.enumerable(point_limit)?;
        let good = grid::good_set(&shape, Exponent::default());
        let mut vertices: Vec<usize> = good.indices().collect();
        if order == VertexOrder::RankLex {
            vertices.sort_by_key(|&i| (shape.point(i).rank(), i));
        }
        let points: Vec<Point> = vertices.iter().map(|&i| shape.point(i)).collect();
        let adjacency = (0..points.len())
            .map(|a| {
                (0..points.len())
                    .filter(|&b| b != a && comparable(&points[a], &points[b]))
                    .collect()
            })
            .collect();
        let position = vertices.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        Ok(ContainerGraph {
            shape,
            order,
            vertices,
            position,
            adjacency,
            width: grid::width(&shape),
        })
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn order(&self) -> VertexOrder {
        self.order
    }

    pub fn good_size(&self) -> usize {
        self.vertices.len()
    }

    /// Runs the algorithm on the antichain `input`.
    pub fn run(&self, input: &VertexSet, stop_factor: &BigRational) -> Result<ContainerResult> {
        if !input.is_antichain() {
            return Err(Error::Precondition("input is not an antichain".into()));
        }
        let mut in_input = vec![false; self.vertices.len()];
        for idx in input.indices() {
            let p = self.position.get(&idx).ok_or_else(|| {
                Error::Precondition(format!("{} is not on a good level", self.shape.point(idx)))
            })?;
            in_input[*p] = true;
        }
        // stop once |A| * den <= num * alpha
        let num = BigUint::try_from(stop_factor.numer().clone())
            .map_err(|_| Error::Precondition("stop factor must be positive".into()))?;
        let den = BigUint::try_from(stop_factor.denom().clone()).expect("positive denominator");
        let threshold = num * &self.width;
        let done = |size: usize| BigUint::from(size) * &den <= threshold;

        let mut alive = vec![true; self.vertices.len()];
        let mut degree: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        let mut size = self.vertices.len();
        let mut fingerprint = VertexSet::new(self.shape);
        let mut trace = Vec::new();
        let remove = |v: usize, alive: &mut Vec<bool>, degree: &mut Vec<usize>| {
            alive[v] = false;
            for &u in &self.adjacency[v] {
                if alive[u] {
                    degree[u] -= 1;
                }
            }
        };
        while !done(size) {
            let v = (0..self.vertices.len())
                .filter(|&v| alive[v])
                .max_by_key(|&v| (degree[v], std::cmp::Reverse(v)))
                .expect("remaining set is non-empty above the threshold");
            let before = size;
            let deg = degree[v];
            if in_input[v] {
                fingerprint.insert_index(self.vertices[v]);
                let neighbours: Vec<usize> = self.adjacency[v].iter().copied().filter(|&u| alive[u]).collect();
                remove(v, &mut alive, &mut degree);
                for u in neighbours {
                    remove(u, &mut alive, &mut degree);
                }
                size -= deg + 1;
            } else {
                remove(v, &mut alive, &mut degree);
                size -= 1;
            }
            trace.push(TraceStep {
                step: trace.len() + 1,
                vertex: self.shape.point(self.vertices[v]),
                degree: deg,
                increment: in_input[v],
                size_before: before,
                size_after: size,
            });
        }
        let body = VertexSet::from_indices(
            self.shape,
            (0..self.vertices.len()).filter(|&v| alive[v]).map(|v| self.vertices[v]),
        );
        Ok(ContainerResult {
            fingerprint,
            body,
            trace,
        })
    }
}

/// One run of the container algorithm on `[t]^n`.
pub fn run_container(
    shape: &GridShape,
    input: &VertexSet,
    stop_factor: &BigRational,
    order: VertexOrder,
) -> Result<ContainerResult> {
    ContainerGraph::new(*shape, order, DEFAULT_GRAPH_GUARD)?.run(input, stop_factor)
}

/// A random antichain inside the good levels: points are visited in random
/// order and kept with a per-sample density whenever they stay incomparable
/// to everything kept so far.
pub fn random_good_antichain<R: Rng>(shape: &GridShape, rng: &mut R) -> VertexSet {
    let mut points: Vec<Point> = grid::good_set(shape, Exponent::default()).points().collect();
    points.shuffle(rng);
    let density: f64 = rng.random();
    let mut kept: Vec<Point> = Vec::new();
    for p in points {
        if rng.random::<f64>() < density && kept.iter().all(|q| !comparable(q, &p)) {
            kept.push(p);
        }
    }
    VertexSet::from_points(*shape, kept).expect("points of the shape")
}

#[derive(Debug, Clone, Serialize)]
pub struct ContainerReport {
    pub t: usize,
    pub n: usize,
    pub samples: usize,
    #[serde(serialize_with = "exact::serde_str::ratio")]
    pub stop_factor: BigRational,
    pub containment_violations: usize,
    pub body_size_violations: usize,
    pub fingerprint_not_antichain: usize,
    /// Pairs of runs with equal fingerprints that were compared.
    pub collisions_checked: usize,
    pub well_defined_violations: usize,
    pub max_fingerprint: usize,
    pub max_body: usize,
    /// `alpha (ln n)^2 / n`, the scale the fingerprint size is compared to.
    pub fingerprint_scale: f64,
    pub pass: bool,
}

/// Runs the algorithm on `samples` random antichains of the good levels
/// plus the middle level, and checks `S ⊆ I ⊆ S ∪ psi(S)`, the body size
/// bound `(1 + 1/n) alpha`, that `S` is an antichain, and that equal
/// fingerprints always produce equal bodies.
pub fn verify_container_properties(
    shape: &GridShape,
    samples: usize,
    seed: u64,
    order: VertexOrder,
) -> Result<ContainerReport> {
    let graph = ContainerGraph::new(*shape, order, DEFAULT_GRAPH_GUARD)?;
    let stop = default_stop_factor(shape.n());
    let width = grid::width(shape);
    let width_u = width.to_u64().unwrap_or(u64::MAX) as usize;
    let mut rng = rng::stream(seed, 0);
    let mut report = ContainerReport {
        t: shape.t(),
        n: shape.n(),
        samples,
        stop_factor: stop.clone(),
        containment_violations: 0,
        body_size_violations: 0,
        fingerprint_not_antichain: 0,
        collisions_checked: 0,
        well_defined_violations: 0,
        max_fingerprint: 0,
        max_body: 0,
        fingerprint_scale: width_u as f64 * (shape.n() as f64).ln().powi(2) / shape.n() as f64,
        pass: false,
    };
    let mut seen: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let middle = VertexSet::level(*shape, shape.middle());
    let good = grid::good_set(shape, Exponent::default());
    let mut inputs = Vec::with_capacity(samples + 1);
    if middle.is_subset(&good) {
        inputs.push(middle);
    }
    for _ in 0..samples {
        inputs.push(random_good_antichain(shape, &mut rng));
    }
    for input in &inputs {
        let result = graph.run(input, &stop)?;
        let s = &result.fingerprint;
        let body = &result.body;
        if !(s.is_subset(input) && input.is_subset(&s.union(body))) {
            report.containment_violations += 1;
        }
        // |psi(S)| <= (1 + 1/n) alpha, exactly
        if BigUint::from(body.len()) * BigUint::from(shape.n()) > &width * BigUint::from(shape.n() + 1) {
            report.body_size_violations += 1;
        }
        if !s.is_antichain() {
            report.fingerprint_not_antichain += 1;
        }
        let key: Vec<usize> = s.indices().collect();
        let value: Vec<usize> = body.indices().collect();
        match seen.get(&key) {
            Some(previous) => {
                report.collisions_checked += 1;
                if *previous != value {
                    report.well_defined_violations += 1;
                }
            }
            None => {
                seen.insert(key, value);
            }
        }
        report.max_fingerprint = report.max_fingerprint.max(s.len());
        report.max_body = report.max_body.max(body.len());
    }
    report.pass = report.containment_violations == 0
        && report.body_size_violations == 0
        && report.fingerprint_not_antichain == 0
        && report.well_defined_violations == 0;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseBand {
    pub phase: u8,
    /// Subphase index `l` (phases 1 and 3 only).
    pub subphase: Option<u32>,
    pub steps: usize,
    pub increments: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseStats {
    pub bands: Vec<PhaseBand>,
    pub total_increments: usize,
    /// Steps taken with `|A| < (1 + 1/n) alpha` (only with a smaller stop factor).
    pub beyond_phase_three: usize,
}

/// Classifies each step by `|A_(i-1)|`: phase 1 for `>= n alpha` with
/// subphases `alpha 2^l <= |A|`, phase 2 for `>= 3 alpha`, phase 3 for
/// `>= (1 + 1/n) alpha` with subphases `alpha (1 + 2^l / n) <= |A|`.
pub fn phase_trace(result: &ContainerResult, shape: &GridShape) -> PhaseStats {
    let alpha = grid::width(shape);
    let n = BigUint::from(shape.n());
    let mut bands: Vec<PhaseBand> = Vec::new();
    let mut beyond = 0usize;
    for step in &result.trace {
        let size = BigUint::from(step.size_before);
        let (phase, sub) = if size >= &n * &alpha {
            let mut l = 0u32;
            while &alpha << (l + 1) <= size {
                l += 1;
            }
            (1u8, Some(l))
        } else if size >= BigUint::from(3u32) * &alpha {
            (2, None)
        } else if &size * &n >= (&n + 1u32) * &alpha {
            let mut l = 0u32;
            while (&n + (BigUint::one() << (l + 1))) * &alpha <= &size * &n {
                l += 1;
            }
            (3, Some(l))
        } else {
            beyond += 1;
            continue;
        };
        match bands.iter_mut().find(|b| b.phase == phase && b.subphase == sub) {
            Some(b) => {
                b.steps += 1;
                b.increments += usize::from(step.increment);
            }
            None => bands.push(PhaseBand {
                phase,
                subphase: sub,
                steps: 1,
                increments: usize::from(step.increment),
            }),
        }
    }
    PhaseStats {
        total_increments: result.trace.iter().filter(|s| s.increment).count(),
        bands,
        beyond_phase_three: beyond,
    }
}
