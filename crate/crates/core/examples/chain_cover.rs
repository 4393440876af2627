//! Random full chains from the regular cover, their per-point marginals and
//! exact pair probabilities.

use hypergrid::chains::{self, ChainSampler};
use hypergrid::exact::{ratio_string, ratio_to_f64};
use hypergrid::flows::Snmf;
use hypergrid::grid::{self, Point};
use hypergrid::{rng, GridShape};

fn main() -> hypergrid::Result<()> {
    let shape = GridShape::new(3, 3)?;
    let snmf = Snmf::new(shape);
    let sampler = ChainSampler::new(&snmf);
    let mut r = rng::stream(7, 0);
    for _ in 0..3 {
        let c = sampler.sample(&mut r);
        let pts: Vec<String> = c.points().iter().map(|p| p.to_string()).collect();
        println!("{}", pts.join(" < "));
    }

    // Every point of level i is hit with probability exactly 1/N(i).
    let masses = chains::mass_from_bottom(&snmf, chains::DEFAULT_BOX_GUARD)?;
    let profile = grid::level_sizes(&shape);
    let exact = shape
        .points()
        .zip(&masses)
        .all(|(p, m)| ratio_to_f64(m) * profile.size(p.rank()).to_string().parse::<f64>().unwrap() == 1.0);
    println!("all point masses equal 1/N(rank): {exact}");

    for row in chains::marginal_check(&snmf, 20_000, 1, chains::DEFAULT_BOX_GUARD)? {
        println!("level {}: expected {:.4}, worst z {:.2}", row.level, row.expected, row.max_z);
    }

    let (x, y) = (Point::new(vec![0, 1, 0]), Point::new(vec![1, 2, 1]));
    let p = chains::pair_probability(&snmf, &x, &y)?;
    println!("P({x}, {y} both on the chain) = {}", ratio_string(&p));
    Ok(())
}
