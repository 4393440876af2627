//! The scaled normalized matching flow on [4]^2, edge by edge, plus the
//! conservation check and the symmetrized maximum over good edges.

use hypergrid::exact::ratio_string;
use hypergrid::flows::{self, AveragingMode, CoverEdge, Snmf};
use hypergrid::grid::{self, Exponent, Point};
use hypergrid::GridShape;

fn main() -> hypergrid::Result<()> {
    let shape = GridShape::new(4, 2)?;
    let snmf = Snmf::new(shape);
    for x in shape.points() {
        for axis in grid::up_axes(&shape, &x) {
            let w = snmf.edge_weight(&CoverEdge::new(x.clone(), axis))?;
            println!("{x} -> {}: {}", x.step_up(axis), ratio_string(&w));
        }
    }

    let report = flows::verify_conservation(&shape, flows::DEFAULT_EDGE_GUARD)?;
    println!("conservation on {shape}: {} edges, pass {}", report.edges_checked, report.pass);

    let e = CoverEdge::new(Point::new(vec![1, 0, 2]), 1);
    let avg = flows::averaged_edge_weight(&GridShape::new(3, 3)?, &e, AveragingMode::Exact)?;
    println!("symmetrized weight of {e:?} on [3]^3: {avg:?}");

    for (t, n) in [(2, 4), (3, 3), (2, 6)] {
        let shape = GridShape::new(t, n)?;
        let w = flows::max_good_weight(&shape, AveragingMode::Exact, Exponent::default())?;
        println!(
            "{shape}: W = {} over {} edge orbits, W n / ln n = {:.3}",
            ratio_string(w.exact.as_ref().expect("exact mode")),
            w.orbits,
            w.scaled.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
