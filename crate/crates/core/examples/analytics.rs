//! The tilted coordinate distribution: solving for the tilt, comparing the
//! quadrature density with exact level sizes, and the Λ ratio trend.

use hypergrid::analytics::claims;
use hypergrid::analytics::lambda::{self, LambdaProfile};
use hypergrid::analytics::tilt::{self, LatticeIntegral, TiltedModel};
use hypergrid::grid;
use hypergrid::GridShape;

fn main() -> hypergrid::Result<()> {
    let shape = GridShape::new(4, 12)?;
    let profile = grid::level_sizes(&shape);
    for k in [12, 18, 22] {
        let model = tilt::solve_tilt(&shape, k)?;
        println!("k = {k}: p = {:.6}, mean {:.6}", model.p, model.mu_p);
        for s in [k - 2, k, k + 2] {
            let f = LatticeIntegral::new(&shape, s)?.eval(&model)?;
            let exact = tilt::lattice_mass(&model, profile.size(s), s);
            println!("  f({}) = {:.12e}, exact {:.12e}", s as i64 - k as i64, f.value, exact);
        }
    }

    for n in [16, 32, 64, 128] {
        let r = lambda::lambda_ratio(3, n, n as i64, LambdaProfile::Own)?;
        println!("t=3 n={n}: Λ/N_min² = {:.6}, times n = {:.4}", r.ratio, r.ratio * n as f64);
    }

    let central = TiltedModel::central(&GridShape::new(6, 100)?);
    let report = claims::appendix_inequality_checks(&central, 1e-3, claims::DEFAULT_N_THRESHOLD);
    for c in &report.claims {
        println!("{}: {} points, min slack {:.3e}, pass {}", c.name, c.points, c.min_slack, c.passed());
    }
    Ok(())
}
