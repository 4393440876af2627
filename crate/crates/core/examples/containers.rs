//! The container algorithm on a random antichain of [3]^3, with its phase
//! breakdown and the property check over many inputs.

use hypergrid::containers::{self, VertexOrder};
use hypergrid::{rng, GridShape};

fn main() -> hypergrid::Result<()> {
    let shape = GridShape::new(3, 3)?;
    let input = containers::random_good_antichain(&shape, &mut rng::stream(5, 0));
    let stop = containers::default_stop_factor(shape.n());
    let result = containers::run_container(&shape, &input, &stop, VertexOrder::Lex)?;
    println!(
        "input {} points -> fingerprint {} points, body {} points after {} steps",
        input.len(),
        result.fingerprint.len(),
        result.body.len(),
        result.trace.len()
    );
    for band in containers::phase_trace(&result, &shape).bands {
        println!("  {band:?}");
    }

    for order in [VertexOrder::Lex, VertexOrder::RankLex] {
        let r = containers::verify_container_properties(&shape, 500, 1, order)?;
        println!(
            "{order:?}: {} runs, {} collisions compared, largest body {}, pass {}",
            r.samples, r.collisions_checked, r.max_body, r.pass
        );
    }
    Ok(())
}
