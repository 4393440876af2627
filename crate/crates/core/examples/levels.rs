//! Level sizes, width and the good band of a few hypergrids.

use hypergrid::grid::{self, Exponent};
use hypergrid::GridShape;

fn main() -> hypergrid::Result<()> {
    for (t, n) in [(2, 6), (3, 4), (4, 3), (5, 8)] {
        let shape = GridShape::new(t, n)?;
        let profile = grid::level_sizes(&shape);
        let sizes: Vec<String> = profile.sizes().iter().map(|s| s.to_string()).collect();
        println!("{shape}: levels [{}]", sizes.join(", "));
        println!(
            "  width {} at level {}, log-concave {}, good levels {:?}",
            grid::width(&shape),
            shape.middle(),
            grid::is_log_concave(&profile),
            grid::good_levels(&shape, Exponent::default())
        );
    }

    // Tail bound N((t-1)n/2 - r) <= t^(n-1) exp(-r^2 / (2t^2(n-1))), checked exactly.
    let shape = GridShape::new(3, 20)?;
    let profile = grid::level_sizes(&shape);
    for r in [4, 8, 12, 20] {
        for c in grid::level_tail_check(&shape, &profile, r)? {
            println!("{shape} r={r}: level {} size {} bound {:.3e} holds {}", c.level, c.exact, c.bound, c.holds);
        }
    }
    Ok(())
}
