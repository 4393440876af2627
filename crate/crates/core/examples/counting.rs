//! Exact antichain counts through three engines, and the bound table.

use hypergrid::counting::{self, CountLimits};
use hypergrid::exact::ratio_from_u64;
use hypergrid::GridShape;

fn main() -> hypergrid::Result<()> {
    for (t, n) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (4, 3), (3, 4)] {
        let shape = GridShape::new(t, n)?;
        let (count, engine) = counting::count_antichains_exact(&shape, CountLimits::default())?;
        println!("A({t},{n}) = {count} via {engine:?}");
    }
    println!("A(6,3) by the box formula = {}", counting::count_macmahon(6));

    let rows = [(3, 3), (2, 5), (4, 2), (5, 6)]
        .into_iter()
        .map(|(t, n)| counting::bound_report(&GridShape::new(t, n)?, &ratio_from_u64(1, 1), CountLimits::default()))
        .collect::<hypergrid::Result<Vec<_>>>()?;
    counting::bound_rows_csv(&rows, std::io::stdout())?;
    Ok(())
}
