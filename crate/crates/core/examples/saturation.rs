//! Comparability degrees of large sets: chain and rectangle partitions, the
//! weak check above the width, and the pigeonhole witness on [t]^2.

use hypergrid::saturation;
use hypergrid::{rng, GridShape, VertexSet};
use rand::seq::index;

fn main() -> hypergrid::Result<()> {
    let shape = GridShape::new(3, 4)?;
    let chains = saturation::uniform_chain_partition(&shape, saturation::DEFAULT_PARTITION_GUARD)?;
    println!(
        "{shape}: {} chains, shortest {}, length bound {}, met {}",
        chains.width, chains.min_length, chains.length_bound, chains.meets_bound
    );
    let rects = saturation::rectangle_partition(&shape, None, saturation::DEFAULT_PARTITION_GUARD)?;
    println!(
        "  {} rectangles covering {} points, disjoint {}, grids {}",
        rects.count, rects.covered, rects.disjoint_cover, rects.all_grids
    );

    let mut r = rng::stream(11, 0);
    let volume = shape.volume() as usize;
    let set = VertexSet::from_indices(shape, index::sample(&mut r, volume, 25));
    let weak = saturation::check_weak_saturation(&set)?;
    println!("random 25-set: width {}, max degree {}, holds {}", weak.width, weak.delta, weak.holds);

    let square = GridShape::new(32, 2)?;
    let set = VertexSet::from_indices(square, index::sample(&mut r, 32 * 32, 700));
    let rect = saturation::check_rectangle_saturation(32, &set)?;
    println!(
        "[32]^2, |A| = {}: block side {:?}, witness {:?} with degree {:?}, holds {}",
        rect.size, rect.k, rect.witness, rect.witness_degree, rect.holds
    );
    Ok(())
}
