//! Fixtures shared by the benchmarks.

use latagg_core::generators::reduced_generator_set;
use latagg_core::{FnTable, Lattice};

/// Meet, join and every reduced ι generator of `l`, in that order.
pub fn generating_base(l: &Lattice) -> Vec<FnTable<'_>> {
    let mut base = vec![FnTable::meet(l), FnTable::join(l)];
    base.extend(
        reduced_generator_set(l)
            .iter()
            .map(|s| s.to_table(l).expect("reduced generators are valid")),
    );
    base
}
