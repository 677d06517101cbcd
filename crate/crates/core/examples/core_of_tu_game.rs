//! Builds the core of a four-player game and checks a few allocations.

use tu_consensus::game::{build_core, core_membership, is_core_nonempty, CharacteristicFunction};

fn main() -> anyhow::Result<()> {
    let cf = CharacteristicFunction::new(4, 10.0)?
        .with_value(&[0], 2.0)?
        .with_value(&[1], 2.0)?
        .with_value(&[2], 2.0)?
        .with_value(&[3], 2.0)?
        .with_value(&[0, 1], 5.0)?
        .with_value(&[2, 3], 5.0)?
        .with_value(&[0, 1, 2], 7.0)?;

    let core = build_core(&cf)?;
    println!(
        "core: {} equality and {} inequality rows",
        core.eq_rows().len(),
        core.ineq_rows().len()
    );
    for row in core.eq_rows() {
        println!("  {:?} . x  = {}", row.coeffs, row.rhs);
    }
    for row in core.ineq_rows() {
        println!("  {:?} . x >= {}", row.coeffs, row.rhs);
    }

    match is_core_nonempty(&cf)?.witness() {
        Some(x) => println!("nonempty, witness {x:?}"),
        None => println!("empty"),
    }

    for x in [
        [3.0, 2.0, 2.5, 2.5],
        [2.5, 2.5, 2.5, 2.5],
        [3.8, 3.0, 2.2, 1.0],
        [10.0, 0.0, 0.0, 0.0],
    ] {
        println!("{x:?} in core: {}", core_membership(&x, &cf, 1e-9));
    }
    Ok(())
}
