//! Projects points onto the simplex and onto a game core.

use tu_consensus::game::{build_core, CharacteristicFunction};
use tu_consensus::optim::{distance, project_with, Polyhedron, ProjectionOptions};

fn main() -> anyhow::Result<()> {
    let simplex = Polyhedron::simplex(3);
    let p = project_with(&[1.0, 1.0, -1.0], &simplex, &ProjectionOptions::default())?;
    println!(
        "simplex: {:?} after {} sweeps (polished {})",
        p.point, p.sweeps, p.polished
    );

    let cf = CharacteristicFunction::new(4, 10.0)?
        .with_value(&[0], 2.0)?
        .with_value(&[1], 2.0)?
        .with_value(&[2], 2.0)?
        .with_value(&[3], 2.0)?
        .with_value(&[0, 1], 5.0)?
        .with_value(&[2, 3], 5.0)?
        .with_value(&[0, 1, 2], 7.0)?;
    let core = build_core(&cf)?;
    let x = [10.0, 0.0, 0.0, 0.0];

    for polish in [true, false] {
        let opts = ProjectionOptions {
            polish,
            ..ProjectionOptions::with_tol(1e-10)
        };
        let p = project_with(&x, &core, &opts)?;
        println!(
            "core (polish {polish}): {:.9?} after {} sweeps",
            p.point, p.sweeps
        );
    }
    println!(
        "distance {:.9} (sqrt 65.5 = {:.9})",
        distance(&x, &core, 1e-10)?,
        65.5f64.sqrt()
    );
    Ok(())
}
