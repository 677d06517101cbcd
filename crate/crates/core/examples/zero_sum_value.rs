//! Values and optimal strategies of small zero-sum games. The row player
//! minimizes.

use tu_consensus::optim::solve_zero_sum;

fn show(name: &str, m: &[Vec<f64>]) -> anyhow::Result<()> {
    let s = solve_zero_sum(m)?;
    println!(
        "{name}: value {:.6} (maximin {:.6})",
        s.value, s.maximin_value
    );
    println!("  row {:.4?}", s.row_strategy);
    println!("  col {:.4?}", s.col_strategy);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    show("matching pennies", &[vec![1.0, -1.0], vec![-1.0, 1.0]])?;
    show(
        "rock paper scissors",
        &[
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ],
    )?;
    show("saddle point", &[vec![3.0, 1.0], vec![4.0, 2.0]])?;
    show("2x3", &[vec![2.0, -1.0, 0.5], vec![-1.0, 3.0, 0.0]])?;
    Ok(())
}
