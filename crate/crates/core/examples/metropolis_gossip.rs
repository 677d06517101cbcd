//! Scalar gossip on a six-node cycle whose edges are activated two at a
//! time. Values converge to their average.

use tu_consensus::network::{schedule_round_robin, verify_joint_connectivity, Topology};

fn main() -> anyhow::Result<()> {
    let n = 6;
    let schedule = schedule_round_robin(n, Topology::Cycle, 2)?;
    println!("period {}", schedule.period());
    for q in [1, 2, schedule.period()] {
        let r = verify_joint_connectivity(&schedule, q, 100);
        println!("window {q}: jointly connected {}", r.connected);
    }

    let w = schedule.weights_at(0);
    println!("A(0), alpha {:.3}:", w.alpha());
    for i in 0..n {
        println!("  {:.3?}", w.row(i));
    }

    let mut x: Vec<f64> = (0..n).map(|i| (i * i) as f64).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    for t in 0..=60 {
        if t % 10 == 0 {
            let spread = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            println!("t={t:>3} spread {spread:.3e}");
        }
        let a = schedule.weights_at(t);
        x = (0..n)
            .map(|i| a.row(i).iter().zip(&x).map(|(w, v)| w * v).sum())
            .collect();
    }
    println!("mean {mean}, final {:.6?}", x);
    Ok(())
}
