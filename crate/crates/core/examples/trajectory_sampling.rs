//! Sampled label trajectories at sizes far beyond the exact chain.

use twodesign::approx::{convergence_trajectories, sample_design_unitary, uniform_nonidentity_marginal};
use twodesign::rng::stream_rng;

fn main() -> twodesign::Result<()> {
    let n = 64;
    let mut start = twodesign::PauliLabel::identity(n);
    start.set(0, twodesign::Pauli::X);
    let rep = convergence_trajectories(&start, 12, 20_000, 3)?;
    let (pi, px) = uniform_nonidentity_marginal(n);
    println!("n = {n}, target single-qubit marginal I {pi:.4}, X/Y/Z {px:.4}");
    for r in [0, 1, 2, 4, 8, 12] {
        println!(
            "  r = {r:>2}  worst marginal tvd {:.4}  mean gates {:.1}",
            rep.marginal_tvd(r),
            rep.gate_count_mean[r]
        );
    }

    let circ = sample_design_unitary(3, 1, &mut stream_rng(3, 1))?;
    println!("a sampled n = 3 design element ({} gates):\n{}", circ.gate_count(), circ.to_text());
    Ok(())
}
