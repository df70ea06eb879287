//! Randomized average-fidelity estimation with the exact and approximate designs.

use twodesign::dense::KrausChannel;
use twodesign::fidelity::{
    convert_fidelities, estimate_average_fidelity, required_shots, ApproxSampler, ExactCliffordSampler, NoiseScenario,
};

fn main() -> twodesign::Result<()> {
    let shots = required_shots(0.01, 0.99)?;
    println!("shots for ±0.01 at 99% confidence: {shots} at every n");

    let scenario = NoiseScenario::new(KrausChannel::dephasing(0.5)?)?;
    let exact = scenario.exact_average_fidelity()?;
    let est = estimate_average_fidelity(&scenario, shots, &ExactCliffordSampler::new(1)?, 1, 0.99)?;
    let (_, fg) = convert_fidelities(exact, 2)?;
    println!("dephasing, exact design: {:.4} ± {:.4} (exact {exact:.4}, F_g {fg:.4})", est.mean, est.confidence_radius);

    let padded = scenario.pad(1)?;
    let sampler = ApproxSampler { n: 2, repetitions: 10 };
    let est = estimate_average_fidelity(&padded, shots, &sampler, 2, 0.99)?;
    let exact = padded.exact_average_fidelity()?;
    println!(
        "dephasing on 2 qubits, approximate design: {:.4} ± {:.4} (exact {exact:.4}, F_g {:.4})",
        est.mean,
        est.confidence_radius,
        convert_fidelities(exact, 4)?.1
    );
    Ok(())
}
