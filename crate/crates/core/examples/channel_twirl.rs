//! Pauli-twirl a channel, uniformize it, and read off the depolarizing parameter.

use twodesign::dense::{exact_average_fidelity, haar_channel_twirl, KrausChannel};
use twodesign::twirl::{clifford_uniformize, depolarizing_parameter, pauli_twirl_channel};
use twodesign::PauliLabel;

fn main() -> twodesign::Result<()> {
    let channels = [
        ("dephasing 0.5", KrausChannel::dephasing(0.5)?),
        ("amplitude damping 0.5", KrausChannel::amplitude_damping(0.5)?),
        ("random, 3 Kraus ops", KrausChannel::random(2, 3, &mut twodesign::rng::stream_rng(1, 0))?),
    ];
    for (name, ch) in &channels {
        let dist = pauli_twirl_channel(ch)?;
        let uni = clifford_uniformize(&dist);
        println!("{name}");
        for (i, (w, u)) in dist.weights().iter().zip(uni.weights()).enumerate().take(4) {
            println!("  {:<3} twirled {w:.6}  uniformized {u:.6}", PauliLabel::from_index(ch.num_qubits(), i));
        }
        println!(
            "  p = {:.6} (Haar twirl {:.6}), average fidelity {:.6}",
            depolarizing_parameter(&dist),
            haar_channel_twirl(ch)?.p,
            exact_average_fidelity(ch)?
        );
    }
    Ok(())
}
