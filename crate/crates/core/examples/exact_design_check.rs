//! The enumerated Clifford group reproduces the Haar twirl exactly; the
//! sampled approximate design reproduces it up to Monte Carlo error.

use twodesign::approx::sample_design_ensemble;
use twodesign::dense::{ensemble_twirl_map, haar_twirl_map, max_abs_diff, random_matrix, random_unit_matrix, Ensemble};
use twodesign::enumerate_clifford;
use twodesign::rng::stream_rng;

fn main() -> twodesign::Result<()> {
    let mut rng = stream_rng(7, 0);
    for n in 1..=2 {
        let members = enumerate_clifford(n)?.iter().map(|e| e.unitary()).collect::<twodesign::Result<Vec<_>>>()?;
        let ens = Ensemble::uniform(members)?;
        let d = 1 << n;
        let (a, b, x) = (random_matrix(d, &mut rng), random_matrix(d, &mut rng), random_matrix(d, &mut rng));
        let dev = max_abs_diff(&ensemble_twirl_map(&ens, &a, &b, &x)?, &haar_twirl_map(&a, &b, &x)?);
        println!("exact design n = {n} ({} elements): deviation {dev:.2e}", ens.len());
    }

    let samples = 20_000;
    let ens = sample_design_ensemble(2, 10, samples, &mut rng)?;
    let (a, b, x) = (random_unit_matrix(4, &mut rng), random_unit_matrix(4, &mut rng), random_unit_matrix(4, &mut rng));
    let dev = max_abs_diff(&ensemble_twirl_map(&ens, &a, &b, &x)?, &haar_twirl_map(&a, &b, &x)?);
    println!(
        "approximate design n = 2, r = 10, {samples} samples: deviation {dev:.2e} (5/sqrt(M) = {:.2e})",
        5.0 / (samples as f64).sqrt()
    );
    Ok(())
}
