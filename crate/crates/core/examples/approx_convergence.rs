//! Exact label-distribution chain of the repeated basic procedure.

use twodesign::approx::{convergence_exact, expected_gate_count, BasicProcedureInstance};
use twodesign::rng::stream_rng;

fn main() -> twodesign::Result<()> {
    let inst = BasicProcedureInstance::sample(4, &mut stream_rng(5, 0))?;
    println!("one sampled repetition at n = 4 ({} gates):", inst.gate_count());
    for g in inst.gates() {
        println!("  {g}");
    }
    println!("expected gates per repetition at n = 4: {:.3}", expected_gate_count(4));

    for start in ["XI", "XII", "ZIZI"] {
        let rep = convergence_exact(&start.parse()?, 12)?;
        println!("start {start}: very-good probability {:.4}, fitted c {:.3e}", rep.very_good_prob, rep.fitted_c);
        for r in [0, 1, 2, 4, 8, 12] {
            println!("  r = {r:>2}  tvd {:.3e}  bound {:.3e}", rep.tvd_per_rep[r], rep.envelope(r));
        }
    }
    Ok(())
}
