//! Gate conjugation rules, tableaux, and the enumerated Clifford groups at n = 1, 2.

use twodesign::clifford::{coset_representatives, enumerate_clifford, CliffordTableau, Gate};
use twodesign::{conjugate_gate, PhasedPauli};

fn main() -> twodesign::Result<()> {
    for g in [Gate::H(0), Gate::S(0), Gate::R(0)] {
        let img = conjugate_gate(g, &PhasedPauli::hermitian("X".parse()?))?;
        println!("{g}: X -> i^{} {}", img.relative_phase(), img.label);
    }

    let bell = CliffordTableau::from_gates(2, &[Gate::H(0), Gate::Cnot { control: 0, target: 1 }])?;
    for p in ["XI", "ZI", "IX", "IZ"] {
        println!("Bell circuit maps {p} to {}", bell.apply_label(&p.parse()?)?);
    }

    for n in 1..=2 {
        let group = enumerate_clifford(n)?;
        let cosets = coset_representatives(&group);
        println!("n = {n}: {} elements modulo phase, {} Pauli cosets", group.len(), cosets.len());
    }
    match enumerate_clifford(3) {
        Err(e) => println!("n = 3: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
