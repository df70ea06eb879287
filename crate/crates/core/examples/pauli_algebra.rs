//! Pauli labels, phased products, and Pauli expansions of dense operators.

use twodesign::pauli::{expand, PauliLabel, PhasedPauli};

fn main() -> twodesign::Result<()> {
    let x: PauliLabel = "XIZ".parse()?;
    let y: PauliLabel = "ZIZ".parse()?;
    println!("{x} and {y}: symplectic product {}", x.symplectic_product(&y)?);
    println!("label product {}", x.product(&y)?);

    let px = PhasedPauli::hermitian("X".parse()?);
    let pz = PhasedPauli::hermitian("Z".parse()?);
    let xz = px.mul(&pz)?;
    println!("X·Z = i^{} {} (relative to the Hermitian Y)", xz.relative_phase(), xz.label);

    let h = (PauliLabel::single(1, 0, twodesign::Pauli::X).to_dense()?
        + PauliLabel::single(1, 0, twodesign::Pauli::Z).to_dense()?)
        / num_complex::Complex64::new(2f64.sqrt(), 0.0);
    let coeffs = expand(&h)?;
    for label in PauliLabel::all(1) {
        println!("Hadamard coefficient on {label}: {:.6}", coeffs.get(&label));
    }

    let wide = PauliLabel::single(130, 129, twodesign::Pauli::Y);
    println!("{}-qubit label {}...{} has weight {}", wide.num_qubits(), &wide.to_string()[..4], &wide.to_string()[126..], wide.weight());
    Ok(())
}
