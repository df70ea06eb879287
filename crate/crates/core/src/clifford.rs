//! Clifford elements as conjugation tableaux.
//!
//! Every gate acts on Pauli operators by conjugation `p ↦ g p g†`. A
//! [`CliffordTableau`] stores the images of the `2n` generators `X_k`, `Z_k`
//! as Hermitian Paulis with a sign, which determines the action on every
//! Pauli and identifies the element modulo global phase.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::pauli::{PauliLabel, PhasedPauli, MAX_DENSE_QUBITS};

/// Largest register for which the whole group is enumerated.
pub const MAX_ENUMERATED_QUBITS: usize = 2;

/// Elementary Clifford gates. Qubit indices are 0-based.
///
/// `R = S·H` and `R2 = R·R`, so conjugation by `R` cycles `X → Z → Y → X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    R(usize),
    R2(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// `R^power` for `power` in {0, 1, 2}; `None` for the identity power.
    pub fn r_power(qubit: usize, power: u8) -> Option<Gate> {
        match power % 3 {
            0 => None,
            1 => Some(Gate::R(qubit)),
            _ => Some(Gate::R2(qubit)),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n {
                Ok(())
            } else {
                Err(Error::Domain(format!("qubit {} out of range for n = {n}", q + 1)))
            }
        };
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::R(q) | Gate::R2(q) => check(q),
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::Domain("CNOT control equals target".into()));
                }
                Ok(())
            }
        }
    }

    /// Phase-free action on a label. The gate must be valid for the label's register.
    pub fn apply_to_label(&self, p: &mut PauliLabel) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                p.set_bits(q, z, x);
            }
            Gate::S(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                p.set_bits(q, x, z ^ x);
            }
            Gate::R(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                p.set_bits(q, z, x ^ z);
            }
            Gate::R2(q) => {
                // R∘R: (x, z) ↦ (z, x⊕z) ↦ (x⊕z, x)
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                p.set_bits(q, x ^ z, x);
            }
            Gate::Cnot { control, target } => {
                let (xc, zc) = (p.x_bit(control), p.z_bit(control));
                let (xt, zt) = (p.x_bit(target), p.z_bit(target));
                p.set_bits(target, xt ^ xc, zt);
                p.set_bits(control, xc, zc ^ zt);
            }
        }
    }

    fn single_qubit_matrix(&self) -> Option<[Complex64; 4]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        let h = [o * s, o * s, o * s, -o * s];
        let sg = [o, z, z, i];
        let mul = |a: [Complex64; 4], b: [Complex64; 4]| {
            [
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ]
        };
        match self {
            Gate::H(_) => Some(h),
            Gate::S(_) => Some(sg),
            Gate::R(_) => Some(mul(sg, h)),
            Gate::R2(_) => {
                let r = mul(sg, h);
                Some(mul(r, r))
            }
            Gate::Cnot { .. } => None,
        }
    }

    /// Dense unitary on `n` qubits; qubit 0 is the leftmost tensor factor.
    pub fn unitary(&self, n: usize) -> Result<DenseMatrix> {
        self.validate(n)?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity(format!("dense gate needs n <= {MAX_DENSE_QUBITS}")));
        }
        let dim = 1usize << n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let mut m = DenseMatrix::zeros(dim, dim);
        match (*self, self.single_qubit_matrix()) {
            (Gate::Cnot { control, target }, _) => {
                for b in 0..dim {
                    let row = if b & bit(control) != 0 { b ^ bit(target) } else { b };
                    m[(row, b)] = Complex64::new(1.0, 0.0);
                }
            }
            (Gate::H(q) | Gate::S(q) | Gate::R(q) | Gate::R2(q), Some(u)) => {
                let qb = bit(q);
                for col in 0..dim {
                    let cbit = usize::from(col & qb != 0);
                    for rbit in 0..2 {
                        let row = if rbit == 1 { col | qb } else { col & !qb };
                        m[(row, col)] = u[rbit * 2 + cbit];
                    }
                }
            }
            _ => unreachable!(),
        }
        Ok(m)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {}", q + 1),
            Gate::S(q) => write!(f, "S {}", q + 1),
            Gate::R(q) => write!(f, "R {}", q + 1),
            Gate::R2(q) => write!(f, "R2 {}", q + 1),
            Gate::Cnot { control, target } => write!(f, "CNOT {} {}", control + 1, target + 1),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    /// Parses the one-line text form, e.g. `H 1` or `CNOT 2 1` (1-based qubits).
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::Parse("empty gate line".into()))?
            .to_ascii_uppercase();
        let mut qubit = || -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing qubit in {s:?}")))?;
            let q: usize = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit index {tok:?}")))?;
            q.checked_sub(1)
                .ok_or_else(|| Error::Parse("qubit indices are 1-based".into()))
        };
        let gate = match name.as_str() {
            "H" => Gate::H(qubit()?),
            "S" => Gate::S(qubit()?),
            "R" => Gate::R(qubit()?),
            "R2" => Gate::R2(qubit()?),
            "CNOT" => {
                let control = qubit()?;
                let target = qubit()?;
                Gate::Cnot { control, target }
            }
            other => return Err(Error::Parse(format!("unknown gate {other:?}"))),
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("trailing tokens in {s:?}")));
        }
        Ok(gate)
    }
}

/// Exact conjugation `g p g†`, phase included.
///
/// With the operator written as `i^k X^x Z^z`: `H` swaps x and z and adds
/// `2xz` to k; `S` adds x to z and x to k; `CNOT` moves x from control to
/// target and z from target to control with no phase.
pub fn conjugate_gate(g: Gate, p: &PhasedPauli) -> Result<PhasedPauli> {
    g.validate(p.label.num_qubits())?;
    Ok(conjugate_unchecked(g, p))
}

fn conjugate_unchecked(g: Gate, p: &PhasedPauli) -> PhasedPauli {
    let mut label = p.label.clone();
    let mut phase = p.phase();
    let h = |label: &mut PauliLabel, phase: &mut u8, q: usize| {
        let (x, z) = (label.x_bit(q), label.z_bit(q));
        *phase += 2 * u8::from(x && z);
        label.set_bits(q, z, x);
    };
    let s = |label: &mut PauliLabel, phase: &mut u8, q: usize| {
        let (x, z) = (label.x_bit(q), label.z_bit(q));
        *phase += u8::from(x);
        label.set_bits(q, x, z ^ x);
    };
    match g {
        Gate::H(q) => h(&mut label, &mut phase, q),
        Gate::S(q) => s(&mut label, &mut phase, q),
        Gate::R(q) => {
            h(&mut label, &mut phase, q);
            s(&mut label, &mut phase, q);
        }
        Gate::R2(q) => {
            for _ in 0..2 {
                h(&mut label, &mut phase, q);
                s(&mut label, &mut phase, q);
            }
        }
        Gate::Cnot { .. } => g.apply_to_label(&mut label),
    }
    PhasedPauli::new(label, phase & 3)
}

/// Dense `g_m ⋯ g_1` for the sequence `[g_1, …, g_m]`.
pub fn circuit_unitary(n: usize, gates: &[Gate]) -> Result<DenseMatrix> {
    let dim = 1usize << n;
    let mut u = DenseMatrix::identity(dim, dim);
    for g in gates {
        u = g.unitary(n)? * u;
    }
    Ok(u)
}

/// One gate per line in the text form of [`Gate`].
pub fn format_gates(gates: &[Gate]) -> String {
    gates.iter().map(|g| format!("{g}\n")).collect()
}

/// Parses one gate per line; blank lines and `#` comments are skipped.
pub fn parse_gates(text: &str) -> Result<Vec<Gate>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

/// Conjugation action of a Clifford element modulo global phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    // images of X_0..X_{n-1} followed by Z_0..Z_{n-1}
    images: Vec<PhasedPauli>,
}

fn generator(n: usize, index: usize) -> PhasedPauli {
    let mut label = PauliLabel::identity(n);
    if index < n {
        label.set_bits(index, true, false);
    } else {
        label.set_bits(index - n, false, true);
    }
    PhasedPauli::new(label, 0)
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            images: (0..2 * n).map(|i| generator(n, i)).collect(),
        }
    }

    /// Tableau of applying `gates` in order, so that the action on any Pauli
    /// equals folding [`conjugate_gate`] over the sequence.
    pub fn from_gates(n: usize, gates: &[Gate]) -> Result<Self> {
        let mut t = Self::identity(n);
        for &g in gates {
            t = t.then_gate(g)?;
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// This element followed by `g`.
    pub fn then_gate(&self, g: Gate) -> Result<Self> {
        g.validate(self.n)?;
        Ok(Self {
            n: self.n,
            images: self.images.iter().map(|p| conjugate_unchecked(g, p)).collect(),
        })
    }

    /// This element followed by `other`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let images = self
            .images
            .iter()
            .map(|p| other.apply(p))
            .collect::<Result<_>>()?;
        Ok(Self { n: self.n, images })
    }

    pub fn apply(&self, p: &PhasedPauli) -> Result<PhasedPauli> {
        let n = p.label.num_qubits();
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        let mut acc = PhasedPauli::new(PauliLabel::identity(n), p.phase());
        for q in 0..n {
            if p.label.x_bit(q) {
                acc = acc.mul(&self.images[q])?;
            }
            if p.label.z_bit(q) {
                acc = acc.mul(&self.images[n + q])?;
            }
        }
        Ok(acc)
    }

    pub fn apply_label(&self, label: &PauliLabel) -> Result<PauliLabel> {
        Ok(self.apply(&PhasedPauli::new(label.clone(), 0))?.label)
    }

    /// `2n × 2n` binary matrix; column `j` is the image of generator `j`
    /// (`X_0..X_{n-1}, Z_0..Z_{n-1}`), rows are its x bits then its z bits.
    pub fn symplectic_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n;
        (0..2 * n)
            .map(|row| {
                self.images
                    .iter()
                    .map(|img| {
                        let bit = if row < n { img.label.x_bit(row) } else { img.label.z_bit(row - n) };
                        u8::from(bit)
                    })
                    .collect()
            })
            .collect()
    }

    /// Sign bit of each generator image relative to its Hermitian Pauli.
    pub fn signs(&self) -> Vec<bool> {
        self.images.iter().map(|p| p.relative_phase() == 2).collect()
    }

    pub fn preserves_symplectic_form(&self) -> bool {
        let n = self.n;
        (0..2 * n).all(|i| {
            (0..2 * n).all(|j| {
                let expect = u8::from(i % n == j % n && (i < n) != (j < n));
                self.images[i].label.symplectic_product(&self.images[j].label).ok() == Some(expect)
            })
        }) && self.images.iter().all(|p| p.relative_phase() % 2 == 0)
    }

    fn symplectic_key(&self) -> Vec<PauliLabel> {
        self.images.iter().map(|p| p.label.clone()).collect()
    }
}

/// A group element with a gate word realizing it.
#[derive(Debug, Clone)]
pub struct CliffordElement {
    pub tableau: CliffordTableau,
    pub gates: Vec<Gate>,
}

impl CliffordElement {
    /// Dense `V` with `V P V† = tableau.apply(P)`, up to global phase.
    pub fn unitary(&self) -> Result<DenseMatrix> {
        circuit_unitary(self.tableau.num_qubits(), &self.gates)
    }
}

fn generating_gates(n: usize) -> Vec<Gate> {
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(Gate::H(q));
        gens.push(Gate::S(q));
    }
    for control in 0..n {
        for target in 0..n {
            if control != target {
                gens.push(Gate::Cnot { control, target });
            }
        }
    }
    gens
}

/// The Clifford group on `n ≤ 2` qubits modulo global phase, by breadth-first
/// closure of `{H_k, S_k, CNOT_jk}` deduplicated on tableaux.
pub fn enumerate_clifford(n: usize) -> Result<Vec<CliffordElement>> {
    if n == 0 || n > MAX_ENUMERATED_QUBITS {
        return Err(Error::Capacity(format!(
            "Clifford enumeration supports 1 <= n <= {MAX_ENUMERATED_QUBITS}, got {n}"
        )));
    }
    let gens = generating_gates(n);
    let root = CliffordTableau::identity(n);
    let mut seen: HashMap<CliffordTableau, usize> = HashMap::new();
    let mut elements = vec![CliffordElement {
        tableau: root.clone(),
        gates: Vec::new(),
    }];
    seen.insert(root, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &g in &gens {
            let next = elements[i].tableau.then_gate(g)?;
            if seen.contains_key(&next) {
                continue;
            }
            let mut gates = elements[i].gates.clone();
            gates.push(g);
            seen.insert(next.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(CliffordElement { tableau: next, gates });
        }
    }
    Ok(elements)
}

/// One representative per coset of the Pauli subgroup: elements sharing a
/// symplectic matrix differ only by Pauli conjugation signs.
pub fn coset_representatives(elements: &[CliffordElement]) -> Vec<CliffordElement> {
    let mut seen = std::collections::HashSet::new();
    elements
        .iter()
        .filter(|e| seen.insert(e.tableau.symplectic_key()))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::max_abs_diff;
    use crate::pauli::Pauli;

    fn all_gates(n: usize) -> Vec<Gate> {
        let mut gates = Vec::new();
        for q in 0..n {
            gates.extend([Gate::H(q), Gate::S(q), Gate::R(q), Gate::R2(q)]);
        }
        gates.extend(generating_gates(n).into_iter().filter(|g| matches!(g, Gate::Cnot { .. })));
        gates
    }

    #[test]
    fn conjugate_gate_matches_dense_exactly() {
        for n in 1..=2 {
            for g in all_gates(n) {
                let u = g.unitary(n).unwrap();
                for label in PauliLabel::all(n) {
                    for phase in 0..4 {
                        let p = PhasedPauli::new(label.clone(), phase);
                        let dense = &u * p.to_dense().unwrap() * u.adjoint();
                        let fast = conjugate_gate(g, &p).unwrap().to_dense().unwrap();
                        assert!(max_abs_diff(&dense, &fast) < 1e-15, "{g} on {label}");
                    }
                }
            }
        }
    }

    #[test]
    fn r_cycles_x_z_y() {
        let mut p = PauliLabel::single(1, 0, Pauli::X);
        let mut seen = vec![];
        for _ in 0..3 {
            Gate::R(0).apply_to_label(&mut p);
            seen.push(p.get(0));
        }
        assert_eq!(seen, vec![Pauli::Z, Pauli::Y, Pauli::X]);
    }

    #[test]
    fn cnot_examples() {
        let g = Gate::Cnot { control: 1, target: 0 };
        let x2 = PhasedPauli::hermitian("IX".parse().unwrap());
        assert_eq!(conjugate_gate(g, &x2).unwrap().label.to_string(), "XX");
        let z1 = PhasedPauli::hermitian("ZI".parse().unwrap());
        assert_eq!(conjugate_gate(g, &z1).unwrap().label.to_string(), "ZZ");
    }

    #[test]
    fn gates_fix_identity_and_reject_bad_qubits() {
        for g in all_gates(2) {
            let id = PhasedPauli::identity(2);
            assert_eq!(conjugate_gate(g, &id).unwrap(), id);
        }
        assert!(conjugate_gate(Gate::H(2), &PhasedPauli::identity(2)).is_err());
        let bad = Gate::Cnot { control: 1, target: 1 };
        assert!(conjugate_gate(bad, &PhasedPauli::identity(2)).is_err());
    }

    #[test]
    fn label_rules_match_phased_rules() {
        for g in all_gates(2) {
            for label in PauliLabel::all(2) {
                let mut fast = label.clone();
                g.apply_to_label(&mut fast);
                let slow = conjugate_gate(g, &PhasedPauli::new(label, 0)).unwrap().label;
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn tableau_from_gates_examples() {
        assert_eq!(CliffordTableau::from_gates(1, &[]).unwrap(), CliffordTableau::identity(1));
        assert_eq!(
            CliffordTableau::from_gates(1, &[Gate::H(0), Gate::H(0)]).unwrap(),
            CliffordTableau::identity(1)
        );
        let seq = [Gate::H(0), Gate::S(0)];
        let t = CliffordTableau::from_gates(1, &seq).unwrap();
        for label in PauliLabel::all(1) {
            let p = PhasedPauli::hermitian(label);
            let folded = seq
                .iter()
                .try_fold(p.clone(), |acc, &g| conjugate_gate(g, &acc))
                .unwrap();
            assert_eq!(t.apply(&p).unwrap(), folded);
        }
    }

    #[test]
    fn tableau_matches_folding_exhaustively_n3() {
        let gates = [
            Gate::H(0),
            Gate::Cnot { control: 0, target: 2 },
            Gate::S(1),
            Gate::R(2),
            Gate::Cnot { control: 2, target: 1 },
            Gate::R2(0),
        ];
        let t = CliffordTableau::from_gates(3, &gates).unwrap();
        for label in PauliLabel::all(3) {
            for phase in 0..4 {
                let p = PhasedPauli::new(label.clone(), phase);
                let folded = gates.iter().try_fold(p.clone(), |acc, &g| conjugate_gate(g, &acc)).unwrap();
                assert_eq!(t.apply(&p).unwrap(), folded);
            }
        }
        assert!(t.preserves_symplectic_form());
    }

    #[test]
    fn composition_is_associative_with_identity_neutral() {
        let a = CliffordTableau::from_gates(2, &[Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap();
        let b = CliffordTableau::from_gates(2, &[Gate::S(1), Gate::R(0)]).unwrap();
        let c = CliffordTableau::from_gates(2, &[Gate::Cnot { control: 1, target: 0 }, Gate::S(0)]).unwrap();
        let id = CliffordTableau::identity(2);
        assert_eq!(a.then(&b).unwrap().then(&c).unwrap(), a.then(&b.then(&c).unwrap()).unwrap());
        assert_eq!(a.then(&id).unwrap(), a);
        assert_eq!(id.then(&a).unwrap(), a);
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_clifford(1).unwrap().len(), 24);
        assert_eq!(enumerate_clifford(2).unwrap().len(), 11520);
        assert!(matches!(enumerate_clifford(3), Err(Error::Capacity(_))));
    }

    #[test]
    fn enumerated_elements_are_symplectic_and_fix_identity() {
        for n in 1..=2 {
            let group = enumerate_clifford(n).unwrap();
            for e in &group {
                assert!(e.tableau.preserves_symplectic_form());
                assert!(e.tableau.apply_label(&PauliLabel::identity(n)).unwrap().is_identity());
            }
            let cosets = coset_representatives(&group);
            assert_eq!(cosets.len() * (1 << (2 * n)), group.len());
        }
    }

    #[test]
    fn enumerated_words_realize_their_tableaux() {
        let group = enumerate_clifford(1).unwrap();
        for e in &group {
            let u = e.unitary().unwrap();
            for label in PauliLabel::all(1) {
                let p = PhasedPauli::hermitian(label);
                let dense = &u * p.to_dense().unwrap() * u.adjoint();
                let fast = e.tableau.apply(&p).unwrap().to_dense().unwrap();
                assert!(max_abs_diff(&dense, &fast) < 1e-12);
            }
        }
    }

    #[test]
    fn group_hits_nonidentity_labels_uniformly() {
        for n in 1..=2 {
            let group = enumerate_clifford(n).unwrap();
            let size = 1usize << (2 * n);
            let mut counts = vec![vec![0usize; size]; size];
            for e in &group {
                for label in PauliLabel::all(n) {
                    let img = e.tableau.apply_label(&label).unwrap();
                    counts[label.index()][img.index()] += 1;
                }
            }
            let each = group.len() / (size - 1);
            for row in &counts[1..] {
                assert_eq!(row[0], 0);
                assert!(row[1..].iter().all(|&c| c == each));
            }
        }
    }

    #[test]
    fn gate_text_round_trips() {
        let gates = vec![Gate::H(0), Gate::S(2), Gate::R(1), Gate::R2(0), Gate::Cnot { control: 1, target: 0 }];
        let text = format_gates(&gates);
        assert_eq!(text, "H 1\nS 3\nR 2\nR2 1\nCNOT 2 1\n");
        assert_eq!(parse_gates(&text).unwrap(), gates);
        assert!(parse_gates("H 0").is_err());
        assert!(parse_gates("T 1").is_err());
        assert!(parse_gates("CNOT 1").is_err());
    }
}
