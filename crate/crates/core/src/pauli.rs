//! n-qubit Pauli operators in the symplectic bit-vector representation.
//!
//! A [`PauliLabel`] is a pair of bit strings `(x, z)` standing for the
//! operator `∏_k X_k^{x_k} Z_k^{z_k}` modulo phase. Qubit `k` (0-based) lives
//! in bit `k % 64` of word `k / 64`. Labels index dense distribution vectors
//! through `index = (x << n) | z`, so the identity is index 0.
//!
//! [`PhasedPauli`] carries an extra `i^phase` factor and is only needed where
//! exact dense cross-checks care about phases; channel-level code works with
//! bare labels.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{check_dims, Error, Result};

/// Largest register that may be materialized as a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest register for the O(16ⁿ) Pauli expansion.
pub const MAX_EXPAND_QUBITS: usize = 8;
/// Largest register whose labels fit a `usize` index.
pub const MAX_INDEXED_QUBITS: usize = 31;

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub const fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Phase-free n-qubit Pauli label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliLabel {
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "a Pauli label needs at least one qubit");
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    /// Label with `p` on qubit `qubit` and identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut label = Self::identity(n);
        label.set(qubit, p);
        label
    }

    /// Inverse of [`PauliLabel::index`].
    ///
    /// Panics if `n` exceeds [`MAX_INDEXED_QUBITS`] or `index >= 4ⁿ`.
    pub fn from_index(n: usize, index: usize) -> Self {
        assert!(n <= MAX_INDEXED_QUBITS, "register too large to index");
        assert!(index < 1usize << (2 * n), "label index out of range");
        let mut label = Self::identity(n);
        let mask = (1usize << n) - 1;
        label.x[0] = ((index >> n) & mask) as u64;
        label.z[0] = (index & mask) as u64;
        label
    }

    /// Position of this label in a dense distribution vector.
    pub fn index(&self) -> usize {
        assert!(self.n <= MAX_INDEXED_QUBITS, "register too large to index");
        ((self.x[0] as usize) << self.n) | self.z[0] as usize
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        debug_assert!(qubit < self.n);
        (self.x[qubit / 64] >> (qubit % 64)) & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        debug_assert!(qubit < self.n);
        (self.z[qubit / 64] >> (qubit % 64)) & 1 == 1
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(qubit), self.z_bit(qubit))
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.set_bits(qubit, x, z);
    }

    pub(crate) fn set_bits(&mut self, qubit: usize, x: bool, z: bool) {
        assert!(qubit < self.n, "qubit {qubit} out of range for n = {}", self.n);
        let (w, b) = (qubit / 64, qubit % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// `(x·z' + z·x') mod 2`: 0 when the operators commute, 1 when they anticommute.
    pub fn symplectic_product(&self, other: &Self) -> Result<u8> {
        check_dims(self.n, other.n)?;
        let ones: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((xa, za), (xb, zb))| ((xa & zb) ^ (za & xb)).count_ones())
            .sum();
        Ok((ones & 1) as u8)
    }

    /// Label of the product, ignoring phase.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_dims(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Number of qubits carrying a `Y` factor.
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones())
            .sum()
    }

    /// All 4ⁿ labels in index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliLabel> {
        assert!(n <= MAX_INDEXED_QUBITS);
        (0..1usize << (2 * n)).map(move |i| PauliLabel::from_index(n, i))
    }

    /// Masks over the dense basis index; qubit 0 is the most significant bit.
    fn basis_masks(&self) -> (usize, usize) {
        let (mut xm, mut zm) = (0usize, 0usize);
        for q in 0..self.n {
            let bit = 1usize << (self.n - 1 - q);
            if self.x_bit(q) {
                xm |= bit;
            }
            if self.z_bit(q) {
                zm |= bit;
            }
        }
        (xm, zm)
    }

    /// Hermitian dense matrix of this label (`Y` rather than `XZ` on each factor).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        PhasedPauli::hermitian(self.clone()).to_dense()
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli label".into()));
        }
        let mut label = PauliLabel::identity(s.chars().count());
        for (q, c) in s.chars().enumerate() {
            let p = match c.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("invalid Pauli symbol {other:?}"))),
            };
            label.set(q, p);
        }
        Ok(label)
    }
}

/// `i^phase · ∏_k X_k^{x_k} Z_k^{z_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub label: PauliLabel,
    phase: u8,
}

impl PhasedPauli {
    pub fn new(label: PauliLabel, phase: u8) -> Self {
        Self {
            label,
            phase: phase & 3,
        }
    }

    /// The Hermitian representative of `label`, i.e. `Y = i·XZ` on every `Y` factor.
    pub fn hermitian(label: PauliLabel) -> Self {
        let phase = (label.y_count() & 3) as u8;
        Self { label, phase }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(PauliLabel::identity(n), 0)
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Phase relative to the Hermitian representative: the operator equals
    /// `i^k · hermitian(label)` with `k` returned here.
    pub fn relative_phase(&self) -> u8 {
        self.phase.wrapping_sub((self.label.y_count() & 3) as u8) & 3
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let label = self.label.product(&other.label)?;
        // Z^{z_p} X^{x_q} = (-1)^{z_p · x_q} X^{x_q} Z^{z_p}
        let swaps: u32 = self
            .label
            .z
            .iter()
            .zip(&other.label.x)
            .map(|(z, x)| (z & x).count_ones())
            .sum();
        let phase = (self.phase as u32 + other.phase as u32 + 2 * (swaps & 1)) & 3;
        Ok(Self::new(label, phase as u8))
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let n = self.label.n;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity(format!(
                "dense Pauli needs n <= {MAX_DENSE_QUBITS}, got {n}"
            )));
        }
        let dim = 1usize << n;
        let (xm, zm) = self.label.basis_masks();
        let global = i_pow(self.phase);
        let mut m = DenseMatrix::zeros(dim, dim);
        for col in 0..dim {
            let sign = if (zm & col).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(col ^ xm, col)] = global * sign;
        }
        Ok(m)
    }
}

pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Expansion `A = Σ_a alpha_a P_a` over Hermitian Pauli labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    pub n: usize,
    pub alpha: Vec<Complex64>,
}

impl PauliCoefficients {
    pub fn get(&self, label: &PauliLabel) -> Complex64 {
        self.alpha[label.index()]
    }

    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        let dim = 1usize << self.n;
        let mut out = DenseMatrix::zeros(dim, dim);
        for (i, a) in self.alpha.iter().enumerate() {
            if *a != Complex64::new(0.0, 0.0) {
                out += PauliLabel::from_index(self.n, i).to_dense()? * *a;
            }
        }
        Ok(out)
    }
}

/// Qubit count of a `2ⁿ × 2ⁿ` matrix.
pub fn qubits_of(a: &DenseMatrix) -> Result<usize> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: c,
        });
    }
    if r == 0 || !r.is_power_of_two() {
        return Err(Error::Domain(format!("dimension {r} is not a power of two")));
    }
    Ok(r.trailing_zeros() as usize)
}

/// `Tr(P A)` for the Hermitian Pauli `P` of `label`, in O(D).
pub fn pauli_trace(label: &PauliLabel, a: &DenseMatrix) -> Complex64 {
    let dim = 1usize << label.n;
    let (xm, zm) = label.basis_masks();
    let global = i_pow((label.y_count() & 3) as u8);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..dim {
        let v = a[(c, c ^ xm)];
        if (zm & c).count_ones() % 2 == 1 {
            acc -= v;
        } else {
            acc += v;
        }
    }
    acc * global
}

/// Pauli-basis coefficients `alpha_a = Tr(P_a A) / D`.
pub fn expand(a: &DenseMatrix) -> Result<PauliCoefficients> {
    let n = qubits_of(a)?;
    if n > MAX_EXPAND_QUBITS {
        return Err(Error::Capacity(format!(
            "Pauli expansion needs n <= {MAX_EXPAND_QUBITS}, got {n}"
        )));
    }
    let dim = (1usize << n) as f64;
    let alpha = PauliLabel::all(n)
        .map(|label| pauli_trace(&label, a) / dim)
        .collect();
    Ok(PauliCoefficients { n, alpha })
}
