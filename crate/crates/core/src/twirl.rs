//! Channel twirling in the Pauli-label representation.
//!
//! A Pauli twirl turns any channel into a Pauli channel `ρ ↦ Σ_a w_a P_a ρ P_a`,
//! described by a [`PauliDistribution`]. A full Clifford twirl then keeps the
//! identity weight and spreads the rest evenly over the `4ⁿ − 1` non-identity
//! labels, which is the depolarizing channel.

use std::fmt;
use std::str::FromStr;

use crate::dense::{KrausChannel, EXACT_TOL, MAX_BRUTE_QUBITS};
use crate::error::{Error, Result};
use crate::pauli::{expand, PauliLabel};

/// Largest register for dense distribution vectors.
pub const MAX_DISTRIBUTION_QUBITS: usize = 10;
/// Normalization tolerance for sparse channel files.
pub const SPARSE_NORM_TOL: f64 = 1e-9;

/// Weights over all `4ⁿ` labels, indexed by [`PauliLabel::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDistribution {
    n: usize,
    weights: Vec<f64>,
}

impl PauliDistribution {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_DISTRIBUTION_QUBITS {
            return Err(Error::Capacity(format!(
                "distributions support 1 <= n <= {MAX_DISTRIBUTION_QUBITS}, got {n}"
            )));
        }
        if weights.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch {
                expected: 1 << (2 * n),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Validation("non-finite weight".into()));
        }
        Ok(Self { n, weights })
    }

    pub fn point_mass(label: &PauliLabel) -> Result<Self> {
        let n = label.num_qubits();
        let mut d = Self::new(n, vec![0.0; 1 << (2 * n.min(MAX_DISTRIBUTION_QUBITS))])?;
        d.weights[label.index()] = 1.0;
        Ok(d)
    }

    /// Uniform over the non-identity labels, zero on the identity.
    pub fn uniform_nonidentity(n: usize) -> Result<Self> {
        let size = 1usize << (2 * n.min(MAX_DISTRIBUTION_QUBITS));
        let mut w = vec![1.0 / (size - 1) as f64; size];
        w[0] = 0.0;
        Self::new(n, w)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn get(&self, label: &PauliLabel) -> f64 {
        self.weights[label.index()]
    }

    pub fn identity_weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Nonnegative and summing to one within [`EXACT_TOL`].
    pub fn validate_probability(&self) -> Result<()> {
        if let Some(w) = self.weights.iter().find(|&&w| w < -EXACT_TOL) {
            return Err(Error::Validation(format!("negative weight {w}")));
        }
        let total = self.total();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::Validation(format!("weights sum to {total}")));
        }
        Ok(())
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Nonzero entries as a sparse channel.
    pub fn to_sparse(&self) -> SparsePauliChannel {
        SparsePauliChannel {
            n: self.n,
            entries: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| (PauliLabel::from_index(self.n, i), w))
                .collect(),
        }
    }
}

/// Pauli twirl of a CPTP channel: `w_b = Σ_k |α_{k,b}|²` with `α_{k,·}` the
/// Pauli expansion of Kraus operator `k`.
pub fn pauli_twirl_channel(ch: &KrausChannel) -> Result<PauliDistribution> {
    ch.ensure_cptp()?;
    let n = ch.num_qubits();
    if n > MAX_BRUTE_QUBITS {
        return Err(Error::Capacity(format!(
            "dense Pauli twirl needs n <= {MAX_BRUTE_QUBITS}, got {n}"
        )));
    }
    let mut weights = vec![0.0; 1 << (2 * n)];
    for a in ch.kraus() {
        for (w, al) in weights.iter_mut().zip(expand(a)?.alpha) {
            *w += al.norm_sqr();
        }
    }
    PauliDistribution::new(n, weights)
}

/// Exact Clifford twirl of a Pauli channel.
pub fn clifford_uniformize(d: &PauliDistribution) -> PauliDistribution {
    let mut out = d.clone();
    let rest = d.total() - d.identity_weight();
    let share = rest / (d.weights.len() - 1) as f64;
    out.weights[1..].iter_mut().for_each(|w| *w = share);
    out
}

/// `p = (D² w_I − 1)/(D² − 1)`.
pub fn depolarizing_parameter(d: &PauliDistribution) -> f64 {
    depolarizing_parameter_from_identity(d.n, d.identity_weight())
}

/// Depolarizing parameter from the identity weight alone; valid at any `n`.
pub fn depolarizing_parameter_from_identity(n: usize, identity_weight: f64) -> f64 {
    let d2 = 4f64.powi(n as i32);
    (d2 * identity_weight - 1.0) / (d2 - 1.0)
}

/// Pauli channel stored as `(label, weight)` pairs; unlisted labels are zero.
///
/// Text form: one `<label> <weight>` per line, e.g. `IZ 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePauliChannel {
    n: usize,
    entries: Vec<(PauliLabel, f64)>,
}

impl SparsePauliChannel {
    pub fn new(n: usize, entries: Vec<(PauliLabel, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (label, w) in &entries {
            if label.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: label.num_qubits(),
                });
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Validation(format!("invalid weight {w} for {label}")));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::Validation(format!("duplicate label {label}")));
            }
        }
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > SPARSE_NORM_TOL {
            return Err(Error::Validation(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { n, entries })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(PauliLabel, f64)] {
        &self.entries
    }

    pub fn identity_weight(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(l, _)| l.is_identity())
            .map(|(_, w)| w)
            .sum()
    }

    pub fn depolarizing_parameter(&self) -> f64 {
        depolarizing_parameter_from_identity(self.n, self.identity_weight())
    }

    pub fn to_distribution(&self) -> Result<PauliDistribution> {
        let mut d = PauliDistribution::new(self.n, vec![0.0; 1 << (2 * self.n.min(MAX_DISTRIBUTION_QUBITS))])?;
        for (label, w) in &self.entries {
            d.weights[label.index()] = *w;
        }
        Ok(d)
    }
}

impl FromStr for SparsePauliChannel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut parts = line.split_whitespace();
            let (Some(label), Some(weight), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("expected `<label> <weight>`, got {line:?}")));
            };
            let label: PauliLabel = label.parse()?;
            let weight: f64 = weight
                .parse()
                .map_err(|_| Error::Parse(format!("bad weight {weight:?}")))?;
            entries.push((label, weight));
        }
        let n = entries
            .first()
            .map(|(l, _)| l.num_qubits())
            .ok_or_else(|| Error::Parse("empty Pauli channel".into()))?;
        Self::new(n, entries)
    }
}

impl fmt::Display for SparsePauliChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, w) in &self.entries {
            writeln!(f, "{label} {w}")?;
        }
        Ok(())
    }
}
