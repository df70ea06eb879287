//! Dense small-register linear algebra used as ground truth.
//!
//! Everything here works on explicit `D × D` complex matrices and is meant
//! for `n ≤ 3` (brute-force sums) or `n ≤ 12` (storage). The closed-form
//! Haar twirl replaces numerical integration over the unitary group.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::pauli::{expand, qubits_of, PauliLabel, MAX_DENSE_QUBITS};
use crate::twirl::PauliDistribution;

pub type DenseMatrix = DMatrix<Complex64>;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for unitarity validation of ensemble members.
pub const UNITARY_TOL: f64 = 1e-8;
/// Largest register for O(16ⁿ) brute-force sums.
pub const MAX_BRUTE_QUBITS: usize = 3;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Matrix with entries uniform in the unit square of the complex plane.
pub fn random_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(dim, dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// [`random_matrix`] scaled to unit Frobenius norm.
pub fn random_unit_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseMatrix {
    let m = random_matrix(dim, rng);
    let norm = m.norm();
    m / c(norm, 0.0)
}

fn is_unitary(u: &DenseMatrix, tol: f64) -> bool {
    let dim = u.nrows();
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &DenseMatrix::identity(dim, dim)) <= tol
}

fn check_same_dim(mats: &[&DenseMatrix]) -> Result<usize> {
    let dim = mats[0].nrows();
    for m in mats {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dims(dim, m.nrows())?;
    }
    Ok(dim)
}

/// Closed-form Haar average of `U†AU X U†BU`:
///
/// `Tr(AB)Tr(X)/D · I/D + [D Tr(A)Tr(B) − Tr(AB)] / [D(D²−1)] · (X − Tr(X) I/D)`.
pub fn haar_twirl_map(a: &DenseMatrix, b: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let dim = check_same_dim(&[a, b, x])?;
    if dim < 2 {
        return Err(Error::Domain("Haar twirl needs D >= 2".into()));
    }
    let d = dim as f64;
    let tr_ab = (a * b).trace();
    let tr_x = x.trace();
    let id = DenseMatrix::identity(dim, dim);
    let mixed = &id * (tr_x / d);
    let coeff = (a.trace() * b.trace() * d - tr_ab) / (d * (d * d - 1.0));
    Ok(&id * (tr_ab * tr_x / (d * d)) + (x - mixed) * coeff)
}

/// A finite weighted set of unitaries.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<DenseMatrix>,
    weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(members: Vec<DenseMatrix>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() || members.len() != weights.len() {
            return Err(Error::Validation("ensemble needs one weight per member".into()));
        }
        let refs: Vec<&DenseMatrix> = members.iter().collect();
        check_same_dim(&refs)?;
        if let Some(i) = members.iter().position(|u| !is_unitary(u, UNITARY_TOL)) {
            return Err(Error::Validation(format!("ensemble member {i} is not unitary")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > EXACT_TOL || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Validation(format!("weights must be a distribution, sum = {total}")));
        }
        Ok(Self { members, weights })
    }

    pub fn uniform(members: Vec<DenseMatrix>) -> Result<Self> {
        let w = 1.0 / members.len().max(1) as f64;
        let weights = vec![w; members.len()];
        Self::new(members, weights)
    }

    pub fn dim(&self) -> usize {
        self.members[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DenseMatrix)> {
        self.weights.iter().copied().zip(&self.members)
    }
}

/// `Σ_k w_k U_k†AU_k X U_k†BU_k`.
pub fn ensemble_twirl_map(
    ensemble: &Ensemble,
    a: &DenseMatrix,
    b: &DenseMatrix,
    x: &DenseMatrix,
) -> Result<DenseMatrix> {
    let dim = check_same_dim(&[a, b, x])?;
    check_dims(ensemble.dim(), dim)?;
    let mut out = DenseMatrix::zeros(dim, dim);
    for (w, u) in ensemble.iter() {
        let ud = u.adjoint();
        out += (&ud * a * u * x * &ud * b * u) * c(w, 0.0);
    }
    Ok(out)
}

fn brute_qubits(a: &DenseMatrix) -> Result<usize> {
    let n = qubits_of(a)?;
    if n > MAX_BRUTE_QUBITS {
        return Err(Error::Capacity(format!(
            "brute-force sums need n <= {MAX_BRUTE_QUBITS}, got {n}"
        )));
    }
    Ok(n)
}

/// `(1/D²) Σ_k P_k A P_k X P_k B P_k` by explicit summation.
pub fn brute_pauli_twirl(a: &DenseMatrix, b: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let dim = check_same_dim(&[a, b, x])?;
    let n = brute_qubits(a)?;
    let mut out = DenseMatrix::zeros(dim, dim);
    for label in PauliLabel::all(n) {
        let p = label.to_dense()?;
        out += &p * a * &p * x * &p * b * &p;
    }
    Ok(out / c((dim * dim) as f64, 0.0))
}

/// `Σ_a α_a β_a P_a X P_a` from the Pauli expansions of `A` and `B`.
pub fn pauli_coefficient_twirl(
    a: &DenseMatrix,
    b: &DenseMatrix,
    x: &DenseMatrix,
) -> Result<DenseMatrix> {
    let dim = check_same_dim(&[a, b, x])?;
    brute_qubits(a)?;
    let (alpha, beta) = (expand(a)?, expand(b)?);
    let mut out = DenseMatrix::zeros(dim, dim);
    for (i, (al, be)) in alpha.alpha.iter().zip(&beta.alpha).enumerate() {
        let r = al * be;
        if r.norm() == 0.0 {
            continue;
        }
        let p = PauliLabel::from_index(alpha.n, i).to_dense()?;
        out += (&p * x * &p) * r;
    }
    Ok(out)
}

/// Channel `ρ ↦ Σ_k A_k ρ A_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<DenseMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<DenseMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Validation("a channel needs at least one Kraus operator".into()))?;
        let n = qubits_of(first)?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity(format!("channels need n <= {MAX_DENSE_QUBITS}")));
        }
        let refs: Vec<&DenseMatrix> = ops.iter().collect();
        check_same_dim(&refs)?;
        Ok(Self { n, ops })
    }

    /// [`KrausChannel::new`] plus the trace-preservation check.
    pub fn new_cptp(ops: Vec<DenseMatrix>) -> Result<Self> {
        let ch = Self::new(ops)?;
        ch.ensure_cptp()?;
        Ok(ch)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn kraus(&self) -> &[DenseMatrix] {
        &self.ops
    }

    /// `‖Σ_k A_k†A_k − I‖_max`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim();
        let sum = self.ops.iter().fold(DenseMatrix::zeros(d, d), |acc, a| acc + a.adjoint() * a);
        max_abs_diff(&sum, &DenseMatrix::identity(d, d))
    }

    pub fn ensure_cptp(&self) -> Result<()> {
        let err = self.trace_preservation_error();
        if err > EXACT_TOL {
            return Err(Error::Validation(format!(
                "Kraus operators are not trace preserving (deviation {err:.3e})"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DenseMatrix) -> DenseMatrix {
        let d = self.dim();
        self.ops
            .iter()
            .fold(DenseMatrix::zeros(d, d), |acc, a| acc + a * rho * a.adjoint())
    }

    /// `Σ_k |Tr A_k|²`.
    pub fn trace_weight(&self) -> f64 {
        self.ops.iter().map(|a| a.trace().norm_sqr()).sum()
    }

    pub fn identity(n: usize) -> Result<Self> {
        let d = 1usize << n;
        Self::new(vec![DenseMatrix::identity(d, d)])
    }

    /// Single-qubit dephasing `{√(1−q) I, √q Z}`.
    pub fn dephasing(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("dephasing probability {q} outside [0, 1]")));
        }
        let z = PauliLabel::single(1, 0, crate::pauli::Pauli::Z).to_dense()?;
        Self::new_cptp(vec![
            DenseMatrix::identity(2, 2) * c((1.0 - q).sqrt(), 0.0),
            z * c(q.sqrt(), 0.0),
        ])
    }

    /// Single-qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("damping {gamma} outside [0, 1]")));
        }
        let k0 = DenseMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)]);
        let k1 = DenseMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        Self::new_cptp(vec![k0, k1])
    }

    /// Pauli channel `ρ ↦ Σ_a w_a P_a ρ P_a`.
    pub fn from_pauli_distribution(dist: &PauliDistribution) -> Result<Self> {
        let ops = dist
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| Ok(PauliLabel::from_index(dist.num_qubits(), i).to_dense()? * c(w.sqrt(), 0.0)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    /// Completely depolarizing channel: every Pauli with weight `1/D²`.
    pub fn uniform_pauli(n: usize) -> Result<Self> {
        let size = 1usize << (2 * n);
        Self::from_pauli_distribution(&PauliDistribution::new(n, vec![1.0 / size as f64; size])?)
    }

    /// Random CPTP channel with `k` Kraus operators, cut from a random isometry.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        let d = 1usize << n;
        let stacked = DenseMatrix::from_fn(k * d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = stacked.qr().q();
        let ops = (0..k).map(|i| q.rows(i * d, d).into_owned()).collect();
        Self::new_cptp(ops)
    }

    /// `Λ ⊗ id` on `extra` additional qubits placed after the channel's own.
    pub fn pad(&self, extra: usize) -> Result<Self> {
        let e = 1usize << extra;
        Self::new(self.ops.iter().map(|a| a.kronecker(&DenseMatrix::identity(e, e))).collect())
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            n: self.n,
            cptp: self.trace_preservation_error() <= EXACT_TOL,
            kraus: self
                .ops
                .iter()
                .map(|a| {
                    (0..a.nrows())
                        .map(|r| (0..a.ncols()).map(|col| [a[(r, col)].re, a[(r, col)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ChannelFile>(text)?.into_channel()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// On-disk channel document: `{"n": 1, "cptp": true, "kraus": [[[[re, im], ...], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub n: usize,
    pub cptp: bool,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<KrausChannel> {
        let d = 1usize
            .checked_shl(self.n as u32)
            .filter(|_| self.n <= MAX_DENSE_QUBITS)
            .ok_or_else(|| Error::Capacity(format!("channel file n = {} too large", self.n)))?;
        let ops = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Parse(format!("Kraus operator {k} is not {d}x{d}")));
                }
                Ok(DenseMatrix::from_fn(d, d, |r, col| c(rows[r][col][0], rows[r][col][1])))
            })
            .collect::<Result<Vec<_>>>()?;
        let ch = KrausChannel::new(ops)?;
        if self.cptp {
            ch.ensure_cptp()?;
        }
        Ok(ch)
    }
}

/// `Σ_k (|Tr A_k|² + D) / (D² + D)`, the average of `⟨ψ|Λ(|ψ⟩⟨ψ|)|ψ⟩` over
/// Haar-random pure states.
pub fn exact_average_fidelity(ch: &KrausChannel) -> Result<f64> {
    ch.ensure_cptp()?;
    let d = ch.dim() as f64;
    // the D term is Tr(Σ_k A_k†A_k), counted once for the whole channel
    Ok((ch.trace_weight() + d) / (d * d + d))
}

/// `ρ ↦ p ρ + (1 − p) Tr(ρ) I/D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingChannel {
    pub dim: usize,
    pub p: f64,
}

impl DepolarizingChannel {
    pub fn apply(&self, rho: &DenseMatrix) -> DenseMatrix {
        let d = self.dim;
        rho * c(self.p, 0.0) + DenseMatrix::identity(d, d) * (rho.trace() * (1.0 - self.p) / d as f64)
    }
}

/// Haar twirl of a CPTP channel: depolarizing with `p = (Σ|Tr A_k|² − 1)/(D² − 1)`.
pub fn haar_channel_twirl(ch: &KrausChannel) -> Result<DepolarizingChannel> {
    ch.ensure_cptp()?;
    let dim = ch.dim();
    if dim < 2 {
        return Err(Error::Domain("channel twirl needs D >= 2".into()));
    }
    let d2 = (dim * dim) as f64;
    Ok(DepolarizingChannel {
        dim,
        p: (ch.trace_weight() - 1.0) / (d2 - 1.0),
    })
}

/// Pauli weights of the ensemble twirl `X ↦ Σ_U w_U U†Λ(U X U†)U`, computed by
/// expanding every conjugated Kraus operator `U† A_k U`.
pub fn ensemble_channel_distribution(ch: &KrausChannel, ensemble: &Ensemble) -> Result<PauliDistribution> {
    ch.ensure_cptp()?;
    check_dims(ensemble.dim(), ch.dim())?;
    let n = ch.num_qubits();
    brute_qubits(&ch.ops[0])?;
    let mut weights = vec![0.0; 1 << (2 * n)];
    for (w, u) in ensemble.iter() {
        let ud = u.adjoint();
        for a in &ch.ops {
            let coeff = expand(&(&ud * a * u))?;
            for (acc, al) in weights.iter_mut().zip(&coeff.alpha) {
                *acc += w * al.norm_sqr();
            }
        }
    }
    PauliDistribution::new(n, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::enumerate_clifford;
    use crate::pauli::Pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn clifford_ensemble(n: usize) -> Ensemble {
        let members = enumerate_clifford(n).unwrap().iter().map(|e| e.unitary().unwrap()).collect();
        Ensemble::uniform(members).unwrap()
    }

    #[test]
    fn haar_twirl_examples() {
        let mut r = rng(1);
        let x = random_matrix(4, &mut r);
        let id = DenseMatrix::identity(4, 4);
        assert!(max_abs_diff(&haar_twirl_map(&id, &id, &x).unwrap(), &x) < 1e-12);

        let (a, b) = (random_matrix(4, &mut r), random_matrix(4, &mut r));
        let out = haar_twirl_map(&a, &b, &id).unwrap();
        assert!(max_abs_diff(&out, &(&id * ((&a * &b).trace() / 4.0))) < 1e-12);

        let one = DenseMatrix::identity(1, 1);
        assert!(matches!(haar_twirl_map(&one, &one, &one), Err(Error::Domain(_))));
    }

    #[test]
    fn haar_twirl_of_single_pauli_matches_clifford_average() {
        let mut r = rng(2);
        let x = random_matrix(2, &mut r);
        let p = PauliLabel::single(1, 0, Pauli::Y).to_dense().unwrap();
        let id = DenseMatrix::identity(2, 2);
        let half_trace = &id * (x.trace() / 2.0);
        let expect = &half_trace - (&x - &half_trace) / c(3.0, 0.0);
        assert!(max_abs_diff(&haar_twirl_map(&p, &p, &x).unwrap(), &expect) < 1e-12);
        let clifford = ensemble_twirl_map(&clifford_ensemble(1), &p, &p, &x).unwrap();
        assert!(max_abs_diff(&clifford, &expect) < 1e-12);
    }

    #[test]
    fn ensemble_examples() {
        let mut r = rng(3);
        let (a, b, x) = (random_matrix(2, &mut r), random_matrix(2, &mut r), random_matrix(2, &mut r));
        let trivial = Ensemble::uniform(vec![DenseMatrix::identity(2, 2)]).unwrap();
        assert!(max_abs_diff(&ensemble_twirl_map(&trivial, &a, &b, &x).unwrap(), &(&a * &x * &b)) < 1e-14);

        // {I, X} with A = B = Z: both terms reduce to Z X Z
        let z = PauliLabel::single(1, 0, Pauli::Z).to_dense().unwrap();
        let xp = PauliLabel::single(1, 0, Pauli::X).to_dense().unwrap();
        let two = Ensemble::uniform(vec![DenseMatrix::identity(2, 2), xp.clone()]).unwrap();
        let direct = (&z * &x * &z + &xp * &z * &xp * &x * &xp * &z * &xp) / c(2.0, 0.0);
        assert!(max_abs_diff(&ensemble_twirl_map(&two, &z, &z, &x).unwrap(), &direct) < 1e-14);
        assert!(max_abs_diff(&direct, &(&z * &x * &z)) < 1e-14);

        let full = clifford_ensemble(1);
        for _ in 0..5 {
            let (a, b, x) = (random_matrix(2, &mut r), random_matrix(2, &mut r), random_matrix(2, &mut r));
            let diff = max_abs_diff(
                &ensemble_twirl_map(&full, &a, &b, &x).unwrap(),
                &haar_twirl_map(&a, &b, &x).unwrap(),
            );
            assert!(diff < 1e-10);
        }
    }

    #[test]
    fn ensemble_rejects_non_unitary() {
        let bad = DenseMatrix::identity(2, 2) * c(2.0, 0.0);
        assert!(matches!(Ensemble::uniform(vec![bad]), Err(Error::Validation(_))));
        let id = DenseMatrix::identity(2, 2);
        assert!(Ensemble::new(vec![id.clone(), id], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn brute_pauli_twirl_examples() {
        let mut r = rng(4);
        let x = random_matrix(2, &mut r);
        let xp = PauliLabel::single(1, 0, Pauli::X).to_dense().unwrap();
        let out = brute_pauli_twirl(&xp, &xp, &x).unwrap();
        assert!(max_abs_diff(&out, &(&xp * &x * &xp)) < 1e-14);
        let id = DenseMatrix::identity(2, 2);
        assert!(max_abs_diff(&brute_pauli_twirl(&id, &id, &x).unwrap(), &x) < 1e-14);
        for _ in 0..3 {
            let (a, b, x) = (random_matrix(4, &mut r), random_matrix(4, &mut r), random_matrix(4, &mut r));
            let brute = brute_pauli_twirl(&a, &b, &x).unwrap();
            let formula = pauli_coefficient_twirl(&a, &b, &x).unwrap();
            assert!(max_abs_diff(&brute, &formula) < 1e-10);
        }
        let big = DenseMatrix::identity(16, 16);
        assert!(matches!(brute_pauli_twirl(&big, &big, &big), Err(Error::Capacity(_))));
    }

    #[test]
    fn pauli_twirl_is_idempotent() {
        let mut r = rng(5);
        let (a, b, x) = (random_matrix(4, &mut r), random_matrix(4, &mut r), random_matrix(4, &mut r));
        // a second Pauli twirl of Σ r_a P_a · P_a leaves each term unchanged
        let once = brute_pauli_twirl(&a, &b, &x).unwrap();
        let (alpha, beta) = (expand(&a).unwrap(), expand(&b).unwrap());
        let mut twice = DenseMatrix::zeros(4, 4);
        for (i, (al, be)) in alpha.alpha.iter().zip(&beta.alpha).enumerate() {
            let p = PauliLabel::from_index(2, i).to_dense().unwrap();
            twice += brute_pauli_twirl(&p, &p, &x).unwrap() * (al * be);
        }
        assert!(max_abs_diff(&once, &twice) < 1e-10);
    }

    #[test]
    fn haar_twirl_trace_and_linearity() {
        let mut r = rng(6);
        for dim in [2, 4, 8] {
            let (a, b, x, a2) = (
                random_matrix(dim, &mut r),
                random_matrix(dim, &mut r),
                random_matrix(dim, &mut r),
                random_matrix(dim, &mut r),
            );
            let out = haar_twirl_map(&a, &b, &x).unwrap();
            let expect = (&a * &b).trace() * x.trace() / dim as f64;
            assert!((out.trace() - expect).norm() < 1e-10);

            let s = c(0.3, -1.7);
            let lhs = haar_twirl_map(&(&a + &a2 * s), &b, &x).unwrap();
            let rhs = out + haar_twirl_map(&a2, &b, &x).unwrap() * s;
            assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
            let lhs = haar_twirl_map(&a, &b, &(&x + &a2 * s)).unwrap();
            let rhs = haar_twirl_map(&a, &b, &x).unwrap() + haar_twirl_map(&a, &b, &a2).unwrap() * s;
            assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
        }
    }

    #[test]
    fn average_fidelity_examples() {
        assert!((exact_average_fidelity(&KrausChannel::identity(2).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        for n in 1..=2 {
            let f = exact_average_fidelity(&KrausChannel::uniform_pauli(n).unwrap()).unwrap();
            assert!((f - 1.0 / (1 << n) as f64).abs() < 1e-12);
        }
        let deph = KrausChannel::dephasing(0.5).unwrap();
        assert!((exact_average_fidelity(&deph).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let bad = KrausChannel::new(vec![DenseMatrix::identity(2, 2) * c(0.5, 0.0)]).unwrap();
        assert!(matches!(exact_average_fidelity(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn haar_channel_twirl_examples() {
        assert!((haar_channel_twirl(&KrausChannel::identity(1).unwrap()).unwrap().p - 1.0).abs() < 1e-15);
        assert!(haar_channel_twirl(&KrausChannel::uniform_pauli(2).unwrap()).unwrap().p.abs() < 1e-12);
        let deph = KrausChannel::dephasing(0.5).unwrap();
        assert!((haar_channel_twirl(&deph).unwrap().p - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_and_depolarizing_parameter_agree() {
        let mut r = rng(7);
        for n in 1..=3 {
            let ch = KrausChannel::random(n, 3, &mut r).unwrap();
            let p = haar_channel_twirl(&ch).unwrap().p;
            let f = exact_average_fidelity(&ch).unwrap();
            let d = ch.dim() as f64;
            assert!((f - (p + (1.0 - p) / d)).abs() < 1e-12);
        }
    }

    #[test]
    fn clifford_twirled_channel_is_the_depolarizing_channel() {
        let mut r = rng(8);
        let ch = KrausChannel::random(1, 2, &mut r).unwrap();
        let dep = haar_channel_twirl(&ch).unwrap();
        let group = clifford_ensemble(1);
        let rho = {
            let m = random_matrix(2, &mut r);
            &m * m.adjoint()
        };
        let mut twirled = DenseMatrix::zeros(2, 2);
        for (w, u) in group.iter() {
            twirled += u.adjoint() * ch.apply(&(u * &rho * u.adjoint())) * u * c(w, 0.0);
        }
        assert!(max_abs_diff(&twirled, &dep.apply(&rho)) < 1e-10);
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut r = rng(9);
        for n in 1..=3 {
            let ch = KrausChannel::random(n, 4, &mut r).unwrap();
            assert!(ch.trace_preservation_error() < 1e-12);
        }
    }

    #[test]
    fn channel_file_round_trip_and_validation() {
        let ch = KrausChannel::amplitude_damping(0.3).unwrap();
        let back = KrausChannel::from_json(&ch.to_json().unwrap()).unwrap();
        assert!(max_abs_diff(&back.kraus()[1], &ch.kraus()[1]) == 0.0);
        let bad = r#"{"n": 1, "cptp": true, "kraus": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        assert!(matches!(KrausChannel::from_json(bad), Err(Error::Validation(_))));
        let flagged_off = r#"{"n": 1, "cptp": false, "kraus": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        assert!(KrausChannel::from_json(flagged_off).is_ok());
        let wrong_shape = r#"{"n": 2, "cptp": true, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(KrausChannel::from_json(wrong_shape), Err(Error::Parse(_))));
    }
}
