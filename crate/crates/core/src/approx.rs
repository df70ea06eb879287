//! Approximate unitary 2-design from a repeated O(n)-gate random Clifford
//! procedure.
//!
//! One repetition of the basic procedure acts on qubits `0..n` (qubit 0 is
//! the "first" qubit):
//!
//! 1. `R^i` on every qubit, `i` uniform in {0, 1, 2};
//! 2. random XOR into qubit 0: each `CNOT(k → 0)`, `k ≥ 1`, present with probability 3/4;
//! 3. `H` on qubit 0, `R^i` on every other qubit;
//! 4. random XOR;
//! 5. `H` on qubit 0, `R^i` on every other qubit;
//! 6. `S` on qubit 0 with probability 1/2;
//! 7. random XOR.
//!
//! Conjugating a Pauli channel through sampled repetitions drives the
//! non-identity label distribution towards uniform, i.e. towards a
//! depolarizing channel, while the identity weight never changes.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{circuit_unitary, Gate};
use crate::dense::DenseMatrix;
use crate::error::{check_dims, Error, Result};
use crate::pauli::{Pauli, PauliLabel};
use crate::rng::{stream_rng, streams};
use crate::twirl::PauliDistribution;

/// Largest register for the exact label-distribution chain.
pub const MAX_CHAIN_QUBITS: usize = 8;
/// Probability that each random-XOR CNOT is present.
pub const CNOT_PROBABILITY: f64 = 0.75;
/// Probability of the step-6 `S`.
pub const S_PROBABILITY: f64 = 0.5;
/// Trajectories per independently seeded stream.
const TRAJECTORY_CHUNK: usize = 4096;

/// One fully resolved realization of the basic procedure.
///
/// Masks and step-3/5 exponents are indexed by `k − 1` for qubit `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicProcedureInstance {
    pub n: usize,
    pub step1_r: Vec<u8>,
    pub step2_mask: Vec<bool>,
    pub step3_r: Vec<u8>,
    pub step4_mask: Vec<bool>,
    pub step5_r: Vec<u8>,
    pub step6_s: bool,
    pub step7_mask: Vec<bool>,
}

fn check_procedure_qubits(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "the basic procedure needs n >= 2 (got {n}); use the enumerated Clifford design for one qubit"
        )));
    }
    Ok(())
}

impl BasicProcedureInstance {
    /// Every exponent 0, every mask bit clear, no `S`: only the two `H` gates remain.
    pub fn trivial(n: usize) -> Result<Self> {
        check_procedure_qubits(n)?;
        Ok(Self {
            n,
            step1_r: vec![0; n],
            step2_mask: vec![false; n - 1],
            step3_r: vec![0; n - 1],
            step4_mask: vec![false; n - 1],
            step5_r: vec![0; n - 1],
            step6_s: false,
            step7_mask: vec![false; n - 1],
        })
    }

    /// Every optional gate present.
    pub fn maximal(n: usize) -> Result<Self> {
        check_procedure_qubits(n)?;
        Ok(Self {
            n,
            step1_r: vec![1; n],
            step2_mask: vec![true; n - 1],
            step3_r: vec![2; n - 1],
            step4_mask: vec![true; n - 1],
            step5_r: vec![1; n - 1],
            step6_s: true,
            step7_mask: vec![true; n - 1],
        })
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_procedure_qubits(n)?;
        fn powers<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
            (0..len).map(|_| rng.gen_range(0..3u8)).collect()
        }
        fn mask<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<bool> {
            (0..len).map(|_| rng.gen_bool(CNOT_PROBABILITY)).collect()
        }
        let step1_r = powers(n, rng);
        let step2_mask = mask(n - 1, rng);
        let step3_r = powers(n - 1, rng);
        let step4_mask = mask(n - 1, rng);
        let step5_r = powers(n - 1, rng);
        let step6_s = rng.gen_bool(S_PROBABILITY);
        let step7_mask = mask(n - 1, rng);
        Ok(Self {
            n,
            step1_r,
            step2_mask,
            step3_r,
            step4_mask,
            step5_r,
            step6_s,
            step7_mask,
        })
    }

    /// Realized gates in application order.
    pub fn gates(&self) -> Vec<Gate> {
        let n = self.n;
        let mut gates = Vec::with_capacity(6 * n);
        let xor = |gates: &mut Vec<Gate>, mask: &[bool]| {
            for (k, _) in mask.iter().enumerate().filter(|(_, &on)| on) {
                gates.push(Gate::Cnot { control: k + 1, target: 0 });
            }
        };
        gates.extend(self.step1_r.iter().enumerate().filter_map(|(q, &p)| Gate::r_power(q, p)));
        xor(&mut gates, &self.step2_mask);
        gates.push(Gate::H(0));
        gates.extend(self.step3_r.iter().enumerate().filter_map(|(k, &p)| Gate::r_power(k + 1, p)));
        xor(&mut gates, &self.step4_mask);
        gates.push(Gate::H(0));
        gates.extend(self.step5_r.iter().enumerate().filter_map(|(k, &p)| Gate::r_power(k + 1, p)));
        if self.step6_s {
            gates.push(Gate::S(0));
        }
        xor(&mut gates, &self.step7_mask);
        gates
    }

    /// Realized gate count: `R` and `R²` count once each, plus CNOTs, the two `H`, and `S`.
    pub fn gate_count(&self) -> usize {
        let nz = |v: &[u8]| v.iter().filter(|&&p| p % 3 != 0).count();
        let ones = |v: &[bool]| v.iter().filter(|&&b| b).count();
        nz(&self.step1_r)
            + nz(&self.step3_r)
            + nz(&self.step5_r)
            + ones(&self.step2_mask)
            + ones(&self.step4_mask)
            + ones(&self.step7_mask)
            + 2
            + usize::from(self.step6_s)
    }

    /// Conjugates `label` through steps 1 to 7 in place.
    pub fn apply_in_place(&self, label: &mut PauliLabel) {
        debug_assert_eq!(label.num_qubits(), self.n);
        let r = |label: &mut PauliLabel, q: usize, p: u8| {
            if let Some(g) = Gate::r_power(q, p) {
                g.apply_to_label(label);
            }
        };
        let xor = |label: &mut PauliLabel, mask: &[bool]| {
            // all CNOTs share target 0 and commute, so one pass suffices
            let (mut x0, z0) = (label.x_bit(0), label.z_bit(0));
            for (k, _) in mask.iter().enumerate().filter(|(_, &on)| on) {
                let q = k + 1;
                x0 ^= label.x_bit(q);
                let (xq, zq) = (label.x_bit(q), label.z_bit(q));
                label.set_bits(q, xq, zq ^ z0);
            }
            label.set_bits(0, x0, z0);
        };
        for (q, &p) in self.step1_r.iter().enumerate() {
            r(label, q, p);
        }
        xor(label, &self.step2_mask);
        Gate::H(0).apply_to_label(label);
        for (k, &p) in self.step3_r.iter().enumerate() {
            r(label, k + 1, p);
        }
        xor(label, &self.step4_mask);
        Gate::H(0).apply_to_label(label);
        for (k, &p) in self.step5_r.iter().enumerate() {
            r(label, k + 1, p);
        }
        if self.step6_s {
            Gate::S(0).apply_to_label(label);
        }
        xor(label, &self.step7_mask);
    }

    pub fn conjugate_label(&self, label: &PauliLabel) -> Result<PauliLabel> {
        check_dims(self.n, label.num_qubits())?;
        let mut out = label.clone();
        self.apply_in_place(&mut out);
        Ok(out)
    }
}

/// Per-repetition very-good probability `(1/2)(1 − (1/4)^{n−1})`.
pub fn very_good_probability(n: usize) -> f64 {
    0.5 * (1.0 - 0.25f64.powi(n as i32 - 1))
}

/// Expected realized gates per repetition.
pub fn expected_gate_count(n: usize) -> f64 {
    let n = n as f64;
    let r = 2.0 / 3.0;
    n * r + 2.0 * (n - 1.0) * r + 3.0 * (n - 1.0) * CNOT_PROBABILITY + 2.0 + S_PROBABILITY
}

/// Label distribution evolved by the exact mixture over the procedure's randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    dist: PauliDistribution,
}

impl ChainState {
    pub fn new(dist: PauliDistribution) -> Result<Self> {
        let n = dist.num_qubits();
        if n > MAX_CHAIN_QUBITS {
            return Err(Error::Capacity(format!(
                "exact chain supports n <= {MAX_CHAIN_QUBITS}, got {n}"
            )));
        }
        check_procedure_qubits(n)?;
        Ok(Self { dist })
    }

    pub fn from_label(start: &PauliLabel) -> Result<Self> {
        Self::new(PauliDistribution::point_mass(start)?)
    }

    pub fn distribution(&self) -> &PauliDistribution {
        &self.dist
    }

    pub fn into_distribution(self) -> PauliDistribution {
        self.dist
    }
}

/// `(x, z)` integers of a label index; qubit `q` is bit `q`.
#[inline]
fn split(n: usize, idx: usize) -> (usize, usize) {
    (idx >> n, idx & ((1 << n) - 1))
}

#[inline]
fn join(n: usize, x: usize, z: usize) -> usize {
    (x << n) | z
}

#[inline]
fn r_on_index(n: usize, q: usize, idx: usize) -> usize {
    let (x, z) = split(n, idx);
    let (xb, zb) = ((x >> q) & 1, (z >> q) & 1);
    let (nx, nz) = (zb, xb ^ zb);
    join(n, (x & !(1 << q)) | (nx << q), (z & !(1 << q)) | (nz << q))
}

#[inline]
fn h0_on_index(n: usize, idx: usize) -> usize {
    let (x, z) = split(n, idx);
    join(n, (x & !1) | (z & 1), (z & !1) | (x & 1))
}

#[inline]
fn s0_on_index(n: usize, idx: usize) -> usize {
    let (x, z) = split(n, idx);
    join(n, x, z ^ (x & 1))
}

#[inline]
fn cnot_to0_on_index(n: usize, k: usize, idx: usize) -> usize {
    let (x, z) = split(n, idx);
    let nx = x ^ ((x >> k) & 1);
    let nz = z ^ ((z & 1) << k);
    join(n, nx, nz)
}

/// Replaces `dist` by `Σ_j p_j · (dist pushed through map_j)`.
fn mix(dist: &mut [f64], scratch: &mut [f64], branches: &[(f64, &dyn Fn(usize) -> usize)]) {
    scratch.iter_mut().for_each(|w| *w = 0.0);
    for (i, &w) in dist.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (p, f) in branches {
            scratch[f(i)] += p * w;
        }
    }
    dist.copy_from_slice(scratch);
}

fn one_repetition(n: usize, dist: &mut [f64], scratch: &mut [f64]) {
    let third = 1.0 / 3.0;
    let r_avg = |dist: &mut [f64], scratch: &mut [f64], q: usize| {
        let once = move |i| r_on_index(n, q, i);
        let twice = move |i| r_on_index(n, q, r_on_index(n, q, i));
        mix(dist, scratch, &[(third, &|i| i), (third, &once), (third, &twice)]);
    };
    let xor_avg = |dist: &mut [f64], scratch: &mut [f64]| {
        for k in 1..n {
            let on = move |i| cnot_to0_on_index(n, k, i);
            mix(dist, scratch, &[(1.0 - CNOT_PROBABILITY, &|i| i), (CNOT_PROBABILITY, &on)]);
        }
    };
    let h0 = |dist: &mut [f64], scratch: &mut [f64]| {
        mix(dist, scratch, &[(1.0, &|i| h0_on_index(n, i))]);
    };

    for q in 0..n {
        r_avg(dist, scratch, q);
    }
    xor_avg(dist, scratch);
    h0(dist, scratch);
    for q in 1..n {
        r_avg(dist, scratch, q);
    }
    xor_avg(dist, scratch);
    h0(dist, scratch);
    for q in 1..n {
        r_avg(dist, scratch, q);
    }
    mix(dist, scratch, &[(1.0 - S_PROBABILITY, &|i| i), (S_PROBABILITY, &|i| s0_on_index(n, i))]);
    xor_avg(dist, scratch);
}

/// Pushes the distribution through `repetitions` exact procedure mixtures.
pub fn evolve_exact(state: &ChainState, repetitions: usize) -> ChainState {
    let n = state.dist.num_qubits();
    let mut out = state.clone();
    let mut scratch = vec![0.0; out.dist.weights().len()];
    for _ in 0..repetitions {
        one_repetition(n, out.dist.weights_mut(), &mut scratch);
    }
    out
}

/// Total variation distance between the non-identity conditional distribution
/// and the uniform distribution on the `4ⁿ − 1` non-identity labels. Zero
/// when all mass sits on the identity.
pub fn tvd_to_uniform_nonidentity(d: &PauliDistribution) -> f64 {
    let w = d.weights();
    let rest = d.total() - d.identity_weight();
    if rest <= 0.0 {
        return 0.0;
    }
    let target = 1.0 / (w.len() - 1) as f64;
    0.5 * w[1..].iter().map(|&p| (p / rest - target).abs()).sum::<f64>()
}

/// Folds `repetitions` freshly sampled instances over `start`.
pub fn sample_trajectory<R: Rng + ?Sized>(
    n: usize,
    repetitions: usize,
    start: &PauliLabel,
    rng: &mut R,
) -> Result<PauliLabel> {
    let mut label = start.clone();
    run_trajectory(n, repetitions, &mut label, rng, |_, _| {})?;
    Ok(label)
}

/// Like [`sample_trajectory`], calling `visit(r, label)` after each repetition `r ≥ 1`.
pub fn run_trajectory<R: Rng + ?Sized>(
    n: usize,
    repetitions: usize,
    label: &mut PauliLabel,
    rng: &mut R,
    mut visit: impl FnMut(usize, &PauliLabel),
) -> Result<()> {
    check_procedure_qubits(n)?;
    check_dims(n, label.num_qubits())?;
    for r in 1..=repetitions {
        BasicProcedureInstance::sample(n, rng)?.apply_in_place(label);
        visit(r, label);
    }
    Ok(())
}

/// Histogram over label indices of `trajectories` endpoints, sampled in
/// fixed-size chunks with one seeded stream per chunk.
pub fn trajectory_histogram(
    n: usize,
    repetitions: usize,
    start: &PauliLabel,
    trajectories: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    if n > MAX_CHAIN_QUBITS {
        return Err(Error::Capacity(format!("histograms support n <= {MAX_CHAIN_QUBITS}")));
    }
    check_procedure_qubits(n)?;
    check_dims(n, start.num_qubits())?;
    let size = 1usize << (2 * n);
    let chunks = trajectories.div_ceil(TRAJECTORY_CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, streams::TRAJECTORY_BASE + chunk as u64);
            let len = TRAJECTORY_CHUNK.min(trajectories - chunk * TRAJECTORY_CHUNK);
            let mut counts = vec![0u64; size];
            for _ in 0..len {
                let end = sample_trajectory(n, repetitions, start, &mut rng).expect("validated above");
                counts[end.index()] += 1;
            }
            counts
        })
        .collect();
    Ok(partial.into_iter().fold(vec![0; size], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    }))
}

/// A sampled design element: a Pauli layer followed by repetitions of the procedure.
///
/// The gates are listed in the order they act on Pauli labels, so the twirl
/// unitary `U` satisfies `U† P U = (folded gate conjugations)(P)` up to sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignCircuit {
    pub n: usize,
    pub pauli: PauliLabel,
    pub gates: Vec<Gate>,
    pub repetition_gate_counts: Vec<usize>,
}

impl DesignCircuit {
    /// Pauli-layer gates plus procedure gates.
    pub fn gate_count(&self) -> usize {
        self.pauli.weight() + self.gates.len()
    }

    /// Twirl unitary `P · (g_m ⋯ g_1)†`.
    pub fn unitary(&self) -> Result<DenseMatrix> {
        let v = circuit_unitary(self.n, &self.gates)?;
        Ok(self.pauli.to_dense()? * v.adjoint())
    }

    pub fn apply_to_label(&self, label: &PauliLabel) -> Result<PauliLabel> {
        check_dims(self.n, label.num_qubits())?;
        let mut out = label.clone();
        for g in &self.gates {
            g.apply_to_label(&mut out);
        }
        Ok(out)
    }

    /// Text dump: a `PAULI <label>` line, then one gate per line.
    pub fn to_text(&self) -> String {
        format!("PAULI {}\n{}", self.pauli, crate::clifford::format_gates(&self.gates))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| Error::Parse("empty circuit".into()))?;
        let pauli: PauliLabel = head
            .strip_prefix("PAULI")
            .ok_or_else(|| Error::Parse("circuit must start with a PAULI line".into()))?
            .parse()?;
        let n = pauli.num_qubits();
        let gates = lines.map(str::parse).collect::<Result<Vec<Gate>>>()?;
        for g in &gates {
            g.validate(n)?;
        }
        let count = gates.len();
        Ok(Self {
            n,
            pauli,
            gates,
            repetition_gate_counts: vec![count],
        })
    }
}

pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliLabel {
    let mut p = PauliLabel::identity(n);
    for q in 0..n {
        let pauli = match rng.gen_range(0..4u8) {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        };
        p.set(q, pauli);
    }
    p
}

/// Uniform Pauli layer followed by `repetitions` sampled procedure instances.
pub fn sample_design_unitary<R: Rng + ?Sized>(n: usize, repetitions: usize, rng: &mut R) -> Result<DesignCircuit> {
    check_procedure_qubits(n)?;
    let pauli = random_pauli(n, rng);
    let mut gates = Vec::new();
    let mut counts = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let inst = BasicProcedureInstance::sample(n, rng)?;
        counts.push(inst.gate_count());
        gates.extend(inst.gates());
    }
    Ok(DesignCircuit {
        n,
        pauli,
        gates,
        repetition_gate_counts: counts,
    })
}

/// Exact-chain convergence from a point mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub start: String,
    pub repetitions: usize,
    /// Entry `r` is the distance after `r` repetitions, starting at `r = 0`.
    pub tvd_per_rep: Vec<f64>,
    pub identity_weight: Vec<f64>,
    /// Expected cumulative gate count after `r` repetitions.
    pub gate_count_mean: Vec<f64>,
    pub very_good_prob: f64,
    /// Smallest `c ≥ 0` with `tvd(r) ≤ (1 − very_good_prob)^r + c·4^{−n}` for every `r`.
    pub fitted_c: f64,
    /// Geometric decay factor per repetition from a log-linear fit.
    pub fitted_rate: Option<f64>,
}

impl ConvergenceReport {
    pub fn envelope(&self, r: usize) -> f64 {
        (1.0 - self.very_good_prob).powi(r as i32) + self.fitted_c * 4f64.powi(-(self.n as i32))
    }

    /// `n,repetition,tvd,identity_weight,gate_count_mean` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,repetition,tvd,identity_weight,gate_count_mean\n");
        for r in 0..=self.repetitions {
            out.push_str(&format!(
                "{},{},{:.12e},{:.12e},{:.6}\n",
                self.n, r, self.tvd_per_rep[r], self.identity_weight[r], self.gate_count_mean[r]
            ));
        }
        out
    }
}

/// Least-squares slope of `ys` against `xs`, with the coefficient of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

pub fn convergence_exact(start: &PauliLabel, repetitions: usize) -> Result<ConvergenceReport> {
    let n = start.num_qubits();
    let mut state = ChainState::from_label(start)?;
    let mut tvd = vec![tvd_to_uniform_nonidentity(state.distribution())];
    let mut idw = vec![state.distribution().identity_weight()];
    for _ in 0..repetitions {
        state = evolve_exact(&state, 1);
        tvd.push(tvd_to_uniform_nonidentity(state.distribution()));
        idw.push(state.distribution().identity_weight());
    }
    let vg = very_good_probability(n);
    let scale = 4f64.powi(n as i32);
    let fitted_c = tvd
        .iter()
        .enumerate()
        .map(|(r, t)| (t - (1.0 - vg).powi(r as i32)) * scale)
        .fold(0.0, f64::max);
    let usable: Vec<(f64, f64)> = tvd
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &t)| t > 1e-13)
        .map(|(r, &t)| (r as f64, t.ln()))
        .collect();
    let fitted_rate = (usable.len() >= 2).then(|| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
        linear_fit(&xs, &ys).0.exp()
    });
    let per = expected_gate_count(n);
    Ok(ConvergenceReport {
        n,
        start: start.to_string(),
        repetitions,
        tvd_per_rep: tvd,
        identity_weight: idw,
        gate_count_mean: (0..=repetitions).map(|r| r as f64 * per).collect(),
        very_good_prob: vg,
        fitted_c,
        fitted_rate,
    })
}

/// Marginal of the uniform-over-non-identity law on one qubit: `(P(I), P(X)=P(Y)=P(Z))`.
pub fn uniform_nonidentity_marginal(n: usize) -> (f64, f64) {
    let total = 4f64.powi(n as i32) - 1.0;
    let rest = 4f64.powi(n as i32 - 1);
    ((rest - 1.0) / total, rest / total)
}

/// Trajectory-sampled convergence statistics at any `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub n: usize,
    pub start: String,
    pub repetitions: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// `counts[r][q]` = occurrences of I, X, Y, Z on qubit `q` after `r` repetitions.
    pub counts: Vec<Vec<[u64; 4]>>,
    pub identity_hits: Vec<u64>,
    pub gate_count_mean: Vec<f64>,
}

impl TrajectoryReport {
    /// Largest per-qubit marginal TVD against the uniform-over-non-identity marginal.
    pub fn marginal_tvd(&self, r: usize) -> f64 {
        let (pi, px) = uniform_nonidentity_marginal(self.n);
        let m = self.trajectories as f64;
        self.counts[r]
            .iter()
            .map(|c| {
                0.5 * ((c[0] as f64 / m - pi).abs()
                    + c[1..].iter().map(|&k| (k as f64 / m - px).abs()).sum::<f64>())
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,repetition,tvd,identity_weight,gate_count_mean\n");
        for r in 0..=self.repetitions {
            out.push_str(&format!(
                "{},{},{:.12e},{:.12e},{:.6}\n",
                self.n,
                r,
                self.marginal_tvd(r),
                self.identity_hits[r] as f64 / self.trajectories as f64,
                self.gate_count_mean[r]
            ));
        }
        out
    }
}

pub fn convergence_trajectories(
    start: &PauliLabel,
    repetitions: usize,
    trajectories: usize,
    seed: u64,
) -> Result<TrajectoryReport> {
    let n = start.num_qubits();
    check_procedure_qubits(n)?;
    if trajectories == 0 {
        return Err(Error::Domain("need at least one trajectory".into()));
    }
    struct Acc {
        counts: Vec<Vec<[u64; 4]>>,
        identity: Vec<u64>,
        gates: Vec<u64>,
    }
    let tally = |acc: &mut Acc, r: usize, label: &PauliLabel| {
        for q in 0..n {
            let slot = match label.get(q) {
                Pauli::I => 0,
                Pauli::X => 1,
                Pauli::Y => 2,
                Pauli::Z => 3,
            };
            acc.counts[r][q][slot] += 1;
        }
        acc.identity[r] += u64::from(label.is_identity());
    };
    let empty = || Acc {
        counts: vec![vec![[0u64; 4]; n]; repetitions + 1],
        identity: vec![0; repetitions + 1],
        gates: vec![0; repetitions + 1],
    };
    let chunks = trajectories.div_ceil(TRAJECTORY_CHUNK);
    let partial: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, streams::TRAJECTORY_BASE + chunk as u64);
            let len = TRAJECTORY_CHUNK.min(trajectories - chunk * TRAJECTORY_CHUNK);
            let mut acc = empty();
            for _ in 0..len {
                let mut label = start.clone();
                tally(&mut acc, 0, &label);
                let mut gates = 0u64;
                for r in 1..=repetitions {
                    let inst = BasicProcedureInstance::sample(n, &mut rng).expect("n checked");
                    inst.apply_in_place(&mut label);
                    gates += inst.gate_count() as u64;
                    acc.gates[r] += gates;
                    tally(&mut acc, r, &label);
                }
            }
            acc
        })
        .collect();
    let total = partial.into_iter().fold(empty(), |mut a, b| {
        for r in 0..=repetitions {
            a.identity[r] += b.identity[r];
            a.gates[r] += b.gates[r];
            for q in 0..n {
                for s in 0..4 {
                    a.counts[r][q][s] += b.counts[r][q][s];
                }
            }
        }
        a
    });
    Ok(TrajectoryReport {
        n,
        start: start.to_string(),
        repetitions,
        trajectories,
        seed,
        counts: total.counts,
        identity_hits: total.identity,
        gate_count_mean: total.gates.iter().map(|&g| g as f64 / trajectories as f64).collect(),
    })
}

/// Dense uniform ensemble of `samples` design unitaries.
pub fn sample_design_ensemble<R: Rng + ?Sized>(
    n: usize,
    repetitions: usize,
    samples: usize,
    rng: &mut R,
) -> Result<crate::dense::Ensemble> {
    let members = (0..samples)
        .map(|_| sample_design_unitary(n, repetitions, rng)?.unitary())
        .collect::<Result<Vec<_>>>()?;
    crate::dense::Ensemble::uniform(members)
}
