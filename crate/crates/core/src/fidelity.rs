//! Randomized average-fidelity estimation: prepare `U|0⟩`, apply the noise,
//! undo `U`, and record whether `|0⟩` survives.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::sample_design_unitary;
use crate::clifford::enumerate_clifford;
use crate::dense::{c, exact_average_fidelity, DenseMatrix, KrausChannel, UNITARY_TOL};
use crate::error::{check_dims, Error, Result};
use crate::pauli::MAX_DENSE_QUBITS;
use crate::rng::{stream_rng, streams};

/// Largest register for dense fidelity experiments.
pub const MAX_EXPERIMENT_QUBITS: usize = 10;
const SHOT_CHUNK: usize = 8192;

/// A noise channel, optionally wrapped around a target gate `U_g` as
/// `Λ(ρ) = U_g† E(U_g ρ U_g†) U_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseScenario {
    noise: KrausChannel,
    target: Option<DenseMatrix>,
    channel: KrausChannel,
}

impl NoiseScenario {
    pub fn new(channel: KrausChannel) -> Result<Self> {
        channel.ensure_cptp()?;
        if channel.num_qubits() > MAX_EXPERIMENT_QUBITS {
            return Err(Error::Capacity(format!(
                "fidelity experiments support n <= {MAX_EXPERIMENT_QUBITS}"
            )));
        }
        Ok(Self {
            noise: channel.clone(),
            channel,
            target: None,
        })
    }

    pub fn with_target(channel: KrausChannel, target: DenseMatrix) -> Result<Self> {
        let base = Self::new(channel)?;
        check_dims(base.noise.dim(), target.nrows())?;
        check_dims(base.noise.dim(), target.ncols())?;
        let d = target.nrows();
        let dev = crate::dense::max_abs_diff(&(target.adjoint() * &target), &DenseMatrix::identity(d, d));
        if dev > UNITARY_TOL {
            return Err(Error::Validation(format!("target gate is not unitary (deviation {dev:.3e})")));
        }
        let td = target.adjoint();
        let composed = KrausChannel::new_cptp(base.noise.kraus().iter().map(|e| &td * e * &target).collect())?;
        Ok(Self {
            noise: base.noise,
            target: Some(target),
            channel: composed,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.noise.num_qubits()
    }

    pub fn noise(&self) -> &KrausChannel {
        &self.noise
    }

    pub fn target(&self) -> Option<&DenseMatrix> {
        self.target.as_ref()
    }

    /// The channel the experiment actually sees.
    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    /// Same scenario acting trivially on `extra` additional qubits.
    pub fn pad(&self, extra: usize) -> Result<Self> {
        let channel = self.noise.pad(extra)?;
        match &self.target {
            None => Self::new(channel),
            Some(t) => {
                let e = 1usize << extra;
                Self::with_target(channel, t.kronecker(&DenseMatrix::identity(e, e)))
            }
        }
    }

    pub fn exact_average_fidelity(&self) -> Result<f64> {
        exact_average_fidelity(&self.channel)
    }
}

/// Source of random unitaries for the protocol.
pub trait DesignSampler: Sync {
    fn num_qubits(&self) -> usize;
    fn sample(&self, rng: &mut dyn rand::RngCore) -> Result<DenseMatrix>;
    fn label(&self) -> &'static str;
}

/// Uniform draw from the enumerated Clifford group (n ≤ 2).
#[derive(Debug, Clone)]
pub struct ExactCliffordSampler {
    n: usize,
    unitaries: Vec<DenseMatrix>,
}

impl ExactCliffordSampler {
    pub fn new(n: usize) -> Result<Self> {
        let unitaries = enumerate_clifford(n)?
            .iter()
            .map(|e| e.unitary())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, unitaries })
    }

    pub fn unitaries(&self) -> &[DenseMatrix] {
        &self.unitaries
    }
}

impl DesignSampler for ExactCliffordSampler {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn rand::RngCore) -> Result<DenseMatrix> {
        Ok(self.unitaries[rng.gen_range(0..self.unitaries.len())].clone())
    }

    fn label(&self) -> &'static str {
        "exact"
    }
}

/// Pauli layer plus `repetitions` sampled basic procedures (n ≥ 2).
#[derive(Debug, Clone, Copy)]
pub struct ApproxSampler {
    pub n: usize,
    pub repetitions: usize,
}

impl DesignSampler for ApproxSampler {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut dyn rand::RngCore) -> Result<DenseMatrix> {
        sample_design_unitary(self.n, self.repetitions, rng)?.unitary()
    }

    fn label(&self) -> &'static str {
        "approx"
    }
}

/// `⟨ψ|Λ(|ψ⟩⟨ψ|)|ψ⟩ = Σ_k |⟨ψ|A_k|ψ⟩|²` with `ψ = U|0⟩`.
pub fn success_probability(channel: &KrausChannel, u: &DenseMatrix) -> Result<f64> {
    check_dims(channel.dim(), u.nrows())?;
    let psi = u.column(0);
    let p: f64 = channel
        .kraus()
        .iter()
        .map(|a| (psi.adjoint() * a * psi)[(0, 0)].norm_sqr())
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Success probability by explicit density-matrix evolution, `[U†Λ(U|0⟩⟨0|U†)U]₀₀`.
pub fn success_probability_dense(channel: &KrausChannel, u: &DenseMatrix) -> Result<f64> {
    check_dims(channel.dim(), u.nrows())?;
    let d = u.nrows();
    let mut zero = DenseMatrix::zeros(d, d);
    zero[(0, 0)] = c(1.0, 0.0);
    let rho = u * zero * u.adjoint();
    Ok((u.adjoint() * channel.apply(&rho) * u)[(0, 0)].re)
}

fn check_sampler(scenario: &NoiseScenario, sampler: &dyn DesignSampler) -> Result<()> {
    if scenario.num_qubits() > MAX_DENSE_QUBITS.min(MAX_EXPERIMENT_QUBITS) {
        return Err(Error::Capacity("scenario too large for dense simulation".into()));
    }
    check_dims(scenario.num_qubits(), sampler.num_qubits())
}

/// One experiment: draw `U`, evolve, and sample the `|0⟩` outcome.
pub fn run_experiment(
    scenario: &NoiseScenario,
    sampler: &dyn DesignSampler,
    rng: &mut dyn rand::RngCore,
) -> Result<bool> {
    check_sampler(scenario, sampler)?;
    let u = sampler.sample(rng)?;
    let p = success_probability(scenario.channel(), &u)?;
    Ok(rng.gen::<f64>() < p)
}

/// Two-sided Hoeffding radius for `shots` Bernoulli draws at `level`.
pub fn hoeffding_radius(shots: u64, level: f64) -> Result<f64> {
    check_level(level)?;
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    Ok(((2.0 / (1.0 - level)).ln() / (2.0 * shots as f64)).sqrt())
}

/// Smallest `N` with `2·exp(−2Nδ²) ≤ 1 − level`; has no dependence on the register size.
pub fn required_shots(precision: f64, level: f64) -> Result<u64> {
    check_level(level)?;
    if !(precision > 0.0 && precision < 1.0) {
        return Err(Error::Domain(format!("precision {precision} must lie in (0, 1)")));
    }
    Ok(((2.0 / (1.0 - level)).ln() / (2.0 * precision * precision)).ceil() as u64)
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(F_e, F_g)` from the average fidelity, both `(f_avg (D + 1) − 1)/D`.
pub fn convert_fidelities(f_avg: f64, dim: usize) -> Result<(f64, f64)> {
    let d = dim as f64;
    let lo = 1.0 / (d + 1.0);
    if dim < 1 || !(lo - 1e-12..=1.0 + 1e-12).contains(&f_avg) {
        return Err(Error::Domain(format!("average fidelity {f_avg} outside [{lo}, 1] for D = {dim}")));
    }
    let f = ((f_avg * (d + 1.0) - 1.0) / d).clamp(0.0, 1.0);
    Ok((f, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub shots: u64,
    pub successes: u64,
    pub confidence_radius: f64,
    pub confidence_level: f64,
}

/// Runs `shots` experiments in fixed-size chunks, one seeded stream per chunk,
/// so the result depends only on `seed`.
pub fn estimate_average_fidelity(
    scenario: &NoiseScenario,
    shots: u64,
    sampler: &dyn DesignSampler,
    seed: u64,
    level: f64,
) -> Result<FidelityEstimate> {
    check_sampler(scenario, sampler)?;
    let confidence_radius = hoeffding_radius(shots, level)?;
    let chunks = (shots as usize).div_ceil(SHOT_CHUNK);
    let successes = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<u64> {
            let mut rng = stream_rng(seed, streams::FIDELITY_BASE + chunk as u64);
            let len = SHOT_CHUNK.min(shots as usize - chunk * SHOT_CHUNK);
            let mut hits = 0;
            for _ in 0..len {
                hits += u64::from(run_experiment(scenario, sampler, &mut rng)?);
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<u64>();
    Ok(FidelityEstimate {
        mean: successes as f64 / shots as f64,
        shots,
        successes,
        confidence_radius,
        confidence_level: level,
    })
}

/// Result record written by the fidelity command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub n: usize,
    pub channel_id: String,
    pub design: String,
    pub repetitions: Option<usize>,
    pub shots: u64,
    pub mean: f64,
    pub confidence_radius: f64,
    pub confidence_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_value: Option<f64>,
    pub seed: u64,
    pub gate_fidelity: f64,
    pub entanglement_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_gate_fidelity: Option<f64>,
}

impl FidelityRecord {
    pub fn new(
        scenario: &NoiseScenario,
        channel_id: &str,
        sampler: &dyn DesignSampler,
        repetitions: Option<usize>,
        estimate: &FidelityEstimate,
        seed: u64,
    ) -> Result<Self> {
        let dim = scenario.channel().dim();
        let exact_value = scenario.exact_average_fidelity().ok();
        let clamped = estimate.mean.max(1.0 / (dim as f64 + 1.0));
        let (fe, fg) = convert_fidelities(clamped, dim)?;
        Ok(Self {
            n: scenario.num_qubits(),
            channel_id: channel_id.to_string(),
            design: sampler.label().to_string(),
            repetitions,
            shots: estimate.shots,
            mean: estimate.mean,
            confidence_radius: estimate.confidence_radius,
            confidence_level: estimate.confidence_level,
            exact_value,
            seed,
            gate_fidelity: fg,
            entanglement_fidelity: fe,
            exact_gate_fidelity: exact_value.map(|v| convert_fidelities(v, dim).map(|p| p.1)).transpose()?,
        })
    }
}
