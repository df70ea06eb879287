//! Exact and approximate unitary 2-designs over qubits.
//!
//! - [`pauli`]: symplectic Pauli labels, phased products, Pauli expansions.
//! - [`clifford`]: gate conjugation rules, tableaux, Clifford enumeration for `n ≤ 2`.
//! - [`dense`]: small-`n` dense oracle (Haar twirl, ensemble twirls, Kraus channels).
//! - [`twirl`]: Pauli twirl, Clifford uniformization, depolarizing parameters.
//! - [`approx`]: the O(n)-gate random procedure, its exact label chain, and trajectory sampling.
//! - [`fidelity`]: the randomized average-fidelity experiment.
//! - [`cli`]: the `twodesign` command-line front end.
//!
//! Each capability has a runnable program under `examples/`.

pub mod approx;
pub mod cli;
pub mod clifford;
pub mod dense;
pub mod error;
pub mod fidelity;
pub mod pauli;
pub mod rng;
pub mod twirl;

pub use approx::{
    convergence_exact, convergence_trajectories, evolve_exact, sample_design_unitary, sample_trajectory,
    tvd_to_uniform_nonidentity, very_good_probability, BasicProcedureInstance, ChainState, ConvergenceReport,
    DesignCircuit,
};
pub use clifford::{conjugate_gate, enumerate_clifford, CliffordElement, CliffordTableau, Gate};
pub use dense::{
    brute_pauli_twirl, ensemble_twirl_map, exact_average_fidelity, haar_twirl_map, DenseMatrix, Ensemble,
    KrausChannel,
};
pub use error::{Error, Result};
pub use fidelity::{
    convert_fidelities, estimate_average_fidelity, required_shots, ApproxSampler, DesignSampler,
    ExactCliffordSampler, FidelityEstimate, NoiseScenario,
};
pub use pauli::{Pauli, PauliLabel, PhasedPauli};
pub use twirl::{clifford_uniformize, depolarizing_parameter, pauli_twirl_channel, PauliDistribution};
