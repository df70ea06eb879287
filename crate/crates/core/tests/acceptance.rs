//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use twodesign::approx::{
    convergence_exact, evolve_exact, expected_gate_count, linear_fit, sample_design_ensemble, trajectory_histogram,
    BasicProcedureInstance, ChainState,
};
use twodesign::clifford::{conjugate_gate, enumerate_clifford, Gate};
use twodesign::dense::{
    brute_pauli_twirl, ensemble_channel_distribution, ensemble_twirl_map, haar_twirl_map, max_abs_diff,
    pauli_coefficient_twirl, random_matrix, random_unit_matrix, Ensemble, KrausChannel,
};
use twodesign::fidelity::{
    convert_fidelities, estimate_average_fidelity, hoeffding_radius, required_shots, ExactCliffordSampler,
    NoiseScenario,
};
use twodesign::pauli::{PauliLabel, PhasedPauli};
use twodesign::rng::stream_rng;
use twodesign::twirl::{clifford_uniformize, pauli_twirl_channel, PauliDistribution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn clifford_ensemble(n: usize) -> Ensemble {
    let members = enumerate_clifford(n)
        .unwrap()
        .iter()
        .map(|e| e.unitary().unwrap())
        .collect();
    Ensemble::uniform(members).unwrap()
}

fn exact_design(n: usize, seed: u64, tol: f64, budget: Duration) -> Outcome {
    let start = Instant::now();
    let ens = clifford_ensemble(n);
    let dim = 1 << n;
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b, x) = (random_matrix(dim, &mut rng), random_matrix(dim, &mut rng), random_matrix(dim, &mut rng));
        let lhs = ensemble_twirl_map(&ens, &a, &b, &x).unwrap();
        worst = worst.max(max_abs_diff(&lhs, &haar_twirl_map(&a, &b, &x).unwrap()));
    }
    let took = start.elapsed();
    ensure(
        worst <= tol && took < budget,
        format!(
            "{} elements, max deviation {worst:.2e} (tol {tol:.0e}), {:.2} s (budget {} s)",
            ens.len(),
            took.as_secs_f64(),
            budget.as_secs()
        ),
    )
}

fn criterion_1() -> Outcome {
    exact_design(1, 101, 1e-10, Duration::from_secs(5))
}

fn criterion_2() -> Outcome {
    exact_design(2, 102, 1e-9, Duration::from_secs(120))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let dim = 1 << n;
        let mut rng = stream_rng(103, n as u64);
        for _ in 0..10 {
            let (a, b) = (random_matrix(dim, &mut rng), random_matrix(dim, &mut rng));
            for _ in 0..5 {
                let x = random_matrix(dim, &mut rng);
                let brute = brute_pauli_twirl(&a, &b, &x).unwrap();
                let formula = pauli_coefficient_twirl(&a, &b, &x).unwrap();
                worst = worst.max(max_abs_diff(&brute, &formula));
            }
        }
    }
    ensure(worst <= 1e-10, format!("n = 1..3, 150 checks, max deviation {worst:.2e} (tol 1e-10)"))
}

fn criterion_4() -> Outcome {
    let mut worst_formula: f64 = 0.0;
    let mut worst_dense: f64 = 0.0;
    for n in 1..=2 {
        let ens = clifford_ensemble(n);
        let mut rng = stream_rng(104, n as u64);
        let d = (1usize << n) as f64;
        for k in 0..10 {
            let ch = KrausChannel::random(n, 1 + k % 4, &mut rng).unwrap();
            let uni = clifford_uniformize(&pauli_twirl_channel(&ch).unwrap());
            let p = (ch.trace_weight() - 1.0) / (d * d - 1.0);
            let mut expected = vec![(1.0 - p) / (d * d); 1 << (2 * n)];
            expected[0] += p;
            let expected = PauliDistribution::new(n, expected).unwrap();
            worst_formula = worst_formula.max(uni.max_abs_diff(&expected));
            let dense = ensemble_channel_distribution(&ch, &ens).unwrap();
            worst_dense = worst_dense.max(uni.max_abs_diff(&dense));
        }
    }
    ensure(
        worst_formula <= 1e-9 && worst_dense <= 1e-9,
        format!("20 channels, vs depolarizing formula {worst_formula:.2e}, vs dense Clifford twirl {worst_dense:.2e} (tol 1e-9)"),
    )
}

fn criterion_5() -> Outcome {
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=2usize {
        let mut gates = Vec::new();
        for q in 0..n {
            gates.extend([Gate::H(q), Gate::S(q), Gate::R(q), Gate::R2(q)]);
            for t in 0..n {
                if t != q {
                    gates.push(Gate::Cnot { control: q, target: t });
                }
            }
        }
        for g in gates {
            let u = g.unitary(n).unwrap();
            for label in PauliLabel::all(n) {
                for phase in 0..4 {
                    let p = PhasedPauli::new(label.clone(), phase);
                    let dense = &u * p.to_dense().unwrap() * u.adjoint();
                    let image = conjugate_gate(g, &p).unwrap().to_dense().unwrap();
                    worst = worst.max(max_abs_diff(&dense, &image));
                    checks += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-12, format!("{checks} phased conjugations, max deviation {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut fixed: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for n in 2..=4 {
        let uni = ChainState::new(PauliDistribution::uniform_nonidentity(n).unwrap()).unwrap();
        fixed = fixed.max(evolve_exact(&uni, 1).distribution().max_abs_diff(uni.distribution()));
        fixed = fixed.max(evolve_exact(&uni, 10).distribution().max_abs_diff(uni.distribution()));
        let mut rng = stream_rng(106, n as u64);
        for _ in 0..5 {
            let raw: Vec<f64> = (0..1 << (2 * n)).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let dist = PauliDistribution::new(n, raw.iter().map(|w| w / total).collect()).unwrap();
            let state = ChainState::new(dist).unwrap();
            for r in [1, 5, 20] {
                let out = evolve_exact(&state, r);
                drift = drift.max((out.distribution().identity_weight() - state.distribution().identity_weight()).abs());
            }
        }
    }
    ensure(
        fixed <= 1e-12 && drift <= 1e-14,
        format!("fixed-point deviation {fixed:.2e} (tol 1e-12), identity drift {drift:.2e} (tol 1e-14)"),
    )
}

fn criterion_7() -> Outcome {
    let reps = 30;
    let mut failures = Vec::new();
    let mut max_c: f64 = 0.0;
    let mut tvd30_n3: f64 = 0.0;
    let mut starts = 0;
    for n in 2..=4 {
        for label in PauliLabel::all(n).filter(|l| !l.is_identity()) {
            starts += 1;
            let rep = convergence_exact(&label, reps).unwrap();
            max_c = max_c.max(rep.fitted_c);
            let t = &rep.tvd_per_rep;
            if t[reps] >= t[0] || t.windows(2).any(|w| w[1] > w[0] + 1e-15) {
                failures.push(format!("{label}: not decaying"));
            }
            if (0..=reps).any(|r| t[r] > rep.envelope(r)) {
                failures.push(format!("{label}: envelope violated"));
            }
            if n == 3 {
                tvd30_n3 = tvd30_n3.max(t[30]);
            }
        }
    }
    if tvd30_n3 > 1e-3 {
        failures.push(format!("n = 3 tvd(30) = {tvd30_n3:.2e}"));
    }
    ensure(
        failures.is_empty(),
        format!(
            "{starts} starts, fitted c = {max_c:.3e}, worst n=3 tvd(30) = {tvd30_n3:.2e} (tol 1e-3){}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn criterion_8() -> Outcome {
    let start: PauliLabel = "XI".parse().unwrap();
    let m = 1_000_000usize;
    let exact = evolve_exact(&ChainState::from_label(&start).unwrap(), 10);
    let hist = trajectory_histogram(2, 10, &start, m, 108).unwrap();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (i, &count) in hist.iter().enumerate() {
        let p = exact.distribution().weights()[i];
        let freq = count as f64 / m as f64;
        let se = (p * (1.0 - p) / m as f64).sqrt();
        if se == 0.0 {
            ok &= (freq - p).abs() == 0.0;
            continue;
        }
        let z = (freq - p).abs() / se;
        worst = worst.max(z);
        ok &= z <= 4.0;
    }
    ensure(ok, format!("10^6 trajectories, worst deviation {worst:.2} standard errors (tol 4)"))
}

fn criterion_9() -> Outcome {
    let m = 20_000;
    let tol = 5.0 / (m as f64).sqrt();
    let ens = sample_design_ensemble(2, 10, m, &mut stream_rng(109, 0)).unwrap();
    let mut rng = stream_rng(109, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let (a, b, x) = (
            random_unit_matrix(4, &mut rng),
            random_unit_matrix(4, &mut rng),
            random_unit_matrix(4, &mut rng),
        );
        let lhs = ensemble_twirl_map(&ens, &a, &b, &x).unwrap();
        worst = worst.max(max_abs_diff(&lhs, &haar_twirl_map(&a, &b, &x).unwrap()));
    }
    ensure(worst <= tol, format!("M = {m}, max deviation {worst:.2e} (tol {tol:.2e})"))
}

fn criterion_10() -> Outcome {
    let deph = NoiseScenario::new(KrausChannel::dephasing(0.5).unwrap()).unwrap();
    let exact_value = deph.exact_average_fidelity().unwrap();
    let sampler = ExactCliffordSampler::new(1).unwrap();
    let est = estimate_average_fidelity(&deph, 100_000, &sampler, 110, 0.99).unwrap();
    let id = NoiseScenario::new(KrausChannel::identity(1).unwrap()).unwrap();
    let id_est = estimate_average_fidelity(&id, 10_000, &sampler, 110, 0.99).unwrap();
    let (_, fg) = convert_fidelities(2.0 / 3.0, 2).unwrap();
    ensure(
        (exact_value - 2.0 / 3.0).abs() < 1e-12
            && (est.mean - 2.0 / 3.0).abs() <= 0.01
            && id_est.mean == 1.0
            && (fg - 0.5).abs() < 1e-12,
        format!(
            "exact {exact_value:.6}, estimate {:.5} ± {:.4}, identity {}, F_g {fg:.6}",
            est.mean, est.confidence_radius, id_est.mean
        ),
    )
}

fn criterion_11() -> Outcome {
    let ns = [4usize, 8, 16, 32];
    let samples = 20_000;
    let mut means = Vec::new();
    let mut bounded = true;
    for &n in &ns {
        let mut rng = stream_rng(111, n as u64);
        let total: usize = (0..samples)
            .map(|_| BasicProcedureInstance::sample(n, &mut rng).unwrap().gate_count())
            .sum();
        let mean = total as f64 / samples as f64;
        bounded &= mean <= 6.0 * n as f64;
        means.push(mean);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &means);
    let shots: Vec<u64> = [2usize, 4, 10, 64].iter().map(|_| required_shots(0.01, 0.99).unwrap()).collect();
    let same = shots.windows(2).all(|w| w[0] == w[1]) && hoeffding_radius(shots[0], 0.99).unwrap() <= 0.01;
    ensure(
        bounded && r2 > 0.999 && same,
        format!(
            "means {:?}, fit {slope:.4}·n + {intercept:.3} (expected slope {:.4}), R² {r2:.6}, shots {}",
            means.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>(),
            expected_gate_count(1) - expected_gate_count(0),
            shots[0]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact 2-design, n = 1", criterion_1),
        ("exact 2-design, n = 2", criterion_2),
        ("Pauli twirl coefficient formula", criterion_3),
        ("Clifford twirl is depolarizing", criterion_4),
        ("gate conjugation with phases", criterion_5),
        ("chain stationarity", criterion_6),
        ("chain convergence envelope", criterion_7),
        ("trajectories match the chain", criterion_8),
        ("approximate-design moment test", criterion_9),
        ("fidelity protocol", criterion_10),
        ("gate-count scaling", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
