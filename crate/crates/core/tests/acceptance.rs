//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::process::ExitCode;
use std::time::Instant;

use lostfound::channel::{
    action_distance, dilate, instrument_from, measurement_from_decomposition, KrausChannel, Povm,
};
use lostfound::corrigibility::{
    classify_with_witnesses, quantum_criterion, qubit_classical_decomposition, qubit_ds_to_q, AStatus, ClassifyOptions,
};
use lostfound::linalg::{
    random_density, random_ginibre, random_unitary, zero_diagonal_basis, CMatrix, CVector, OrthoBasis,
};
use lostfound::recovery::{classical_recovery, corrected_channel, fidelity_bound, optimal_recovery, quantum_recovery};
use lostfound::zoo::{self, MixedEnvBases, MixedEnvironment};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `⟨Ω|(T⊗id)(|Ω⟩⟨Ω|)|Ω⟩` with `Ω = Σ_i |ii⟩/√d`, evaluated on the
/// `d²`-dimensional vector directly.
fn omega_fidelity(kraus: &[CMatrix]) -> f64 {
    let d = kraus[0].nrows();
    let omega = CVector::from_fn(d * d, |k, _| {
        if k / d == k % d {
            Complex64::new(1.0 / (d as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let one = DMatrix::<Complex64>::identity(d, d);
    kraus
        .iter()
        .map(|t| omega.dotc(&(t.kronecker(&one) * &omega)).norm_sqr())
        .sum()
}

/// Channel from the first `dout·n` rows of a Haar isometry.
fn random_channel(din: usize, dout: usize, n: usize, r: &mut ChaCha8Rng) -> KrausChannel {
    let u = random_unitary(dout * n, r);
    let ops = (0..n)
        .map(|a| CMatrix::from_fn(dout, din, |j, i| u[(a * dout + j, i)]))
        .collect();
    KrausChannel::new(ops).unwrap()
}

/// Random POVM `S^{-1/2} G_i†G_i S^{-1/2}` with `S = Σ G_i†G_i`.
fn random_povm(dim: usize, n: usize, r: &mut ChaCha8Rng) -> Povm {
    let raw: Vec<CMatrix> = (0..n)
        .map(|_| {
            let g = random_ginibre(dim, dim, r);
            g.adjoint() * g
        })
        .collect();
    let s = raw.iter().fold(CMatrix::zeros(dim, dim), |a, m| a + m);
    let eig = s.symmetric_eigen();
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.powf(-0.5), 0.0)))
        * eig.eigenvectors.adjoint();
    Povm::new(raw.iter().map(|m| &inv_sqrt * m * &inv_sqrt).collect(), 1e-10).unwrap()
}

fn max_offdiag(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn casimir_half_action() -> Outcome {
    let ch = zoo::casimir_channel(1).map_err(err)?;
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_density(2, &mut r);
        let expect = CMatrix::identity(2, 2).scale(2.0 / 3.0) - rho.scale(1.0 / 3.0);
        worst = worst.max((ch.apply(&rho).map_err(err)? - expect).norm());
    }
    check(worst < 1e-12, format!("max deviation {worst:.2e}"))?;
    Ok(format!("max deviation {worst:.2e} over 20 states"))
}

fn hierarchy() -> Outcome {
    let opts = ClassifyOptions::default();
    let run = |name: &str| -> Result<_, String> {
        let e = zoo::zoo_entry(name).map_err(err)?;
        Ok(classify_with_witnesses(&e.channel, &opts, &e.witnesses))
    };
    for name in ["depolarizing-2", "depolarizing-3"] {
        let c = run(name)?;
        check(c.q.holds && c.q.residual < 1e-8, format!("{name}: Q not found"))?;
    }
    let c = run("casimir-1")?;
    let ds = c.ds.as_ref().is_some_and(|d| d.holds);
    check(ds, "casimir-1: not DS")?;
    check(!c.q.holds && c.q.residual > 1e-8, "casimir-1: Q")?;
    check(
        c.a.status == AStatus::SampledYes && c.a.bases_passed == 64 && c.a.worst_residual < 1e-8,
        format!(
            "casimir-1: A {:?}, {} of {}",
            c.a.status, c.a.bases_passed, c.a.bases_tested
        ),
    )?;
    check(c.s.holds && c.s.residual < 1e-8, "casimir-1: not S")?;

    let c = run("collapsing-3")?;
    check(c.ds.as_ref().is_some_and(|d| !d.holds), "collapsing-3: DS")?;
    check(c.a.status.is_yes(), format!("collapsing-3: A {:?}", c.a.status))?;

    let c = run("casimir-3/2")?;
    check(c.s.holds && c.s.residual < 1e-8, "casimir-3/2: not S")?;
    check(c.a.status == AStatus::No, format!("casimir-3/2: A {:?}", c.a.status))?;
    let floor = zoo::casimir32_witness_floor(1000, 300, 7);
    check(floor > 1e-2, format!("casimir-3/2 witness floor {floor:.3e}"))?;
    Ok(format!("spin-3/2 witness floor {floor:.4} over 1000 restarts"))
}

fn quantum_recovery_on_q() -> Outcome {
    let mut cases: Vec<(String, KrausChannel)> = vec![
        ("depolarizing-2".into(), zoo::depolarizing_channel(2)),
        ("depolarizing-3".into(), zoo::depolarizing_channel(3)),
        ("casimir-1/2".into(), zoo::casimir_channel(1).map_err(err)?),
    ];
    for n in [2, 3] {
        let f = zoo::von_neumann_channel(n)
            .recombine(&zoo::fourier_unitary(n), 1e-12)
            .map_err(err)?;
        cases.push((format!("von-neumann-{n} (Fourier)"), f));
    }
    let mut r = rng(3);
    let mut worst_f: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for (name, ch) in &cases {
        let plan = quantum_recovery(ch, 1e-10).map_err(err)?;
        let corr = corrected_channel(ch, &plan).map_err(err)?;
        let f = omega_fidelity(corr.kraus());
        worst_f = worst_f.max((f - 1.0).abs());
        check((f - 1.0).abs() < 1e-10, format!("{name}: F = {f}"))?;
        let d = ch.dim_in();
        let weights: Vec<f64> = ch.kraus().iter().map(|t| t.norm_squared() / d as f64).collect();
        for _ in 0..10 {
            let rho = random_density(d, &mut r);
            for (t, w) in ch.kraus().iter().zip(&weights) {
                let p = (t * &rho * t.adjoint()).trace().re;
                worst_p = worst_p.max((p - w).abs());
            }
        }
        check(worst_p < 1e-10, format!("{name}: probability deviation {worst_p:.2e}"))?;
    }
    Ok(format!(
        "max |F-1| {worst_f:.1e}, max probability deviation {worst_p:.1e}"
    ))
}

fn bound_attainment() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let mut channels = Vec::new();
    for _ in 0..50 {
        let d = r.random_range(2..=4);
        let n = r.random_range(2..=5);
        let ch = random_channel(d, d, n, &mut r);
        // Independent bound: Σ (sum of singular values)² / d².
        let bound: f64 = ch
            .kraus()
            .iter()
            .map(|t| t.clone().svd(false, false).singular_values.sum().powi(2))
            .sum::<f64>()
            / (d * d) as f64;
        let lib_bound = fidelity_bound(&ch).map_err(err)?;
        check(
            (lib_bound - bound).abs() < 1e-9,
            format!("bound mismatch {lib_bound} vs {bound}"),
        )?;
        let corr = corrected_channel(&ch, &optimal_recovery(&ch).map_err(err)?).map_err(err)?;
        let f = omega_fidelity(corr.kraus());
        worst = worst.max((f - bound).abs());
        check((f - bound).abs() < 1e-9, format!("F {f} vs bound {bound}"))?;
        channels.push((ch, bound));
    }
    let mut excess = f64::NEG_INFINITY;
    for k in 0..100 {
        let (ch, bound) = &channels[k % channels.len()];
        let d = ch.dim_in();
        let mut kraus = Vec::new();
        for t in ch.kraus() {
            if k % 2 == 0 {
                // Random channel per Kraus operator.
                let m = r.random_range(1..=3);
                let rec = random_channel(d, d, m, &mut r);
                kraus.extend(rec.kraus().iter().map(|q| q * t));
            } else {
                // Polar unitary of t, perturbed by a Cayley rotation.
                let svd = t.clone().svd(true, true);
                let v = svd.u.unwrap() * svd.v_t.unwrap();
                let g = random_ginibre(d, d, &mut r);
                let h = (&g + g.adjoint()).scale(1e-3);
                let one = CMatrix::identity(d, d);
                let i = Complex64::new(0.0, 1.0);
                let cayley = (&one - &h * i).try_inverse().unwrap() * (&one + &h * i);
                kraus.push(cayley * v.adjoint() * t);
            }
        }
        let f = omega_fidelity(&kraus);
        excess = excess.max(f - bound);
    }
    check(
        excess <= 1e-9,
        format!("alternative plan exceeds bound by {excess:.2e}"),
    )?;
    Ok(format!(
        "max |F-bound| {worst:.1e}, max alternative excess {excess:.2e}"
    ))
}

fn closed_form_fidelities() -> Outcome {
    let vn = zoo::von_neumann_channel(2);
    let corr = corrected_channel(&vn, &optimal_recovery(&vn).map_err(err)?).map_err(err)?;
    let f_vn = omega_fidelity(corr.kraus());
    let b_vn = fidelity_bound(&vn).map_err(err)?;
    check(
        (f_vn - 0.5).abs() < 1e-10 && (b_vn - 0.5).abs() < 1e-10,
        format!("von Neumann {f_vn} / {b_vn}"),
    )?;

    let cs = zoo::casimir_channel(2).map_err(err)?;
    let corr = corrected_channel(&cs, &optimal_recovery(&cs).map_err(err)?).map_err(err)?;
    let f_cs = omega_fidelity(corr.kraus());
    check((f_cs - 2.0 / 3.0).abs() < 1e-10, format!("casimir-1 optimal {f_cs}"))?;
    check(
        (corr.fidelity().map_err(err)? - f_cs).abs() < 1e-12,
        "library fidelity disagrees",
    )?;

    let dp = zoo::depolarizing_channel(2);
    let f_dp = omega_fidelity(dp.kraus());
    check((f_dp - 0.25).abs() < 1e-10, format!("depolarizing raw {f_dp}"))?;
    check(
        (dp.fidelity().map_err(err)? - 0.25).abs() < 1e-10,
        "library fidelity disagrees",
    )?;
    Ok(format!("{f_vn:.12}, {f_cs:.12}, {f_dp:.12}"))
}

fn zero_diagonal_suite() -> Outcome {
    let mut r = rng(6);
    let (mut worst_diag, mut worst_orth): (f64, f64) = (0.0, 0.0);
    for k in 0..100u64 {
        let n = 2 + (k as usize % 5);
        let mut x = random_ginibre(n, n, &mut r);
        let shift = x.trace() / Complex64::new(n as f64, 0.0);
        for i in 0..n {
            x[(i, i)] -= shift;
        }
        let b = zero_diagonal_basis(&x, 1e-12, k).map_err(err)?;
        let m = b.matrix();
        let y = m.adjoint() * &x * &m;
        let diag = (0..n).map(|i| y[(i, i)].norm()).fold(0.0, f64::max);
        let orth = (m.adjoint() * &m - CMatrix::identity(n, n)).norm();
        worst_diag = worst_diag.max(diag);
        worst_orth = worst_orth.max(orth);
    }
    check(
        worst_diag < 1e-9 && worst_orth < 1e-10,
        format!("diag {worst_diag:.2e}, orth {worst_orth:.2e}"),
    )?;
    Ok(format!(
        "max diagonal {worst_diag:.1e}, orthonormality {worst_orth:.1e}"
    ))
}

/// Kraus operators from the eigendecomposition of `Σ_α vec(t_α)vec(t_α)†`.
fn choi_kraus(ch: &KrausChannel) -> Vec<CMatrix> {
    let (dout, din) = (ch.dim_out(), ch.dim_in());
    let mut c = CMatrix::zeros(dout * din, dout * din);
    for t in ch.kraus() {
        let v = CVector::from_column_slice(t.as_slice());
        c += &v * v.adjoint();
    }
    let eig = c.symmetric_eigen();
    (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-13)
        .map(|i| {
            let v = eig.eigenvectors.column(i).scale(eig.eigenvalues[i].sqrt());
            CMatrix::from_column_slice(dout, din, v.as_slice())
        })
        .collect()
}

fn qubit_ds_to_q_suite() -> Outcome {
    let mut r = rng(7);
    let (mut worst_q, mut worst_act): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let m = r.random_range(2..=4);
        let w: Vec<f64> = (0..m).map(|_| r.random::<f64>() + 0.05).collect();
        let total: f64 = w.iter().sum();
        let mix = KrausChannel::new(
            w.iter()
                .map(|p| random_unitary(2, &mut r).scale((p / total).sqrt()))
                .collect(),
        )
        .unwrap();
        let ops = choi_kraus(&mix);
        // An eigendecomposition with simple spectrum can return unitary
        // operators again; a random mixing makes them generic.
        let u = random_unitary(ops.len(), &mut r);
        let scrambled = KrausChannel::new(ops).unwrap().recombine(&u, 1e-12).map_err(err)?;
        let q = qubit_ds_to_q(&scrambled, 1e-9).map_err(err)?;
        let crit = quantum_criterion(&q, 1e-9);
        worst_q = worst_q.max(crit.max_residual());
        worst_act = worst_act.max(action_distance(&q, &mix).map_err(err)?);
        check(crit.holds, format!("criterion residual {:.2e}", crit.max_residual()))?;
    }
    check(
        worst_q < 1e-9 && worst_act < 1e-10,
        format!("residual {worst_q:.2e}, action {worst_act:.2e}"),
    )?;
    Ok(format!(
        "max criterion residual {worst_q:.1e}, action distance {worst_act:.1e}"
    ))
}

fn qubit_classical_suite() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(2..=4);
        let ch = random_channel(2, 2, n, &mut r);
        let b = OrthoBasis::random(2, &mut r);
        let u = qubit_classical_decomposition(&ch, &b).map_err(err)?;
        let t = ch.recombine(&u, 1e-10).map_err(err)?;
        let m = b.matrix();
        for op in t.kraus() {
            worst = worst.max(max_offdiag(&(m.adjoint() * op.adjoint() * op * &m)));
        }
    }
    check(worst < 1e-9, format!("off-diagonal {worst:.2e}"))?;
    Ok(format!("max off-diagonal {worst:.1e}"))
}

fn instrument_realization() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let din = r.random_range(2..=3);
        let dout = r.random_range(2..=3);
        let n = r.random_range(2..=4);
        let ch = random_channel(din, dout, n, &mut r);
        let target = ch.recombine(&random_unitary(n, &mut r), 1e-10).map_err(err)?;
        let dil = dilate(&ch).map_err(err)?;
        let povm = measurement_from_decomposition(&dil, &target, 1e-10).map_err(err)?;
        let inst = instrument_from(&dil, &povm, &dil.env_state()).map_err(err)?;
        check(inst.len() == target.len(), "outcome count")?;
        for _ in 0..3 {
            let rho = random_density(din, &mut r);
            for (a, t) in target.kraus().iter().enumerate() {
                let got = inst.outcome(a).apply(&rho).map_err(err)?;
                worst = worst.max((got - t * &rho * t.adjoint()).norm());
            }
        }
    }
    check(worst < 1e-9, format!("per-outcome deviation {worst:.2e}"))?;
    Ok(format!("max per-outcome deviation {worst:.1e}"))
}

fn mixed_environment_example() -> Outcome {
    let ex = MixedEnvironment::new(MixedEnvBases::default());
    let mut r = rng(10);
    let mut worst_act: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_density(2, &mut r);
        let out = ex.channel_action(&rho).map_err(err)?;
        worst_act = worst_act.max((out - CMatrix::identity(2, 2).scale(0.5)).norm());
    }
    check(worst_act < 1e-12, format!("action deviation {worst_act:.2e}"))?;

    let mut min_overlap = f64::INFINITY;
    for i in 0..32 {
        let b = OrthoBasis::random(2, &mut r);
        for _ in 0..32 {
            let povm = random_povm(2, r.random_range(2..=4), &mut r);
            for (k, o) in ex.outcome_overlaps(&b, &povm).map_err(err)?.into_iter().enumerate() {
                let o = o.ok_or_else(|| format!("basis {i}: outcome {k} vanished"))?;
                min_overlap = min_overlap.min(o);
            }
        }
    }
    check(min_overlap > 1e-6, format!("min normalized overlap {min_overlap:.2e}"))?;

    let mut worst_rate: f64 = 1.0;
    for _ in 0..16 {
        let b = OrthoBasis::random(2, &mut r);
        let tr = zoo::locc_decode(&ex, &b).map_err(err)?;
        worst_rate = worst_rate.min(tr.success_rate);
    }
    check((worst_rate - 1.0).abs() < 1e-12, format!("success rate {worst_rate}"))?;
    Ok(format!(
        "min overlap {min_overlap:.3e}, min success rate {worst_rate:.15}"
    ))
}

fn spin32_witness() -> Outcome {
    let sp = zoo::spin_operators(3).map_err(err)?;
    let eig = sp.j[2].clone().symmetric_eigen();
    // Eigenbasis of J₃ computed here, sorted by eigenvalue m = 3/2..-3/2.
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let basis = OrthoBasis::new(
        order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
        1e-12,
    )
    .map_err(err)?;
    let m = basis.matrix();
    let ch = zoo::casimir_channel(3).map_err(err)?;
    let ladder = ch.recombine(&zoo::casimir_ladder_unitary(), 1e-12).map_err(err)?;
    let mut off: f64 = 0.0;
    for t in ladder.kraus() {
        off = off.max(max_offdiag(&(m.adjoint() * t.adjoint() * t * &m)));
    }
    check(off < 1e-12, format!("off-diagonal {off:.2e}"))?;
    let plan = classical_recovery(&ladder, &basis, 1e-10).map_err(err)?;
    let corr = corrected_channel(&ladder, &plan).map_err(err)?;
    let mut worst: f64 = 0.0;
    for x in 0..4 {
        let p = basis.projector(x);
        worst = worst.max((corr.apply(&p).map_err(err)? - p).norm());
    }
    check(worst < 1e-9, format!("restoration {worst:.2e}"))?;
    Ok(format!("off-diagonal {off:.1e}, restoration {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("spin-1/2 Casimir channel action", casimir_half_action),
        ("hierarchy regressions", hierarchy),
        ("quantum recovery on Q channels", quantum_recovery_on_q),
        ("optimal recovery attains the fidelity bound", bound_attainment),
        ("closed-form fidelity values", closed_form_fidelities),
        ("zero-diagonal basis", zero_diagonal_suite),
        ("qubit doubly stochastic implies Q", qubit_ds_to_q_suite),
        ("qubit classical decomposition", qubit_classical_suite),
        ("instrument realizes a Kraus decomposition", instrument_realization),
        ("mixed-environment qubit example", mixed_environment_example),
        ("spin-3/2 ladder witness", spin32_witness),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
