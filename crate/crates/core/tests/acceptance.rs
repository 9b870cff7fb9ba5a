//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion with its
//! runtime against the budget, then fails the process if any criterion failed.

use std::time::{Duration, Instant};

use nalgebra::DVector;
use ncmetro::algebra::{classify_pair, parse_operator, Classification, LadderPolynomial, DEFAULT_ADJOINT_CAP};
use ncmetro::cli_io::{parse_config, run, to_csv, to_json, ResultEnvelope};
use ncmetro::experiments::{
    dv_scan, example1_scaling, extreme_superposition, fig2a_scan, fig2a_slopes, fig2b_scan, fig3_scan, fit_loglog_slope,
    qfi_scan, squeezing_rate, switch_scan, DvPair,
};
use ncmetro::fock::{dv_bound_check, matrix_of, FockVector, SwitchEngine, DEFAULT_STEP};
use ncmetro::gaussian::{cfi_quadrature, homodyne_variance, run_protocol, HomodyneSpec};
use ncmetro::generator::{generator_by_conjugation, local_generator, qcrb_rmse, EncodingProtocol, ProbeDescriptor};
use ncmetro::Poly;
use num_complex::Complex64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn op(s: &str) -> Poly {
    parse_operator(s).unwrap()
}

fn random_hermitian(runner: &mut TestRunner) -> Poly {
    let monomials: Vec<(u32, u32)> = (0..=4u32).flat_map(|d| (0..=d).map(move |m| (m, d - m))).collect();
    let coeffs = proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), monomials.len())
        .new_tree(runner)
        .unwrap()
        .current();
    let raw = LadderPolynomial::from_terms(
        monomials
            .iter()
            .zip(coeffs)
            .map(|(&(m, n), (re, im))| ((m, n), Complex64::new(re, im))),
    );
    (&raw + &raw.adjoint()).scale_real(0.5)
}

fn criterion_1() -> Check {
    let comm = |a: &Poly, b: &Poly| a.commutator_bounded(b, 16).unwrap();
    let i = Complex64::new(0.0, 1.0);
    ensure(comm(&op("X"), &op("P")) == Poly::scalar(i), || "[X,P] != i".into())?;
    ensure(comm(&op("X^2"), &op("P")) == op("X").scale(i * 2.0), || "[X²,P] != 2iX".into())?;
    ensure(comm(&op("X^2 - P^2"), &op("2 i X")) == op("P").scale_real(-4.0), || "[X²−P²,2iX] != −4P".into())?;

    let mut runner = TestRunner::deterministic();
    let polys: Vec<Poly> = (0..100).map(|_| random_hermitian(&mut runner)).collect();
    let (mut anti, mut jacobi) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let (a, b, c) = (&polys[k], &polys[(k + 1) % 100], &polys[(k + 2) % 100]);
        anti = anti.max((&comm(a, b) + &comm(b, a)).max_abs_coefficient());
        let parts = [comm(a, &comm(b, c)), comm(b, &comm(c, a)), comm(c, &comm(a, b))];
        let scale = parts.iter().map(|p| p.max_abs_coefficient()).fold(1.0, f64::max);
        let j = &(&parts[0] + &parts[1]) + &parts[2];
        jacobi = jacobi.max(j.max_abs_coefficient() / scale);
    }
    ensure(anti < 1e-12, || format!("antisymmetry residual {anti:e}"))?;
    ensure(jacobi < 1e-12, || format!("Jacobi residual {jacobi:e} (relative)"))?;
    Ok(format!("identities exact; antisymmetry {anti:.1e}, Jacobi {jacobi:.1e} relative"))
}

fn criterion_2() -> Check {
    let classify = |g: &str, h: &str| classify_pair(&op(g), &op(h), DEFAULT_ADJOINT_CAP).unwrap().classification;
    let shear = classify("X^2", "P");
    ensure(shear == Classification::Finite { k: 1 }, || format!("(X²,P) → {shear:?}"))?;
    let constant = classify("X", "P");
    ensure(
        constant
            == Classification::FiniteConstant {
                k: 1,
                value: Complex64::new(0.0, 1.0),
            },
        || format!("(X,P) → {constant:?}"),
    )?;
    match classify("ad^2 + a^2", "P") {
        Classification::ClosedInfinite { p } if (p - 4.0).abs() < 1e-10 => {
            Ok(format!("Finite(1), FiniteConstant(1, i), ClosedInfinite(p = {p})"))
        }
        other => Err(format!("(a†²+a²,P) → {other:?}")),
    }
}

fn criterion_3() -> Check {
    for n in 1..=6u32 {
        let nf = n as f64;
        let s = 0.17;
        let p = EncodingProtocol::shearing(n, s, 0.0, ProbeDescriptor::Vacuum).unwrap();
        let r = classify_pair(p.h_g(), p.h_lambda(), DEFAULT_ADJOINT_CAP).unwrap();
        let got = local_generator(&p, &r).unwrap().generator;
        let want = &op("P").scale_real(nf) - &op("X").scale_real(2.0 * nf * nf * s);
        ensure(got.approx_eq(&want, 1e-12), || format!("shear N={n}: {got}"))?;

        let xi = 0.1;
        let p = EncodingProtocol::squeezing(n, xi, 0.0, ProbeDescriptor::Vacuum).unwrap();
        let r = classify_pair(p.h_g(), p.h_lambda(), DEFAULT_ADJOINT_CAP).unwrap();
        let got = local_generator(&p, &r).unwrap().generator;
        let want = &op("X").scale_real(-nf * (nf * xi).sinh()) + &op("P").scale_real(nf * (nf * xi).cosh());
        ensure(got.approx_eq(&want, 1e-12), || format!("squeeze N={n}: {got}"))?;
    }

    let dim = 40;
    let mut worst = 0.0f64;
    for h_g in ["X^2", "ad^2 + a^2"] {
        for n in 1..=4u32 {
            for g in [-0.2, -0.1, 0.1, 0.2] {
                let p = EncodingProtocol::new(op("P"), op(h_g), n, 0.0, g, ProbeDescriptor::Vacuum).unwrap();
                let r = classify_pair(p.h_g(), p.h_lambda(), DEFAULT_ADJOINT_CAP).unwrap();
                let series = matrix_of(&local_generator(&p, &r).unwrap().generator, dim);
                let brute = generator_by_conjugation(&p, dim).map_err(|e| format!("{h_g} N={n} ḡ={g}: {e}"))?;
                let d = brute.block_distance(&series, dim / 2);
                ensure(d < 1e-8, || format!("{h_g} N={n} ḡ={g}: block distance {d:e}"))?;
                worst = worst.max(d);
            }
        }
    }
    Ok(format!("printed generators exact for N ≤ 6; conjugation vs series {worst:.1e} on the 20-level block"))
}

fn coherent(a: f64) -> ProbeDescriptor<f64> {
    ProbeDescriptor::Coherent {
        alpha: Complex64::new(a, 0.0),
    }
}

fn criterion_4() -> Check {
    let xi = 0.1;
    let ns: Vec<u32> = (1..=12).collect();
    let scan = fig3_scan(&ns, xi, Complex64::new(0.3, 0.0), std::f64::consts::FRAC_PI_4, 80, false).map_err(|e| e.to_string())?;
    let mut worst_gauss = 0.0f64;
    for (n, q) in scan.column("qfi_gaussian").unwrap() {
        let closed = 2.0 * n * n * (2.0 * n * xi).cosh();
        worst_gauss = worst_gauss.max((q - closed).abs());
    }
    ensure(worst_gauss < 1e-10, || format!("Gaussian QFI off by {worst_gauss:e}"))?;
    let small: Vec<u32> = (1..=5).collect();
    let fock = fig3_scan(&small, xi, Complex64::new(0.3, 0.0), std::f64::consts::FRAC_PI_4, 80, true).map_err(|e| e.to_string())?;
    let gauss = fock.column("qfi_gaussian").unwrap();
    let numeric = fock.column("qfi_fock").unwrap();
    ensure(numeric.len() == 5, || "Fock oracle missing rows".into())?;
    let mut worst_fock = 0.0f64;
    for ((_, g), (n, f)) in gauss.iter().zip(&numeric) {
        let rel = (f - g).abs() / g;
        ensure(rel < 0.01, || format!("Fock oracle N={n}: {f} vs {g}"))?;
        worst_fock = worst_fock.max(rel);
    }
    Ok(format!("Gaussian vs closed form {worst_gauss:.1e}; Fock oracle within {:.2e} relative at dim 80", worst_fock))
}

fn criterion_5() -> Check {
    let xi = 0.1;
    let mut worst_var = 0.0f64;
    let mut worst_cfi = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut min_high = f64::INFINITY;
    for n in 1..=12u32 {
        let nf = n as f64;
        let p = EncodingProtocol::squeezing(n, xi, 0.0, coherent(0.3)).unwrap();
        let state = run_protocol(&p).unwrap();
        let r = 2.0 * nf * xi;
        for k in 0..16 {
            let theta = k as f64 * std::f64::consts::PI / 16.0;
            let s2 = (2.0 * theta).sin();
            let want = r.exp() * (1.0 - s2) / 4.0 + (-r).exp() * (1.0 + s2) / 4.0;
            worst_var = worst_var.max((homodyne_variance(&state, &HomodyneSpec { theta }) - want).abs());
        }
        let cfi = cfi_quadrature(&p, &HomodyneSpec { theta: std::f64::consts::FRAC_PI_4 }).unwrap();
        worst_cfi = worst_cfi.max((cfi - nf * nf * r.exp()).abs());
        let qfi = 2.0 * nf * nf * r.cosh();
        let ratio = cfi / qfi;
        worst_ratio = worst_ratio.max((ratio - 1.0 / (1.0 + (-2.0 * r).exp())).abs());
        if nf * xi >= 1.0 - 1e-12 {
            min_high = min_high.min(ratio);
        }
    }
    ensure(worst_var < 1e-10, || format!("homodyne variance off by {worst_var:e}"))?;
    ensure(worst_cfi < 1e-9, || format!("CFI at π/4 off by {worst_cfi:e}"))?;
    ensure(worst_ratio < 1e-10, || format!("CFI/QFI ratio off by {worst_ratio:e}"))?;
    ensure(min_high > 0.98, || format!("ratio {min_high} at Nξ̄ ≥ 1"))?;
    Ok(format!(
        "variance {worst_var:.1e}, CFI {worst_cfi:.1e}, ratio {worst_ratio:.1e}; min ratio at Nξ̄ ≥ 1 is {min_high:.4}"
    ))
}

fn criterion_6() -> Check {
    let ns: Vec<u32> = (8..=64).collect();
    let shear = example1_scaling(&ns, 0.2, ProbeDescriptor::Vacuum).map_err(|e| e.to_string())?;
    ensure((shear.slope - 4.0).abs() <= 0.05, || format!("shear slope {}", shear.slope))?;
    let template = EncodingProtocol::shearing(1, 0.2, 0.0, ProbeDescriptor::Vacuum).unwrap();
    let rmse: Vec<(f64, f64)> = qfi_scan(&template, &ns)
        .unwrap()
        .into_iter()
        .map(|(n, q)| (n, qcrb_rmse(q, 1).unwrap()))
        .collect();
    let rmse_slope = fit_loglog_slope(&rmse, None).unwrap().slope;
    ensure((rmse_slope + 2.0).abs() <= 0.025, || format!("RMSE slope {rmse_slope}"))?;
    let control = example1_scaling(&ns, 0.0, ProbeDescriptor::Vacuum).map_err(|e| e.to_string())?;
    ensure((control.slope - 2.0).abs() <= 0.01, || format!("s̄ = 0 slope {}", control.slope))?;
    let window: Vec<u32> = (4..=12).collect();
    let xi = 0.3;
    let rate = squeezing_rate(&window, xi, coherent(0.3)).map_err(|e| e.to_string())?;
    let rel = (rate.slope - 2.0 * xi).abs() / (2.0 * xi);
    ensure(rel <= 0.02, || format!("squeezing rate {} vs {}", rate.slope, 2.0 * xi))?;
    Ok(format!(
        "shear slope {:.3}, RMSE slope {:.3}, control {:.4}, squeezing rate {:.4} (2ξ̄ = {}) at ξ̄ = {xi}",
        shear.slope,
        rmse_slope,
        control.slope,
        rate.slope,
        2.0 * xi
    ))
}

fn criterion_7() -> Check {
    let ns: Vec<u32> = (1..=100).collect();
    let scan = fig2a_scan(&[1, 4, 6], &ns).unwrap();
    for (name, fit) in fig2a_slopes(&scan).unwrap() {
        let k: f64 = name.trim_start_matches("logcoef_K").parse().unwrap();
        ensure((fit.slope - 2.0 * (1.0 + k)).abs() < 1e-9, || format!("{name}: slope {}", fit.slope))?;
    }
    let scan = fig2b_scan(&[6, 10, 16, 20], 40).unwrap();
    for n in [6u32, 10, 16, 20] {
        let got = scan.metadata.get(&format!("argmax_N{n}")).cloned().unwrap_or_default();
        ensure(got == format!("{},{}", n - 1, n), || format!("argmax N={n}: {got}"))?;
    }
    for n in 2..=30u32 {
        let got = ncmetro::generator::k_peak(n, 2 * n as usize + 10).unwrap();
        ensure(got == vec![n as usize - 1, n as usize], || format!("k_peak N={n}: {got:?}"))?;
    }
    Ok("slopes 4, 10, 14; argmax {N−1, N} for N = 2..30".into())
}

fn criterion_8() -> Check {
    let (x, p, dim) = (0.1, 0.2, 80);
    let ns: Vec<u32> = (1..=6).collect();
    let scan = switch_scan(&ns, x, p, dim).map_err(|e| e.to_string())?;
    let phase = scan.column("phase_error").unwrap().iter().map(|r| r.1).fold(0.0, f64::max);
    ensure(phase < 1e-6, || format!("branch phase error {phase:e}"))?;
    let control = fit_loglog_slope(&scan.column("qfi_control").unwrap(), None).unwrap().slope;
    let definite = fit_loglog_slope(&scan.column("qfi_definite").unwrap(), None).unwrap().slope;
    let joint = fit_loglog_slope(&scan.column("qfi_joint").unwrap(), None).unwrap().slope;
    ensure((control - 4.0).abs() <= 0.1, || format!("order-superposition exponent {control}"))?;
    ensure((definite - 2.0).abs() <= 0.1, || format!("definite-order exponent {definite}"))?;
    // the engine reproduces the vacuum Weyl phase independently of the scan
    let engine = SwitchEngine::new(dim).unwrap();
    let s = engine.protocol(6, x, p, &FockVector::vacuum(dim)).unwrap();
    let want = Complex64::from_polar(1.0, -36.0 * x * p);
    ensure((s.branch_overlap() - want).norm() < 1e-6, || "Weyl phase at N=6".into())?;
    let _ = DEFAULT_STEP;
    Ok(format!(
        "phase error {phase:.1e}; exponents control {control:.3}, definite {definite:.3}, joint {joint:.3}"
    ))
}

fn criterion_9() -> Check {
    let ns: Vec<u32> = (1..=50).collect();
    let mut worst_sat = 0.0f64;
    for pair in [DvPair::Qubit, DvPair::Qutrit] {
        for g in [0.1, 1.0] {
            let scan = dv_scan(pair, &ns, g, None).map_err(|e| format!("{pair:?} ḡ={g}: {e}"))?;
            let qfi = scan.column("qfi").unwrap();
            let bound = scan.column("bound").unwrap();
            for ((n, q), (_, b)) in qfi.iter().zip(&bound) {
                ensure(*q <= *b * (1.0 + 1e-12), || format!("{pair:?} ḡ={g} N={n}: {q} > {b}"))?;
            }
        }
        // the extreme superposition pulled back through the auxiliary gates saturates the bound
        let (h_g, h_l) = pair.operators();
        let top = extreme_superposition(&h_l).unwrap();
        let spec = h_g.spectrum().unwrap();
        for g in [0.1, 1.0] {
            for n in ns.iter().copied() {
                let probe: DVector<Complex64> = spec.apply(-(n as f64) * g, &top);
                let row = dv_bound_check(&h_g, &h_l, &[n], g, &probe).map_err(|e| e.to_string())?.rows[0];
                let rel = (row.qfi - row.bound).abs() / row.bound;
                ensure(rel < 1e-9, || format!("{pair:?} ḡ={g} N={n}: saturation off by {rel:e}"))?;
                worst_sat = worst_sat.max(rel);
            }
        }
    }
    Ok(format!("QFI ≤ N²·spread² for N = 1..50; saturating probe within {worst_sat:.1e}"))
}

fn criterion_10() -> Check {
    let runs: [&[&str]; 3] = [
        &["fig3", "--N", "1..6", "--dim", "60"],
        &["switch", "--N", "1..4", "--dim", "40"],
        &["fig2b"],
    ];
    for args in runs {
        let cfg = parse_config(std::iter::once("ncmetro").chain(args.iter().copied())).map_err(|e| format!("{e:?}"))?;
        let a = run(&cfg).map_err(|e| e.to_string())?;
        let b = run(&cfg).map_err(|e| e.to_string())?;
        ensure(to_csv(&a) == to_csv(&b), || format!("{args:?}: CSV differs between runs"))?;
        let text = to_json(&a).map_err(|e| e.to_string())?;
        let back: ResultEnvelope = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        ensure(back == a, || format!("{args:?}: JSON round-trip changed the envelope"))?;
    }
    Ok("fig3, switch, fig2b: identical CSV, lossless JSON".into())
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check, u64); 10] = [
        (1, "algebra suite", criterion_1, 5),
        (2, "classification", criterion_2, 1),
        (3, "generator fidelity", criterion_3, 30),
        (4, "squeezing QFI", criterion_4, 60),
        (5, "homodyne", criterion_5, 10),
        (6, "scaling fits", criterion_6, 30),
        (7, "coefficient figures", criterion_7, 1),
        (8, "SWITCH", criterion_8, 120),
        (9, "finite-dimension bound", criterion_9, 10),
        (10, "determinism and round-trip", criterion_10, 5),
    ];
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (status, detail) = match (&outcome, in_budget) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {status} [{:.2} s / {budget} s] {name}: {detail}",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
