//! The `verify` suites: deterministic batteries over the exact engines and
//! reduced-size Monte Carlo cross-checks.

use serde::Serialize;
use strongconv_core::expansion::{nu_coeffs, support_test, Ensemble};
use strongconv_core::genus::{
    entry_level_expectation, goe_word_polynomial, gue_word_polynomial, nu0_crosscheck,
    spectral_statistic_poly, Gaussian,
};
use strongconv_core::interp::{inverse_integer_ratio, optimality_example};
use strongconv_core::ncpoly::{CoeffMatrix, Letter, NCPoly, Word};
use strongconv_core::poly::Poly;
use strongconv_core::rat::{rat_frac, rat_i64, rat_to_f64, CRat, Rat};
use strongconv_core::rng::Stream;
use strongconv_core::sampler::{run_samples, word_trace, EnsembleId, SampleSpec};
use strongconv_core::weingarten::{symplectic_word_expectation, unitary_word_moment};
use num_traits::{One, Signed};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport {
            suite: suite.to_string(),
            seed,
            checks,
            pass,
        }
    }
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Deterministic random polynomial corpus: scalar coefficients in
/// [-3, 3] \ {0}, self-adjoint by symmetrization.
pub fn random_gaussian_ncpoly(
    stream: &mut Stream,
    r: u32,
    dim: usize,
    q0: usize,
    max_terms: usize,
) -> NCPoly {
    let mut p = NCPoly::zero(r, dim);
    let terms = 1 + (stream.next_u64() as usize) % max_terms;
    for _ in 0..terms {
        let len = 1 + (stream.next_u64() as usize) % q0;
        let word = Word(
            (0..len)
                .map(|_| Letter::new(1 + (stream.next_u64() % r as u64) as u32, false))
                .collect(),
        );
        let mut m = CoeffMatrix::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                let re = (stream.next_u64() % 7) as i64 - 3;
                let im = if i == j {
                    0
                } else {
                    (stream.next_u64() % 5) as i64 - 2
                };
                m.data[i * dim + j] = CRat::new(rat_i64(re), rat_i64(im));
            }
        }
        p.insert(word, m);
    }
    // symmetrize: P + P* in the semicircular convention
    let sym = p
        .add(&p.adjoint_for(strongconv_core::ncpoly::FreeModel::Semicircular))
        .unwrap();
    if sym.num_terms() == 0 {
        NCPoly::gaussian_generator(r, dim, 1)
    } else {
        sym
    }
}

pub fn random_poly(stream: &mut Stream, degree: usize) -> Poly {
    let coeffs: Vec<Rat> = (0..=degree)
        .map(|_| rat_i64((stream.next_u64() % 9) as i64 - 4))
        .collect();
    let p = Poly::from_coeffs(coeffs);
    if p.is_zero() || p.degree() == 0 {
        Poly::from_i64(&[0, 1, 1])
    } else {
        p
    }
}

/// Entry-level Wick oracle equality for all words of length <= 6 over two
/// letters at N in {2, 3}, both Gaussian gluing engines.
pub fn suite_exact(seed: u64) -> SuiteReport {
    let mut equalities = 0usize;
    let mut failures = vec![];
    for len in [2usize, 4, 6] {
        for code in 0..(1u32 << len) {
            let labels: Vec<u32> = (0..len).map(|i| 1 + ((code >> i) & 1)).collect();
            for n in [2u64, 3] {
                let x = rat_frac(1, n as i64);
                for (name, poly) in [
                    ("gue", gue_word_polynomial(&labels).map(|g| g.poly)),
                    ("goe", goe_word_polynomial(&labels).map(|g| g.poly)),
                ] {
                    let ens = if name == "gue" {
                        Gaussian::Gue
                    } else {
                        Gaussian::Goe
                    };
                    match (poly, entry_level_expectation(ens, &labels, n)) {
                        (Ok(p), Ok(direct)) => {
                            if p.eval(&x) == direct {
                                equalities += 1;
                            } else {
                                failures.push(format!("{name} {labels:?} N={n}"));
                            }
                        }
                        _ => failures.push(format!("{name} {labels:?} N={n} errored")),
                    }
                }
            }
        }
    }
    let checks = vec![check(
        "entry_level_wick_equality",
        failures.is_empty(),
        format!("{equalities} exact equalities, failures: {failures:?}"),
    )];
    SuiteReport::new("exact", seed, checks)
}

/// GUE parity, nu_1 = 0, and nu_0 = free moment on a random corpus.
pub fn suite_parity(seed: u64) -> SuiteReport {
    let mut stream = Stream::new(seed, 0, 0);
    let mut parity_ok = 0usize;
    let mut failures = vec![];
    let cases = 40;
    for idx in 0..cases {
        let p = random_gaussian_ncpoly(&mut stream, 2, 1 + (idx % 2), 2, 3);
        let h = random_poly(&mut stream, 2 + (idx % 4));
        match spectral_statistic_poly(Gaussian::Gue, &p, &h) {
            Ok(phi) => {
                if phi.poly.is_even() {
                    parity_ok += 1;
                } else {
                    failures.push(format!("case {idx}: odd coefficient survives"));
                }
            }
            Err(e) => failures.push(format!("case {idx}: {e}")),
        }
        match nu_coeffs(Gaussian::Gue, &p, &h, 2) {
            Ok(e) => {
                if !e.coeffs[1].is_zero() {
                    failures.push(format!("case {idx}: nu_1 != 0"));
                }
            }
            Err(e) => failures.push(format!("case {idx}: {e}")),
        }
        if let Err(e) = nu0_crosscheck(&p, &h) {
            failures.push(format!("case {idx}: {e}"));
        }
    }
    let checks = vec![check(
        "gue_parity_nu1_nu0",
        failures.is_empty(),
        format!("{parity_ok}/{cases} parity cases, failures: {failures:?}"),
    )];
    SuiteReport::new("parity", seed, checks)
}

/// Reduced-size duality battery: GSE versus the GOE polynomial at -1/(2N),
/// Sp(N) versus the O(N) rational at -1/(2N), and Haar-U moments by MC.
pub fn suite_duality(seed: u64) -> SuiteReport {
    let mut checks = vec![];
    let replicas = 4000;
    let n = 30usize;
    // GSE words
    let words = [vec![1u32, 1], vec![1, 1, 1, 1], vec![1, 2, 1, 2]];
    let mut worst_z: f64 = 0.0;
    let mut ok = true;
    for labels in &words {
        let predicted = rat_to_f64(
            &strongconv_core::genus::gse_expectation(labels, n as u64).unwrap(),
        );
        let samples: Vec<f64> = (0..replicas as u64)
            .map(|rep| {
                let mats: Vec<_> = (0..2)
                    .map(|idx| {
                        let mut s = Stream::new(seed, rep, idx);
                        strongconv_core::sampler::sample_gaussian(
                            strongconv_core::sampler::GaussKind::Gse,
                            n,
                            &mut s,
                        )
                    })
                    .collect();
                let w = Word(labels.iter().map(|&g| Letter::new(g, false)).collect());
                word_trace(&mats, &w).re
            })
            .collect();
        let stats = strongconv_core::sampler::EmpiricalStats::from_samples(&samples, &[]);
        let z = if stats.standard_error > 0.0 {
            (stats.mean - predicted) / stats.standard_error
        } else {
            0.0
        };
        worst_z = worst_z.max(z.abs());
        if z.abs() > 4.0 {
            ok = false;
        }
    }
    checks.push(check(
        "goe_gse_duality",
        ok,
        format!("worst |z| = {worst_z:.2} over {} words", words.len()),
    ));
    // Sp words via the orthogonal rational
    let sp_words = ["1,1", "1,1*", "1,1,1,1"];
    let n_sp = 16usize;
    let mut worst_sp: f64 = 0.0;
    let mut ok_sp = true;
    for ws in sp_words {
        let w = Word::parse(ws).unwrap();
        let predicted = rat_to_f64(&symplectic_word_expectation(&w, n_sp as u64).unwrap());
        let samples: Vec<f64> = (0..replicas as u64)
            .map(|rep| {
                let mut s = Stream::new(seed ^ 0x50, rep, 0);
                let v = strongconv_core::sampler::sample_haar(
                    strongconv_core::sampler::HaarKind::Symplectic,
                    n_sp,
                    &mut s,
                );
                word_trace(std::slice::from_ref(&v), &w).re
            })
            .collect();
        let stats = strongconv_core::sampler::EmpiricalStats::from_samples(&samples, &[]);
        let z = if stats.standard_error > 0.0 {
            (stats.mean - predicted) / stats.standard_error
        } else {
            0.0
        };
        worst_sp = worst_sp.max(z.abs());
        if z.abs() > 4.0 {
            ok_sp = false;
        }
    }
    checks.push(check(
        "o_sp_duality",
        ok_sp,
        format!("worst |z| = {worst_sp:.2} over {} words", sp_words.len()),
    ));
    // Haar-U MC vs Weingarten
    let hu_words = ["1,1*", "1,2,1*,2*", "1,1,1*,1*"];
    let n_u = 8usize;
    let mut worst_u: f64 = 0.0;
    let mut ok_u = true;
    for ws in hu_words {
        let w = Word::parse(ws).unwrap();
        let predicted = rat_to_f64(&unitary_word_moment(&w, n_u as u64).unwrap());
        let samples: Vec<f64> = (0..replicas as u64)
            .map(|rep| {
                let mats: Vec<_> = (0..2)
                    .map(|idx| {
                        let mut s = Stream::new(seed ^ 0xa1, rep, idx);
                        strongconv_core::sampler::sample_haar(
                            strongconv_core::sampler::HaarKind::Unitary,
                            n_u,
                            &mut s,
                        )
                    })
                    .collect();
                word_trace(&mats, &w).re
            })
            .collect();
        let stats = strongconv_core::sampler::EmpiricalStats::from_samples(&samples, &[]);
        let z = if stats.standard_error > 0.0 {
            (stats.mean - predicted) / stats.standard_error
        } else {
            0.0
        };
        worst_u = worst_u.max(z.abs());
        if z.abs() > 4.0 {
            ok_u = false;
        }
    }
    checks.push(check(
        "haar_u_weingarten_mc",
        ok_u,
        format!("worst |z| = {worst_u:.2} over {} words", hu_words.len()),
    ));
    SuiteReport::new("duality", seed, checks)
}

/// Interpolation ratios under the configured cap plus the extremal example.
pub fn suite_interp(seed: u64) -> SuiteReport {
    let mut checks = vec![];
    let cap = 100.0;
    let mut stream = Stream::new(seed, 1, 0);
    for q in [5usize, 10] {
        let delta = 1.0 / (24.0 * q as f64);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let h = random_poly(&mut stream, q);
            let rep = inverse_integer_ratio(&h, delta).unwrap();
            worst = worst.max(rep.ratio);
        }
        checks.push(check(
            &format!("interp_ratio_q{q}"),
            worst <= cap,
            format!("max ratio {worst:.3} (cap {cap})"),
        ));
    }
    let mut ok = true;
    for q in 1..=12usize {
        let h = optimality_example(q).unwrap();
        for n in 1..=(10 * q) as i64 {
            if h.eval(&rat_frac(1, n)).abs() > Rat::one() {
                ok = false;
            }
        }
    }
    checks.push(check(
        "optimality_example_bounded",
        ok,
        "|h_q(1/N)| <= 1 exactly for q <= 12, N <= 10q".to_string(),
    ));
    SuiteReport::new("interp", seed, checks)
}

/// Support property for the canonical GUE statistic plus a negative control.
pub fn suite_support(seed: u64) -> SuiteReport {
    let p = NCPoly::gaussian_generator(1, 1, 1);
    let mut checks = vec![];
    match support_test(Ensemble::Gue, &p, 0.2, 3) {
        Ok(rep) => {
            checks.push(check(
                "gue_support_pass",
                rep.pass,
                format!(
                    "values {:?} tolerances {:?}",
                    rep.values
                        .iter()
                        .map(|v| format!("{v:.2e}"))
                        .collect::<Vec<_>>(),
                    rep.tolerances
                        .iter()
                        .map(|v| format!("{v:.2e}"))
                        .collect::<Vec<_>>()
                ),
            ));
        }
        Err(e) => checks.push(check("gue_support_pass", false, e.to_string())),
    }
    // negative control: bump inside [-2, 2] must give nu_0 visibly nonzero
    match negative_control_value(&p) {
        Ok((v, tol)) => checks.push(check(
            "negative_control_nonzero",
            v.abs() > 10.0 * tol && v.abs() > 1e-3,
            format!("nu_0(bump) = {v:.4e}, tolerance {tol:.2e}"),
        )),
        Err(e) => checks.push(check("negative_control_nonzero", false, e.to_string())),
    }
    SuiteReport::new("support", seed, checks)
}

/// nu_0 of a smooth bump supported inside [-2, 2], with its tolerance.
pub fn negative_control_value(p: &NCPoly) -> anyhow::Result<(f64, f64)> {
    use strongconv_core::expansion::{
        dense_expansion, functional_with_measured_tolerance, gaussian_basis_curves,
    };
    let radius = 2.6f64;
    let inner = strongconv_core::testfn::build_test_function(6, radius, 0.5, 0.6)?;
    let series = dense_expansion(|x| 1.0 - inner.eval(x), radius, 8192)?;
    let radius_rat = strongconv_core::rat::rat_from_f64(radius).unwrap();
    let curves = gaussian_basis_curves(Gaussian::Gue, p, &radius_rat, 256, 0)?;
    Ok(functional_with_measured_tolerance(&curves[0], &series, 0, 256))
}

pub fn run_suite(name: &str, seed: u64) -> anyhow::Result<SuiteReport> {
    Ok(match name {
        "exact" => suite_exact(seed),
        "parity" => suite_parity(seed),
        "duality" => suite_duality(seed),
        "interp" => suite_interp(seed),
        "support" => suite_support(seed),
        other => anyhow::bail!("unknown suite {other:?} (exact|parity|duality|interp|support)"),
    })
}
