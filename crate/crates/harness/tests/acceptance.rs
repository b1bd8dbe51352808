//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria 3, 6 and 7 target values that the model does not reach; they are
//! expected to fail. The process exits nonzero when any other criterion fails
//! or when an expected failure passes. With `ACCEPTANCE_STRICT=1` every
//! failure is fatal.

use std::time::{Duration, Instant};

use qbc_core::adversary::{AliceStrategy, BiasPolicy, BobStrategy, Estimate, Scenario, Tally, ZetaPolicy};
use qbc_core::analysis::{averaged_evidence, coding_sector_distance, joint_distance};
use qbc_core::bits::BitString;
use qbc_core::protocol::{mixing_test_passes, CommitBit, ProtocolParams, Variant, DEFAULT_MIXING_THRESHOLD};
use qbc_core::qstate::{overlap_amplitude, trace_distance, uniform_descriptor, Basis, Bb84, PureQubit};
use qbc_harness::{
    classify_security, run_experiment, run_tally, write_rows, ExperimentConfig, Format, Protocol, Security,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIGMAS: f64 = 4.0;
const EXACT_TOL: f64 = 1e-12;
const CONCEAL_TOL: f64 = 1e-10;
const EXPECTED_RED: [u32; 3] = [3, 6, 7];

struct Outcome {
    id: u32,
    pass: bool,
}

struct Suite {
    outcomes: Vec<Outcome>,
    jobs: usize,
}

impl Suite {
    fn report(&mut self, id: u32, pass: bool, elapsed: Duration, summary: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if EXPECTED_RED.contains(&id) {
            " [expected red]"
        } else {
            ""
        };
        println!(
            "{tag} criterion {id:>2}{note} ({:.1}s): {summary}",
            elapsed.as_secs_f64()
        );
        self.outcomes.push(Outcome { id, pass });
    }

    fn tally(&self, scenario: &Scenario, trials: u64, seed: u64) -> Tally {
        run_tally(scenario, trials, seed, self.jobs, false).expect("scenario runs")
    }
}

fn info(text: String) {
    println!("     info: {text}");
}

fn params(m: usize, n: usize, p: usize, q: usize) -> ProtocolParams {
    ProtocolParams::new(m, n, p, q).expect("valid parameters")
}

fn scenario(variant: Variant, params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy) -> Scenario {
    let s = Scenario::new(variant, params, alice, bob);
    s.validate().expect("valid scenario");
    s
}

/// Frequency among trials that got past the mixing test.
fn among_done(count: u64, t: &Tally) -> Estimate {
    Estimate::binomial(count, t.trials - t.abort_mixing)
}

fn show(e: Estimate) -> String {
    format!("{:.6} ± {:.6}", e.value, e.stderr)
}

/// `Σ_{k : |k − g/2| > t√(g/4)} C(g,k) / 2^g`, summed in log space.
fn abort_tail(group: usize, threshold: f64) -> f64 {
    let ln_choose = |k: usize| -> f64 { (1..=k).map(|i| ((group - k + i) as f64 / i as f64).ln()).sum() };
    let ln_half = -(group as f64) * std::f64::consts::LN_2;
    (0..=group)
        .filter(|&k| !mixing_test_passes(k, group, threshold))
        .map(|k| (ln_choose(k) + ln_half).exp())
        .sum()
}

/// Abort probability of the honest two-group mixing test.
fn honest_abort_oracle(p: &ProtocolParams, threshold: f64) -> f64 {
    let per_group = abort_tail(p.test_group(), threshold);
    1.0 - (1.0 - per_group).powi(2)
}

fn all_strings(m: usize) -> Vec<Vec<u8>> {
    (0..1usize << m)
        .map(|v| (0..m).map(|i| ((v >> i) & 1) as u8).collect())
        .collect()
}

fn overlap_law(suite: &mut Suite) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for m in 0..=4 {
        for r in all_strings(m) {
            let amp = overlap_amplitude(
                &uniform_descriptor(&r, Basis::Plus),
                &uniform_descriptor(&r, Basis::Cross),
            )
            .expect("equal lengths");
            worst = worst.max((amp.norm_sqr() - 0.5f64.powi(m as i32)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for m in 5..=12 {
        for _ in 0..64 {
            let r = BitString::random(m, &mut rng);
            let amp = overlap_amplitude(
                &uniform_descriptor(r.as_slice(), Basis::Plus),
                &uniform_descriptor(r.as_slice(), Basis::Cross),
            )
            .expect("equal lengths");
            worst = worst.max((amp.norm_sqr() - 0.5f64.powi(m as i32)).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= EXACT_TOL && elapsed < Duration::from_secs(1);
    suite.report(
        1,
        pass,
        elapsed,
        format!("max |overlap|² − 2^-m deviation {worst:.2e} (tolerance {EXACT_TOL:.0e}, limit 1 s)"),
    );
}

fn honest_completeness(suite: &mut Suite) {
    let start = Instant::now();
    let pp = params(4, 16, 64, 64);
    let oracle = honest_abort_oracle(&pp, DEFAULT_MIXING_THRESHOLD);
    let mut pass = true;
    let mut parts = Vec::new();
    for (variant, name, seed) in [(Variant::Decoy, "p", 201), (Variant::Scrambled, "pprime", 202)] {
        let t = suite.tally(
            &scenario(variant, pp, AliceStrategy::Honest, BobStrategy::Honest),
            10_000,
            seed,
        );
        let a = t.acceptance();
        pass &= a.value >= 0.999 && t.accept + t.abort_mixing == t.trials;
        parts.push(format!("{name}: {:.4}", a.value));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    suite.report(
        2,
        pass,
        elapsed,
        format!("{} (need ≥ 0.999; abort oracle {oracle:.2e})", parts.join(", ")),
    );
}

fn basis_flip(suite: &mut Suite) {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2usize, 4, 6] {
        let pp = params(m, 16, 64, 64);
        let target = 0.5f64.powi(m as i32);
        let t = suite.tally(
            &scenario(Variant::Decoy, pp, AliceStrategy::BasisFlip, BobStrategy::Honest),
            100_000,
            300 + m as u64,
        );
        let accept = among_done(t.accept, &t);
        let ok = accept.within(target, SIGMAS, 0.0);
        pass &= ok;
        parts.push(format!("m={m}: {} vs {target}", show(accept)));
        info(format!(
            "basis-flip on p, m={m}: pass-3(c) {} (2^-m = {target}), end-to-end {} (enumeration (3/8)^m = {:.6})",
            show(among_done(t.passed_outcome, &t)),
            show(accept),
            0.375f64.powi(m as i32)
        ));
        let t = suite.tally(
            &scenario(
                Variant::Scrambled,
                pp,
                AliceStrategy::BasisFlip,
                BobStrategy::Honest,
            ),
            100_000,
            310 + m as u64,
        );
        info(format!(
            "basis-flip on pprime, m={m}: {} vs {target}",
            show(among_done(t.accept, &t))
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    suite.report(
        3,
        pass,
        elapsed,
        format!("end-to-end acceptance on p: {}", parts.join("; ")),
    );
}

fn deferred(suite: &mut Suite) {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2usize, 4] {
        let pp = params(m, 16, 64, 64);
        let target = 0.5f64.powi(m as i32);
        let plain = suite.tally(
            &scenario(Variant::Decoy, pp, AliceStrategy::Deferred, BobStrategy::Honest),
            100_000,
            400 + m as u64,
        );
        let ancilla = suite.tally(
            &scenario(
                Variant::Decoy,
                pp,
                AliceStrategy::DeferredAncilla,
                BobStrategy::Honest,
            ),
            100_000,
            410 + m as u64,
        );
        let a = among_done(plain.passed_outcome, &plain);
        let b = among_done(ancilla.passed_outcome, &ancilla);
        let z = (a.value - b.value).abs()
            / (a.stderr.powi(2) + b.stderr.powi(2))
                .sqrt()
                .max(f64::MIN_POSITIVE);
        let ok = a.within(target, SIGMAS, 0.0) && z <= SIGMAS;
        pass &= ok;
        parts.push(format!(
            "m={m}: {} vs {target}, ancilla {} (z = {z:.2})",
            show(a),
            show(b)
        ));
    }
    suite.report(
        4,
        pass,
        start.elapsed(),
        format!("pass-3(c) {}", parts.join("; ")),
    );
}

fn zeta_prime(suite: &mut Suite) {
    let start = Instant::now();
    let t = suite.tally(
        &scenario(
            Variant::Scrambled,
            params(4, 16, 64, 64),
            AliceStrategy::ZetaPrime,
            BobStrategy::Honest,
        ),
        100_000,
        500,
    );
    let s = t.cheat_stats();
    let pass = s.beta.iter().all(|b| b.within(0.5, SIGMAS, 0.0)) && s.lambda.within(0.5, SIGMAS, 0.0);
    suite.report(
        5,
        pass,
        start.elapsed(),
        format!(
            "β(0) = {}, β(1) = {}, λ = {} (target 0.5)",
            show(s.beta[0]),
            show(s.beta[1]),
            show(s.lambda)
        ),
    );
}

fn zeta_sweep(
    suite: &Suite,
    protocol: Protocol,
    alice: AliceStrategy,
    policy: ZetaPolicy,
) -> Vec<qbc_harness::ResultRow> {
    let config = ExperimentConfig {
        protocol,
        alice,
        zeta_policy: policy,
        trials: 100_000,
        seed: 600,
        sweep: Some("m=2,4,6".parse().expect("sweep")),
        jobs: suite.jobs,
        ..Default::default()
    };
    run_experiment(&config).expect("sweep runs")
}

fn strong_security(suite: &mut Suite) {
    let start = Instant::now();
    let rows = zeta_sweep(suite, Protocol::P, AliceStrategy::ZetaP, ZetaPolicy::Plus);
    let mut bound_ok = true;
    let mut parts = Vec::new();
    for r in &rows {
        let (l, s) = r.lambda_or_accept();
        let bound = 0.5f64.powi(r.m as i32) + SIGMAS * s;
        bound_ok &= l <= bound;
        parts.push(format!("m={}: λ = {l:.6} (bound {bound:.6})", r.m));
    }
    let p_report = classify_security(&rows).expect("three points");
    let prime_rows = zeta_sweep(
        suite,
        Protocol::PPrime,
        AliceStrategy::ZetaPrime,
        ZetaPolicy::Plus,
    );
    let prime_report = classify_security(&prime_rows).expect("three points");
    info(format!("{p_report}"));
    info(format!("{prime_report}"));
    for policy in [
        ZetaPolicy::Cross,
        ZetaPolicy::RandomPerQubit,
        ZetaPolicy::FixedZeros,
    ] {
        let rows = zeta_sweep(suite, Protocol::P, AliceStrategy::ZetaP, policy);
        let ls: Vec<String> = rows
            .iter()
            .map(|r| format!("m={}: {:.6}", r.m, r.lambda.unwrap_or(0.0)))
            .collect();
        info(format!("zeta-p policy {policy}: λ {}", ls.join(", ")));
    }
    let pass = bound_ok && p_report.label == Security::Strong && prime_report.label == Security::Weak;
    suite.report(
        6,
        pass,
        start.elapsed(),
        format!(
            "{}; p {}, pprime {} (need λ ≤ 2^-m + 4σ, strong, weak)",
            parts.join("; "),
            p_report.label,
            prime_report.label
        ),
    );
}

fn informed_bob(suite: &mut Suite) {
    let start = Instant::now();
    let m = 4;
    let pp = params(m, 16, 64, 64);
    let mf = m as i32;
    let marked = suite
        .tally(
            &scenario(
                Variant::Decoy,
                pp,
                AliceStrategy::Honest,
                BobStrategy::InformedMarked,
            ),
            100_000,
            700,
        )
        .p_cheat();
    let nondecoy = suite
        .tally(
            &scenario(
                Variant::Decoy,
                pp,
                AliceStrategy::Honest,
                BobStrategy::InformedNonDecoy,
            ),
            100_000,
            701,
        )
        .p_cheat();
    let (t_marked, t_nondecoy) = (1.0 - 0.5f64.powi(mf), 1.0 - 0.5f64.powf(m as f64 / 2.0));
    let pass = marked.within(t_marked, SIGMAS, 0.0) && nondecoy.within(t_nondecoy, SIGMAS, 0.0);
    // Enumeration: with the marks known, Bob is wrong only when every marked
    // qubit agrees with both bases (2^-m) and his coin misses (1/2). With the
    // decoys only, he sees all n survivors; the unmarked ones in Alice's basis
    // never depart, so he errs only when nothing departs.
    let oracle_marked = 1.0 - 0.5 * 0.5f64.powi(mf);
    let oracle_nondecoy = 1.0 - 0.5 * 0.75f64.powi(mf);
    info(format!(
        "derived oracles: informed-marked {oracle_marked:.6} ({}), informed-nondecoy {oracle_nondecoy:.6} ({})",
        if marked.within(oracle_marked, SIGMAS, 0.0) { "agrees" } else { "disagrees" },
        if nondecoy.within(oracle_nondecoy, SIGMAS, 0.0) { "agrees" } else { "disagrees" },
    ));
    suite.report(
        7,
        pass,
        start.elapsed(),
        format!(
            "informed-marked {} vs {t_marked}, informed-nondecoy {} vs {t_nondecoy:.6}",
            show(marked),
            show(nondecoy)
        ),
    );
}

fn concealment(suite: &mut Suite) {
    let start = Instant::now();
    let tiny = params(1, 1, 1, 2);
    let zero = averaged_evidence(&tiny, CommitBit::Zero).expect("tiny instance");
    let one = averaged_evidence(&tiny, CommitBit::One).expect("tiny instance");
    let distance = trace_distance(&zero, &one).expect("same size");
    info(format!(
        "evidence kept as a classical-quantum pair with R_x: distance {:.6}",
        joint_distance(&tiny).expect("tiny instance")
    ));
    let guess = suite
        .tally(
            &scenario(
                Variant::Decoy,
                params(2, 4, 16, 16),
                AliceStrategy::Honest,
                BobStrategy::UninformedGuess,
            ),
            100_000,
            800,
        )
        .p_cheat();
    let pass = distance < CONCEAL_TOL && guess.within(0.5, SIGMAS, 0.0);
    suite.report(
        8,
        pass,
        start.elapsed(),
        format!(
            "averaged-state distance {distance:.2e} (< {CONCEAL_TOL:.0e}), uninformed guess {}",
            show(guess)
        ),
    );
}

/// Trace distance of two one-qubit pure states from the eigenvalues of
/// their difference, `±√(d² + |o|²)` for a traceless 2×2 Hermitian matrix.
fn one_qubit_distance(a: &PureQubit, b: &PureQubit) -> f64 {
    let (x, y) = (a.amplitudes(), b.amplitudes());
    let d = x[0].norm_sqr() - y[0].norm_sqr();
    let o = x[0] * x[1].conj() - y[0] * y[1].conj();
    (d * d + o.norm_sqr()).sqrt()
}

fn coding_sector(suite: &mut Suite) {
    let start = Instant::now();
    let mut pass = true;
    let mut m1 = Vec::new();
    for r in [0u8, 1] {
        let got = coding_sector_distance(&BitString::new(vec![r]).expect("bit")).expect("one qubit");
        let oracle = one_qubit_distance(
            &Bb84::new(r, Basis::Plus).qubit(),
            &Bb84::new(r, Basis::Cross).qubit(),
        );
        pass &= got >= 0.5 && (got - oracle).abs() <= EXACT_TOL;
        m1.push(format!("{got:.6} (oracle {oracle:.6})"));
    }
    let mut smallest = f64::INFINITY;
    for m in 1..=4 {
        for r in all_strings(m) {
            let d = coding_sector_distance(&BitString::new(r.clone()).expect("bits")).expect("small");
            let overlap = overlap_amplitude(
                &uniform_descriptor(&r, Basis::Plus),
                &uniform_descriptor(&r, Basis::Cross),
            )
            .expect("equal lengths");
            pass &= d > 0.0 && (d - (1.0 - overlap.norm_sqr()).sqrt()).abs() <= EXACT_TOL;
            smallest = smallest.min(d);
        }
    }
    suite.report(
        9,
        pass,
        start.elapsed(),
        format!("m=1: {}; smallest over m ≤ 4: {smallest:.6} (> 0)", m1.join(", ")),
    );
}

fn biased_bob(suite: &mut Suite) {
    let start = Instant::now();
    let pp = params(4, 16, 64, 64);
    let mut pass = pp.p() - pp.n() == 48;
    let mut parts = Vec::new();
    for (policy, seed) in [(BiasPolicy::AllZeroPlus, 1000), (BiasPolicy::AllZeroCross, 1001)] {
        let mut s = scenario(
            Variant::Decoy,
            pp,
            AliceStrategy::Honest,
            BobStrategy::BiasedState,
        );
        s.bias_policy = policy;
        let abort = suite.tally(&s, 10_000, seed).abort_rate();
        pass &= abort.value >= 0.999;
        parts.push(format!("{policy} aborted {:.4}", abort.value));
    }
    let honest = suite
        .tally(
            &scenario(Variant::Decoy, pp, AliceStrategy::Honest, BobStrategy::Honest),
            10_000,
            1002,
        )
        .abort_rate();
    pass &= honest.value < 1e-3;
    let oracle = honest_abort_oracle(&pp, DEFAULT_MIXING_THRESHOLD);
    suite.report(
        10,
        pass,
        start.elapsed(),
        format!(
            "{}; honest false abort {:.4} (< 1e-3, oracle {oracle:.2e})",
            parts.join(", "),
            honest.value
        ),
    );
}

/// Pass probability of the decoy substitution, by enumerating Bob's basis
/// and bit plus Alice's `+` outcome on every marked qubit.
fn substitution_pass_oracle(m: usize) -> f64 {
    let mut per_qubit = Vec::new();
    for eta in [Basis::Plus, Basis::Cross] {
        for bob_bit in [0u8, 1] {
            let sent = Bb84::new(bob_bit, eta).qubit();
            for alice_bit in [0u8, 1] {
                let weight = 0.25 * sent.probability(alice_bit, Basis::Plus);
                // The twin `|a⟩_×` always passes 3(c); the cross-check looks
                // only where Bob prepared in the opened `×` basis.
                let survives = eta == Basis::Plus || alice_bit == bob_bit;
                per_qubit.push((weight, survives));
            }
        }
    }
    let mut total = 0.0;
    let k = per_qubit.len();
    for code in 0..k.pow(m as u32) {
        let mut c = code;
        let mut weight = 1.0;
        let mut survives = true;
        for _ in 0..m {
            let (w, s) = per_qubit[c % k];
            c /= k;
            weight *= w;
            survives &= s;
        }
        if survives {
            total += weight;
        }
    }
    total
}

fn decoy_substitution(suite: &mut Suite) {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [1usize, 2, 4] {
        let t = suite.tally(
            &scenario(
                Variant::Decoy,
                params(m, 16, 64, 64),
                AliceStrategy::DecoySubstitution,
                BobStrategy::Honest,
            ),
            100_000,
            1100 + m as u64,
        );
        let only_crosscheck = t.reject_unmarked == 0 && t.reject_outcome == 0 && t.crosscheck_off_basis == 0;
        let detection = among_done(t.reject_crosscheck, &t);
        let oracle = 1.0 - substitution_pass_oracle(m);
        pass &= only_crosscheck && detection.within(oracle, SIGMAS, 0.0);
        parts.push(format!(
            "m={m}: {} (oracle {oracle:.6}, 1 − 2^-m = {:.6}){}",
            show(detection),
            1.0 - 0.5f64.powi(m as i32),
            if only_crosscheck { "" } else { " other check fired" }
        ));
    }
    suite.report(
        11,
        pass,
        start.elapsed(),
        format!("detection via cross-check only; {}", parts.join("; ")),
    );
}

fn determinism(suite: &mut Suite) {
    let start = Instant::now();
    let csv = |jobs: usize, single_thread: bool| {
        let config = ExperimentConfig {
            protocol: Protocol::P,
            alice: AliceStrategy::ZetaP,
            trials: 20_000,
            seed: 1200,
            sweep: Some("m=1,2,3".parse().expect("sweep")),
            jobs,
            single_thread,
            ..Default::default()
        };
        let mut out = Vec::new();
        write_rows(&run_experiment(&config).expect("runs"), Format::Csv, &mut out).expect("in memory");
        out
    };
    let reference = csv(1, true);
    let variants = [
        csv(1, true),
        csv(2, false),
        csv(3, false),
        csv(suite.jobs.max(4), false),
    ];
    let pass = variants.iter().all(|v| *v == reference);
    suite.report(
        12,
        pass,
        start.elapsed(),
        format!(
            "{} bytes, identical across repeats and jobs 1, 2, 3, {}",
            reference.len(),
            suite.jobs.max(4)
        ),
    );
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut suite = Suite {
        outcomes: Vec::new(),
        jobs,
    };
    let start = Instant::now();

    overlap_law(&mut suite);
    honest_completeness(&mut suite);
    basis_flip(&mut suite);
    deferred(&mut suite);
    zeta_prime(&mut suite);
    strong_security(&mut suite);
    informed_bob(&mut suite);
    concealment(&mut suite);
    coding_sector(&mut suite);
    biased_bob(&mut suite);
    decoy_substitution(&mut suite);
    determinism(&mut suite);

    let failed: Vec<u32> = suite.outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let unexpected_fail: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !EXPECTED_RED.contains(id))
        .collect();
    let unexpected_pass: Vec<u32> = EXPECTED_RED
        .iter()
        .copied()
        .filter(|id| !failed.contains(id))
        .collect();
    println!(
        "acceptance: {} passed, {} failed {:?}, {:.1}s",
        suite.outcomes.len() - failed.len(),
        failed.len(),
        failed,
        start.elapsed().as_secs_f64()
    );
    if !unexpected_pass.is_empty() {
        println!("expected failures now pass: {unexpected_pass:?}");
    }
    if !unexpected_fail.is_empty() || !unexpected_pass.is_empty() || (strict && !failed.is_empty()) {
        std::process::exit(1);
    }
}
