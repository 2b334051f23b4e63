//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers. Run with
//! `cargo test -p rcmt-cli --test acceptance -- --nocapture` to see them.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use rcmt_core::analysis::{aggregate, measure, theoretical_bound};
use rcmt_core::fixtures::{
    chain_graph, organic_corpus, permute_atoms, random_graph, random_organic,
    random_permutation, sample_graph, SplitMix64,
};
use rcmt_core::graph::BondOrder;
use rcmt_core::metrics::{batch_metrics, MetricsReport, StabilityMode, ValenceTable};
use rcmt_core::reward::{
    molecular_stability_score, ppo_clip_objective, EnergyOracle, HarmonicOracle, RewardWeights,
    Thermostat,
};
use rcmt_core::sdf::write_sdf;
use rcmt_core::{decode, encode, roundtrip_report, ElementSymbol, Grid, MolecularGraph};

fn pass(name: &str, detail: impl std::fmt::Display) {
    println!("ACCEPTANCE {name}: PASS ({detail})");
}

/// Lossless round trip: decode(encode(g)) == g exactly and RMSD == 0 with
/// zero tolerance, for the sample molecule and 1000 random graphs (N <= 50).
#[test]
fn acceptance_lossless_round_trip() {
    let started = Instant::now();
    let grid = Grid::default();
    let mut rng = SplitMix64::new(0xACCE97);
    let mut checked = 0usize;
    let mut verify = |g: &MolecularGraph| {
        let decoded = decode(encode(g, grid).as_str(), grid).unwrap();
        assert_eq!(&decoded, g, "decode(encode(g)) must equal g exactly");
        let report = roundtrip_report(g, grid).unwrap();
        assert!(report.is_lossless());
        assert_eq!(report.rmsd, 0.0, "RMSD must be exactly zero");
        checked += 1;
    };
    verify(&sample_graph());
    for _ in 0..1000 {
        let g = random_graph(&mut rng, 50);
        verify(&g);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "must finish within 10 s");
    pass(
        "lossless-round-trip",
        format!("{checked} graphs, rmsd 0 exactly, {:.2?}", elapsed),
    );
}

/// Compression band on a 100-molecule organic sample with explicit
/// hydrogens and 10..=29 atoms: mean rate in [0.25, 0.55] and mean ratio
/// >= 1.8, both emitted.
#[test]
fn acceptance_compression_band() {
    let started = Instant::now();
    let grid = Grid::default();
    let mut rng = SplitMix64::new(0xBA2D);
    let records = organic_corpus(&mut rng, 100);
    for record in &records {
        let n = record.graph.atom_count();
        assert!((10..=29).contains(&n), "sample atom count out of band: {n}");
    }
    let reports: Vec<_> = records.iter().map(|r| measure(r, grid)).collect();
    let (mean_ratio, _median, mean_rate) = aggregate(&reports);
    println!("compression mean_rate = {mean_rate:.4}, mean_ratio = {mean_ratio:.4}");
    assert!(
        (0.25..=0.55).contains(&mean_rate),
        "mean rate {mean_rate} outside [0.25, 0.55]"
    );
    assert!(mean_ratio >= 1.8, "mean ratio {mean_ratio} below 1.8");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "must finish within 5 s");
    pass(
        "compression-band",
        format!("mean_rate {mean_rate:.4}, mean_ratio {mean_ratio:.4}, {:.2?}", elapsed),
    );
}

/// Ratio-bound calculator: hand-evaluated value within 1e-6 relative, and
/// monotonicity in delta and L over 100 random argument tuples.
#[test]
fn acceptance_bound_calculator() {
    let value = theoretical_bound(10, 9, 100.0, 1e-4, 118).unwrap();
    let expected = 1240.0 / (1300.0 + 9.0 * 4f64.log10());
    let rel = (value - expected).abs() / expected;
    assert!(rel < 1e-6, "relative error {rel}");
    let mut rng = SplitMix64::new(0xB0);
    for _ in 0..100 {
        let n = 1 + rng.below(60);
        let e = rng.below(90);
        let l = 1.0 + rng.unit_f64() * 999.0;
        let delta = 10f64.powi(-(1 + rng.below(5) as i32));
        let coarse = theoretical_bound(n, e, l, delta, 118).unwrap();
        let fine = theoretical_bound(n, e, l, delta / 10.0, 118).unwrap();
        let wider = theoretical_bound(n, e, l * (1.5 + rng.unit_f64()), delta, 118).unwrap();
        assert!(fine < coarse, "bound must fall as the grid refines");
        assert!(wider > coarse, "bound must rise with the coordinate range");
    }
    pass(
        "bound-calculator",
        format!("value {value:.6} vs hand 0.949887, rel err {rel:.2e}, 100 monotone tuples"),
    );
}

/// Default valence table, written out independently of the library.
fn brute_table() -> Vec<(&'static str, Vec<u32>)> {
    vec![
        ("H", vec![1]),
        ("C", vec![4]),
        ("N", vec![3]),
        ("O", vec![2]),
        ("F", vec![1]),
        ("B", vec![3]),
        ("Si", vec![4]),
        ("P", vec![3, 5]),
        ("S", vec![2, 4, 6]),
        ("Cl", vec![1]),
        ("Br", vec![1]),
        ("I", vec![1]),
    ]
}

/// Straight-line recomputation of the batch metrics: per-atom valences by
/// scanning the whole bond list, percentages by the same count/total
/// formula, distinct digests via sort+dedup instead of a hash set.
fn brute_force_metrics(molecules: &[MolecularGraph], mode: StabilityMode) -> MetricsReport {
    let table = brute_table();
    let allowed_for = |symbol: &str| -> Option<&Vec<u32>> {
        table.iter().find(|(s, _)| *s == symbol).map(|(_, v)| v)
    };
    let mut stable_atoms = 0usize;
    let mut total_atoms = 0usize;
    let mut unknown_atoms = 0usize;
    let mut stable_molecules = 0usize;
    let mut valid_molecules = 0usize;
    let mut valid_digests: Vec<u64> = Vec::new();
    for g in molecules {
        let mut all_stable = true;
        let mut all_within_max = true;
        for i in 1..=g.atom_count() {
            total_atoms += 1;
            let mut valence = 0u32;
            for b in g.bonds() {
                if b.i() == i || b.j() == i {
                    valence += match b.order() {
                        BondOrder::Single | BondOrder::Aromatic => 1,
                        BondOrder::Double => 2,
                        BondOrder::Triple => 3,
                    };
                }
            }
            let symbol = g.atoms()[i - 1].element.symbol();
            match allowed_for(symbol) {
                None => {
                    unknown_atoms += 1;
                    all_stable = false;
                    all_within_max = false;
                }
                Some(allowed) => {
                    let max = *allowed.iter().max().unwrap();
                    let stable = match mode {
                        StabilityMode::ExplicitH => allowed.contains(&valence),
                        StabilityMode::ImplicitH => valence <= max,
                    };
                    if stable {
                        stable_atoms += 1;
                    } else {
                        all_stable = false;
                    }
                    if valence > max {
                        all_within_max = false;
                    }
                }
            }
        }
        if all_stable {
            stable_molecules += 1;
        }
        if g.atom_count() >= 1 && all_within_max {
            valid_molecules += 1;
            valid_digests.push(g.canonical_hash());
        }
    }
    valid_digests.sort_unstable();
    valid_digests.dedup();
    let pct = |num: usize, den: usize| {
        if den == 0 {
            100.0
        } else {
            num as f64 / den as f64 * 100.0
        }
    };
    MetricsReport {
        atom_stability_pct: pct(stable_atoms, total_atoms),
        mol_stability_pct: pct(stable_molecules, molecules.len()),
        validity_pct: pct(valid_molecules, molecules.len()),
        uniqueness_pct: if valid_molecules == 0 {
            0.0
        } else {
            pct(valid_digests.len(), valid_molecules)
        },
        n_molecules: molecules.len(),
        n_atoms: total_atoms,
        unknown_element_atoms: unknown_atoms,
    }
}

/// Metrics oracle equivalence: batch_metrics equals the brute-force
/// recomputation bit-for-bit on 200 random graphs, and a ground-truth
/// organic sample scores >= 99% validity and atom stability in explicit
/// mode.
#[test]
fn acceptance_metrics_oracle_equivalence() {
    let table = ValenceTable::default();
    let mut rng = SplitMix64::new(0x0E7);
    let molecules: Vec<MolecularGraph> = (0..200).map(|_| random_graph(&mut rng, 12)).collect();
    for mode in [StabilityMode::ExplicitH, StabilityMode::ImplicitH] {
        let fast = batch_metrics(&molecules, &table, mode).unwrap();
        let brute = brute_force_metrics(&molecules, mode);
        assert_eq!(fast, brute, "batch metrics must match brute force bit-for-bit");
    }
    let ground_truth: Vec<MolecularGraph> =
        (0..100).map(|_| random_organic(&mut rng)).collect();
    let report = batch_metrics(&ground_truth, &table, StabilityMode::ExplicitH).unwrap();
    assert!(
        report.validity_pct >= 99.0,
        "ground truth validity {}",
        report.validity_pct
    );
    assert!(
        report.atom_stability_pct >= 99.0,
        "ground truth atom stability {}",
        report.atom_stability_pct
    );
    pass(
        "metrics-oracle-equivalence",
        format!(
            "200 graphs bit-for-bit, ground truth validity {:.2}%, atom stability {:.2}%",
            report.validity_pct, report.atom_stability_pct
        ),
    );
}

/// Uniqueness invariance: duplicating every molecule exactly halves the
/// uniqueness percentage, and permuting atom order changes no metric
/// (100 trials).
#[test]
fn acceptance_uniqueness_invariance() {
    let table = ValenceTable::default();
    let mut rng = SplitMix64::new(0x1D);
    for trial in 0..100 {
        let molecules: Vec<MolecularGraph> = (0..4 + (trial % 5))
            .map(|_| random_organic(&mut rng))
            .collect();
        let single = batch_metrics(&molecules, &table, StabilityMode::ExplicitH).unwrap();
        let mut doubled_list = molecules.clone();
        doubled_list.extend(molecules.iter().cloned());
        let doubled = batch_metrics(&doubled_list, &table, StabilityMode::ExplicitH).unwrap();
        assert_eq!(
            doubled.uniqueness_pct,
            single.uniqueness_pct / 2.0,
            "duplication must exactly halve uniqueness"
        );
        let permuted: Vec<MolecularGraph> = molecules
            .iter()
            .map(|g| permute_atoms(g, &random_permutation(&mut rng, g.atom_count())))
            .collect();
        let shuffled = batch_metrics(&permuted, &table, StabilityMode::ExplicitH).unwrap();
        assert_eq!(single, shuffled, "atom order must not change any metric");
    }
    pass("uniqueness-invariance", "100 trials, exact halving and permutation stability");
}

/// Reward math: the three worked clipped-surrogate examples to 1e-12
/// absolute, the clipped mean never above the unclipped mean on 10,000
/// random draws, the Boltzmann-score identities to 1e-12 relative, and the
/// all-unit default-weight reward equal to 1.0 exactly.
#[test]
fn acceptance_reward_math() {
    assert!((ppo_clip_objective(&[1.0], &[2.0], 0.2).unwrap() - 2.0).abs() < 1e-12);
    assert!((ppo_clip_objective(&[1.5], &[1.0], 0.2).unwrap() - 1.2).abs() < 1e-12);
    assert!((ppo_clip_objective(&[0.5], &[-1.0], 0.2).unwrap() + 0.8).abs() < 1e-12);

    let mut rng = SplitMix64::new(0xFFA);
    for _ in 0..10_000 {
        let n = 1 + rng.below(6) as usize;
        let ratios: Vec<f64> = (0..n).map(|_| 0.02 + rng.unit_f64() * 4.0).collect();
        let advantages: Vec<f64> = (0..n).map(|_| rng.unit_f64() * 6.0 - 3.0).collect();
        let epsilon = 0.01 + rng.unit_f64() * 0.97;
        let clipped = ppo_clip_objective(&ratios, &advantages, epsilon).unwrap();
        let unclipped = ratios
            .iter()
            .zip(&advantages)
            .map(|(r, a)| r * a)
            .sum::<f64>()
            / n as f64;
        assert!(
            clipped <= unclipped + 1e-12,
            "clipped {clipped} exceeds unclipped {unclipped}"
        );
    }

    struct Fixed(f64);
    impl EnergyOracle for Fixed {
        fn total_energy(&self, _: &MolecularGraph) -> Result<f64, rcmt_core::reward::RewardError> {
            Ok(self.0)
        }
        fn local_energy(
            &self,
            _: &MolecularGraph,
            _: usize,
        ) -> Result<f64, rcmt_core::reward::RewardError> {
            Ok(self.0)
        }
        fn reference_energy(&self) -> f64 {
            0.0
        }
        fn local_reference(&self, _: ElementSymbol) -> f64 {
            0.0
        }
    }
    let g = chain_graph(3);
    let at_reference =
        molecular_stability_score(&g, &Fixed(0.0), Thermostat::default()).unwrap();
    assert_eq!(at_reference, 1.0, "exp(0) must be exactly 1");
    for gap in [0.3, 1.0, 2.5] {
        let s1 = molecular_stability_score(&g, &Fixed(gap), Thermostat::new(1.0).unwrap())
            .unwrap();
        let s2 = molecular_stability_score(&g, &Fixed(gap), Thermostat::new(2.0).unwrap())
            .unwrap();
        let rel = (s2 - s1.sqrt()).abs() / s1.sqrt();
        assert!(rel < 1e-12, "kT doubling square-root law: rel {rel}");
    }
    let unit_total = RewardWeights::default().combine(1.0, 1.0, 1.0, 1.0);
    assert_eq!(unit_total, 1.0, "all-unit default reward must be exactly 1.0");
    pass(
        "reward-math",
        "3 worked examples @1e-12, 10k clipped<=unclipped draws, score identities, unit total 1.0",
    );
}

/// Bundled oracle gradient check: analytic vs central finite differences
/// within 1e-6 relative on 20 random molecules.
#[test]
fn acceptance_oracle_gradient_check() {
    let oracle = HarmonicOracle::default();
    let mut rng = SplitMix64::new(0x96AD);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = random_organic(&mut rng);
        let analytic = oracle.total_energy_gradient(&g);
        let mut positions = oracle.positions(&g);
        let h = 1e-6;
        let mut err2 = 0.0;
        let mut norm2 = 0.0;
        for i in 0..g.atom_count() {
            for axis in 0..3 {
                let orig = positions[i][axis];
                positions[i][axis] = orig + h;
                let plus = oracle.energy_at(&g, &positions);
                positions[i][axis] = orig - h;
                let minus = oracle.energy_at(&g, &positions);
                positions[i][axis] = orig;
                let fd = (plus - minus) / (2.0 * h);
                let d = analytic[i][axis] - fd;
                err2 += d * d;
                norm2 += analytic[i][axis] * analytic[i][axis];
            }
        }
        let rel = err2.sqrt() / norm2.sqrt().max(1.0);
        worst = worst.max(rel);
        assert!(rel <= 1e-6, "gradient mismatch: relative {rel}");
    }
    pass(
        "oracle-gradient-check",
        format!("20 molecules, worst relative error {worst:.2e}"),
    );
}

/// Linear scaling: encode time per atom on chains of 1e3, 1e4, and 1e5
/// atoms varies by less than 3x.
#[test]
fn acceptance_linear_scaling() {
    let started = Instant::now();
    let grid = Grid::default();
    let mut per_atom = Vec::new();
    for n in [1_000usize, 10_000, 100_000] {
        let g = chain_graph(n);
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let t = Instant::now();
            let line = encode(&g, grid);
            let dt = t.elapsed().as_secs_f64();
            std::hint::black_box(&line);
            best = best.min(dt);
        }
        per_atom.push(best / n as f64);
    }
    let max = per_atom.iter().cloned().fold(f64::MIN, f64::max);
    let min = per_atom.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    assert!(
        spread < 3.0,
        "per-atom time spread {spread:.2} across sizes (times {per_atom:?})"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "must finish within 30 s");
    pass(
        "linear-scaling",
        format!("per-atom spread {spread:.2}x across 1e3/1e4/1e5, {:.2?}", elapsed),
    );
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcmt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// CLI determinism: two runs of every subcommand on the fixture corpus
/// produce byte-identical machine-format output, regardless of the worker
/// count.
#[test]
fn acceptance_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::default();
    let mut rng = SplitMix64::new(0xDE7);
    let corpus = organic_corpus(&mut rng, 30);
    std::fs::write(dir.path().join("fixture.sdf"), write_sdf(&corpus, grid)).unwrap();
    let reference = organic_corpus(&mut rng, 5);
    std::fs::write(dir.path().join("ref.sdf"), write_sdf(&reference, grid)).unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "kt = 1.5\nreference_corpus = \"ref.sdf\"\n",
    )
    .unwrap();
    let first = run(&["encode", "fixture.sdf", "-o", "fixture.rcmt"], dir.path());
    assert_eq!(first.status.code(), Some(0));

    let commands: Vec<Vec<&str>> = vec![
        vec!["encode", "fixture.sdf"],
        vec!["decode", "fixture.rcmt"],
        vec!["roundtrip", "fixture.sdf"],
        vec!["stats", "fixture.sdf", "--bound", "100", "--format", "machine"],
        vec!["metrics", "fixture.sdf", "--mode", "explicit", "--format", "machine"],
        vec!["reward", "fixture.sdf", "--config", "cfg.toml", "--format", "machine"],
    ];
    for args in &commands {
        let a = run(args, dir.path());
        let b = run(args, dir.path());
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "stdout must be byte-identical: {args:?}");
        assert_eq!(a.stderr, b.stderr, "stderr must be byte-identical: {args:?}");
        // Worker count must not change the bytes either.
        let mut serial = args.clone();
        serial.extend_from_slice(&["--jobs", "1"]);
        let mut wide = args.clone();
        wide.extend_from_slice(&["--jobs", "4"]);
        let s = run(&serial, dir.path());
        let w = run(&wide, dir.path());
        assert_eq!(s.stdout, a.stdout, "--jobs 1 must match default: {args:?}");
        assert_eq!(w.stdout, a.stdout, "--jobs 4 must match default: {args:?}");
    }
    pass(
        "cli-determinism",
        format!("{} subcommands, 4 runs each, byte-identical", commands.len()),
    );
}
