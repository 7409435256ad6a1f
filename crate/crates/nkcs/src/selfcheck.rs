//! Brute-force oracle suite: the release gate behind the `selfcheck`
//! subcommand.
//!
//! Each check re-derives some core guarantee through an independent code
//! path — exhaustive enumeration, frozen constants computed outside this
//! crate, or synthetic decision streams — and reports pass/fail with a
//! diagnostic. The scales default to the documented property levels, so a
//! full run takes a few seconds.

use crate::dynamics::{decide, EcosystemState, Policy, Proposal, Simulation};
use crate::landscape::{gene_value, GeneContext, Landscape, LandscapeSpec};
use crate::rng::{chain, mix64, KeyStream};
use crate::stats::{student_t_two_tailed, welch_t_test};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn from_result(name: &'static str, result: Result<String, String>) -> Self {
        match result {
            Ok(detail) => CheckReport {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckReport {
                name,
                passed: false,
                detail,
            },
        }
    }
}

/// A gene-value function with the production signature; checks that
/// compare against an oracle take it as a parameter so tests can inject a
/// corrupted variant and prove the oracle actually bites.
pub type ValueFn<'f> = &'f dyn Fn(u64, usize, usize, u64) -> f64;

/// Run the whole suite at default scales, in a fixed order.
pub fn run_all() -> Vec<CheckReport> {
    vec![
        CheckReport::from_result("mixer-goldens", mixer_goldens(&mix64)),
        CheckReport::from_result("chain-goldens", chain_goldens()),
        CheckReport::from_result(
            "gene-value-goldens",
            gene_value_goldens(&gene_value),
        ),
        CheckReport::from_result(
            "exhaustive-fitness-equality",
            exhaustive_fitness_equality(20, &gene_value),
        ),
        CheckReport::from_result("flip-scan-locality", flip_scan_locality(10)),
        CheckReport::from_result("policy-nesting", policy_nesting(100_000)),
        CheckReport::from_result(
            "global-control-monotonicity",
            global_monotonicity(1_000_000),
        ),
        CheckReport::from_result("reversion-identity", reversion_identity(10_000)),
        CheckReport::from_result("t-test-vectors", ttest_vectors()),
    ]
}

/// Frozen outputs of the 64-bit finalizer. Computed independently of this
/// crate; a corrupted multiplier or shift cannot pass.
pub fn mixer_goldens(mix: &dyn Fn(u64) -> u64) -> Result<String, String> {
    let cases: [(u64, u64); 4] = [
        (0, 0),
        (1, 0x5692_161D_100B_05E5),
        (2, 0xDBD2_3897_3A2B_148A),
        (0x0123_4567_89AB_CDEF, 0xB2C0_58E4_EBB5_112C),
    ];
    for (input, want) in cases {
        let got = mix(input);
        if got != want {
            return Err(format!(
                "mix64({input:#x}) = {got:#018x}, expected {want:#018x}"
            ));
        }
    }
    Ok("4 finalizer outputs match frozen values".into())
}

/// Frozen key-chain and stream outputs (seed hierarchy anchors).
pub fn chain_goldens() -> Result<String, String> {
    let cases: [(u64, &[u64], u64); 4] = [
        (42, &[crate::rng::stream::LANDSCAPE_SEED, 0], 0xB761_BF80_2EBA_E647),
        (42, &[crate::rng::stream::LANDSCAPE_SEED, 9], 0x7BD7_21ED_F433_8816),
        (42, &[crate::rng::stream::START_SEED, 0, 0], 0x8063_5525_5E76_D510),
        (5, &[crate::rng::stream::RUN], 0x5BC5_D50A_D423_2FDC),
    ];
    for (seed, words, want) in cases {
        let got = chain(seed, words);
        if got != want {
            return Err(format!(
                "chain({seed}, {words:?}) = {got:#018x}, expected {want:#018x}"
            ));
        }
    }
    let mut s = KeyStream::new(123);
    let first: [u64; 4] = [s.next_u64(), s.next_u64(), s.next_u64(), s.next_u64()];
    let want: [u64; 4] = [
        0xB4DC_9BD4_62DE_412B,
        0xFA02_3CE9_F06F_B77C,
        0xDC12_D311_D371_CBE8,
        0xAFD2_040C_9098_81FF,
    ];
    if first != want {
        return Err(format!("keystream(123) opened with {first:#x?}, expected {want:#x?}"));
    }
    Ok("seed-derivation chains and stream outputs match frozen values".into())
}

/// Frozen table entries: the full seed→pattern→value pipeline, computed
/// outside this crate with exact integer arithmetic.
pub fn gene_value_goldens(value: ValueFn) -> Result<String, String> {
    let cases: [(u64, usize, usize, u64, f64); 6] = [
        (0, 0, 0, 0x0, 0.435_898_612_515_792_87),
        (42, 0, 0, 0x0, 0.360_428_142_860_497_3),
        (42, 0, 0, 0x1, 0.040_353_505_074_913_53),
        (42, 1, 3, 0x5, 0.481_726_008_452_961_76),
        (0xA5A5, 2, 19, 0x7FFF, 0.797_431_238_019_300_5),
        (7, 1, 0, 0x8000, 0.048_442_525_431_066_2),
    ];
    for (seed, species, gene, pattern, want) in cases {
        let got = value(seed, species, gene, pattern);
        if got != want {
            return Err(format!(
                "gene value ({seed},{species},{gene},{pattern:#x}) = {got:.17}, expected {want:.17}"
            ));
        }
    }
    Ok("6 table entries match values computed independently".into())
}

/// Exhaustively enumerate every joint genome of small two-species
/// ecosystems and require three ways of computing species fitness to agree
/// exactly: the production evaluator, the incremental cache, and an oracle
/// that reassembles each gene's context from the linkage map and calls
/// `value` directly.
pub fn exhaustive_fitness_equality(seeds: u64, value: ValueFn) -> Result<String, String> {
    let shapes: [(Vec<usize>, usize, usize); 3] =
        [(vec![4, 4], 2, 1), (vec![3, 4], 1, 1), (vec![4, 3], 2, 0)];
    let mut states_checked = 0u64;
    for seed_index in 0..seeds {
        let seed = chain(0xC0FFEE, &[seed_index]);
        for (n, k, c) in &shapes {
            let spec = LandscapeSpec::new(seed, n.clone(), *k, *c)
                .map_err(|e| format!("spec rejected: {e}"))?;
            let land = Landscape::new(spec);
            let total_bits: usize = n.iter().sum();
            for packed_state in 0u64..(1 << total_bits) {
                let genomes = unpack_genomes(packed_state, n);
                for species in 0..n.len() {
                    let production = land.species_fitness(&genomes, species);
                    let oracle = oracle_species_fitness(&land, &genomes, species, value);
                    if production != oracle {
                        return Err(format!(
                            "seed {seed:#x} n={n:?} k={k} c={c} state {packed_state:#x} \
                             species {species}: production {production:.17} != oracle {oracle:.17}"
                        ));
                    }
                }
                // The incremental cache must match on construction too.
                let state = EcosystemState::from_genomes(&land, genomes.clone())
                    .map_err(|e| format!("state rejected: {e}"))?;
                let sim = Simulation::with_state(&land, state, KeyStream::new(0))
                    .map_err(|e| format!("sim rejected: {e}"))?;
                if sim.fitness() != land.all_species_fitness(&genomes).as_slice() {
                    return Err(format!(
                        "seed {seed:#x} state {packed_state:#x}: cache disagrees with direct evaluation"
                    ));
                }
                states_checked += 1;
            }
        }
    }
    Ok(format!(
        "{states_checked} joint states agree across production, cache, and oracle paths"
    ))
}

fn unpack_genomes(mut packed: u64, n_per_species: &[usize]) -> Vec<Vec<u8>> {
    n_per_species
        .iter()
        .map(|&n| {
            (0..n)
                .map(|_| {
                    let bit = (packed & 1) as u8;
                    packed >>= 1;
                    bit
                })
                .collect()
        })
        .collect()
}

/// Recompute one species' fitness from the linkage map alone, assembling
/// each context bit list by hand.
fn oracle_species_fitness(
    land: &Landscape,
    genomes: &[Vec<u8>],
    species: usize,
    value: ValueFn,
) -> f64 {
    let n = land.spec().n(species);
    let mut sum = 0.0;
    for gene in 0..n {
        let link = land.linkage().gene(species, gene);
        let local_bits: Vec<u8> = link.local.iter().map(|&j| genomes[species][j]).collect();
        let external_bits: Vec<Vec<u8>> = land
            .linkage()
            .partners(species)
            .zip(&link.external)
            .map(|(partner, idx)| idx.iter().map(|&j| genomes[partner][j]).collect())
            .collect();
        let refs: Vec<&[u8]> = external_bits.iter().map(|v| v.as_slice()).collect();
        let ctx = GeneContext::new(genomes[species][gene], &local_bits, &refs);
        sum += value(land.spec().landscape_seed(), species, gene, ctx.packed());
    }
    sum / n as f64
}

/// Flip every bit of random states and verify that per-gene contributions
/// change only for genes the linkage map names as readers of that bit.
pub fn flip_scan_locality(seeds: u64) -> Result<String, String> {
    let mut flips = 0u64;
    for seed_index in 0..seeds {
        let seed = chain(0xF11F, &[seed_index]);
        let land = Landscape::generate(seed, vec![6, 5, 4], 2, 2)
            .map_err(|e| format!("landscape rejected: {e}"))?;
        let mut stream = KeyStream::new(chain(seed, &[1]));
        let mut genomes: Vec<Vec<u8>> = land
            .spec()
            .n_per_species()
            .iter()
            .map(|&n| (0..n).map(|_| stream.next_bit()).collect())
            .collect();
        let species_count = land.spec().species_count();
        let before: Vec<Vec<f64>> = (0..species_count)
            .map(|s| {
                (0..land.spec().n(s))
                    .map(|i| land.gene_contribution(&genomes, s, i))
                    .collect()
            })
            .collect();
        for species in 0..species_count {
            for gene in 0..land.spec().n(species) {
                genomes[species][gene] ^= 1;
                for s in 0..species_count {
                    for i in 0..land.spec().n(s) {
                        let after = land.gene_contribution(&genomes, s, i);
                        let is_reader =
                            land.readers_of(species, gene).contains(&(s as u32, i as u32));
                        if after != before[s][i] && !is_reader {
                            return Err(format!(
                                "flip ({species},{gene}) changed unlinked gene ({s},{i})"
                            ));
                        }
                    }
                }
                genomes[species][gene] ^= 1;
                flips += 1;
            }
        }
    }
    Ok(format!("{flips} bit flips stayed within their linkage neighborhoods"))
}

/// Policy acceptance sets must nest: unanimous ⊆ majority (no error) ⊆
/// unilateral, over randomly generated proposals.
pub fn policy_nesting(proposals: u64) -> Result<String, String> {
    let mut gen = KeyStream::new(0x4E57);
    let mut decide_stream = KeyStream::new(1);
    let com = Policy::communalism();
    for i in 0..proposals {
        let species_count = 2 + (i % 4) as usize;
        let proposer = (i as usize) % species_count;
        let prior: Vec<f64> = (0..species_count).map(|_| gen.next_unit()).collect();
        let mut posterior: Vec<f64> = (0..species_count).map(|_| gen.next_unit()).collect();
        // Mix in exact ties, which sit on the acceptance boundary.
        if i % 7 == 0 {
            posterior[proposer] = prior[proposer];
        }
        let p = Proposal {
            species: proposer,
            gene: 0,
            prior,
            posterior,
        };
        let glob = decide(&Policy::GlobalControl, &p, &mut decide_stream);
        let communal = decide(&com, &p, &mut decide_stream);
        let coev = decide(&Policy::Coevolution, &p, &mut decide_stream);
        if glob && !communal {
            return Err(format!("proposal {i}: unanimous accept but majority reject"));
        }
        if communal && !coev {
            return Err(format!("proposal {i}: majority accept but proposer reject"));
        }
    }
    Ok(format!("{proposals} random proposals respected the nesting"))
}

/// Drive fresh ecosystems under unanimous control until `target_accepts`
/// proposals have been adopted; every adoption must leave every species at
/// or above its prior fitness.
pub fn global_monotonicity(target_accepts: u64) -> Result<String, String> {
    let mut accepted = 0u64;
    let mut proposals = 0u64;
    let mut restart = 0u64;
    while accepted < target_accepts {
        let seed = chain(0x6106, &[restart]);
        let land = Landscape::generate(seed, vec![10, 10, 10], 2, 2)
            .map_err(|e| format!("landscape rejected: {e}"))?;
        let mut sim = Simulation::new(&land, seed ^ 1);
        let mut decide_stream = KeyStream::new(seed ^ 2);
        // Restart well before the climb converges, so accepted events stay
        // frequent.
        for turn in 0..450u64 {
            if accepted >= target_accepts {
                break;
            }
            let species = (turn % 3) as usize;
            let p = sim.propose(species);
            proposals += 1;
            if decide(&Policy::GlobalControl, &p, &mut decide_stream) {
                for s in 0..3 {
                    if p.posterior[s] < p.prior[s] {
                        return Err(format!(
                            "accepted event lowered species {s}: {:.17} -> {:.17}",
                            p.prior[s], p.posterior[s]
                        ));
                    }
                }
                sim.apply(&p);
                accepted += 1;
            }
        }
        restart += 1;
    }
    Ok(format!(
        "{accepted} accepted events over {proposals} proposals, none regressive"
    ))
}

/// Rejected proposals must leave the ecosystem bit-identical, including
/// the cached evaluation state.
pub fn reversion_identity(trials: u64) -> Result<String, String> {
    let mut rejected = 0u64;
    let mut decide_stream = KeyStream::new(0xDEAD);
    for restart in 0..4u64 {
        let seed = chain(0x1DE7, &[restart]);
        let land = Landscape::generate(seed, vec![8, 8], 3, 2)
            .map_err(|e| format!("landscape rejected: {e}"))?;
        let mut sim = Simulation::new(&land, seed);
        for turn in 0..trials / 4 {
            let species = (turn % 2) as usize;
            let genomes_before = sim.state().clone();
            let fitness_before = sim.fitness().to_vec();
            let p = sim.propose(species);
            if sim.state() != &genomes_before || sim.fitness() != &fitness_before[..] {
                return Err(format!("proposal alone mutated the state (turn {turn})"));
            }
            if decide(&Policy::GlobalControl, &p, &mut decide_stream) {
                sim.apply(&p);
            } else {
                rejected += 1;
                let fresh = land.all_species_fitness(sim.state().genomes());
                if sim.fitness() != &fresh[..] {
                    return Err(format!("cache drifted after a rejection (turn {turn})"));
                }
            }
        }
    }
    Ok(format!("{rejected} rejections left the state bit-identical"))
}

/// The Welch test against reference vectors computed with an independent
/// statistics stack before this crate was written.
pub fn ttest_vectors() -> Result<String, String> {
    struct Case {
        a: &'static [f64],
        b: &'static [f64],
        t: f64,
        df: f64,
        p: f64,
    }
    let cases = [
        Case {
            a: &[1.0, 2.0, 3.0, 4.0, 5.0],
            b: &[2.0, 3.0, 4.0, 5.0, 6.0],
            t: -1.0,
            df: 8.0,
            p: 0.34659350708733416,
        },
        Case {
            a: &[2.1, 2.4, 1.9, 2.3, 2.2, 2.5, 2.0],
            b: &[1.2, 1.5, 1.1, 1.7],
            t: 5.153734142323999,
            df: 5.161719549641762,
            p: 0.0032866718233090244,
        },
        Case {
            a: &[0.62, 0.58, 0.71, 0.64, 0.66, 0.59, 0.63, 0.70, 0.61, 0.65],
            b: &[0.55, 0.60, 0.52, 0.58, 0.57, 0.54, 0.61, 0.56, 0.53, 0.59],
            t: 4.463269661485838,
            df: 16.20261860459917,
            p: 0.00038108198900020093,
        },
        Case {
            a: &[10.0, 10.5, 9.8, 10.2, 11.0, 10.7, 9.9, 10.1, 10.4, 10.6, 10.3, 9.7],
            b: &[10.05, 10.45, 9.85, 10.25, 10.95, 10.65, 9.95, 10.15],
            t: -0.11977244320238653,
            df: 15.652730983051022,
            p: 0.9061872220550014,
        },
        Case {
            a: &[0.1, 0.2, 0.3, 0.4],
            b: &[0.9, 0.8, 0.7, 0.6, 0.5, 1.0],
            t: -5.0,
            df: 7.9411764705882355,
            p: 0.0010763172687101822,
        },
        Case {
            a: &[5.0, 5.0, 5.0, 5.0, 5.1],
            b: &[5.0, 5.0, 5.0, 5.0, 5.0, 5.0],
            t: 1.0,
            df: 4.0,
            p: 0.3739009663000474,
        },
    ];
    let mut worst_t = 0.0f64;
    let mut worst_p = 0.0f64;
    for (i, case) in cases.iter().enumerate() {
        let r = welch_t_test(case.a, case.b).map_err(|e| format!("vector {i}: {e}"))?;
        let dt = rel_dev(r.t, case.t).max(rel_dev(r.df, case.df));
        let dp = (r.p - case.p).abs();
        if dt > 1e-9 {
            return Err(format!(
                "vector {i}: t/df deviation {dt:e} exceeds 1e-9 (t={}, df={})",
                r.t, r.df
            ));
        }
        if dp > 1e-6 {
            return Err(format!("vector {i}: p deviation {dp:e} exceeds 1e-6 (p={})", r.p));
        }
        worst_t = worst_t.max(dt);
        worst_p = worst_p.max(dp);
    }
    let identical = welch_t_test(&[0.5, 0.6, 0.7], &[0.5, 0.6, 0.7])
        .map_err(|e| format!("identical-sample case: {e}"))?;
    if identical.p != 1.0 {
        return Err(format!("identical samples gave p = {}, expected 1", identical.p));
    }
    let cdf_cases = [
        (1.0, 8.0, 0.34659350708733416),
        (2.0, 10.0, 0.07338803477074039),
        (-3.5, 2.5, 0.052345546960320316),
        (0.5, 1.0, 0.7048327646991336),
        (4.25, 37.2, 0.00013771125442150263),
        (0.0, 5.0, 1.0),
        (6.0, 99.0, 3.245916112345553e-8),
    ];
    for (t, df, want) in cdf_cases {
        let got = student_t_two_tailed(t, df);
        if (got - want).abs() > 1e-9 {
            return Err(format!(
                "tail probability at t={t}, df={df}: {got:e} vs reference {want:e}"
            ));
        }
    }
    Ok(format!(
        "6 vectors and 7 tail points match (max dev: t {worst_t:.2e}, p {worst_p:.2e})"
    ))
}

fn rel_dev(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}
