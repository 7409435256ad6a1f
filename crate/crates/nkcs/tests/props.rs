//! Randomized property tests over the public API.

use nkcs::landscape::{GeneContext, Landscape};
use nkcs::report::{format_n_vector, parse_n_vector};
use nkcs::rng::{chain, mix64, KeyStream};
use nkcs::stats::welch_t_test;
use proptest::prelude::*;

proptest! {
    /// The packed bit pattern round-trips through context assembly.
    #[test]
    fn gene_context_pack_roundtrip(
        own in 0u8..=1,
        local in proptest::collection::vec(0u8..=1, 0..8),
        ext_a in proptest::collection::vec(0u8..=1, 0..6),
        ext_b in proptest::collection::vec(0u8..=1, 0..6),
    ) {
        let externals: Vec<&[u8]> = vec![&ext_a, &ext_b];
        let ctx = GeneContext::new(own, &local, &externals);
        let width = 1 + local.len() + ext_a.len() + ext_b.len();
        let rebuilt = GeneContext::from_packed(ctx.packed(), width);
        prop_assert_eq!(ctx.packed(), rebuilt.packed());
        // Every input bit must appear in the pattern exactly once, in
        // order: own, local, then partner blocks.
        let mut expect = vec![own];
        expect.extend(&local);
        expect.extend(&ext_a);
        expect.extend(&ext_b);
        for (i, bit) in expect.iter().enumerate() {
            prop_assert_eq!(((ctx.packed() >> i) & 1) as u8, *bit);
        }
    }

    /// The size-vector column format parses back exactly.
    #[test]
    fn n_vector_roundtrip(sizes in proptest::collection::vec(1usize..=512, 1..6)) {
        let text = format_n_vector(&sizes);
        prop_assert_eq!(parse_n_vector(&text).unwrap(), sizes);
    }

    /// The finalizer is injective on distinct inputs (bijectivity spot
    /// check) and the chain separates suffixes.
    #[test]
    fn mixer_and_chain_separate_inputs(a in any::<u64>(), b in any::<u64>()) {
        if a != b {
            prop_assert_ne!(mix64(a), mix64(b));
            prop_assert_ne!(chain(a, &[1]), chain(b, &[1]));
            prop_assert_ne!(chain(0, &[a]), chain(0, &[b]));
        }
        prop_assert_ne!(chain(a, &[1, 2]), chain(a, &[2, 1]));
    }

    /// Bounded sampling stays in range and distinct sampling never
    /// repeats an index.
    #[test]
    fn stream_sampling_contracts(key in any::<u64>(), bound in 1u64..1000, take in 1usize..20) {
        let mut stream = KeyStream::new(key);
        for _ in 0..50 {
            prop_assert!(stream.next_below(bound) < bound);
        }
        let pool = take + 5;
        let excluded = take % pool;
        let picked = stream.sample_distinct(pool, take, Some(excluded));
        prop_assert_eq!(picked.len(), take);
        let mut seen = std::collections::HashSet::new();
        for &index in &picked {
            prop_assert!(index < pool);
            prop_assert_ne!(index, excluded);
            prop_assert!(seen.insert(index), "duplicate index {}", index);
        }
    }

    /// Welch's statistic is antisymmetric and its p-value is a
    /// probability, for arbitrary well-formed samples.
    #[test]
    fn welch_antisymmetry(
        a in proptest::collection::vec(-1e3f64..1e3, 2..30),
        b in proptest::collection::vec(-1e3f64..1e3, 2..30),
    ) {
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert_eq!(ab.df, ba.df);
        prop_assert_eq!(ab.p, ba.p);
        prop_assert!((0.0..=1.0).contains(&ab.p));
    }

    /// Hill climbing under unilateral adoption with no external coupling
    /// never decreases the mover's own fitness.
    #[test]
    fn isolated_species_climb_monotone(seed in any::<u64>(), k in 0usize..3) {
        let land = Landscape::generate(seed, vec![6, 6], k, 0).unwrap();
        let mut sim = nkcs::dynamics::Simulation::new(&land, seed ^ 0xABCD);
        let mut prev = sim.fitness().to_vec();
        for _ in 0..40 {
            sim.step_generation(&nkcs::dynamics::Policy::Coevolution);
            let now = sim.fitness().to_vec();
            for s in 0..2 {
                prop_assert!(now[s] >= prev[s]);
            }
            prev = now;
        }
    }
}
