//! Ecosystem state and the generation loop.
//!
//! Evolution is random hill climbing: on its turn a species flips one
//! randomly chosen gene, and the proposal is adopted or discarded according
//! to the governance policy. One generation gives every species exactly one
//! turn, in ascending species order, with accepted changes visible to the
//! species that follow.
//!
//! Three policies are modeled:
//! - [`Policy::Coevolution`]: the proposer alone decides, accepting any
//!   change that maintains or improves its own fitness.
//! - [`Policy::Communalism`]: the proposer must not lose fitness, and the
//!   other assemblies vote; a change is adopted when at least half of them
//!   are unharmed (ties adopt). An optional error model lets harmed
//!   assemblies approve anyway a fraction of the time.
//! - [`Policy::GlobalControl`]: a change must be at least neutral for every
//!   assembly.

use crate::error::{Error, Result};
use crate::landscape::{system_fitness_of, Landscape};
use crate::rng::{chain, stream, KeyStream};

/// Binary genomes of every species plus a generation counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcosystemState {
    genomes: Vec<Vec<u8>>,
    generation: u64,
}

impl EcosystemState {
    /// Uniform random genomes drawn from `stream`, species then gene in
    /// ascending order.
    pub fn random(landscape: &Landscape, stream: &mut KeyStream) -> Self {
        let genomes = landscape
            .spec()
            .n_per_species()
            .iter()
            .map(|&n| (0..n).map(|_| stream.next_bit()).collect())
            .collect();
        EcosystemState {
            genomes,
            generation: 0,
        }
    }

    pub fn from_genomes(landscape: &Landscape, genomes: Vec<Vec<u8>>) -> Result<Self> {
        landscape.check_genomes(&genomes)?;
        Ok(EcosystemState {
            genomes,
            generation: 0,
        })
    }

    pub fn genomes(&self) -> &[Vec<u8>] {
        &self.genomes
    }

    pub fn bit(&self, species: usize, gene: usize) -> u8 {
        self.genomes[species][gene]
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    #[inline]
    fn flip(&mut self, species: usize, gene: usize) {
        self.genomes[species][gene] ^= 1;
    }
}

/// How vote errors are applied under communalism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMode {
    /// One roll on the collective outcome: a rejecting tally is overturned
    /// with probability `error_rate`.
    #[default]
    Collective,
    /// One roll per harmed voter: each switches to approve with probability
    /// `error_rate` before the tally.
    PerVoter,
}

impl ErrorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorMode::Collective => "collective",
            ErrorMode::PerVoter => "per-voter",
        }
    }
}

impl std::str::FromStr for ErrorMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "collective" => Ok(ErrorMode::Collective),
            "per-voter" | "per_voter" => Ok(ErrorMode::PerVoter),
            other => Err(format!(
                "unknown error mode '{other}' (expected 'collective' or 'per-voter')"
            )),
        }
    }
}

/// Acceptance rule for proposed mutations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Coevolution,
    Communalism {
        error_rate: f64,
        error_mode: ErrorMode,
    },
    GlobalControl,
}

impl Policy {
    /// Exact majority voting: communalism with a zero error rate.
    pub fn communalism() -> Policy {
        Policy::Communalism {
            error_rate: 0.0,
            error_mode: ErrorMode::Collective,
        }
    }

    pub fn communalism_with_error(error_rate: f64, error_mode: ErrorMode) -> Result<Policy> {
        if !(0.0..=1.0).contains(&error_rate) {
            return Err(Error::ErrorRateRange { got: error_rate });
        }
        Ok(Policy::Communalism {
            error_rate,
            error_mode,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Policy::Communalism { error_rate, .. } = self {
            if !(0.0..=1.0).contains(error_rate) {
                return Err(Error::ErrorRateRange { got: *error_rate });
            }
        }
        Ok(())
    }

    /// Short tag used in result tables: `coev`, `com`, or `glob`.
    pub fn kind_str(&self) -> &'static str {
        match self {
            Policy::Coevolution => "coev",
            Policy::Communalism { .. } => "com",
            Policy::GlobalControl => "glob",
        }
    }

    pub fn error_rate(&self) -> f64 {
        match self {
            Policy::Communalism { error_rate, .. } => *error_rate,
            _ => 0.0,
        }
    }

    pub fn error_mode(&self) -> Option<ErrorMode> {
        match self {
            Policy::Communalism { error_mode, .. } => Some(*error_mode),
            _ => None,
        }
    }
}

/// One candidate single-bit change with its full fitness impact. `prior`
/// and `posterior` hold every species' fitness before and after the flip.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub species: usize,
    pub gene: usize,
    pub prior: Vec<f64>,
    pub posterior: Vec<f64>,
}

/// Raw vote counts among the non-proposing assemblies (no error model):
/// an assembly approves iff its fitness is maintained or improved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoteTally {
    pub approvals: usize,
    pub rejections: usize,
}

pub fn tally_votes(proposal: &Proposal) -> VoteTally {
    let mut approvals = 0;
    let mut rejections = 0;
    for s in 0..proposal.prior.len() {
        if s == proposal.species {
            continue;
        }
        if proposal.posterior[s] >= proposal.prior[s] {
            approvals += 1;
        } else {
            rejections += 1;
        }
    }
    VoteTally {
        approvals,
        rejections,
    }
}

/// Apply a policy to a proposal. `stream` is consulted only by the
/// communalism error model.
pub fn decide(policy: &Policy, proposal: &Proposal, stream: &mut KeyStream) -> bool {
    decide_slices(
        policy,
        proposal.species,
        &proposal.prior,
        &proposal.posterior,
        stream,
    )
}

fn decide_slices(
    policy: &Policy,
    proposer: usize,
    prior: &[f64],
    posterior: &[f64],
    stream: &mut KeyStream,
) -> bool {
    match policy {
        Policy::Coevolution => posterior[proposer] >= prior[proposer],
        Policy::GlobalControl => (0..prior.len()).all(|s| posterior[s] >= prior[s]),
        Policy::Communalism {
            error_rate,
            error_mode,
        } => {
            if posterior[proposer] < prior[proposer] {
                return false;
            }
            let partner_count = prior.len() - 1;
            let mut approvals = 0usize;
            for s in 0..prior.len() {
                if s == proposer {
                    continue;
                }
                let mut ok = posterior[s] >= prior[s];
                if !ok
                    && *error_mode == ErrorMode::PerVoter
                    && *error_rate > 0.0
                    && stream.next_unit() < *error_rate
                {
                    ok = true;
                }
                if ok {
                    approvals += 1;
                }
            }
            // Ties adopt: with S=2, one approval out of two suffices.
            let adopted = 2 * approvals >= partner_count;
            if !adopted
                && *error_mode == ErrorMode::Collective
                && *error_rate > 0.0
                && stream.next_unit() < *error_rate
            {
                return true;
            }
            adopted
        }
    }
}

/// A single run in progress: owns its state, its RNG stream, and a cache of
/// per-gene fitness contributions for incremental evaluation.
///
/// The cache invariant is exact: after every operation, `fitness()` equals
/// what [`Landscape::species_fitness`] would recompute from scratch,
/// bit-for-bit, because contributions are re-derived through the same pure
/// table lookups and species sums always run left-to-right over the whole
/// contribution array.
pub struct Simulation<'a> {
    landscape: &'a Landscape,
    state: EcosystemState,
    rng: KeyStream,
    contrib: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    posterior: Vec<f64>,
    undo: Vec<(u32, u32, f64)>,
    touched: Vec<bool>,
    pending: Option<(usize, usize)>,
    proposals_made: u64,
    accepted: u64,
    last_accept_generation: Option<u64>,
}

impl<'a> Simulation<'a> {
    /// Start from uniform random genomes derived from `start_seed`.
    pub fn new(landscape: &'a Landscape, start_seed: u64) -> Self {
        let mut rng = KeyStream::new(chain(start_seed, &[stream::RUN]));
        let state = EcosystemState::random(landscape, &mut rng);
        Self::from_parts(landscape, state, rng)
    }

    /// Start from an explicit state (the stream should already be positioned
    /// wherever the caller wants it).
    pub fn with_state(landscape: &'a Landscape, state: EcosystemState, rng: KeyStream) -> Result<Self> {
        landscape.check_genomes(state.genomes())?;
        Ok(Self::from_parts(landscape, state, rng))
    }

    fn from_parts(landscape: &'a Landscape, state: EcosystemState, rng: KeyStream) -> Self {
        let count = landscape.spec().species_count();
        let contrib: Vec<Vec<f64>> = (0..count)
            .map(|s| {
                (0..landscape.spec().n(s))
                    .map(|i| landscape.gene_contribution(state.genomes(), s, i))
                    .collect()
            })
            .collect();
        let fitness: Vec<f64> = contrib
            .iter()
            .map(|c| sum_left_to_right(c) / c.len() as f64)
            .collect();
        Simulation {
            landscape,
            state,
            rng,
            contrib,
            fitness,
            posterior: vec![0.0; count],
            undo: Vec::with_capacity(32),
            touched: vec![false; count],
            pending: None,
            proposals_made: 0,
            accepted: 0,
            last_accept_generation: None,
        }
    }

    pub fn landscape(&self) -> &Landscape {
        self.landscape
    }

    pub fn state(&self) -> &EcosystemState {
        &self.state
    }

    /// Current per-species fitness (cached; exactly equals a full
    /// recomputation).
    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn system_fitness(&self) -> f64 {
        system_fitness_of(&self.fitness)
    }

    pub fn proposals_made(&self) -> u64 {
        self.proposals_made
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// Generation (1-based) of the most recent accepted change, if any.
    pub fn last_accept_generation(&self) -> Option<u64> {
        self.last_accept_generation
    }

    /// Flip one random gene of `species` and report the fitness impact on
    /// every species. The state is left unmodified.
    pub fn propose(&mut self, species: usize) -> Proposal {
        let gene = self.rng.next_below(self.landscape.spec().n(species) as u64) as usize;
        self.eval_flip(species, gene);
        let proposal = Proposal {
            species,
            gene,
            prior: self.fitness.clone(),
            posterior: self.posterior.clone(),
        };
        self.rollback();
        self.proposals_made += 1;
        proposal
    }

    /// Adopt a proposal produced by [`Simulation::propose`] against the
    /// current state.
    pub fn apply(&mut self, proposal: &Proposal) {
        self.eval_flip(proposal.species, proposal.gene);
        debug_assert_eq!(self.posterior, proposal.posterior);
        self.commit();
    }

    /// One full round: every species in ascending order proposes once and
    /// the policy decides; accepted changes are visible to later turns.
    /// Increments the generation counter.
    pub fn step_generation(&mut self, policy: &Policy) {
        let count = self.landscape.spec().species_count();
        for species in 0..count {
            let gene = self.rng.next_below(self.landscape.spec().n(species) as u64) as usize;
            self.eval_flip(species, gene);
            self.proposals_made += 1;
            // Split borrows: decide reads fitness/posterior, rolls on rng.
            let accept = decide_slices(policy, species, &self.fitness, &self.posterior, &mut self.rng);
            if accept {
                self.commit();
            } else {
                self.rollback();
            }
        }
        self.state.generation += 1;
    }

    /// Flip the bit, refresh the contributions of every gene that reads it,
    /// and fill `self.posterior`. Leaves the flip applied with a full undo
    /// log; must be followed by `commit` or `rollback`.
    fn eval_flip(&mut self, species: usize, gene: usize) {
        debug_assert!(self.pending.is_none());
        self.pending = Some((species, gene));
        self.state.flip(species, gene);
        self.touched.iter_mut().for_each(|t| *t = false);
        for &(s, i) in self.landscape.readers_of(species, gene) {
            let (s, i) = (s as usize, i as usize);
            self.undo.push((s as u32, i as u32, self.contrib[s][i]));
            self.contrib[s][i] = self
                .landscape
                .gene_contribution(self.state.genomes(), s, i);
            self.touched[s] = true;
        }
        for s in 0..self.fitness.len() {
            self.posterior[s] = if self.touched[s] {
                sum_left_to_right(&self.contrib[s]) / self.contrib[s].len() as f64
            } else {
                self.fitness[s]
            };
        }
    }

    fn commit(&mut self) {
        let (_, _) = self.pending.take().expect("commit without pending flip");
        self.undo.clear();
        self.fitness.copy_from_slice(&self.posterior);
        self.accepted += 1;
        self.last_accept_generation = Some(self.state.generation + 1);
    }

    fn rollback(&mut self) {
        let (species, gene) = self.pending.take().expect("rollback without pending flip");
        self.state.flip(species, gene);
        for (s, i, old) in self.undo.drain(..) {
            self.contrib[s as usize][i as usize] = old;
        }
    }
}

#[inline]
fn sum_left_to_right(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    for &v in values {
        sum += v;
    }
    sum
}

/// One sampled point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub generation: u64,
    pub species_fitness: Vec<f64>,
    pub system_fitness: f64,
}

/// Everything a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trajectory: Vec<TracePoint>,
    pub final_state: EcosystemState,
    pub final_species_fitness: Vec<f64>,
    pub final_system_fitness: f64,
    pub proposals: u64,
    pub accepted: u64,
    pub last_accept_generation: Option<u64>,
}

/// Execute a full run: random start from `start_seed`, `generations`
/// rounds under `policy`, sampling the trajectory every `trace_every`
/// generations (0 = endpoints only). The initial and final points are
/// always recorded.
pub fn run(
    landscape: &Landscape,
    policy: &Policy,
    start_seed: u64,
    generations: u64,
    trace_every: u64,
) -> Result<RunResult> {
    policy.validate()?;
    let mut sim = Simulation::new(landscape, start_seed);
    let mut trajectory = Vec::new();
    let record = |sim: &Simulation, out: &mut Vec<TracePoint>| {
        out.push(TracePoint {
            generation: sim.state().generation(),
            species_fitness: sim.fitness().to_vec(),
            system_fitness: sim.system_fitness(),
        });
    };
    record(&sim, &mut trajectory);
    for g in 1..=generations {
        sim.step_generation(policy);
        if trace_every > 0 && g % trace_every == 0 && g != generations {
            record(&sim, &mut trajectory);
        }
    }
    if generations > 0 {
        record(&sim, &mut trajectory);
    }
    Ok(RunResult {
        trajectory,
        final_species_fitness: sim.fitness().to_vec(),
        final_system_fitness: sim.system_fitness(),
        proposals: sim.proposals_made(),
        accepted: sim.accepted(),
        last_accept_generation: sim.last_accept_generation(),
        final_state: sim.state.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::LandscapeSpec;

    fn small_landscape(seed: u64) -> Landscape {
        Landscape::new(LandscapeSpec::new(seed, vec![4, 4, 4], 1, 1).unwrap())
    }

    fn proposal(species: usize, prior: Vec<f64>, posterior: Vec<f64>) -> Proposal {
        Proposal {
            species,
            gene: 0,
            prior,
            posterior,
        }
    }

    #[test]
    fn coevolution_ignores_other_assemblies() {
        let mut s = KeyStream::new(1);
        let p = proposal(0, vec![0.5, 0.5, 0.5], vec![0.6, 0.1, 0.1]);
        assert!(decide(&Policy::Coevolution, &p, &mut s));
        // Flip the sign of the others' deltas: decision unchanged.
        let p2 = proposal(0, vec![0.5, 0.5, 0.5], vec![0.6, 0.9, 0.9]);
        assert!(decide(&Policy::Coevolution, &p2, &mut s));
        let p3 = proposal(0, vec![0.5, 0.5, 0.5], vec![0.4, 0.9, 0.9]);
        assert!(!decide(&Policy::Coevolution, &p3, &mut s));
    }

    #[test]
    fn communalism_tie_adopts() {
        // S=2: one approval of two is enough.
        let mut s = KeyStream::new(1);
        let p = proposal(0, vec![0.5, 0.5, 0.5], vec![0.6, 0.7, 0.2]);
        assert!(decide(&Policy::communalism(), &p, &mut s));
        assert_eq!(
            tally_votes(&p),
            VoteTally {
                approvals: 1,
                rejections: 1
            }
        );
    }

    #[test]
    fn communalism_rejects_when_all_partners_harmed() {
        let mut s = KeyStream::new(1);
        let p = proposal(0, vec![0.5, 0.5, 0.5], vec![0.6, 0.2, 0.2]);
        assert!(!decide(&Policy::communalism(), &p, &mut s));
    }

    #[test]
    fn communalism_requires_proposer_gate() {
        let mut s = KeyStream::new(1);
        let p = proposal(0, vec![0.5, 0.5, 0.5], vec![0.4, 0.9, 0.9]);
        assert!(!decide(&Policy::communalism(), &p, &mut s));
    }

    #[test]
    fn global_control_needs_unanimity() {
        let mut s = KeyStream::new(1);
        let good = proposal(1, vec![0.5, 0.5, 0.5], vec![0.5, 0.6, 0.5]);
        assert!(decide(&Policy::GlobalControl, &good, &mut s));
        let bad = proposal(1, vec![0.5, 0.5, 0.5], vec![0.49, 0.6, 0.9]);
        assert!(!decide(&Policy::GlobalControl, &bad, &mut s));
    }

    #[test]
    fn collective_error_rate_matches_statistics() {
        // Both partners harmed; the rejecting tally is overturned with
        // probability 0.25. 10,000 decisions should land within +/-0.02.
        let policy = Policy::communalism_with_error(0.25, ErrorMode::Collective).unwrap();
        let mut s = KeyStream::new(404);
        let p = proposal(0, vec![0.5, 0.5, 0.5], vec![0.6, 0.2, 0.2]);
        let accepted = (0..10_000).filter(|_| decide(&policy, &p, &mut s)).count();
        let rate = accepted as f64 / 10_000.0;
        assert!((rate - 0.25).abs() < 0.02, "rate = {rate}");
    }

    #[test]
    fn per_voter_error_rate_matches_statistics() {
        // Each harmed voter approves with p=0.25; accept needs >=1 of 2:
        // 1 - 0.75^2 = 0.4375.
        let policy = Policy::communalism_with_error(0.25, ErrorMode::PerVoter).unwrap();
        let mut s = KeyStream::new(405);
        let p = proposal(0, vec![0.5, 0.5, 0.5], vec![0.6, 0.2, 0.2]);
        let accepted = (0..10_000).filter(|_| decide(&policy, &p, &mut s)).count();
        let rate = accepted as f64 / 10_000.0;
        assert!((rate - 0.4375).abs() < 0.02, "rate = {rate}");
    }

    #[test]
    fn zero_error_rate_is_exact_majority() {
        let a = Policy::communalism();
        let b = Policy::communalism_with_error(0.0, ErrorMode::PerVoter).unwrap();
        let mut s1 = KeyStream::new(9);
        let mut s2 = KeyStream::new(9);
        let mut gen = KeyStream::new(77);
        for _ in 0..1000 {
            let prior: Vec<f64> = (0..3).map(|_| gen.next_unit()).collect();
            let posterior: Vec<f64> = (0..3).map(|_| gen.next_unit()).collect();
            let p = proposal(0, prior, posterior);
            assert_eq!(decide(&a, &p, &mut s1), decide(&b, &p, &mut s2));
        }
        // No stream draws happened.
        assert_eq!(s1, KeyStream::new(9));
    }

    #[test]
    fn error_rate_out_of_range_is_rejected() {
        let e = Policy::communalism_with_error(1.5, ErrorMode::Collective).unwrap_err();
        assert_eq!(e, Error::ErrorRateRange { got: 1.5 });
    }

    #[test]
    fn propose_does_not_modify_state() {
        let land = small_landscape(11);
        let mut sim = Simulation::new(&land, 5);
        let before_state = sim.state().clone();
        let before_fitness = sim.fitness().to_vec();
        let before_contrib = sim.contrib.clone();
        for species in 0..3 {
            let p = sim.propose(species);
            assert_eq!(p.species, species);
            assert_eq!(sim.state(), &before_state);
            assert_eq!(sim.fitness(), &before_fitness[..]);
            assert_eq!(sim.contrib, before_contrib);
        }
        assert_eq!(sim.proposals_made(), 3);
    }

    #[test]
    fn propose_is_deterministic_for_a_fixed_stream() {
        let land = small_landscape(11);
        let mut a = Simulation::new(&land, 5);
        let mut b = Simulation::new(&land, 5);
        assert_eq!(a.propose(1), b.propose(1));
    }

    #[test]
    fn single_gene_species_always_proposes_gene_zero() {
        let land = Landscape::generate(3, vec![1, 4], 0, 1).unwrap();
        let mut sim = Simulation::new(&land, 1);
        for _ in 0..10 {
            assert_eq!(sim.propose(0).gene, 0);
        }
    }

    #[test]
    fn posterior_changes_only_through_linked_genes() {
        // Flip-scan oracle: per-gene contributions may change only for
        // genes that read the flipped bit.
        let land = Landscape::new(LandscapeSpec::new(21, vec![4, 4], 2, 1).unwrap());
        let sim = Simulation::new(&land, 8);
        for species in 0..2 {
            for gene in 0..4 {
                let before: Vec<Vec<f64>> = (0..2)
                    .map(|s| {
                        (0..4)
                            .map(|i| land.gene_contribution(sim.state().genomes(), s, i))
                            .collect()
                    })
                    .collect();
                let mut genomes = sim.state().genomes().to_vec();
                genomes[species][gene] ^= 1;
                for s in 0..2 {
                    for i in 0..4 {
                        let after = land.gene_contribution(&genomes, s, i);
                        if after != before[s][i] {
                            assert!(
                                land.readers_of(species, gene).contains(&(s as u32, i as u32)),
                                "unlinked gene ({s},{i}) changed when flipping ({species},{gene})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn step_generation_makes_one_proposal_per_species() {
        let land = small_landscape(2);
        let mut sim = Simulation::new(&land, 3);
        sim.step_generation(&Policy::Coevolution);
        assert_eq!(sim.proposals_made(), 3);
        assert_eq!(sim.state().generation(), 1);
        sim.step_generation(&Policy::communalism());
        assert_eq!(sim.proposals_made(), 6);
        assert_eq!(sim.state().generation(), 2);
    }

    #[test]
    fn step_generation_equals_manual_propose_decide_apply() {
        let land = small_landscape(17);
        let policy = Policy::communalism_with_error(0.3, ErrorMode::Collective).unwrap();
        let mut fused = Simulation::new(&land, 4);
        let mut manual = Simulation::new(&land, 4);
        for _ in 0..200 {
            fused.step_generation(&policy);
            for species in 0..3 {
                let p = manual.propose(species);
                if decide(&policy, &p, &mut manual.rng) {
                    manual.apply(&p);
                }
            }
            manual.state.generation += 1;
            assert_eq!(fused.state(), manual.state());
            assert_eq!(fused.fitness(), manual.fitness());
        }
    }

    #[test]
    fn cached_fitness_equals_full_recomputation() {
        // The incremental path must agree bit-for-bit with from-scratch
        // evaluation after every generation.
        for seed in 0..5u64 {
            let land = Landscape::new(LandscapeSpec::new(seed, vec![6, 3, 5], 2, 2).unwrap());
            let mut sim = Simulation::new(&land, seed ^ 0xABCD);
            let policy = Policy::communalism_with_error(0.1, ErrorMode::PerVoter).unwrap();
            for _ in 0..300 {
                sim.step_generation(&policy);
                let fresh = land.all_species_fitness(sim.state().genomes());
                assert_eq!(sim.fitness(), &fresh[..]);
            }
        }
    }

    #[test]
    fn global_control_never_lowers_any_species() {
        let land = small_landscape(6);
        let mut sim = Simulation::new(&land, 10);
        let mut prev = sim.fitness().to_vec();
        for _ in 0..1000 {
            sim.step_generation(&Policy::GlobalControl);
            for s in 0..3 {
                assert!(sim.fitness()[s] >= prev[s]);
            }
            prev = sim.fitness().to_vec();
        }
    }

    #[test]
    fn decoupled_coevolution_is_monotone_per_species() {
        // C=0: landscapes are independent, so >= acceptance makes each
        // species' own fitness non-decreasing.
        let land = Landscape::new(LandscapeSpec::new(14, vec![8, 8], 2, 0).unwrap());
        let mut sim = Simulation::new(&land, 9);
        let mut prev = sim.fitness().to_vec();
        for _ in 0..2000 {
            sim.step_generation(&Policy::Coevolution);
            for s in 0..2 {
                assert!(sim.fitness()[s] >= prev[s]);
            }
            prev = sim.fitness().to_vec();
        }
    }

    #[test]
    fn run_zero_generations_reports_initial_point() {
        let land = small_landscape(1);
        let r = run(&land, &Policy::Coevolution, 7, 0, 100).unwrap();
        assert_eq!(r.trajectory.len(), 1);
        assert_eq!(r.trajectory[0].generation, 0);
        assert_eq!(r.trajectory[0].system_fitness, r.final_system_fitness);
        assert_eq!(r.proposals, 0);
    }

    #[test]
    fn run_is_deterministic() {
        let land = small_landscape(33);
        let a = run(&land, &Policy::communalism(), 21, 500, 50).unwrap();
        let b = run(&land, &Policy::communalism(), 21, 500, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_trace_row_contract() {
        let land = small_landscape(33);
        let r = run(&land, &Policy::Coevolution, 5, 1000, 100).unwrap();
        // gen 0, 100, ..., 1000
        assert_eq!(r.trajectory.len(), 11);
        assert_eq!(r.trajectory.last().unwrap().generation, 1000);
        // Uneven horizon still records the final point.
        let r = run(&land, &Policy::Coevolution, 5, 150, 100).unwrap();
        let gens: Vec<u64> = r.trajectory.iter().map(|t| t.generation).collect();
        assert_eq!(gens, vec![0, 100, 150]);
        // trace_every = 0: endpoints only.
        let r = run(&land, &Policy::Coevolution, 5, 150, 0).unwrap();
        let gens: Vec<u64> = r.trajectory.iter().map(|t| t.generation).collect();
        assert_eq!(gens, vec![0, 150]);
    }

    #[test]
    fn rejected_proposals_leave_state_bit_identical() {
        let land = small_landscape(50);
        let mut sim = Simulation::new(&land, 2);
        let mut rng = KeyStream::new(1234);
        let mut rejected_seen = 0;
        for turn in 0..500 {
            let species = turn % 3;
            let snapshot = sim.state().clone();
            let contribs = sim.contrib.clone();
            let p = sim.propose(species);
            if !decide(&Policy::GlobalControl, &p, &mut rng) {
                rejected_seen += 1;
                assert_eq!(sim.state(), &snapshot);
                assert_eq!(sim.contrib, contribs);
            } else {
                sim.apply(&p);
            }
        }
        assert!(rejected_seen > 0);
    }

    #[test]
    fn policy_nesting_on_random_proposals() {
        let mut gen = KeyStream::new(3141);
        let mut s = KeyStream::new(1);
        let com = Policy::communalism();
        for i in 0..10_000 {
            let proposer = (i % 3) as usize;
            let prior: Vec<f64> = (0..3).map(|_| gen.next_unit()).collect();
            let posterior: Vec<f64> = (0..3).map(|_| gen.next_unit()).collect();
            let p = proposal(proposer, prior, posterior);
            let glob = decide(&Policy::GlobalControl, &p, &mut s);
            let com_ok = decide(&com, &p, &mut s);
            let coev = decide(&Policy::Coevolution, &p, &mut s);
            assert!(!glob || com_ok, "global accept must imply communal accept");
            assert!(!com_ok || coev, "communal accept must imply coevolution accept");
        }
    }
}
