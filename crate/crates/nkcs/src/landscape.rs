//! Immutable NKCS fitness landscapes.
//!
//! An ecosystem holds `S+1` species. Species `s` has a binary genome of
//! length `N_s`. The fitness contribution of gene `i` depends on its own
//! bit, on `K` other bits of the same genome, and on `C` bits in each of the
//! other `S` genomes. Conceptually each gene owns a random lookup table with
//! `2^(1+K+S*C)` entries drawn uniformly from [0, 1); here the table entry
//! for a bit pattern is produced on demand by the keyed mixer in [`crate::rng`],
//! so no table is ever materialized and the landscape is a pure function of
//! `landscape_seed`. Species fitness is the mean of its gene contributions;
//! system fitness is the mean of the species fitnesses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{chain, stream, unit_f64, KeyStream};

/// Topology and seed of one NKCS environment. Validated on construction;
/// equal specs define bit-identical fitness functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandscapeSpec {
    landscape_seed: u64,
    n_per_species: Vec<usize>,
    k: usize,
    c: usize,
}

impl LandscapeSpec {
    pub fn new(landscape_seed: u64, n_per_species: Vec<usize>, k: usize, c: usize) -> Result<Self> {
        let count = n_per_species.len();
        if count < 2 {
            return Err(Error::SpeciesCount { got: count });
        }
        for (s, &n) in n_per_species.iter().enumerate() {
            if n == 0 {
                return Err(Error::EmptySpecies { species: s });
            }
            if k >= n {
                return Err(Error::LocalInputsTooLarge { species: s, k, n });
            }
        }
        // Every species is a partner of every other, so c must fit in every
        // genome.
        for (t, &n) in n_per_species.iter().enumerate() {
            if c > n {
                return Err(Error::ExternalInputsTooLarge {
                    partner: t,
                    c,
                    n_partner: n,
                });
            }
        }
        let width = 1 + k + (count - 1) * c;
        if width > 64 {
            return Err(Error::PatternWidthOverflow { width });
        }
        Ok(LandscapeSpec {
            landscape_seed,
            n_per_species,
            k,
            c,
        })
    }

    /// Symmetric helper: all species share the same genome length.
    pub fn symmetric(landscape_seed: u64, species_count: usize, n: usize, k: usize, c: usize) -> Result<Self> {
        Self::new(landscape_seed, vec![n; species_count], k, c)
    }

    pub fn landscape_seed(&self) -> u64 {
        self.landscape_seed
    }

    /// Number of species, i.e. `S + 1`.
    pub fn species_count(&self) -> usize {
        self.n_per_species.len()
    }

    /// Number of partner species per species, i.e. `S`.
    pub fn partner_count(&self) -> usize {
        self.n_per_species.len() - 1
    }

    pub fn n_per_species(&self) -> &[usize] {
        &self.n_per_species
    }

    pub fn n(&self, species: usize) -> usize {
        self.n_per_species[species]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// Bits in one gene's context: `1 + K + S*C`.
    pub fn context_width(&self) -> usize {
        1 + self.k + self.partner_count() * self.c
    }
}

/// Epistatic inputs of one gene: `K` local gene indices plus `C` gene
/// indices per partner species (partners in ascending species index,
/// skipping the gene's own species).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneLinkage {
    pub local: Vec<usize>,
    pub external: Vec<Vec<usize>>,
}

/// All gene linkages of the ecosystem, derived deterministically from the
/// landscape seed. Serializes to JSON as
/// `{"species": [[{"local": [...], "external": [[...], ...]}, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkageMap {
    species: Vec<Vec<GeneLinkage>>,
}

impl LinkageMap {
    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn gene(&self, species: usize, gene: usize) -> &GeneLinkage {
        &self.species[species][gene]
    }

    pub fn genes(&self, species: usize) -> &[GeneLinkage] {
        &self.species[species]
    }

    /// Partner species of `species` in ascending index order; position in
    /// this list matches position in [`GeneLinkage::external`].
    pub fn partners(&self, species: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.species.len()).filter(move |&t| t != species)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "species": self.species }).to_string()
    }
}

/// Sample the epistatic inputs for every gene.
///
/// Local inputs: `k` distinct indices in `[0, N_s)`, never the gene itself.
/// External inputs: `c` distinct indices in `[0, N_t)` per partner `t`.
/// Each (species, gene, purpose) pair draws from its own key-chained stream,
/// so the map regenerates exactly from the seed.
pub fn generate_linkage(spec: &LandscapeSpec) -> LinkageMap {
    let seed = spec.landscape_seed();
    let species = (0..spec.species_count())
        .map(|s| {
            (0..spec.n(s))
                .map(|i| {
                    let mut local_stream =
                        KeyStream::new(chain(seed, &[stream::LINKAGE_LOCAL, s as u64, i as u64]));
                    let local = local_stream.sample_distinct(spec.n(s), spec.k(), Some(i));
                    let external = (0..spec.species_count())
                        .filter(|&t| t != s)
                        .map(|t| {
                            let mut ext_stream = KeyStream::new(chain(
                                seed,
                                &[stream::LINKAGE_EXTERNAL, s as u64, i as u64, t as u64],
                            ));
                            ext_stream.sample_distinct(spec.n(t), spec.c(), None)
                        })
                        .collect();
                    GeneLinkage { local, external }
                })
                .collect()
        })
        .collect();
    LinkageMap { species }
}

/// One gene's input bits, packed into an integer pattern.
///
/// Bit layout (LSB first): own bit, then the `k` local bits in linkage
/// order, then for each partner in ascending species index its `c` bits in
/// linkage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneContext {
    packed: u64,
    width: usize,
}

impl GeneContext {
    pub fn new(own_bit: u8, local_bits: &[u8], external_bits: &[&[u8]]) -> Self {
        let mut packed = (own_bit & 1) as u64;
        let mut pos = 1;
        for &b in local_bits {
            packed |= ((b & 1) as u64) << pos;
            pos += 1;
        }
        for partner in external_bits {
            for &b in *partner {
                packed |= ((b & 1) as u64) << pos;
                pos += 1;
            }
        }
        GeneContext { packed, width: pos }
    }

    pub fn from_packed(packed: u64, width: usize) -> Self {
        GeneContext { packed, width }
    }

    pub fn packed(&self) -> u64 {
        self.packed
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// Raw table lookup: the fitness entry of `(species, gene)` for a packed
/// context pattern. Pure in all arguments.
#[inline]
pub(crate) fn gene_value(seed: u64, species: usize, gene: usize, pattern: u64) -> f64 {
    unit_f64(chain(
        seed,
        &[stream::GENE_VALUE, species as u64, gene as u64, pattern],
    ))
}

/// The fitness table entry for one gene under a given context.
///
/// Checks that the context width matches the topology's `1 + k + S*c`.
pub fn gene_fitness(
    spec: &LandscapeSpec,
    species: usize,
    gene: usize,
    ctx: &GeneContext,
) -> Result<f64> {
    let expected = spec.context_width();
    if ctx.width() != expected {
        return Err(Error::ContextWidth {
            expected,
            got: ctx.width(),
        });
    }
    Ok(gene_value(spec.landscape_seed(), species, gene, ctx.packed()))
}

/// An immutable landscape: spec, generated linkage, and the reverse
/// dependency index used by incremental evaluation. Safe to share across
/// threads; all methods are pure reads.
#[derive(Debug, Clone)]
pub struct Landscape {
    spec: LandscapeSpec,
    linkage: LinkageMap,
    /// readers[t][j] = genes (s, i) whose context includes bit j of species t
    /// (including the gene itself), in ascending (s, i) order.
    readers: Vec<Vec<Vec<(u32, u32)>>>,
}

impl Landscape {
    pub fn new(spec: LandscapeSpec) -> Self {
        let linkage = generate_linkage(&spec);
        let readers = build_readers(&spec, &linkage);
        Landscape {
            spec,
            linkage,
            readers,
        }
    }

    pub fn generate(landscape_seed: u64, n_per_species: Vec<usize>, k: usize, c: usize) -> Result<Self> {
        Ok(Self::new(LandscapeSpec::new(landscape_seed, n_per_species, k, c)?))
    }

    pub fn spec(&self) -> &LandscapeSpec {
        &self.spec
    }

    pub fn linkage(&self) -> &LinkageMap {
        &self.linkage
    }

    /// Genes whose fitness depends on bit `gene` of species `species`.
    pub fn readers_of(&self, species: usize, gene: usize) -> &[(u32, u32)] {
        &self.readers[species][gene]
    }

    /// Assemble the packed context of `(species, gene)` from per-species
    /// genomes (bit vectors of 0/1 bytes).
    #[inline]
    pub fn packed_context(&self, genomes: &[Vec<u8>], species: usize, gene: usize) -> u64 {
        let link = self.linkage.gene(species, gene);
        let mut packed = genomes[species][gene] as u64;
        let mut pos = 1;
        for &j in &link.local {
            packed |= (genomes[species][j] as u64) << pos;
            pos += 1;
        }
        let mut rank = 0;
        for t in 0..self.spec.species_count() {
            if t == species {
                continue;
            }
            for &j in &link.external[rank] {
                packed |= (genomes[t][j] as u64) << pos;
                pos += 1;
            }
            rank += 1;
        }
        packed
    }

    /// Fitness contribution of a single gene in the given genomes.
    #[inline]
    pub fn gene_contribution(&self, genomes: &[Vec<u8>], species: usize, gene: usize) -> f64 {
        gene_value(
            self.spec.landscape_seed(),
            species,
            gene,
            self.packed_context(genomes, species, gene),
        )
    }

    /// Species fitness: gene contributions summed left-to-right and
    /// normalized by `N_s`.
    pub fn species_fitness(&self, genomes: &[Vec<u8>], species: usize) -> f64 {
        let n = self.spec.n(species);
        let mut sum = 0.0;
        for i in 0..n {
            sum += self.gene_contribution(genomes, species, i);
        }
        sum / n as f64
    }

    /// All species fitnesses in ascending species order.
    pub fn all_species_fitness(&self, genomes: &[Vec<u8>]) -> Vec<f64> {
        (0..self.spec.species_count())
            .map(|s| self.species_fitness(genomes, s))
            .collect()
    }

    /// System fitness: species fitnesses summed and divided by `S + 1`,
    /// keeping the traditional [0, 1) range.
    pub fn system_fitness(&self, genomes: &[Vec<u8>]) -> f64 {
        system_fitness_of(&self.all_species_fitness(genomes))
    }

    /// Check that per-species genome lengths match the declared topology.
    pub fn check_genomes(&self, genomes: &[Vec<u8>]) -> Result<()> {
        if genomes.len() != self.spec.species_count() {
            return Err(Error::SpeciesCount { got: genomes.len() });
        }
        for (s, g) in genomes.iter().enumerate() {
            if g.len() != self.spec.n(s) {
                return Err(Error::GenomeShape {
                    species: s,
                    expected: self.spec.n(s),
                    got: g.len(),
                });
            }
            if let Some((i, &v)) = g.iter().enumerate().find(|(_, &v)| v > 1) {
                return Err(Error::NonBinaryGene {
                    species: s,
                    gene: i,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// Mean of the per-species fitnesses, summed in ascending species order.
#[inline]
pub fn system_fitness_of(species_fitness: &[f64]) -> f64 {
    let mut sum = 0.0;
    for &f in species_fitness {
        sum += f;
    }
    sum / species_fitness.len() as f64
}

fn build_readers(spec: &LandscapeSpec, linkage: &LinkageMap) -> Vec<Vec<Vec<(u32, u32)>>> {
    let mut readers: Vec<Vec<Vec<(u32, u32)>>> = spec
        .n_per_species()
        .iter()
        .map(|&n| vec![Vec::new(); n])
        .collect();
    for s in 0..spec.species_count() {
        for i in 0..spec.n(s) {
            let link = linkage.gene(s, i);
            readers[s][i].push((s as u32, i as u32));
            for &j in &link.local {
                readers[s][j].push((s as u32, i as u32));
            }
            let mut rank = 0;
            for t in 0..spec.species_count() {
                if t == s {
                    continue;
                }
                for &j in &link.external[rank] {
                    readers[t][j].push((s as u32, i as u32));
                }
                rank += 1;
            }
        }
    }
    // Ascending (species, gene) order; insertion order above already groups
    // by species but interleaves own/local entries, so sort for a stable
    // documented order.
    for per_species in &mut readers {
        for list in per_species {
            list.sort_unstable();
        }
    }
    readers
}
