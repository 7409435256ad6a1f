use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("species_count = {got}, but an ecosystem needs at least 2 species")]
    SpeciesCount { got: usize },

    #[error("species {species} has N = 0; every genome needs at least one gene")]
    EmptySpecies { species: usize },

    #[error("k = {k} exceeds the bound k <= N-1 = {} for species {species} (N = {n})", n - 1)]
    LocalInputsTooLarge { species: usize, k: usize, n: usize },

    #[error(
        "c = {c} exceeds the genome length N = {n_partner} of partner species {partner} \
         (inputs are sampled without replacement, so c <= N_partner is required)"
    )]
    ExternalInputsTooLarge { partner: usize, c: usize, n_partner: usize },

    #[error("gene context width 1 + k + S*c = {width} exceeds the 64-bit pattern limit")]
    PatternWidthOverflow { width: usize },

    #[error("gene context width mismatch: spec requires {expected} bits, context has {got}")]
    ContextWidth { expected: usize, got: usize },

    #[error("genome shape mismatch for species {species}: landscape has N = {expected}, state has {got} bits")]
    GenomeShape {
        species: usize,
        expected: usize,
        got: usize,
    },

    #[error("genome bit {gene} of species {species} is {value}; bits must be 0 or 1")]
    NonBinaryGene {
        species: usize,
        gene: usize,
        value: u8,
    },

    #[error("species index {species} out of range (species_count = {count})")]
    SpeciesIndex { species: usize, count: usize },

    #[error("sample {name} has {len} elements; the Welch test needs at least 2 per sample")]
    SampleTooSmall { name: &'static str, len: usize },

    #[error("error_rate = {got}; must lie in [0, 1]")]
    ErrorRateRange { got: f64 },

    #[error("cell has landscapes = {landscapes}, restarts_per_landscape = {restarts}; both must be >= 1")]
    EmptyCell { landscapes: usize, restarts: usize },

    #[error("cell mismatch: {detail}")]
    CellMismatch { detail: String },

    #[error("results table error: {0}")]
    Table(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
