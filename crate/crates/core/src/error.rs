use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    BadAlphabet(u8),
    #[error("letter {letter} out of range for alphabet size {d}")]
    BadLetter { letter: u8, d: u8 },
    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u8, right: u8 },
    #[error("duplicate cell {0}")]
    DuplicateCell(String),
    #[error("not an antichain: {shorter} is a prefix of {longer}")]
    NotAntichain { shorter: String, longer: String },
    #[error("antichain is not complete: {0}")]
    IncompleteAntichain(String),
    #[error("cannot pad from {have} to {want} cells: sizes change by multiples of {modulus}, residue gap {residue}")]
    PadCongruence { have: usize, want: usize, modulus: usize, residue: usize },
    #[error("empty period")]
    EmptyPeriod,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain and range have different sizes: {domain} vs {range}")]
    SizeMismatch { domain: usize, range: usize },
    #[error("partial assignment cannot be completed: {0}")]
    CompletionImpossible(String),
    #[error("expansion budget exceeded at depth {depth}: {context}")]
    BudgetExceeded { depth: usize, context: String },
    #[error("points at indices {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("points at index {index} are not in the same orbit: {left} vs {right}")]
    NotCofinal { index: usize, left: String, right: String },
    #[error("target must be a proper subset of the space")]
    TargetNotProper,
    #[error("the target neighbourhood is empty")]
    EmptyTargetSet,
    #[error("permutation degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("invalid permutation image array: {0}")]
    BadPermutation(String),
    #[error("identity element not allowed here")]
    IdentityElement,
    #[error("enumeration overflow: group order exceeds {cap} at degree {n}")]
    EnumerationOverflow { n: usize, cap: usize },
    #[error("degree {n} exceeds the supported maximum {max}")]
    DegreeTooLarge { n: usize, max: usize },
    #[error("element {index} squares to the identity")]
    OrderTwoElement { index: usize },
    #[error("piecewise-linear map invalid: {0}")]
    BadPlMap(String),
    #[error("domain/range mismatch for composition: {0}")]
    PlDomainMismatch(String),
    #[error("no crossing with g(t) > t found in the window for input {index}")]
    NoPositiveCrossing { index: usize },
    #[error("substitution error: {0}")]
    BadSubstitution(String),
    #[error("word {0} is not legal in this system")]
    IllegalWord(String),
    #[error("search bound {bound} exceeded: {context}")]
    SearchBound { bound: usize, context: String },
    #[error("chart not admissible: {0}")]
    InadmissibleChart(String),
    #[error("dihedral relation failure: {0}")]
    RelationFailure(String),
    #[error("the dihedral action is not free: fixed pattern {pattern} for element {element}")]
    NotFree { pattern: String, element: String },
    #[error("flow element invalid: {0}")]
    BadFlowElement(String),
    #[error("point cannot be located in any piece")]
    UnlocatablePoint,
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
}
