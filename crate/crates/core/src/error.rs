use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a lattice: {0}")]
    NotALattice(String),
    #[error("not distributive: {elements} elements but {reconstructed} down-sets of join-irreducibles")]
    NotDistributive { elements: usize, reconstructed: usize },
    #[error("bound exceeded: {value} > {max}")]
    BoundExceeded { value: usize, max: usize },
    #[error("zero vector has no kernel hyperplane")]
    ZeroVector,
    #[error("cap exceeded: {what} > {limit}")]
    CapExceeded { what: String, limit: usize },
    #[error("empty arrangement")]
    EmptyArrangement,
    #[error("not a basic open set: {0}")]
    NotBasicOpen(String),
    #[error("elements are not disjoint: meet is nonzero")]
    NotDisjoint,
    #[error("condition ({condition}) violated: {detail}")]
    PreconditionViolated { condition: u8, detail: String },
    #[error("pair is not admissible: {0}")]
    NotAdmissible(String),
    #[error("range is not consonant at ({0}, {1})")]
    NotConsonantRange(String, String),
    #[error("hyperplane {0} already in arrangement")]
    DuplicateHyperplane(String),
    #[error("coordinate {0} lies in the support of the arrangement")]
    CoordinateInSupport(usize),
    #[error("kernel of {0} is not in the arrangement")]
    KernelNotInArrangement(String),
    #[error("defect premise fails: f(U) is not below f(V) joined with gamma")]
    DefectPremiseFails,
    #[error("not completely normal at ({0}, {1})")]
    NotCompletelyNormal(String, String),
    #[error("not a lattice homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
