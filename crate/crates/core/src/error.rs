use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate radius {r}: the radii 0 and 4δ = {four_delta} have one-point spheres")]
    DegenerateRadius { r: u64, four_delta: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular radius {0}: (1 + r)/(1 - r) has a pole")]
    SingularRadius(u64),

    #[error("invalid character ν_{0}: ν = ν⁻¹ on the norm-one subgroup")]
    InvalidCharacter(u64),

    #[error("reconciliation failure: {0}")]
    Reconciliation(String),

    #[error("internal assertion failed: {0}")]
    Internal(String),
}
