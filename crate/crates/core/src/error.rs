use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("block size n={0} must be even")]
    OddBlockSize(u32),

    #[error("block size n={0} is outside the supported range 4..=32")]
    UnsupportedBlockSize(u32),

    #[error("round count must be at least 1")]
    NoRounds,

    #[error("value {value:#x} does not fit in {bits} bits")]
    OutOfRange { value: u64, bits: u32 },

    #[error("malformed cipher description: {0}")]
    MalformedCipher(String),

    #[error("guessed rounds must form a contiguous suffix ending at round {last}")]
    NonContiguousRounds { last: usize },

    #[error("QRAM address {address} outside table of {len} cells")]
    QramAddress { address: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("attack precondition violated: {0}")]
    Precondition(String),

    #[error("table file: {0}")]
    TableFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("descriptor parse error: {0}")]
    Descriptor(#[from] toml::de::Error),

    #[error("descriptor write error: {0}")]
    DescriptorWrite(#[from] toml::ser::Error),
}
