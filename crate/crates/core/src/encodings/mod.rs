//! Translations of source calculi into the FMC, and the programming sugar.

mod source;
pub mod sugar;
mod translate;
mod types;

pub use source::{parse_source, SourceParseError, SourceTerm};
pub use sugar::{desugar, Sugar};
pub use translate::{
    encode, encode_arrow, encode_cbn, encode_cbpv, encode_cbv, encode_kappa, EncodeError, Mode,
};
pub use types::{
    as_computation, cbv_computation_type, encode_types, parse_source_type, SourceType,
    SourceTypeError,
};
