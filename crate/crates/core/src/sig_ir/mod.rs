//! Language-neutral function headers: signatures, types and docstrings for the twelve
//! target languages.

mod docstring;
mod header;
mod lang;
mod signature;
mod types;

use thiserror::Error;

pub use docstring::{normalize_ws, parse_docstring, render_docstring, DocstringIR, ParamDoc};
pub use header::{parse_header, render_header, translate_header, Header, PERSONA_PREFIX};
pub use lang::{CommentStyle, LanguageId, TagStyle};
pub use signature::{
    canonical_signature, is_identifier, parse_signature, render_signature, Param, SignatureIR,
};
pub use types::{canonical_type, parse_type, render_type, TypeRef, TypeSlot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigError {
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("malformed signature at byte {offset}: {reason}")]
    MalformedSignature { offset: usize, reason: String },
    #[error("unsupported construct at byte {offset}: {what}")]
    UnsupportedConstruct { offset: usize, what: String },
    #[error("type `{ty}` has no spelling in {language}")]
    UnrenderableType { language: LanguageId, ty: String },
    #[error("malformed docstring: {0}")]
    MalformedDocstring(String),
    #[error("invalid signature IR: {0}")]
    InvalidIr(String),
}
