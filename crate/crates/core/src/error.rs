use thiserror::Error;

use crate::grammar::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grammar handed to a query does not validate.
    #[error("invalid grammar: {0}")]
    InvalidGrammar(Violation),

    /// A configured budget was exceeded. `lower`/`upper` carry whatever
    /// bracket on the answer was known when the search gave up.
    #[error("resource limit exceeded: {what}")]
    Resource {
        what: String,
        lower: Option<usize>,
        upper: Option<usize>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>) -> Self {
        Error::Resource {
            what: what.into(),
            lower: None,
            upper: None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
