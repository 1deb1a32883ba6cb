//! PolyTope error annotations to binary consistency labels.
//!
//! Only content errors count as factual inconsistency; `Addition` and
//! `Omission` flag relevance problems, not unsupported content.

use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolytopeError {
    /// Unnecessary source snippets included in the summary.
    Addition,
    /// Key point missing from the summary.
    Omission,
    /// Source terms or concepts misrepresented.
    InaccuracyIntrinsic,
    /// Content absent from the source and factually incorrect.
    InaccuracyExtrinsic,
    /// Polarity of a statement flipped relative to the source.
    PositiveNegativeAspect,
}

impl PolytopeError {
    pub fn is_factual(self) -> bool {
        matches!(
            self,
            PolytopeError::InaccuracyIntrinsic
                | PolytopeError::InaccuracyExtrinsic
                | PolytopeError::PositiveNegativeAspect
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown PolyTope error type {0:?}")]
pub struct UnknownErrorType(pub String);

impl FromStr for PolytopeError {
    type Err = UnknownErrorType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "addition" => Ok(PolytopeError::Addition),
            "omission" => Ok(PolytopeError::Omission),
            "inaccuracyintrinsic" => Ok(PolytopeError::InaccuracyIntrinsic),
            "inaccuracyextrinsic" => Ok(PolytopeError::InaccuracyExtrinsic),
            "positivenegativeaspect" => Ok(PolytopeError::PositiveNegativeAspect),
            _ => Err(UnknownErrorType(s.to_string())),
        }
    }
}

/// `true` (consistent) unless a factual error type is present.
pub fn polytope_label<S: AsRef<str>>(error_types: &[S]) -> Result<bool, UnknownErrorType> {
    let mut consistent = true;
    for tag in error_types {
        if tag.as_ref().parse::<PolytopeError>()?.is_factual() {
            consistent = false;
        }
    }
    Ok(consistent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relevance_errors_are_consistent() {
        assert_eq!(polytope_label(&["Omission"]), Ok(true));
        assert_eq!(polytope_label(&["Addition", "Omission"]), Ok(true));
        assert_eq!(polytope_label::<&str>(&[]), Ok(true));
    }

    #[test]
    fn content_errors_are_inconsistent() {
        assert_eq!(polytope_label(&["Inaccuracy Extrinsic"]), Ok(false));
        assert_eq!(
            polytope_label(&["Omission", "Inaccuracy Intrinsic"]),
            Ok(false)
        );
        assert_eq!(polytope_label(&["Positive-Negative Aspect"]), Ok(false));
    }

    #[test]
    fn unknown_tags_are_errors() {
        assert_eq!(
            polytope_label(&["Grammar"]),
            Err(UnknownErrorType("Grammar".into()))
        );
    }
}
