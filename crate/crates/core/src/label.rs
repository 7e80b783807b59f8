use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five anaphoric relation types annotated in chemical patent snippets.
///
/// The variant order is the canonical order used for confusion matrices,
/// stats tables and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationLabel {
    #[serde(rename = "CONTAINED")]
    Contained,
    #[serde(rename = "COREFERENCE")]
    Coreference,
    #[serde(rename = "REACTION_ASSOCIATED")]
    ReactionAssociated,
    #[serde(rename = "TRANSFORMED")]
    Transformed,
    #[serde(rename = "WORK_UP")]
    WorkUp,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown relation label {0:?}")]
pub struct UnknownLabel(pub String);

impl RelationLabel {
    pub const ALL: [RelationLabel; 5] = [
        RelationLabel::Contained,
        RelationLabel::Coreference,
        RelationLabel::ReactionAssociated,
        RelationLabel::Transformed,
        RelationLabel::WorkUp,
    ];

    pub const COUNT: usize = 5;

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationLabel::Contained => "CONTAINED",
            RelationLabel::Coreference => "COREFERENCE",
            RelationLabel::ReactionAssociated => "REACTION_ASSOCIATED",
            RelationLabel::Transformed => "TRANSFORMED",
            RelationLabel::WorkUp => "WORK_UP",
        }
    }

    /// Position in [`RelationLabel::ALL`].
    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, UnknownLabel> {
        RelationLabel::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| UnknownLabel(s.to_string()))
    }
}
