use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

/// Two-class polarity used for context sets and classifier decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Positive => Some(Polarity::Positive),
            Label::Negative => Some(Polarity::Negative),
            Label::Neutral => None,
        }
    }

    /// Sign of a real value; zero has no polarity.
    pub fn from_sign(value: f64) -> Option<Self> {
        if value > 0.0 {
            Some(Polarity::Positive)
        } else if value < 0.0 {
            Some(Polarity::Negative)
        } else {
            None
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn label(self) -> Label {
        match self {
            Polarity::Positive => Label::Positive,
            Polarity::Negative => Label::Negative,
        }
    }

    /// Suffix of polarity-tagged feature tokens.
    pub fn tag(self) -> &'static str {
        match self {
            Polarity::Positive => "#pos",
            Polarity::Negative => "#neg",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
