use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A signed propositional atom.
///
/// Written `a` for the positive literal and `~a` (or `¬a`, `!a`) for its negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Literal {
    pub atom: String,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: impl Into<String>) -> Self {
        Literal { atom: atom.into(), positive: true }
    }

    pub fn neg(atom: impl Into<String>) -> Self {
        Literal { atom: atom.into(), positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }

    /// Same atom, opposite sign.
    pub fn clashes_with(&self, other: &Literal) -> bool {
        self.atom == other.atom && self.positive != other.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "~{}", self.atom)
        }
    }
}

impl FromStr for Literal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (positive, atom) = match s.chars().next() {
            Some('~') | Some('!') | Some('-') => (false, &s[1..]),
            Some('¬') => (false, &s['¬'.len_utf8()..]),
            _ => (true, s),
        };
        let atom = atom.trim();
        if atom.is_empty() || !atom.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(Error::InvalidScenario(format!("bad literal `{s}`")));
        }
        Ok(Literal { atom: atom.to_string(), positive })
    }
}

impl TryFrom<String> for Literal {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Literal> for String {
    fn from(l: Literal) -> String {
        l.to_string()
    }
}

/// Parse a list of literal strings. Panics on malformed input; meant for tests and fixtures.
pub fn lits(items: &[&str]) -> Vec<Literal> {
    items.iter().map(|s| s.parse().expect("literal")).collect()
}
