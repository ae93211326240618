use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "Yes",
            Label::No => "No",
        }
    }

    /// Exact canonical spelling only.
    pub fn from_completion(s: &str) -> Option<Label> {
        match s {
            "Yes" => Some(Label::Yes),
            "No" => Some(Label::No),
            _ => None,
        }
    }

    /// Class index with attrition (`Yes`) as 1.
    pub fn class(self) -> u8 {
        u8::from(self == Label::Yes)
    }

    pub fn from_class(class: u8) -> Label {
        if class == 1 {
            Label::Yes
        } else {
            Label::No
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parsed {
    Yes,
    No,
    Unparseable,
}

impl Parsed {
    pub fn as_str(self) -> &'static str {
        match self {
            Parsed::Yes => "Yes",
            Parsed::No => "No",
            Parsed::Unparseable => "Unparseable",
        }
    }

    pub fn label(self) -> Option<Label> {
        match self {
            Parsed::Yes => Some(Label::Yes),
            Parsed::No => Some(Label::No),
            Parsed::Unparseable => None,
        }
    }
}

impl From<Label> for Parsed {
    fn from(l: Label) -> Self {
        match l {
            Label::Yes => Parsed::Yes,
            Label::No => Parsed::No,
        }
    }
}

impl fmt::Display for Parsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reads a yes/no answer from free text. Tokens are maximal runs of
/// alphanumeric characters; the first one equal to `yes` or `no` (ignoring
/// case) decides.
pub fn parse_completion(text: &str) -> Parsed {
    text.split(|c: char| !c.is_alphanumeric())
        .find_map(|tok| {
            if tok.eq_ignore_ascii_case("yes") {
                Some(Parsed::Yes)
            } else if tok.eq_ignore_ascii_case("no") {
                Some(Parsed::No)
            } else {
                None
            }
        })
        .unwrap_or(Parsed::Unparseable)
}
