//! The 17 financial hypernym tags in canonical order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Tag names in canonical order. A tag's position is its canonical index and
/// doubles as the tie-break order everywhere a ranking is produced.
pub const TAG_NAMES: [&str; 17] = [
    "Bonds",
    "Forward",
    "Funds",
    "Future",
    "MMIs",
    "Option",
    "Stocks",
    "Swap",
    "Equity Index",
    "Credit Index",
    "Securities restrictions",
    "Parametric schedules",
    "Debt pricing and yields",
    "Credit Events",
    "Stock Corporation",
    "Central Securities Depository",
    "Regulatory Agency",
];

pub const NUM_TAGS: usize = TAG_NAMES.len();

/// One of the canonical seed tags, stored as its canonical index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(u8);

impl std::fmt::Debug for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tag({:?})", self.name())
    }
}

impl Tag {
    pub fn from_index(index: usize) -> Option<Tag> {
        (index < NUM_TAGS).then(|| Tag(index as u8))
    }

    /// Case-insensitive lookup by surface name.
    pub fn from_name(name: &str) -> Option<Tag> {
        let name = name.trim();
        TAG_NAMES
            .iter()
            .position(|t| t.eq_ignore_ascii_case(name))
            .map(|i| Tag(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        TAG_NAMES[self.index()]
    }

    /// All tags in canonical order.
    pub fn all() -> impl Iterator<Item = Tag> + Clone {
        (0..NUM_TAGS as u8).map(Tag)
    }

    pub fn all_vec() -> Vec<Tag> {
        Tag::all().collect()
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::from_name(s).ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Tag::from_name(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown tag `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        assert_eq!(Tag::from_index(0).unwrap().name(), "Bonds");
        assert_eq!(Tag::from_index(16).unwrap().name(), "Regulatory Agency");
        assert!(Tag::from_index(17).is_none());
        let names: Vec<_> = Tag::all().map(Tag::name).collect();
        assert_eq!(names, TAG_NAMES);
    }

    #[test]
    fn lookup_ignores_case() {
        assert_eq!(Tag::from_name("equity index").unwrap().index(), 8);
        assert_eq!(Tag::from_name(" mmis ").unwrap().index(), 4);
        assert!("Bananas".parse::<Tag>().is_err());
    }

    #[test]
    fn serde_uses_names() {
        let t = Tag::from_name("Swap").unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, "\"Swap\"");
        assert_eq!(serde_json::from_str::<Tag>(&s).unwrap(), t);
    }
}
