use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const RESOLVER_PREFIXES: &[&str] = &[
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi:",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed DOI {0:?}")]
pub struct DoiError(pub String);

/// A normalized DOI: trimmed, lowercased, resolver prefix removed, and of the
/// form `10.<registrant>/<suffix>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Doi(Box<str>);

impl Doi {
    pub fn parse(raw: &str) -> Result<Self, DoiError> {
        normalize(raw)
            .map(|s| Doi(s.into_boxed_str()))
            .ok_or_else(|| DoiError(raw.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Returns the normalized form of `raw`, or `None` if it is not a DOI.
pub fn normalize(raw: &str) -> Option<String> {
    let mut s = raw.trim().to_lowercase();
    for prefix in RESOLVER_PREFIXES {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest.trim_start().to_string();
            break;
        }
    }
    is_well_formed(&s).then_some(s)
}

fn is_well_formed(s: &str) -> bool {
    let Some(rest) = s.strip_prefix("10.") else {
        return false;
    };
    let Some((registrant, suffix)) = rest.split_once('/') else {
        return false;
    };
    !registrant.is_empty()
        && registrant.bytes().all(|b| b.is_ascii_digit() || b == b'.')
        && !suffix.is_empty()
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Doi {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for Doi {
    type Err = DoiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Doi::parse(s)
    }
}

impl TryFrom<String> for Doi {
    type Error = DoiError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Doi::parse(&value)
    }
}

impl From<Doi> for String {
    fn from(doi: Doi) -> Self {
        doi.0.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lowercases_and_trims() {
        assert_eq!(Doi::parse("10.1000/ABC ").unwrap().as_str(), "10.1000/abc");
        assert_eq!(Doi::parse("  10.1/x").unwrap().as_str(), "10.1/x");
    }

    #[test]
    fn strips_resolver_prefix() {
        assert_eq!(
            Doi::parse("https://doi.org/10.1145/3442442.3451369")
                .unwrap()
                .as_str(),
            "10.1145/3442442.3451369"
        );
        assert_eq!(
            Doi::parse("HTTPS://DX.DOI.ORG/10.1/A").unwrap().as_str(),
            "10.1/a"
        );
        assert_eq!(
            Doi::parse("doi:10.5281/zenodo.4386934").unwrap().as_str(),
            "10.5281/zenodo.4386934"
        );
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "   ",
            "10.1000",
            "10./abc",
            "10.1000/",
            "11.1000/abc",
            "a/1",
            "10.x1/abc",
            "not-a-doi",
        ] {
            assert!(Doi::parse(bad).is_err(), "{bad:?} accepted");
        }
    }

    proptest! {
        #[test]
        fn well_formed_inputs_normalize_idempotently(raw in "(https://doi\\.org/| |doi:|HTTP://DX\\.DOI\\.ORG/)?10\\.[0-9]{1,5}/[A-Za-z0-9./_-]{1,12} ?") {
            let once = normalize(&raw).unwrap();
            prop_assert_eq!(normalize(&once), Some(once.clone()));
        }

        #[test]
        fn normalization_is_idempotent(raw in "\\PC{0,30}") {
            if let Some(once) = normalize(&raw) {
                prop_assert_eq!(normalize(&once), Some(once.clone()));
            }
        }
    }
}
