use std::fmt;

use num_bigint::BigInt;

/// Canonical form of a solver answer. Integers compare by value, so
/// `" 007 "`, `"+7"` and `"7"` are the same answer; anything else is kept
/// verbatim (after trimming) and only equals identical text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonicalAnswer {
    Integer(BigInt),
    Other(String),
}

impl CanonicalAnswer {
    pub fn as_integer(&self) -> Option<&BigInt> {
        match self {
            CanonicalAnswer::Integer(v) => Some(v),
            CanonicalAnswer::Other(_) => None,
        }
    }
}

impl fmt::Display for CanonicalAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalAnswer::Integer(v) => write!(f, "{v}"),
            CanonicalAnswer::Other(s) => f.write_str(s),
        }
    }
}

pub fn canonicalize_answer(text: &str) -> CanonicalAnswer {
    let s = text.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(v) = s.parse::<BigInt>() {
            return CanonicalAnswer::Integer(v);
        }
    }
    CanonicalAnswer::Other(s.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_integers() {
        assert_eq!(canonicalize_answer(" 42 ").to_string(), "42");
        assert_eq!(canonicalize_answer("-0").to_string(), "0");
        assert_eq!(canonicalize_answer("007").to_string(), "7");
        assert_eq!(canonicalize_answer("+7"), canonicalize_answer("7"));
        assert_eq!(canonicalize_answer("-12").to_string(), "-12");
    }

    #[test]
    fn non_integers_keep_text() {
        assert_eq!(
            canonicalize_answer("banana"),
            CanonicalAnswer::Other("banana".into())
        );
        assert_eq!(canonicalize_answer(" 1.0 "), CanonicalAnswer::Other("1.0".into()));
        assert_eq!(canonicalize_answer("-"), CanonicalAnswer::Other("-".into()));
        assert_eq!(canonicalize_answer(""), CanonicalAnswer::Other(String::new()));
        assert_eq!(canonicalize_answer("1 2"), CanonicalAnswer::Other("1 2".into()));
    }
}
