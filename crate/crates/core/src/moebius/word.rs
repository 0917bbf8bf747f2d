//! Words in free generators, kept in reduced form: adjacent letters carry
//! distinct symbols and every exponent is nonzero.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupWord {
    letters: Vec<(String, i64)>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord { letters: Vec::new() }
    }

    pub fn generator(name: &str, exponent: i64) -> Self {
        let mut w = GroupWord::identity();
        w.push(name, exponent);
        w
    }

    /// Appends a letter, merging with the tail and dropping zero exponents.
    pub fn push(&mut self, name: &str, exponent: i64) {
        if exponent == 0 {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.0 == name {
                last.1 += exponent;
                if last.1 == 0 {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push((name.to_string(), exponent));
    }

    pub fn concat(&self, rhs: &GroupWord) -> GroupWord {
        let mut out = self.clone();
        for (n, e) in &rhs.letters {
            out.push(n, *e);
        }
        out
    }

    pub fn inverse(&self) -> GroupWord {
        let mut out = GroupWord::identity();
        for (n, e) in self.letters.iter().rev() {
            out.push(n, -e);
        }
        out
    }

    pub fn letters(&self) -> &[(String, i64)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Total letter count with multiplicity.
    pub fn length(&self) -> usize {
        self.letters.iter().map(|(_, e)| e.unsigned_abs() as usize).sum()
    }

    /// Parses whitespace-separated letters with optional `^exp`,
    /// e.g. "A^2 B^-1 A". The empty string is the identity.
    pub fn parse(s: &str) -> Result<GroupWord> {
        let mut w = GroupWord::identity();
        for tok in s.split_whitespace() {
            let (name, exp) = match tok.split_once('^') {
                None => (tok, 1i64),
                Some((n, e)) => {
                    let exp: i64 = e
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad exponent in `{tok}`")))?;
                    (n, exp)
                }
            };
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::InvalidInput(format!("bad generator token `{tok}`")));
            }
            w.push(name, exp);
        }
        Ok(w)
    }
}

impl std::fmt::Display for GroupWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|(n, e)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w = GroupWord::parse("A^2 B^-1 A").unwrap();
        assert_eq!(w.to_string(), "A^2 B^-1 A");
        assert_eq!(w.length(), 4);
        assert_eq!(GroupWord::parse("").unwrap(), GroupWord::identity());
    }

    #[test]
    fn reduction() {
        let mut w = GroupWord::generator("A", 2);
        w.push("A", -2);
        assert!(w.is_identity());
        let u = GroupWord::parse("A B").unwrap();
        let v = u.concat(&u.inverse());
        assert!(v.is_identity());
    }

    #[test]
    fn bad_tokens_rejected() {
        assert!(GroupWord::parse("A^x").is_err());
        assert!(GroupWord::parse("^2").is_err());
    }
}
