use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use crate::error::{Error, Result};

/// An element of the universal order: a word of (natural, rational) letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct UWord {
    pub letters: Vec<(u64, Dyadic)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordOrdering {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl UWord {
    pub fn new(letters: Vec<(u64, Dyadic)>) -> Self {
        UWord { letters }
    }

    pub fn letter(n: u64, p: Dyadic) -> Self {
        UWord { letters: vec![(n, p)] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `self` followed by the letter `(n, p)`.
    pub fn extended(&self, n: u64, p: Dyadic) -> UWord {
        let mut letters = self.letters.clone();
        letters.push((n, p));
        UWord { letters }
    }

    /// Largest exponent among the rationals.
    pub fn max_exponent(&self) -> u32 {
        self.letters.iter().map(|(_, p)| p.exponent()).max().unwrap_or(0)
    }
}

/// `u <= v`: `u` is no longer than `v`, the naturals agree on all of `u`,
/// the rationals agree before `u`'s last letter, and `u`'s last rational is
/// at most `v`'s rational at that position. The empty word is below all.
fn leq(u: &UWord, v: &UWord) -> bool {
    let k = u.len();
    if k == 0 {
        return true;
    }
    if k > v.len() {
        return false;
    }
    let (a, b) = (&u.letters, &v.letters);
    (0..k).all(|i| a[i].0 == b[i].0) && (0..k - 1).all(|i| a[i].1 == b[i].1) && a[k - 1].1 <= b[k - 1].1
}

pub fn uword_compare(u: &UWord, v: &UWord) -> WordOrdering {
    match (leq(u, v), leq(v, u)) {
        (true, true) => WordOrdering::Equal,
        (true, false) => WordOrdering::Less,
        (false, true) => WordOrdering::Greater,
        (false, false) => WordOrdering::Incomparable,
    }
}

/// Adds `q` to the last rational.
pub fn uword_add(u: &UWord, q: Dyadic) -> Result<UWord> {
    let mut w = u.clone();
    let last = w.letters.last_mut().ok_or(Error::EmptyWord)?;
    last.1 = last.1 + q;
    Ok(w)
}

impl fmt::Display for UWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, p) in &self.letters {
            write!(f, "({n},{p})")?;
        }
        Ok(())
    }
}

impl FromStr for UWord {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut letters = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| format!("expected `(` in `{s}`"))?;
            let close = body.find(')').ok_or_else(|| format!("unclosed letter in `{s}`"))?;
            let (n, p) = body[..close]
                .split_once(',')
                .ok_or_else(|| format!("letter without `,` in `{s}`"))?;
            let n: u64 = n.trim().parse().map_err(|_| format!("bad natural `{n}`"))?;
            letters.push((n, p.parse()?));
            rest = body[close + 1..].trim_start();
        }
        Ok(UWord { letters })
    }
}
