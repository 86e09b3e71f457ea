use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Exact rational `num / 2^exp`, kept in lowest terms (`num` odd unless
/// `exp == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    pub fn new(num: i64, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn integer(n: i64) -> Self {
        Dyadic { num: n, exp: 0 }
    }

    /// `-1 / 2^exp`.
    pub fn neg_unit(exp: u32) -> Self {
        Dyadic::new(-1, exp)
    }

    pub fn numerator(self) -> i64 {
        self.num
    }

    /// Exponent of the reduced denominator.
    pub fn exponent(self) -> u32 {
        self.exp
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
    }

    fn scaled(self, exp: u32) -> i128 {
        (self.num as i128) << (exp - self.exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        let sum = self.scaled(exp) + rhs.scaled(exp);
        let mut d = Dyadic {
            num: i64::try_from(sum).expect("dyadic numerator overflow"),
            exp,
        };
        d.normalize();
        d
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.scaled(exp).cmp(&other.scaled(exp))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = String;

    /// Accepts `num/2^e` or a plain integer.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("not a dyadic rational: `{s}`");
        match s.split_once('/') {
            None => s.trim().parse().map(Dyadic::integer).map_err(|_| bad()),
            Some((n, d)) => {
                let num: i64 = n.trim().parse().map_err(|_| bad())?;
                let exp: u32 = d.trim().strip_prefix("2^").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if exp > 62 {
                    return Err(bad());
                }
                Ok(Dyadic::new(num, exp))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 5), Dyadic::ZERO);
        assert_eq!(Dyadic::new(6, 1).exponent(), 0);
    }

    #[test]
    fn arithmetic_and_order() {
        let half = Dyadic::new(1, 1);
        assert_eq!(half + Dyadic::neg_unit(3), Dyadic::new(3, 3));
        assert_eq!(half + Dyadic::neg_unit(1), Dyadic::ZERO);
        assert!(Dyadic::neg_unit(2) < Dyadic::ZERO);
        assert!(Dyadic::new(-5, 1) < Dyadic::integer(-2));
        assert_eq!(-half, Dyadic::new(-1, 1));
    }

    #[test]
    fn display_and_parse() {
        let d = Dyadic::new(-3, 3);
        assert_eq!(d.to_string(), "-3/2^3");
        assert_eq!("-3/2^3".parse::<Dyadic>(), Ok(d));
        assert_eq!("-6/2^4".parse::<Dyadic>(), Ok(d));
        assert_eq!("7".parse::<Dyadic>(), Ok(Dyadic::integer(7)));
        assert!("1/3".parse::<Dyadic>().is_err());
    }
}
