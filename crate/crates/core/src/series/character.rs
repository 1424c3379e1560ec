use super::SeriesError;

/// A continuous character of the cyclotomic Galois group, specified by its
/// Hodge-Tate twist exponent `k`, an auxiliary tame exponent `d`, and a
/// finite-order wild part of conductor `p^m` (trivial iff `m <= 1`).
///
/// Conventions: the topological generator satisfies `chi_cyc(gamma) = u`
/// with `u = 1 + p`, so the evaluation point for the wild variable is
/// `X = u^k zeta - 1` where `zeta = (a fixed primitive p^(m-1)-th root)^c`.
/// The cyclotomic character restricts to the Teichmuller character on the
/// tame part, so the tame component this character selects is
/// `(k + d) mod (p - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharacterSpec {
    pub k: i64,
    pub d: i64,
    pub m: u32,
    pub c: u64,
}

impl CharacterSpec {
    /// `chi_cyc^k` with trivial finite part.
    pub fn twist_power(k: i64) -> CharacterSpec {
        CharacterSpec { k, d: 0, m: 0, c: 1 }
    }

    /// `chi_cyc^k . omega^d . theta_1` with `theta_1` of wild conductor
    /// `p^m`, using the `c`-th power of the fixed primitive root.
    pub fn new(k: i64, d: i64, m: u32, c: u64) -> CharacterSpec {
        CharacterSpec { k, d, m, c }
    }

    pub fn validate(&self, p: u64) -> Result<(), SeriesError> {
        if self.d < 0 || self.d >= p as i64 - 1 {
            return Err(SeriesError::BadCharacter(format!(
                "tame exponent {} out of range 0..{}",
                self.d,
                p - 2
            )));
        }
        if self.m >= 2 {
            if self.c == 0 || self.c % p == 0 {
                return Err(SeriesError::BadCharacter(format!(
                    "root choice {} not coprime to p",
                    self.c
                )));
            }
        }
        Ok(())
    }

    /// Wild level: the required cyclotomic extension adjoins a primitive
    /// `p^(m-1)`-th root of unity.
    pub fn wild_level(&self) -> u32 {
        self.m.saturating_sub(1)
    }

    pub fn is_wild_trivial(&self) -> bool {
        self.m <= 1
    }

    /// Tame component index selected when evaluating a Delta-indexed
    /// series at this character.
    pub fn tame_component(&self, p: u64) -> usize {
        (self.k + self.d).rem_euclid(p as i64 - 1) as usize
    }

    /// The same finite part twisted by `chi_cyc^t`.
    pub fn shifted(&self, t: i64) -> CharacterSpec {
        CharacterSpec { k: self.k + t, ..*self }
    }
}
