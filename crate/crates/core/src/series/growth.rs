use crate::newton::Rational;
use crate::padic::element::ilog_p;

/// What is known about the coefficients of the underlying infinite series
/// beyond (and including) the stored truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailModel {
    /// The truncation is exact: every coefficient at or beyond the stored
    /// length is zero (polynomials and exact finite products).
    Zero,
    /// `v(a_k) >= c - r * ceil(log_p(k+1))` for all k.
    Growth { r: Rational, c: Rational },
    /// No declaration; evaluation cannot certify a tail.
    Unknown,
}

impl TailModel {
    pub fn growth(r: Rational, c: Rational) -> TailModel {
        TailModel::Growth { r, c }
    }

    /// Combined model for a sum. `support_within` records whether the true
    /// supports of both operands fit inside the result truncation, so that
    /// `Zero` declarations survive.
    pub fn add(
        &self,
        other: &TailModel,
        self_floor: Rational,
        other_floor: Rational,
        support_within: bool,
    ) -> TailModel {
        if support_within {
            if let (TailModel::Zero, TailModel::Zero) = (self, other) {
                return TailModel::Zero;
            }
        }
        match (self.as_growth(self_floor), other.as_growth(other_floor)) {
            (Some((r1, c1)), Some((r2, c2))) => TailModel::Growth {
                r: r1.max(r2),
                c: c1.min(c2),
            },
            _ => TailModel::Unknown,
        }
    }

    /// Combined model for a product; `support_within` as in [`Self::add`],
    /// for the sum of supports.
    pub fn mul(
        &self,
        other: &TailModel,
        self_floor: Rational,
        other_floor: Rational,
        support_within: bool,
    ) -> TailModel {
        if support_within {
            if let (TailModel::Zero, TailModel::Zero) = (self, other) {
                return TailModel::Zero;
            }
        }
        match (self.as_growth(self_floor), other.as_growth(other_floor)) {
            (Some((r1, c1)), Some((r2, c2))) => TailModel::Growth {
                r: r1 + r2,
                c: c1 + c2,
            },
            _ => TailModel::Unknown,
        }
    }

    /// View as a growth declaration; `Zero` converts using the measured
    /// valuation floor of the stored coefficients.
    pub fn as_growth(&self, measured_floor: Rational) -> Option<(Rational, Rational)> {
        match self {
            TailModel::Zero => Some((Rational::from_integer(0), measured_floor)),
            TailModel::Growth { r, c } => Some((*r, *c)),
            TailModel::Unknown => None,
        }
    }

    pub fn as_declared(&self) -> Option<(Rational, Rational)> {
        match self {
            TailModel::Growth { r, c } => Some((*r, *c)),
            _ => None,
        }
    }

    pub fn shift_constant(&self, dv: Rational) -> TailModel {
        match self {
            TailModel::Growth { r, c } => TailModel::Growth { r: *r, c: *c + dv },
            other => other.clone(),
        }
    }
}

/// Measured valuation profile of a truncation: per-index shortfalls,
/// the fitted slope `r_hat = max_{k >= p} s_k / ceil(log_p(k+1))` and the
/// matching intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    pub shortfalls: Vec<Rational>,
    pub r_hat: Rational,
    pub intercept: Rational,
}

impl GrowthProfile {
    /// `valuations[k]` is a certified lower bound for `v(a_k)` (the ledger
    /// bound for coefficients indistinguishable from zero).
    ///
    /// The fitted slope is the growth of the per-level shortfall maxima
    /// `S_L = max { s_k : ceil(log_p(k+1)) = L }` between the first and
    /// last measured levels at `L >= 2`, clamped at zero. This estimator
    /// is insensitive both to a constant denominator offset (which keeps
    /// bounded measures at slope 0) and to the parity oscillation of
    /// half-logarithm products. Truncations too short to reach level 3
    /// fall back to the pointwise maximum of `s_k / ceil(log_p(k+1))`.
    pub fn from_valuations(valuations: &[Rational], p: u64) -> GrowthProfile {
        let zero = Rational::from_integer(0);
        let shortfalls: Vec<Rational> = valuations.iter().map(|v| -*v).collect();
        let mut level_max: Vec<Option<Rational>> = Vec::new();
        for (k, s) in shortfalls.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let l = ceil_log_p(k as u64 + 1, p) as usize;
            if level_max.len() <= l {
                level_max.resize(l + 1, None);
            }
            let e = &mut level_max[l];
            *e = Some(match *e {
                None => *s,
                Some(x) if *s > x => *s,
                Some(x) => x,
            });
        }
        let last = level_max
            .iter()
            .enumerate()
            .rev()
            .find_map(|(l, s)| s.map(|v| (l, v)));
        let first = level_max
            .iter()
            .enumerate()
            .skip(2)
            .find_map(|(l, s)| s.map(|v| (l, v)));
        let r_hat = match (first, last) {
            (Some((l1, s1)), Some((l2, s2))) if l2 > l1 => {
                let slope = (s2 - s1) / Rational::from_integer((l2 - l1) as i64);
                slope.max(zero)
            }
            _ => {
                // short truncation: pointwise maximum
                let mut r = zero;
                for (k, s) in shortfalls.iter().enumerate() {
                    if (k as u64) < p {
                        continue;
                    }
                    let l = ceil_log_p(k as u64 + 1, p);
                    if l > 0 {
                        let slope = *s / Rational::from_integer(l);
                        if slope > r {
                            r = slope;
                        }
                    }
                }
                r
            }
        };
        let mut intercept: Option<Rational> = None;
        for (k, v) in valuations.iter().enumerate() {
            let l = Rational::from_integer(ceil_log_p(k as u64 + 1, p));
            let c = *v + r_hat * l;
            intercept = Some(match intercept {
                None => c,
                Some(x) if c < x => c,
                Some(x) => x,
            });
        }
        GrowthProfile {
            shortfalls,
            r_hat,
            intercept: intercept.unwrap_or(zero),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.r_hat == Rational::from_integer(0)
    }
}

/// `ceil(log_p(n))` for `n >= 1`.
pub fn ceil_log_p(n: u64, p: u64) -> i64 {
    if n <= 1 {
        return 0;
    }
    let f = ilog_p(n - 1, p);
    // smallest l with p^l >= n
    let mut l = f;
    let mut pw = 1u128;
    for _ in 0..l {
        pw *= p as u128;
    }
    while pw < n as u128 {
        pw *= p as u128;
        l += 1;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log() {
        assert_eq!(ceil_log_p(1, 5), 0);
        assert_eq!(ceil_log_p(2, 5), 1);
        assert_eq!(ceil_log_p(5, 5), 1);
        assert_eq!(ceil_log_p(6, 5), 2);
        assert_eq!(ceil_log_p(25, 5), 2);
        assert_eq!(ceil_log_p(26, 5), 3);
    }

    #[test]
    fn profile_of_bounded() {
        let vals = vec![Rational::from_integer(0); 30];
        let gp = GrowthProfile::from_valuations(&vals, 5);
        assert_eq!(gp.r_hat, Rational::from_integer(0));
        assert!(gp.is_bounded());
    }

    #[test]
    fn profile_of_log_like() {
        // v(a_k) = -ceil(log_5(k+1)) exactly: slope 1
        let vals: Vec<Rational> = (0..200)
            .map(|k| -Rational::from_integer(ceil_log_p(k as u64 + 1, 5)))
            .collect();
        let gp = GrowthProfile::from_valuations(&vals, 5);
        assert_eq!(gp.r_hat, Rational::from_integer(1));
    }
}
