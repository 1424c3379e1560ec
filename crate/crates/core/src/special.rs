//! Constructors for the named series: cyclotomic polynomials in `1 + X`,
//! `log_p(1+X)`, the linear factors `ell_i` and their products, and the
//! plus/minus half-logarithms built from even/odd cyclotomic levels.
//!
//! Infinite products are realized by an automatic cutoff: levels with full
//! support inside the truncation are always included, and the product is
//! extended until the proven perturbation bound for every dropped factor
//! falls below the working precision. The bound comes from
//! `v(coeff_j(Phi_k(1+X)/p - 1)) >= k - 2 - v_p(j)` for `1 <= j < p^(k-1)`,
//! which follows from the exact valuation `v_p(C(a p^(k-1), j)) = k - 1 +
//! v_p(a) - v_p(j)` of the binomial coefficients in that range.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::newton::Rational;
use crate::padic::element::{ilog_p, modinv, vp_i64};
use crate::padic::{PadicElement, PadicField};
use crate::series::{SeriesError, SeriesGamma1, TailModel};

/// Sign of a half-logarithm: `Plus` collects the even cyclotomic levels,
/// `Minus` the odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfLogSign {
    Plus,
    Minus,
}

impl HalfLogSign {
    pub fn label(&self) -> &'static str {
        match self {
            HalfLogSign::Plus => "+",
            HalfLogSign::Minus => "-",
        }
    }

    pub fn other(&self) -> HalfLogSign {
        match self {
            HalfLogSign::Plus => HalfLogSign::Minus,
            HalfLogSign::Minus => HalfLogSign::Plus,
        }
    }

    /// Whether cyclotomic level `k` belongs to this class.
    fn contains(&self, k: u32) -> bool {
        match self {
            HalfLogSign::Plus => k % 2 == 0,
            HalfLogSign::Minus => k % 2 == 1,
        }
    }
}

type CacheKey = (u64, i64, usize, String);

fn cache() -> &'static Mutex<HashMap<CacheKey, SeriesGamma1>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, SeriesGamma1>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(
    field: &PadicField,
    len: usize,
    name: &str,
    build: impl FnOnce() -> Result<SeriesGamma1, SeriesError>,
) -> Result<SeriesGamma1, SeriesError> {
    if !field.is_base() {
        // only base-field constructions are memoized; extensions are rare
        return build();
    }
    let key = (field.prime(), field.precision(), len, name.to_string());
    if let Some(hit) = cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let value = build()?;
    cache().lock().unwrap().insert(key, value.clone());
    Ok(value)
}

/// Row of binomial coefficients `C(n, j)` for `j < jmax` as exact p-adic
/// integers, maintained with an explicit valuation split so that division
/// by `j + 1` never loses digits.
fn binomial_row(field: &PadicField, n: &BigUint, jmax: usize) -> Vec<PadicElement> {
    let p = field.prime();
    let slack = 8 + ilog_p(jmax as u64 + 1, p) * 2;
    let w = field.precision() + slack;
    let m = BigInt::from(BigUint::from(p).pow(w as u32));
    let p_int = BigInt::from(p);
    let n_int = BigInt::from(n.clone());
    let mut out = Vec::with_capacity(jmax);
    out.push(PadicElement::one(field));
    let mut e: i64 = 0;
    let mut u = BigInt::one();
    for j in 0..jmax.saturating_sub(1) {
        let mut factor = &n_int - BigInt::from(j as u64);
        if factor.is_zero() {
            for _ in j + 1..jmax {
                out.push(PadicElement::zero(field));
            }
            return out;
        }
        let mut fv = 0i64;
        while (&factor % &p_int).is_zero() {
            factor /= &p_int;
            fv += 1;
        }
        let mut den = BigInt::from(j as u64 + 1);
        let mut dv = 0i64;
        while (&den % &p_int).is_zero() {
            den /= &p_int;
            dv += 1;
        }
        let den_inv = modinv(&den, &m).unwrap();
        u = (u * factor % &m) * den_inv % &m;
        e += fv - dv;
        debug_assert!(e >= 0, "binomial coefficients are integral");
        let value = (BigInt::from(BigUint::from(p).pow(e.min(w) as u32)) * &u) % &m;
        out.push(PadicElement::from_bigint(field, &value));
    }
    out
}

/// `(1+X)^n - 1` truncated to `len` coefficients, via the binomial row.
pub fn one_plus_x_pow_minus_one(field: &PadicField, n: &BigUint, len: usize) -> SeriesGamma1 {
    let row = binomial_row(field, n, len);
    let mut s = SeriesGamma1::new(field.clone(), row, TailModel::Zero);
    let c0 = s.coeff(0).sub(&PadicElement::one(field)).unwrap();
    s.coeffs_mut()[0] = c0;
    let support_fits = BigUint::from(len as u64) > *n;
    if !support_fits {
        s = s.with_tail(TailModel::Growth {
            r: Rational::from_integer(0),
            c: Rational::from_integer(0),
        });
    }
    s
}

/// `Phi_m(1+X) = sum_{a<p} (1+X)^(a p^(m-1))` truncated to `len`
/// coefficients. Exact polynomial (tail Zero) when the support fits.
pub fn cyclotomic(field: &PadicField, m: u32, len: usize) -> SeriesGamma1 {
    assert!(m >= 1);
    let p = field.prime();
    let name = format!("phi:{m}");
    cached(field, len, &name, || {
        let mut coeffs = vec![PadicElement::zero(field); len];
        let pm1 = BigUint::from(p).pow(m - 1);
        for a in 0..p {
            let n = &pm1 * BigUint::from(a);
            let row = binomial_row(field, &n, len);
            for (j, c) in row.into_iter().enumerate() {
                coeffs[j] = coeffs[j].add(&c).map_err(SeriesError::Padic)?;
            }
        }
        let support = (p as usize - 1)
            .checked_mul((p as usize).checked_pow(m - 1).unwrap_or(usize::MAX))
            .unwrap_or(usize::MAX);
        let tail = if support < len {
            TailModel::Zero
        } else {
            TailModel::Growth {
                r: Rational::from_integer(0),
                c: Rational::from_integer(0),
            }
        };
        Ok(SeriesGamma1::new(field.clone(), coeffs, tail))
    })
    .expect("cyclotomic construction cannot fail")
}

/// `log_p(1+X) = sum (-1)^(k+1) X^k / k`, declared growth order 1.
pub fn log_series(field: &PadicField, len: usize) -> SeriesGamma1 {
    cached(field, len, "log", || {
        let mut coeffs = vec![PadicElement::zero(field); len];
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            *c = PadicElement::from_rational(field, &BigInt::from(sign), &BigInt::from(k as u64))
                .map_err(SeriesError::Padic)?;
        }
        Ok(SeriesGamma1::new(
            field.clone(),
            coeffs,
            TailModel::Growth {
                r: Rational::from_integer(1),
                c: Rational::from_integer(0),
            },
        ))
    })
    .expect("log series construction cannot fail")
}

/// `log_p(u)` for the fixed generator convention `u = 1 + p`.
pub fn log_p_u(field: &PadicField) -> PadicElement {
    let u = PadicElement::from_integer(field, 1 + field.prime() as i64);
    u.log_one_unit().expect("1 + p is a one-unit")
}

/// `ell_i = log_p(1+X) / log_p(u) - i`.
pub fn ell(field: &PadicField, i: i64, len: usize) -> Result<SeriesGamma1, SeriesError> {
    cached(field, len, &format!("ell:{i}"), || {
        let lg = log_series(field, len);
        let lu_inv = log_p_u(field).inverse().map_err(SeriesError::Padic)?;
        let mut s = lg.scale(&lu_inv)?;
        let c0 = s
            .coeff(0)
            .sub(&PadicElement::from_integer(field, i))
            .map_err(SeriesError::Padic)?;
        s.coeffs_mut()[0] = c0;
        Ok(s.with_tail(TailModel::Growth {
            r: Rational::from_integer(1),
            c: Rational::from_integer(-1),
        }))
    })
}

/// `ell_tilde_i = prod_{j=0}^{i-1} ell_j`; the empty product is 1.
pub fn ell_tilde(field: &PadicField, i: u32, len: usize) -> Result<SeriesGamma1, SeriesError> {
    cached(field, len, &format!("elltilde:{i}"), || {
        let mut acc = SeriesGamma1::one(field, len);
        for j in 0..i {
            acc = acc.mul(&ell(field, j as i64, len)?)?;
        }
        Ok(acc)
    })
}

/// The certified floor of what every dropped factor `Phi_k/p`, `k > last`,
/// can contribute to a product whose stored coefficients have valuation at
/// least `floor_v`: `(last + 1) - 2 - max v_p(j) + floor_v`.
fn dropped_factor_bound(last: u32, len: usize, floor_v: Rational, p: u64) -> Rational {
    let max_vp = ilog_p(len.max(1) as u64, p);
    Rational::from_integer(last as i64 + 1 - 2 - max_vp) + floor_v
}

/// The cyclotomic level the automatic cutoff rule selects for half
/// products at this field and truncation.
pub fn auto_cutoff_level(field: &PadicField, len: usize) -> u32 {
    let p = field.prime();
    let n = field.precision();
    let floor_guess = -Rational::from_integer((ilog_p(len as u64, p) + 3) / 2 + 1);
    let mut k = ilog_p(len as u64, p) as u32 + 2;
    while dropped_factor_bound(k, len, floor_guess, p) < Rational::from_integer(n + 1) {
        k += 1;
    }
    k
}

/// `prod_{k in class} Phi_k(1+X)/p` to the given cutoff (None = automatic).
/// The returned series carries the proven growth declaration of the full
/// infinite product: order 1/2, intercept 0 (plus) or -1/2 (minus).
pub fn half_product(
    field: &PadicField,
    sign: HalfLogSign,
    len: usize,
    cutoff: Option<u32>,
) -> Result<SeriesGamma1, SeriesError> {
    let name = format!("halfprod:{}:{:?}", sign.label(), cutoff);
    cached(field, len, &name, || {
        let p = field.prime();
        let n = field.precision();
        let p_inv = PadicElement::p_power(field, -1);
        let floor_guess = -Rational::from_integer((ilog_p(len as u64, p) + 3) / 2 + 1);
        let auto_last = {
            let mut k = ilog_p(len as u64, p) as u32 + 2;
            while dropped_factor_bound(k, len, floor_guess, p) < Rational::from_integer(n + 1) {
                k += 1;
            }
            k
        };
        let last = cutoff.unwrap_or(auto_last);
        let mut acc = SeriesGamma1::one(field, len);
        for k in 1..=last {
            if !sign.contains(k) {
                continue;
            }
            let factor = cyclotomic(field, k, len).scale(&p_inv)?;
            acc = acc.mul(&factor)?;
        }
        let bound = dropped_factor_bound(last, len, acc.valuation_floor(), p)
            .floor()
            .to_integer();
        if bound < n {
            if cutoff.is_some() {
                return Err(SeriesError::CutoffInsufficient(bound, n));
            }
            let mut k = last + 1;
            loop {
                if sign.contains(k) {
                    let factor = cyclotomic(field, k, len).scale(&p_inv)?;
                    acc = acc.mul(&factor)?;
                }
                if dropped_factor_bound(k, len, acc.valuation_floor(), p)
                    >= Rational::from_integer(n)
                {
                    break;
                }
                k += 1;
            }
        }
        let c = match sign {
            HalfLogSign::Plus => Rational::from_integer(0),
            HalfLogSign::Minus => Rational::new(-1, 2),
        };
        Ok(acc.with_tail(TailModel::Growth {
            r: Rational::new(1, 2),
            c,
        }))
    })
}

/// Pollack half-logarithm `log^{sign}_{p,m}`: the product over
/// `j = 0..m-1` of `(1/p)` times the `-j`-twist of the matching
/// half-product. Declared growth order `m/2`.
pub fn pollack_log(
    field: &PadicField,
    sign: HalfLogSign,
    m: u32,
    len: usize,
    cutoff: Option<u32>,
) -> Result<SeriesGamma1, SeriesError> {
    assert!(m >= 1);
    let name = format!("pollack:{}:{}:{:?}", sign.label(), m, cutoff);
    cached(field, len, &name, || {
        let p_inv = PadicElement::p_power(field, -1);
        let base = half_product(field, sign, len, cutoff)?;
        let mut acc = SeriesGamma1::one(field, len);
        for j in 0..m {
            let factor = base.twist(-(j as i64))?.scale(&p_inv)?;
            acc = acc.mul(&factor)?;
        }
        Ok(acc)
    })
}

/// `v(u^i - 1) = 1 + v_p(i)`; exposed for callers reasoning about twists.
pub fn twist_point_valuation(i: i64, p: u64) -> Rational {
    if i == 0 {
        Rational::from_integer(i64::MAX / 2)
    } else {
        Rational::from_integer(1 + vp_i64(i, p))
    }
}
