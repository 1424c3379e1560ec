use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::newton::Rational;

use super::field::ExtensionStep;
use super::{PadicError, PadicField};

/// An element of a [`PadicField`] at tracked absolute precision.
///
/// Value is `p^(-shift) * sum_b coeffs[b] * basis_b` with every coordinate
/// reduced modulo `p^(aprec + shift)`. Two elements compare equal when they
/// agree componentwise modulo `p^a` at the smaller of the two absolute
/// precisions.
#[derive(Debug, Clone)]
pub struct PadicElement {
    field: PadicField,
    shift: i64,
    coeffs: Vec<BigUint>,
    aprec: i64,
}

fn vp_biguint(x: &BigUint, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p_big = BigUint::from(p);
    let mut v = 0i64;
    let mut cur = x.clone();
    while (&cur % &p_big).is_zero() {
        cur /= &p_big;
        v += 1;
    }
    Some(v)
}

fn pow_p(p: u64, k: i64) -> BigUint {
    debug_assert!(k >= 0, "negative p-power exponent {k}");
    BigUint::from(p).pow(k as u32)
}

/// Tower multiplication of flat coordinate vectors, reduced mod `m`.
/// Reduction by each monic integral step polynomial only needs scalar
/// multiplications because the coefficients are rational integers.
pub(crate) fn tower_mul(
    steps: &[ExtensionStep],
    a: &[BigUint],
    b: &[BigUint],
    m: &BigUint,
) -> Vec<BigUint> {
    mul_rec(steps, a, b, m)
}

fn mul_rec(steps: &[ExtensionStep], a: &[BigUint], b: &[BigUint], m: &BigUint) -> Vec<BigUint> {
    if steps.is_empty() {
        return vec![(&a[0] * &b[0]) % m];
    }
    let step = steps.last().unwrap();
    let sub = &steps[..steps.len() - 1];
    let d = step.degree;
    let d_sub = a.len() / d;
    let mut conv: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); d_sub]; 2 * d - 1];
    for i in 0..d {
        let ai = &a[i * d_sub..(i + 1) * d_sub];
        if ai.iter().all(|c| c.is_zero()) {
            continue;
        }
        for j in 0..d {
            let bj = &b[j * d_sub..(j + 1) * d_sub];
            if bj.iter().all(|c| c.is_zero()) {
                continue;
            }
            let prod = mul_rec(sub, ai, bj, m);
            for (t, v) in prod.into_iter().enumerate() {
                let cell = &mut conv[i + j][t];
                *cell = (&*cell + v) % m;
            }
        }
    }
    let m_int = BigInt::from(m.clone());
    let neg_coeffs: Vec<BigUint> = step.minpoly[..d]
        .iter()
        .map(|c| (-(c.clone())).mod_floor(&m_int).to_biguint().unwrap())
        .collect();
    for t in (d..2 * d - 1).rev() {
        let top = std::mem::take(&mut conv[t]);
        if top.iter().all(|c| c.is_zero()) {
            continue;
        }
        for s in 0..d {
            if neg_coeffs[s].is_zero() {
                continue;
            }
            for (idx, c) in top.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let cell = &mut conv[t - d + s][idx];
                *cell = (&*cell + c * &neg_coeffs[s]) % m;
            }
        }
    }
    let mut out = Vec::with_capacity(d * d_sub);
    for chunk in conv.into_iter().take(d) {
        out.extend(chunk);
    }
    out
}

impl PadicElement {
    fn new_reduced(field: PadicField, shift: i64, mut coeffs: Vec<BigUint>, aprec: i64) -> PadicElement {
        let aprec = aprec.min(field.precision());
        if aprec + shift < 0 {
            // nothing is representable below scale p^aprec
            return Self::unknown_below(&field, aprec);
        }
        let m = pow_p(field.prime(), aprec + shift);
        for c in &mut coeffs {
            *c %= &m;
        }
        PadicElement { field, shift, coeffs, aprec }
    }

    pub fn field(&self) -> &PadicField {
        &self.field
    }
    pub fn aprec(&self) -> i64 {
        self.aprec
    }
    pub fn shift(&self) -> i64 {
        self.shift
    }
    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub(crate) fn from_raw(
        field: &PadicField,
        shift: i64,
        coeffs: Vec<BigUint>,
        aprec: i64,
    ) -> PadicElement {
        Self::new_reduced(field.clone(), shift, coeffs, aprec)
    }

    pub fn zero(field: &PadicField) -> PadicElement {
        PadicElement {
            field: field.clone(),
            shift: 0,
            coeffs: vec![BigUint::zero(); field.degree()],
            aprec: field.precision(),
        }
    }

    pub fn one(field: &PadicField) -> PadicElement {
        Self::from_integer(field, 1)
    }

    pub fn from_integer(field: &PadicField, n: i64) -> PadicElement {
        Self::from_bigint(field, &BigInt::from(n))
    }

    pub fn from_bigint(field: &PadicField, n: &BigInt) -> PadicElement {
        let aprec = field.precision();
        let m = BigInt::from(pow_p(field.prime(), aprec));
        let r = n.mod_floor(&m).to_biguint().unwrap();
        let mut coeffs = vec![BigUint::zero(); field.degree()];
        coeffs[0] = r;
        PadicElement { field: field.clone(), shift: 0, coeffs, aprec }
    }

    /// `num/den` as an element of the base line of the field. p-powers in
    /// numerator and denominator are folded into the representation shift;
    /// the remaining unit denominator is inverted modulo the working
    /// modulus.
    pub fn from_rational(field: &PadicField, num: &BigInt, den: &BigInt) -> Result<PadicElement, PadicError> {
        if den.is_zero() {
            return Err(PadicError::DivisionByZeroAtPrecision);
        }
        let p = field.prime();
        let p_big = BigInt::from(p);
        let mut num = num.clone();
        let mut den = den.clone();
        let mut shift: i64 = 0;
        while !num.is_zero() && (&num % &p_big).is_zero() {
            num /= &p_big;
            shift -= 1;
        }
        while (&den % &p_big).is_zero() {
            den /= &p_big;
            shift += 1;
        }
        let aprec = field.precision();
        let rep_shift = shift.max(0);
        let k = aprec + rep_shift;
        let m = BigInt::from(pow_p(p, k));
        let den_inv = modinv(&den.mod_floor(&m), &m).ok_or(PadicError::DivisionByZeroAtPrecision)?;
        let mut val = (num * den_inv).mod_floor(&m);
        if shift < 0 {
            val = (val * BigInt::from(pow_p(p, -shift))).mod_floor(&m);
        }
        let mut coeffs = vec![BigUint::zero(); field.degree()];
        coeffs[0] = val.to_biguint().unwrap();
        Ok(Self::new_reduced(field.clone(), rep_shift, coeffs, aprec))
    }

    /// Element from power-basis coordinates given as exact rationals
    /// `(numerator, denominator)`.
    pub fn from_rational_coords(
        field: &PadicField,
        coords: &[(BigInt, BigInt)],
    ) -> Result<PadicElement, PadicError> {
        if coords.len() > field.degree() {
            return Err(PadicError::FieldMismatch);
        }
        let mut acc = Self::zero(field);
        for (b, (n, d)) in coords.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            let scalar = Self::from_rational(field, n, d)?;
            let basis = Self::basis_vector(field, b);
            acc = acc.add(&scalar.mul(&basis)?)?;
        }
        Ok(acc)
    }

    pub fn basis_vector(field: &PadicField, b: usize) -> PadicElement {
        let mut coeffs = vec![BigUint::zero(); field.degree()];
        coeffs[b] = BigUint::one();
        PadicElement { field: field.clone(), shift: 0, coeffs, aprec: field.precision() }
    }

    /// `p^k` for any integer `k`.
    pub fn p_power(field: &PadicField, k: i64) -> PadicElement {
        let mut coeffs = vec![BigUint::zero(); field.degree()];
        if k >= 0 {
            coeffs[0] = pow_p(field.prime(), k);
            Self::new_reduced(field.clone(), 0, coeffs, field.precision())
        } else {
            coeffs[0] = BigUint::one();
            Self::new_reduced(field.clone(), -k, coeffs, field.precision())
        }
    }

    fn modulus_exp(&self) -> i64 {
        self.aprec + self.shift
    }

    fn check_same_field(&self, other: &PadicElement) -> Result<(), PadicError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(PadicError::FieldMismatch)
        }
    }

    /// Structural lower bound for the valuation: the minimum over
    /// coordinates of `v_p(coeff) - shift + v(basis)`, with coordinates
    /// indistinguishable from zero contributing their certified bound.
    /// Always a sound lower bound; exact on structurally exact towers.
    pub fn val_lb(&self) -> Rational {
        let p = self.field.prime();
        let k = self.modulus_exp();
        let mut best: Option<Rational> = None;
        for (b, c) in self.coeffs.iter().enumerate() {
            let coord_v = vp_biguint(c, p).unwrap_or(k);
            let bound = Rational::from_integer(coord_v - self.shift) + self.field.basis_valuations()[b];
            best = Some(match best {
                None => bound,
                Some(x) if bound < x => bound,
                Some(x) => x,
            });
        }
        best.unwrap_or_else(|| Rational::from_integer(self.aprec))
    }

    /// Exact valuation. On towers where the power-basis formula is exact
    /// this reads the single slope of the Newton polygon directly from the
    /// coordinates; otherwise it computes the norm (determinant of the
    /// multiplication matrix) by valuation-pivoted elimination — all
    /// conjugates share one slope, so `v(x) = v_p(N(x)) / degree`.
    pub fn valuation(&self) -> Result<Rational, PadicError> {
        if self.field.structural_exact() {
            let p = self.field.prime();
            let k = self.modulus_exp();
            let mut best: Option<Rational> = None;
            for (b, c) in self.coeffs.iter().enumerate() {
                if let Some(v) = vp_biguint(c, p) {
                    if v < k {
                        let coord = Rational::from_integer(v - self.shift)
                            + self.field.basis_valuations()[b];
                        best = Some(match best {
                            None => coord,
                            Some(x) if coord < x => coord,
                            Some(x) => x,
                        });
                    }
                }
            }
            match best {
                Some(v) if v < Rational::from_integer(self.aprec) => Ok(v),
                _ => Err(PadicError::ZeroValuation(self.aprec)),
            }
        } else {
            let d = self.field.degree() as i64;
            let sum_t = self.norm_valuation_sum()?.ok_or(PadicError::ZeroValuation(self.aprec))?;
            let v = Rational::new(sum_t, d) - Rational::from_integer(self.shift);
            if v < Rational::from_integer(self.aprec) {
                Ok(v)
            } else {
                Err(PadicError::ZeroValuation(self.aprec))
            }
        }
    }

    fn mul_matrix(&self, m: &BigUint) -> Vec<Vec<BigUint>> {
        let d = self.field.degree();
        let mut mat = Vec::with_capacity(d);
        for b in 0..d {
            let mut unit = vec![BigUint::zero(); d];
            unit[b] = BigUint::one();
            mat.push(mul_rec(self.field.steps(), &self.coeffs, &unit, m));
        }
        mat
    }

    /// `v_p` of the norm of the integral part, or `None` when it cannot be
    /// certified at the stored precision.
    fn norm_valuation_sum(&self) -> Result<Option<i64>, PadicError> {
        let d = self.field.degree();
        let p = self.field.prime();
        let w = self.modulus_exp();
        if w <= 0 {
            return Ok(None);
        }
        let m = pow_p(p, w);
        let mut mat = self.mul_matrix(&m);
        let mut used = vec![false; d];
        let mut total_t: i64 = 0;
        for col in 0..d {
            let mut pivot: Option<(usize, i64)> = None;
            for (r, &u) in used.iter().enumerate() {
                if u {
                    continue;
                }
                if let Some(v) = vp_biguint(&mat[col][r], p) {
                    if pivot.map_or(true, |(_, pv)| v < pv) {
                        pivot = Some((r, v));
                    }
                }
            }
            let (pr, t) = match pivot {
                Some(x) => x,
                None => return Ok(None),
            };
            total_t += t;
            if total_t >= w {
                return Ok(None);
            }
            used[pr] = true;
            let p_t = pow_p(p, t);
            let unit = &mat[col][pr] / &p_t;
            let unit_inv = modinv(&BigInt::from(unit), &BigInt::from(m.clone()))
                .ok_or(PadicError::DivisionByZeroAtPrecision)?
                .to_biguint()
                .unwrap();
            for r in 0..d {
                if r == pr || used[r] || mat[col][r].is_zero() {
                    continue;
                }
                let wq = &mat[col][r] / &p_t;
                let factor = (&wq * &unit_inv) % &m;
                for c2 in mat.iter_mut().skip(col) {
                    let sub = (&factor * &c2[pr]) % &m;
                    let cur = &c2[r];
                    c2[r] = if *cur >= sub { cur - sub } else { &m + cur - sub };
                }
            }
        }
        Ok(Some(total_t))
    }

    /// Componentwise zero test modulo `p^min(t, aprec)`.
    pub fn is_zero_at(&self, t: i64) -> bool {
        let t = t.min(self.aprec);
        if t + self.shift <= 0 {
            return true;
        }
        let m = pow_p(self.field.prime(), t + self.shift);
        self.coeffs.iter().all(|c| (c % &m).is_zero())
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.is_zero_at(self.aprec)
    }

    pub fn eq_at(&self, other: &PadicElement, t: i64) -> bool {
        match self.sub(other) {
            Ok(d) => d.is_zero_at(t),
            Err(_) => false,
        }
    }

    fn align(&self, other: &PadicElement) -> (i64, Vec<BigUint>, Vec<BigUint>) {
        let s = self.shift.max(other.shift);
        let p = self.field.prime();
        let scale_a = pow_p(p, s - self.shift);
        let scale_b = pow_p(p, s - other.shift);
        let a: Vec<BigUint> = self.coeffs.iter().map(|c| c * &scale_a).collect();
        let b: Vec<BigUint> = other.coeffs.iter().map(|c| c * &scale_b).collect();
        (s, a, b)
    }

    pub fn add(&self, other: &PadicElement) -> Result<PadicElement, PadicError> {
        self.check_same_field(other)?;
        let aprec = self.aprec.min(other.aprec);
        let (s, a, b) = self.align(other);
        let coeffs = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self::new_reduced(self.field.clone(), s, coeffs, aprec))
    }

    pub fn neg(&self) -> PadicElement {
        let m = pow_p(self.field.prime(), self.modulus_exp());
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero() { BigUint::zero() } else { &m - c })
            .collect();
        PadicElement {
            field: self.field.clone(),
            shift: self.shift,
            coeffs,
            aprec: self.aprec,
        }
    }

    pub fn sub(&self, other: &PadicElement) -> Result<PadicElement, PadicError> {
        self.add(&other.neg())
    }

    /// Product, with `aprec = min(aprec(x) + floor v(y), aprec(y) + floor v(x))`
    /// capped at the field precision.
    pub fn mul(&self, other: &PadicElement) -> Result<PadicElement, PadicError> {
        self.check_same_field(other)?;
        let va = self.val_lb();
        let vb = other.val_lb();
        let aprec = (Rational::from_integer(self.aprec) + vb)
            .min(Rational::from_integer(other.aprec) + va)
            .floor()
            .to_integer();
        self.mul_claimed(other, aprec)
    }

    /// Product at a caller-computed precision claim (callers that batch
    /// valuation bounds avoid recomputing them per product).
    pub(crate) fn mul_claimed(
        &self,
        other: &PadicElement,
        aprec: i64,
    ) -> Result<PadicElement, PadicError> {
        let aprec = aprec.min(self.field.precision());
        let shift = self.shift + other.shift;
        let k = aprec + shift;
        if k <= 0 {
            return Err(PadicError::PrecisionUnderflow(aprec));
        }
        let m = pow_p(self.field.prime(), k);
        let coeffs = if self.field.is_base() {
            vec![(&self.coeffs[0] * &other.coeffs[0]) % &m]
        } else {
            mul_rec(self.field.steps(), &self.coeffs, &other.coeffs, &m)
        };
        Ok(PadicElement { field: self.field.clone(), shift, coeffs, aprec })
    }

    pub fn mul_i64(&self, n: i64) -> PadicElement {
        let m = pow_p(self.field.prime(), self.modulus_exp());
        let n_red = BigInt::from(n).mod_floor(&BigInt::from(m.clone())).to_biguint().unwrap();
        let coeffs = self.coeffs.iter().map(|c| (c * &n_red) % &m).collect();
        PadicElement {
            field: self.field.clone(),
            shift: self.shift,
            coeffs,
            aprec: self.aprec,
        }
    }

    /// Multiplicative inverse by valuation-pivoted Gauss-Jordan elimination
    /// on the multiplication matrix. The result precision follows the
    /// documented rule `aprec(1/y) = aprec(y) - 2 floor(v(y))`, further
    /// limited by the digits the elimination certifies.
    pub fn inverse(&self) -> Result<PadicElement, PadicError> {
        let v = self.valuation().map_err(|_| PadicError::DivisionByZeroAtPrecision)?;
        let d = self.field.degree();
        let p = self.field.prime();
        let w = self.modulus_exp();
        if w <= 0 {
            return Err(PadicError::DivisionByZeroAtPrecision);
        }
        let m = pow_p(p, w);
        let mut mat = self.mul_matrix(&m);
        let mut rhs = vec![BigUint::zero(); d];
        rhs[0] = BigUint::one();
        let mut col_of_row: Vec<Option<usize>> = vec![None; d];
        let mut t_of_col: Vec<i64> = vec![0; d];
        let mut used = vec![false; d];
        let mut sum_t: i64 = 0;
        for col in 0..d {
            let mut pivot: Option<(usize, i64)> = None;
            for (r, &u) in used.iter().enumerate() {
                if u {
                    continue;
                }
                if let Some(vv) = vp_biguint(&mat[col][r], p) {
                    if pivot.map_or(true, |(_, pv)| vv < pv) {
                        pivot = Some((r, vv));
                    }
                }
            }
            let (pr, t) = pivot.ok_or(PadicError::DivisionByZeroAtPrecision)?;
            used[pr] = true;
            col_of_row[pr] = Some(col);
            t_of_col[col] = t;
            sum_t += t;
            let p_t = pow_p(p, t);
            let unit = &mat[col][pr] / &p_t;
            let unit_inv = modinv(&BigInt::from(unit), &BigInt::from(m.clone()))
                .ok_or(PadicError::DivisionByZeroAtPrecision)?
                .to_biguint()
                .unwrap();
            for r in 0..d {
                if r == pr || mat[col][r].is_zero() {
                    continue;
                }
                let wq = &mat[col][r] / &p_t;
                let factor = (&wq * &unit_inv) % &m;
                for c2 in mat.iter_mut() {
                    if c2[pr].is_zero() {
                        continue;
                    }
                    let sub = (&factor * &c2[pr]) % &m;
                    let cur = &c2[r];
                    c2[r] = if *cur >= sub { cur - sub } else { &m + cur - sub };
                }
                let subr = (&factor * &rhs[pr]) % &m;
                let cur = &rhs[r];
                rhs[r] = if *cur >= subr { cur - subr } else { &m + cur - subr };
            }
        }
        let t_max = *t_of_col.iter().max().unwrap_or(&0);
        let out_shift = t_max - self.shift;
        let mut out = vec![BigUint::zero(); d];
        for r in 0..d {
            let c = col_of_row[r].unwrap();
            let t = t_of_col[c];
            let p_t = pow_p(p, t);
            let unit = &mat[c][r] / &p_t;
            let unit_inv = modinv(&BigInt::from(unit), &BigInt::from(m.clone()))
                .ok_or(PadicError::DivisionByZeroAtPrecision)?
                .to_biguint()
                .unwrap();
            out[c] = (&rhs[r] * &unit_inv) % &m * pow_p(p, t_max - t);
        }
        let cert = w + self.shift - sum_t;
        let rule = self.aprec - 2 * v.floor().to_integer();
        let aprec = cert.min(rule).min(self.field.precision());
        if aprec <= 0 {
            return Err(PadicError::PrecisionUnderflow(aprec));
        }
        if aprec + out_shift <= 0 {
            return Err(PadicError::PrecisionUnderflow(aprec));
        }
        Ok(Self::new_reduced(self.field.clone(), out_shift, out, aprec))
    }

    pub fn div(&self, other: &PadicElement) -> Result<PadicElement, PadicError> {
        self.check_same_field(other)?;
        let inv = other.inverse()?;
        self.mul(&inv)
    }

    pub fn pow_i64(&self, e: i64) -> Result<PadicElement, PadicError> {
        if e == 0 {
            return Ok(Self::one(&self.field));
        }
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc: Option<PadicElement> = None;
        let mut sq = base;
        let mut exp = e.unsigned_abs();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq)?,
                });
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.mul(&sq.clone())?;
            }
        }
        Ok(acc.unwrap())
    }

    /// Lower the certified absolute precision to `a` (dropping digits).
    /// `a` may be negative: the result then carries no digits at all and
    /// only records that the element is `O(p^a)`.
    pub fn reduce_precision(&self, a: i64) -> PadicElement {
        if a >= self.aprec {
            return self.clone();
        }
        if a + self.shift < 0 {
            return Self::unknown_below(&self.field, a);
        }
        Self::new_reduced(self.field.clone(), self.shift, self.coeffs.clone(), a)
    }

    /// The element `0 + O(p^a)`: nothing is known below scale `p^a`.
    pub fn unknown_below(field: &PadicField, a: i64) -> PadicElement {
        PadicElement {
            field: field.clone(),
            shift: (-a).max(0),
            coeffs: vec![BigUint::zero(); field.degree()],
            aprec: a,
        }
    }

    /// Raise the claimed precision without adding information; the caller
    /// must certify the claim independently (used by evaluation, which
    /// performs its error analysis analytically rather than through the
    /// per-operation chain).
    pub(crate) fn assume_precision(&self, a: i64) -> PadicElement {
        if a <= self.aprec {
            return self.reduce_precision(a);
        }
        Self::new_reduced(self.field.clone(), self.shift, self.coeffs.clone(), a)
    }

    /// The Teichmuller lift: the unique `(p-1)`-th root of unity congruent
    /// to `a` mod p, computed by iterating the p-power map to its fixed
    /// point at working precision (one new digit per iteration).
    pub fn teichmuller(field: &PadicField, a: u64) -> Result<PadicElement, PadicError> {
        let p = field.prime();
        if a % p == 0 {
            return Err(PadicError::ZeroValuation(field.precision()));
        }
        let n = field.precision();
        let m = pow_p(p, n);
        let mut x = BigUint::from(a % p);
        for _ in 0..(n as usize + 2) {
            x = x.modpow(&BigUint::from(p), &m);
        }
        let mut coeffs = vec![BigUint::zero(); field.degree()];
        coeffs[0] = x;
        Ok(PadicElement { field: field.clone(), shift: 0, coeffs, aprec: n })
    }

    /// `log_p(x)` for a one-unit `x`: the alternating series in `x - 1`
    /// truncated at the first `k` beyond the series minimum with
    /// `k v(x-1) - log_p k >= N`, which bounds every dropped term.
    pub fn log_one_unit(&self) -> Result<PadicElement, PadicError> {
        let one = Self::one(&self.field);
        let y = self.sub(&one)?;
        if y.is_zero_at_precision() {
            return Ok(Self::zero(&self.field));
        }
        let t = y.valuation().map_err(|_| PadicError::NotOneUnit)?;
        if t <= Rational::from_integer(0) {
            return Err(PadicError::NotOneUnit);
        }
        let n = self.field.precision();
        let p = self.field.prime();
        let two = Rational::from_integer(2);
        let mut k_max = 1i64;
        loop {
            let kt = Rational::from_integer(k_max) * t;
            let bound = kt - Rational::from_integer(ilog_p(k_max as u64, p));
            if kt >= two && bound >= Rational::from_integer(n) {
                break;
            }
            k_max += 1;
            if k_max > 200_000 {
                return Err(PadicError::NotOneUnit);
            }
        }
        let mut acc = Self::zero(&self.field);
        let mut power = one;
        for k in 1..=k_max {
            power = power.mul(&y)?;
            let k_el = Self::from_integer(&self.field, k);
            let term = power.div(&k_el)?;
            acc = if k % 2 == 1 { acc.add(&term)? } else { acc.sub(&term)? };
        }
        Ok(acc)
    }

    /// Map into an extension tower whose steps extend this field's steps.
    /// The power basis of the subfield is a prefix of the tower basis, so
    /// coordinates embed by zero padding.
    pub fn lift_to(&self, ext: &PadicField) -> Result<PadicElement, PadicError> {
        if ext == &self.field {
            return Ok(self.clone());
        }
        let own = self.field.steps();
        let theirs = ext.steps();
        let compatible = ext.prime() == self.field.prime()
            && ext.precision() == self.field.precision()
            && theirs.len() >= own.len()
            && theirs[..own.len()] == *own;
        if !compatible {
            return Err(PadicError::FieldMismatch);
        }
        let mut coeffs = vec![BigUint::zero(); ext.degree()];
        coeffs[..self.coeffs.len()].clone_from_slice(&self.coeffs);
        Ok(PadicElement {
            field: ext.clone(),
            shift: self.shift,
            coeffs,
            aprec: self.aprec,
        })
    }

    /// Canonical form: minimal non-negative shift with reduced coordinates.
    pub fn canonicalize(&self) -> PadicElement {
        let p = self.field.prime();
        if self.shift < 0 {
            let p_s = pow_p(p, -self.shift);
            let coeffs: Vec<BigUint> = self.coeffs.iter().map(|c| c * &p_s).collect();
            return Self::new_reduced(self.field.clone(), 0, coeffs, self.aprec);
        }
        if self.coeffs.iter().all(|c| c.is_zero()) {
            return PadicElement {
                field: self.field.clone(),
                shift: (-self.aprec).max(0),
                coeffs: vec![BigUint::zero(); self.field.degree()],
                aprec: self.aprec,
            };
        }
        let min_v = self
            .coeffs
            .iter()
            .filter_map(|c| vp_biguint(c, p))
            .min()
            .unwrap_or(0);
        let strip = min_v.min(self.shift);
        if strip == 0 {
            return self.clone();
        }
        let p_s = pow_p(p, strip);
        let coeffs: Vec<BigUint> = self.coeffs.iter().map(|c| c / &p_s).collect();
        PadicElement {
            field: self.field.clone(),
            shift: self.shift - strip,
            coeffs,
            aprec: self.aprec,
        }
    }
}

impl PartialEq for PadicElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.eq_at(other, self.aprec.min(other.aprec))
    }
}

pub(crate) fn ilog_p(mut k: u64, p: u64) -> i64 {
    let mut l = 0i64;
    while k >= p {
        k /= p;
        l += 1;
    }
    l
}

/// `v_p(k)` for a nonzero integer.
pub(crate) fn vp_i64(k: i64, p: u64) -> i64 {
    debug_assert!(k != 0);
    let mut k = k.unsigned_abs();
    let mut v = 0i64;
    while k % p == 0 {
        k /= p;
        v += 1;
    }
    v
}

/// Modular inverse via extended gcd; `None` when not coprime.
pub(crate) fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> PadicField {
        PadicField::make(5, 20, None).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn add_in_q5() {
        let f = q5();
        let two = PadicElement::from_integer(&f, 2);
        let three = PadicElement::from_integer(&f, 3);
        let five = two.add(&three).unwrap();
        assert_eq!(five.valuation().unwrap(), r(1, 1));
        assert_eq!(five, PadicElement::from_integer(&f, 5));
    }

    #[test]
    fn y_squared_is_five() {
        let f = PadicField::make(5, 20, Some(&[-5, 0, 1])).unwrap();
        let y = PadicElement::basis_vector(&f, 1);
        let y2 = y.mul(&y).unwrap();
        assert_eq!(y2, PadicElement::from_integer(&f, 5));
        assert_eq!(y2.valuation().unwrap(), r(1, 1));
        assert_eq!(y.valuation().unwrap(), r(1, 2));
    }

    #[test]
    fn inverse_of_two_mod_25() {
        // modular inverse oracle: 2 * 13 = 26 = 1 mod 25
        let f = q5();
        let two = PadicElement::from_integer(&f, 2);
        let half = two.inverse().unwrap();
        let thirteen = PadicElement::from_integer(&f, 13);
        assert!(half.eq_at(&thirteen, 2));
        assert_eq!(half.mul(&two).unwrap(), PadicElement::one(&f));
    }

    #[test]
    fn valuation_examples() {
        let f = q5();
        let p = PadicElement::from_integer(&f, 5);
        assert_eq!(p.valuation().unwrap(), r(1, 1));
        let ram = PadicField::make(5, 20, Some(&[-5, 0, 1])).unwrap();
        let y = PadicElement::basis_vector(&ram, 1);
        let p2y = PadicElement::from_integer(&ram, 25).mul(&y).unwrap();
        assert_eq!(p2y.valuation().unwrap(), r(5, 2));
    }

    #[test]
    fn zero_valuation_error() {
        let f = q5();
        let z = PadicElement::zero(&f);
        assert_eq!(z.valuation().unwrap_err(), PadicError::ZeroValuation(20));
    }

    #[test]
    fn division_round_trip() {
        let f = q5();
        let x = PadicElement::from_integer(&f, 1234);
        let y = PadicElement::from_integer(&f, 76);
        let prod = x.mul(&y).unwrap();
        let back = prod.div(&y).unwrap();
        assert!(back.eq_at(&x, back.aprec()));
    }

    #[test]
    fn division_by_zero() {
        let f = q5();
        let x = PadicElement::from_integer(&f, 3);
        let z = PadicElement::zero(&f);
        assert_eq!(x.div(&z).unwrap_err(), PadicError::DivisionByZeroAtPrecision);
    }

    #[test]
    fn rational_with_negative_valuation() {
        let f = q5();
        let x = PadicElement::from_rational(&f, &BigInt::from(1), &BigInt::from(5)).unwrap();
        assert_eq!(x.valuation().unwrap(), r(-1, 1));
        let five = PadicElement::from_integer(&f, 5);
        assert_eq!(x.mul(&five).unwrap(), PadicElement::one(&f));
    }

    #[test]
    fn teichmuller_examples() {
        let f = q5();
        let t1 = PadicElement::teichmuller(&f, 1).unwrap();
        assert_eq!(t1, PadicElement::one(&f));
        // Hensel-lift oracle: 7^4 = 2401 = 1 + 96*25 => teich(2) = 7 mod 25
        let t2 = PadicElement::teichmuller(&f, 2).unwrap();
        assert!(t2.eq_at(&PadicElement::from_integer(&f, 7), 2));
        let t4 = PadicElement::teichmuller(&f, 4).unwrap();
        assert_eq!(t4, PadicElement::from_integer(&f, -1));
    }

    #[test]
    fn teichmuller_order_divides_p_minus_one() {
        for p in [3u64, 5, 7] {
            let f = PadicField::make(p, 12, None).unwrap();
            for a in 1..p {
                let t = PadicElement::teichmuller(&f, a).unwrap();
                let tp = t.pow_i64(p as i64 - 1).unwrap();
                assert_eq!(tp, PadicElement::one(&f), "p={p} a={a}");
            }
        }
    }

    #[test]
    fn log_one_unit_examples() {
        let f = q5();
        let one = PadicElement::one(&f);
        assert!(one.log_one_unit().unwrap().is_zero_at_precision());
        let u = PadicElement::from_integer(&f, 6); // 1 + p
        let lu = u.log_one_unit().unwrap();
        // direct series summation oracle: leading term p dominates since
        // v(p^k / k) > 1 for k >= 2 at odd p
        assert_eq!(lu.valuation().unwrap(), r(1, 1));
        let u2 = u.mul(&u).unwrap();
        let lu2 = u2.log_one_unit().unwrap();
        let twice = lu.mul_i64(2);
        assert!(lu2.eq_at(&twice, lu2.aprec().min(twice.aprec())));
    }

    #[test]
    fn log_direct_series_oracle() {
        // independent summation with plain modular arithmetic at 8 digits
        let f = PadicField::make(5, 8, None).unwrap();
        let u = PadicElement::from_integer(&f, 6);
        let lu = u.log_one_unit().unwrap();
        let m = BigInt::from(5u64.pow(8));
        let mut acc = BigInt::zero();
        // sum_{k=1}^{40} (-1)^(k+1) 5^k / k; k with v_5(k)>0 handled exactly
        for k in 1..=40i64 {
            let mut num = BigInt::from(5).pow(k as u32);
            let mut kk = BigInt::from(k);
            while (&kk % BigInt::from(5)).is_zero() {
                kk /= 5;
                num /= 5;
            }
            let inv = modinv(&kk, &m).unwrap();
            let term = (num * inv).mod_floor(&m);
            acc = if k % 2 == 1 { acc + term } else { acc - term };
        }
        let acc = acc.mod_floor(&m);
        let expect = PadicElement::from_bigint(&f, &acc);
        assert!(lu.eq_at(&expect, 8));
    }

    #[test]
    fn log_not_one_unit() {
        let f = q5();
        let x = PadicElement::from_integer(&f, 3);
        assert_eq!(x.log_one_unit().unwrap_err(), PadicError::NotOneUnit);
    }

    #[test]
    fn unramified_arithmetic() {
        let f = PadicField::make(3, 15, Some(&[-1, -1, 1])).unwrap();
        let z = PadicElement::basis_vector(&f, 1);
        let z2 = z.mul(&z).unwrap();
        let expect = z.add(&PadicElement::one(&f)).unwrap();
        assert_eq!(z2, expect);
        assert_eq!(z.valuation().unwrap(), r(0, 1));
        let inv = z.inverse().unwrap();
        assert_eq!(inv.mul(&z).unwrap(), PadicElement::one(&f));
    }

    #[test]
    fn mixed_tower_norm_valuation() {
        // Q_3(sqrt3, zeta_3): v(sqrt3) = 1/2 and v(zeta_3 - 1) = 1/2
        let f = PadicField::make(3, 12, Some(&[-3, 0, 1])).unwrap();
        let t = f.cyclotomic_extension(1, 64).unwrap();
        assert!(!t.structural_exact());
        let pi = PadicElement::basis_vector(&t, 2);
        assert_eq!(pi.valuation().unwrap(), r(1, 2));
        let y = PadicElement::basis_vector(&t, 1);
        assert_eq!(y.valuation().unwrap(), r(1, 2));
        assert_eq!(pi.mul(&y).unwrap().valuation().unwrap(), r(1, 1));
        let inv = pi.inverse().unwrap();
        let back = inv.mul(&pi).unwrap();
        assert!(back.eq_at(&PadicElement::one(&t), back.aprec()));
    }

    #[test]
    fn precision_monotonicity() {
        let chain = |f: &PadicField| {
            let a = PadicElement::from_integer(f, 7);
            let b = PadicElement::from_rational(f, &BigInt::from(2), &BigInt::from(3)).unwrap();
            a.mul(&b).unwrap().add(&PadicElement::from_integer(f, 11)).unwrap()
        };
        let lo = chain(&PadicField::make(5, 8, None).unwrap());
        let hi = chain(&PadicField::make(5, 20, None).unwrap());
        let m = BigUint::from(5u64).pow(8);
        assert_eq!(lo.coeffs()[0].clone() % &m, hi.coeffs()[0].clone() % &m);
    }

    #[test]
    fn canonicalize_strips_common_powers() {
        let f = q5();
        let x = PadicElement::from_rational(&f, &BigInt::from(25), &BigInt::from(5)).unwrap();
        let c = x.canonicalize();
        assert_eq!(c.shift(), 0);
        assert_eq!(c, PadicElement::from_integer(&f, 5));
    }
}
