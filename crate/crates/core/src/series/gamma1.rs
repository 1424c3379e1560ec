use num_bigint::BigUint;
use num_traits::One;

use crate::newton::Rational;
use crate::padic::{PadicElement, PadicError, PadicField};

use super::growth::{ceil_log_p, GrowthProfile, TailModel};
use super::SeriesError;

/// A truncated power series over a p-adic field: coefficients
/// `a_0 .. a_{M-1}`, each carrying its own certified absolute precision
/// (the per-index ledger), plus a tail declaration for the underlying
/// infinite object.
#[derive(Debug, Clone)]
pub struct SeriesGamma1 {
    field: PadicField,
    coeffs: Vec<PadicElement>,
    tail: TailModel,
}

impl SeriesGamma1 {
    pub fn new(field: PadicField, coeffs: Vec<PadicElement>, tail: TailModel) -> SeriesGamma1 {
        debug_assert!(coeffs.iter().all(|c| c.field() == &field));
        SeriesGamma1 { field, coeffs, tail }
    }

    pub fn zero(field: &PadicField, len: usize) -> SeriesGamma1 {
        SeriesGamma1 {
            field: field.clone(),
            coeffs: vec![PadicElement::zero(field); len],
            tail: TailModel::Zero,
        }
    }

    pub fn constant(field: &PadicField, value: PadicElement, len: usize) -> SeriesGamma1 {
        let mut s = Self::zero(field, len);
        s.coeffs[0] = value;
        s
    }

    pub fn one(field: &PadicField, len: usize) -> SeriesGamma1 {
        Self::constant(field, PadicElement::one(field), len)
    }

    pub fn monomial(field: &PadicField, k: usize, len: usize) -> SeriesGamma1 {
        let mut s = Self::zero(field, len);
        if k < len {
            s.coeffs[k] = PadicElement::one(field);
        }
        s
    }

    /// Polynomial with exact integer coefficients (little-endian), tail Zero
    /// provided the support fits the truncation.
    pub fn from_integer_coeffs(
        field: &PadicField,
        coeffs: &[num_bigint::BigInt],
        len: usize,
    ) -> SeriesGamma1 {
        let mut out = Self::zero(field, len);
        for (k, c) in coeffs.iter().enumerate().take(len) {
            out.coeffs[k] = PadicElement::from_bigint(field, c);
        }
        if coeffs.len() > len {
            out.tail = TailModel::Growth {
                r: Rational::from_integer(0),
                c: Rational::from_integer(0),
            };
        }
        out
    }

    pub fn field(&self) -> &PadicField {
        &self.field
    }
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }
    pub fn coeff(&self, k: usize) -> &PadicElement {
        &self.coeffs[k]
    }
    pub fn coeffs(&self) -> &[PadicElement] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut Vec<PadicElement> {
        &mut self.coeffs
    }
    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn with_tail(mut self, tail: TailModel) -> SeriesGamma1 {
        self.tail = tail;
        self
    }

    /// Minimum certified coefficient precision (the ledger floor).
    pub fn ledger_floor(&self) -> i64 {
        self.coeffs.iter().map(|c| c.aprec()).min().unwrap_or(0)
    }

    /// Certified lower bound for the valuation of every stored coefficient.
    pub fn valuation_floor(&self) -> Rational {
        self.coeffs
            .iter()
            .map(|c| c.val_lb())
            .min()
            .unwrap_or_else(|| Rational::from_integer(0))
    }

    /// Index of the first coefficient distinguishable from zero.
    pub fn x_valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero_at_precision())
    }

    /// Index after the last coefficient distinguishable from zero.
    pub fn x_degree_bound(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero_at_precision())
            .map_or(0, |i| i + 1)
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_at_precision())
    }

    fn check_field(&self, other: &SeriesGamma1) -> Result<(), SeriesError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(SeriesError::FieldMismatch)
        }
    }

    /// Coefficient product that degrades to an uninformative bound instead
    /// of failing when the certified precision drops through zero.
    fn mul_tolerant(a: &PadicElement, b: &PadicElement) -> Result<PadicElement, SeriesError> {
        match a.mul(b) {
            Ok(p) => Ok(p),
            Err(PadicError::PrecisionUnderflow(lo)) => {
                Ok(PadicElement::unknown_below(a.field(), lo))
            }
            Err(e) => Err(SeriesError::Padic(e)),
        }
    }

    pub fn add(&self, other: &SeriesGamma1) -> Result<SeriesGamma1, SeriesError> {
        self.check_field(other)?;
        let len = self.truncation().min(other.truncation());
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            coeffs.push(self.coeffs[k].add(&other.coeffs[k])?);
        }
        let support_within = self.x_degree_bound() <= len && other.x_degree_bound() <= len;
        let tail = self.tail.add(
            &other.tail,
            self.valuation_floor(),
            other.valuation_floor(),
            support_within,
        );
        Ok(SeriesGamma1 { field: self.field.clone(), coeffs, tail })
    }

    pub fn neg(&self) -> SeriesGamma1 {
        SeriesGamma1 {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn sub(&self, other: &SeriesGamma1) -> Result<SeriesGamma1, SeriesError> {
        self.add(&other.neg())
    }

    /// Truncated Cauchy product. BigUint work happens only on pairs where
    /// both coefficients are distinguishable from zero; the precision pass
    /// runs over every pair (including the skipped ones) so the ledger
    /// stays pessimistic, and feeds the per-product claims so element
    /// valuations are computed once per coefficient rather than per pair.
    pub fn mul(&self, other: &SeriesGamma1) -> Result<SeriesGamma1, SeriesError> {
        self.check_field(other)?;
        let len = self.truncation().min(other.truncation());
        let fa: Vec<i64> = self.coeffs.iter().map(|c| c.aprec()).collect();
        let fb: Vec<i64> = other.coeffs.iter().map(|c| c.aprec()).collect();
        let va: Vec<i64> = self.coeffs.iter().map(|c| c.val_lb().floor().to_integer()).collect();
        let vb: Vec<i64> = other.coeffs.iter().map(|c| c.val_lb().floor().to_integer()).collect();
        let mut cells: Vec<Option<PadicElement>> = vec![None; len];
        let a_nz: Vec<bool> = self.coeffs.iter().map(|c| !c.is_zero_at_precision()).collect();
        let b_nz: Vec<bool> = other.coeffs.iter().map(|c| !c.is_zero_at_precision()).collect();
        for i in 0..self.truncation().min(len) {
            if !a_nz[i] {
                continue;
            }
            let ai = &self.coeffs[i];
            for j in 0..other.truncation().min(len - i) {
                if !b_nz[j] {
                    continue;
                }
                let claim = (fa[i] + vb[j]).min(fb[j] + va[i]);
                let prod = match ai.mul_claimed(&other.coeffs[j], claim) {
                    Ok(p) => p,
                    Err(PadicError::PrecisionUnderflow(lo)) => {
                        PadicElement::unknown_below(&self.field, lo)
                    }
                    Err(e) => return Err(SeriesError::Padic(e)),
                };
                let cell = &mut cells[i + j];
                *cell = Some(match cell.take() {
                    None => prod,
                    Some(acc) => acc.add(&prod)?,
                });
            }
        }
        // precision pass over every pair, including the skipped ones
        let mut bound = vec![i64::MAX; len];
        for i in 0..self.truncation().min(len) {
            for j in 0..other.truncation().min(len - i) {
                let bij = (fa[i] + vb[j]).min(fb[j] + va[i]);
                let cell = &mut bound[i + j];
                if bij < *cell {
                    *cell = bij;
                }
            }
        }
        let mut coeffs = Vec::with_capacity(len);
        for (k, cell) in cells.into_iter().enumerate() {
            let b = bound[k].min(self.field.precision());
            let el = match cell {
                Some(e) => {
                    if b < e.aprec() {
                        e.reduce_precision(b)
                    } else {
                        e
                    }
                }
                None => PadicElement::unknown_below(&self.field, b),
            };
            coeffs.push(el);
        }
        let da = self.x_degree_bound();
        let db = other.x_degree_bound();
        let support_within = da + db <= len + 1;
        let tail = self.tail.mul(
            &other.tail,
            self.valuation_floor(),
            other.valuation_floor(),
            support_within,
        );
        Ok(SeriesGamma1 { field: self.field.clone(), coeffs, tail })
    }

    pub fn scale(&self, scalar: &PadicElement) -> Result<SeriesGamma1, SeriesError> {
        if scalar.field() != &self.field {
            return Err(SeriesError::FieldMismatch);
        }
        let coeffs: Result<Vec<_>, SeriesError> = self
            .coeffs
            .iter()
            .map(|c| Self::mul_tolerant(c, scalar))
            .collect();
        let dv = scalar.val_lb();
        Ok(SeriesGamma1 {
            field: self.field.clone(),
            coeffs: coeffs?,
            tail: self.tail.shift_constant(dv),
        })
    }

    pub fn scale_i64(&self, n: i64) -> SeriesGamma1 {
        SeriesGamma1 {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul_i64(n)).collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn truncate(&self, len: usize) -> SeriesGamma1 {
        let mut s = self.clone();
        if len < s.coeffs.len() {
            let dropped_support = self.x_degree_bound() > len;
            s.coeffs.truncate(len);
            if matches!(s.tail, TailModel::Zero) && dropped_support {
                s.tail = TailModel::Growth {
                    r: Rational::from_integer(0),
                    c: self.valuation_floor(),
                };
            }
        }
        s
    }

    /// Composition with the affine substitution `X -> u^i (1 + X) - 1`
    /// (the twist operator on the wild line, `u = 1 + p`). Contributions
    /// of coefficients beyond the truncation are certified through the
    /// tail declaration and lower the per-index ledger accordingly.
    pub fn twist(&self, i: i64) -> Result<SeriesGamma1, SeriesError> {
        if i == 0 {
            return Ok(self.clone());
        }
        let len = self.truncation();
        if len == 0 {
            return Ok(self.clone());
        }
        if i.abs() > 1 << 20 {
            return Err(SeriesError::PrecisionUnderflow(0));
        }
        let p = self.field.prime();
        let u = PadicElement::from_integer(&self.field, 1 + p as i64);
        let ui = u.pow_i64(i).map_err(SeriesError::Padic)?;
        let a = ui.sub(&PadicElement::one(&self.field)).map_err(SeriesError::Padic)?;
        // v(u^i - 1) = 1 + v_p(i) for u = 1 + p
        let w_i = Rational::from_integer(1 + crate::padic::element::vp_i64(i, p));
        let mut a_pow = Vec::with_capacity(len);
        let mut b_pow = Vec::with_capacity(len);
        let mut ap = PadicElement::one(&self.field);
        let mut bp = PadicElement::one(&self.field);
        for _ in 0..len {
            a_pow.push(ap.clone());
            b_pow.push(bp.clone());
            ap = ap.mul(&a).map_err(SeriesError::Padic)?;
            bp = bp.mul(&ui).map_err(SeriesError::Padic)?;
        }
        let mut out: Vec<PadicElement> = vec![PadicElement::zero(&self.field); len];
        let deg = self.x_degree_bound();
        let mut row: Vec<BigUint> = vec![BigUint::one()];
        for k in 0..len {
            if k > 0 {
                let mut next = vec![BigUint::one(); k + 1];
                for m in 1..k {
                    next[m] = &row[m - 1] + &row[m];
                }
                row = next;
            }
            if k >= deg || self.coeffs[k].is_zero_at_precision() {
                continue;
            }
            let ak = &self.coeffs[k];
            for m in 0..=k {
                let binom = PadicElement::from_bigint(&self.field, &row[m].clone().into());
                let scalar = binom.mul(&a_pow[k - m]).map_err(SeriesError::Padic)?;
                let term = ak.mul(&scalar).map_err(SeriesError::Padic)?;
                out[m] = out[m].add(&term).map_err(SeriesError::Padic)?;
            }
        }
        for (m, o) in out.iter_mut().enumerate() {
            *o = o.mul(&b_pow[m]).map_err(SeriesError::Padic)?;
        }
        // skipped zero-at-precision coefficients still constrain the ledger
        let mut skip_bound = vec![i64::MAX; len];
        for k in 0..len {
            let zero_k = k >= deg || self.coeffs[k].is_zero_at_precision();
            if !zero_k {
                continue;
            }
            let ak_prec = self.coeffs[k].aprec();
            for m in 0..=k {
                let b = ak_prec + (w_i * Rational::from_integer((k - m) as i64)).floor().to_integer();
                if b < skip_bound[m] {
                    skip_bound[m] = b;
                }
            }
        }
        for (m, o) in out.iter_mut().enumerate() {
            if skip_bound[m] < o.aprec() {
                *o = o.reduce_precision(skip_bound[m]);
            }
        }
        let tail = match &self.tail {
            TailModel::Zero => TailModel::Zero,
            TailModel::Growth { r, c } => {
                // dropped terms enter X^m with v >= c - r ceil(log(k+1)) + (k-m) w_i,
                // i.e. at least base + (len - m) w_i with base the minimum at
                // entry offset len
                let base = tail_min_over(*c, *r, w_i, len as u64, p);
                for (m, o) in out.iter_mut().enumerate() {
                    let bound = base + w_i * Rational::from_integer(len as i64 - m as i64);
                    let digits = bound.floor().to_integer();
                    if digits < o.aprec() {
                        *o = o.reduce_precision(digits);
                    }
                }
                let delta = twist_growth_delta(*r, w_i, p);
                TailModel::Growth { r: *r, c: *c + delta }
            }
            TailModel::Unknown => {
                return Err(SeriesError::TailNotBounded(
                    "twist of an undeclared series drops uncertified terms".into(),
                ))
            }
        };
        Ok(SeriesGamma1 { field: self.field.clone(), coeffs: out, tail })
    }

    /// Evaluation at a point of an extension of the coefficient field by
    /// Horner's rule. The certified output precision is computed
    /// analytically — `min_k (aprec(a_k) + k v(x0))` against the declared
    /// tail — rather than through the per-operation chain, which would
    /// compound rounding of fractional valuations; the raw digits are
    /// carried at full width and clamped to the analytic claim at the end.
    pub fn evaluate_at(
        &self,
        x0: &PadicElement,
        x0_val: Rational,
    ) -> Result<PadicElement, SeriesError> {
        let ext = x0.field().clone();
        let zero = Rational::from_integer(0);
        let tail_bound: Option<Rational> = match &self.tail {
            TailModel::Zero => None,
            TailModel::Growth { r, c } => {
                if x0_val <= zero {
                    return Err(SeriesError::TailNotBounded(
                        "evaluation point has non-positive valuation".into(),
                    ));
                }
                Some(tail_full_power(*c, *r, x0_val, self.truncation() as u64, self.field.prime()))
            }
            TailModel::Unknown => {
                return Err(SeriesError::TailNotBounded(
                    "series carries no growth declaration".into(),
                ))
            }
        };
        let cap = ext.precision();
        let mut analytic = Rational::from_integer(cap);
        for (k, c) in self.coeffs.iter().enumerate() {
            let term = Rational::from_integer(c.aprec()) + x0_val * Rational::from_integer(k as i64);
            if term < analytic {
                analytic = term;
            }
        }
        if let Some(tb) = tail_bound {
            if tb < analytic {
                analytic = tb;
            }
        }
        let digits = analytic.floor().to_integer();
        if digits <= 0 {
            return Err(SeriesError::EvaluationImprecise(digits));
        }
        let x0c = x0.assume_precision(cap);
        let mut acc = PadicElement::zero(&ext);
        for k in (0..self.truncation()).rev() {
            acc = acc
                .assume_precision(cap)
                .mul(&x0c)
                .map_err(SeriesError::Padic)?;
            if !self.coeffs[k].is_zero_at_precision() {
                let ck = self.coeffs[k].lift_to(&ext).map_err(SeriesError::Padic)?;
                acc = acc.add(&ck.assume_precision(cap)).map_err(SeriesError::Padic)?;
            }
        }
        Ok(acc.reduce_precision(digits))
    }

    /// Long division with ledger accounting: strips the common X-adic
    /// valuation, divides coefficient-recursively by the leading
    /// coefficient, and refuses unless the re-multiplication check passes
    /// at the recorded precision.
    pub fn divide(&self, g: &SeriesGamma1) -> Result<(SeriesGamma1, i64), SeriesError> {
        self.check_field(g)?;
        if self.is_zero_at_precision() {
            let len = self.truncation().min(g.truncation());
            return Ok((Self::zero(&self.field, len), 0));
        }
        let vg = g.x_valuation().ok_or_else(|| {
            SeriesError::NotDivisibleAtPrecision("divisor is zero at precision".into())
        })?;
        let vf = self.x_valuation().unwrap_or(0);
        if vg > vf {
            return Err(SeriesError::NotDivisibleAtPrecision(format!(
                "X-adic valuation of divisor ({vg}) exceeds dividend ({vf})"
            )));
        }
        let lead = &g.coeffs[vg];
        let lead_inv = lead.inverse().map_err(|e| match e {
            PadicError::PrecisionUnderflow(a) => SeriesError::PrecisionUnderflow(a),
            PadicError::DivisionByZeroAtPrecision => SeriesError::PrecisionExhausted,
            e => SeriesError::Padic(e),
        })?;
        let len = self.truncation().min(g.truncation()) - vg;
        // shifted divisor
        let gs: Vec<&PadicElement> = (0..len).map(|j| &g.coeffs[j + vg]).collect();
        let mut q: Vec<PadicElement> = Vec::with_capacity(len);
        for k in 0..len {
            let mut num = self.coeffs[k + vg].clone();
            for (j, qj) in q.iter().enumerate() {
                if qj.is_zero_at_precision() && gs[k - j].is_zero_at_precision() {
                    continue;
                }
                num = num
                    .sub(&qj.mul(gs[k - j]).map_err(SeriesError::Padic)?)
                    .map_err(SeriesError::Padic)?;
            }
            let qk = num.mul(&lead_inv).map_err(|e| match e {
                PadicError::PrecisionUnderflow(a) => SeriesError::PrecisionUnderflow(a),
                e => SeriesError::Padic(e),
            })?;
            q.push(qk);
        }
        let quotient = SeriesGamma1 {
            field: self.field.clone(),
            coeffs: q,
            tail: TailModel::Unknown,
        };
        for k in 0..vg {
            if !self.coeffs[k].is_zero_at_precision() {
                return Err(SeriesError::NotDivisibleAtPrecision(format!(
                    "dividend has nonzero coefficient at X^{k} below the divisor valuation"
                )));
            }
        }
        let gshift = SeriesGamma1 {
            field: self.field.clone(),
            coeffs: gs.into_iter().cloned().collect(),
            tail: TailModel::Unknown,
        };
        let back = quotient.mul(&gshift)?;
        for k in 0..back.truncation() {
            let diff = back.coeffs[k].sub(&self.coeffs[k + vg]).map_err(SeriesError::Padic)?;
            if !diff.is_zero_at_precision() {
                return Err(SeriesError::NotDivisibleAtPrecision(format!(
                    "re-multiplication mismatch at X^{k}"
                )));
            }
        }
        let loss = (self.ledger_floor() - quotient.ledger_floor()).max(0);
        Ok((quotient, loss))
    }

    /// The per-coefficient precision claims an interval product with
    /// `other` would carry: `min over i+j=k of min(a_i + v_j, a_j + v_i)`.
    pub(crate) fn mul_claim_bounds(&self, other: &SeriesGamma1) -> Vec<i64> {
        let len = self.truncation().min(other.truncation());
        let fa: Vec<i64> = self.coeffs.iter().map(|c| c.aprec()).collect();
        let fb: Vec<i64> = other.coeffs.iter().map(|c| c.aprec()).collect();
        let va: Vec<i64> = self.coeffs.iter().map(|c| c.val_lb().floor().to_integer()).collect();
        let vb: Vec<i64> = other.coeffs.iter().map(|c| c.val_lb().floor().to_integer()).collect();
        let mut bound = vec![i64::MAX; len];
        for i in 0..len {
            for j in 0..len - i {
                let bij = (fa[i] + vb[j]).min(fb[j] + va[i]);
                let cell = &mut bound[i + j];
                if bij < *cell {
                    *cell = bij;
                }
            }
        }
        bound
    }

    /// Measured valuation profile of the truncation.
    pub fn growth_profile(&self) -> GrowthProfile {
        let vals: Vec<Rational> = self.coeffs.iter().map(|c| c.val_lb()).collect();
        GrowthProfile::from_valuations(&vals, self.field.prime())
    }

    /// Map every coefficient into an extension tower of the same field.
    pub fn lift_to(&self, ext: &PadicField) -> Result<SeriesGamma1, SeriesError> {
        let coeffs: Result<Vec<_>, PadicError> = self.coeffs.iter().map(|c| c.lift_to(ext)).collect();
        Ok(SeriesGamma1 {
            field: ext.clone(),
            coeffs: coeffs?,
            tail: self.tail.clone(),
        })
    }

    /// The distinguishable part: coefficients that are zero at their
    /// certified precision become exact zeros. The result is a
    /// representative of the same residue tube with a clean profile.
    pub fn visible_part(&self) -> SeriesGamma1 {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.is_zero_at_precision() {
                    PadicElement::zero(&self.field)
                } else {
                    c.clone()
                }
            })
            .collect();
        SeriesGamma1 {
            field: self.field.clone(),
            coeffs,
            tail: self.tail.clone(),
        }
    }

    /// Equality at shared precision, coefficient by coefficient.
    pub fn eq_at_precision(&self, other: &SeriesGamma1) -> bool {
        if self.field != other.field {
            return false;
        }
        let len = self.truncation().min(other.truncation());
        (0..len).all(|k| {
            let a = &self.coeffs[k];
            let b = &other.coeffs[k];
            a.eq_at(b, a.aprec().min(b.aprec()))
        })
    }
}

/// `min_{k >= k0} (c - r ceil(log_p(k+1)) + (k - k0) step)`: certified size
/// of dropped contributions entering with weight `step` per extra index.
/// The function increases between log jumps, so only `k0` and p-power
/// boundaries need scanning.
pub(crate) fn tail_min_over(c: Rational, r: Rational, step: Rational, k0: u64, p: u64) -> Rational {
    let eval = |k: u64| {
        c - r * Rational::from_integer(ceil_log_p(k + 1, p))
            + step * Rational::from_integer((k - k0) as i64)
    };
    let mut best = eval(k0);
    let mut pw: u64 = 1;
    while pw < k0 {
        pw = match pw.checked_mul(p) {
            Some(x) => x,
            None => return best,
        };
    }
    for _ in 0..80 {
        if pw >= k0 {
            let v = eval(pw);
            if v < best {
                best = v;
            }
            if step * Rational::from_integer(((pw as i128).min(1 << 60) as i64) * (p as i64 - 1)) > r {
                break;
            }
        }
        pw = match pw.checked_mul(p) {
            Some(x) => x,
            None => break,
        };
    }
    best
}

/// `min_{k >= k0} (c - r ceil(log_p(k+1)) + k step)`: tail bound for plain
/// evaluation where the k-th term carries the full `x0^k`.
pub(crate) fn tail_full_power(c: Rational, r: Rational, step: Rational, k0: u64, p: u64) -> Rational {
    tail_min_over(c + step * Rational::from_integer(k0 as i64), r, step, k0, p)
}

/// Worst-case drop of the growth intercept under twisting with
/// `w = v(u^i - 1)`: `min_{t >= 0} (t w - r ceil(log_p(t+1)))`.
fn twist_growth_delta(r: Rational, w: Rational, p: u64) -> Rational {
    let mut best = Rational::from_integer(0);
    let mut pw: i128 = 1;
    for j in 1..60i64 {
        pw *= p as i128;
        if pw > 1 << 60 {
            break;
        }
        let t = pw as i64;
        let val = Rational::from_integer(t) * w - r * Rational::from_integer(j + 1);
        if val < best {
            best = val;
        }
        if Rational::from_integer(t) * w > r * Rational::from_integer(j + 60) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> PadicField {
        PadicField::make(5, 20, None).unwrap()
    }

    #[test]
    fn x_times_x() {
        let f = q5();
        let x = SeriesGamma1::monomial(&f, 1, 10);
        let x2 = x.mul(&x).unwrap();
        assert!(x2.coeff(2).eq_at(&PadicElement::one(&f), 20));
        assert!(x2.coeff(1).is_zero_at_precision());
    }

    #[test]
    fn one_plus_x_times_one_minus_x() {
        let f = q5();
        let one = SeriesGamma1::one(&f, 10);
        let x = SeriesGamma1::monomial(&f, 1, 10);
        let a = one.add(&x).unwrap();
        let b = one.sub(&x).unwrap();
        let prod = a.mul(&b).unwrap();
        let expect = one.sub(&x.mul(&x).unwrap()).unwrap();
        assert!(prod.eq_at_precision(&expect));
    }

    #[test]
    fn divide_x2_by_x() {
        let f = q5();
        let x = SeriesGamma1::monomial(&f, 1, 10);
        let x2 = SeriesGamma1::monomial(&f, 2, 10);
        let (q, loss) = x2.divide(&x).unwrap();
        assert_eq!(loss, 0);
        assert!(q.eq_at_precision(&SeriesGamma1::monomial(&f, 1, 9)));
    }

    #[test]
    fn divide_refuses_higher_valuation_divisor() {
        let f = q5();
        let x = SeriesGamma1::monomial(&f, 1, 10);
        let one = SeriesGamma1::one(&f, 10);
        assert!(matches!(
            one.divide(&x),
            Err(SeriesError::NotDivisibleAtPrecision(_))
        ));
    }

    #[test]
    fn divide_round_trip_with_unit() {
        let f = q5();
        let mut g = SeriesGamma1::one(&f, 12);
        g.coeffs_mut()[1] = PadicElement::from_integer(&f, 3);
        g.coeffs_mut()[2] = PadicElement::from_integer(&f, 10);
        let mut h = SeriesGamma1::zero(&f, 12);
        for k in 0..6 {
            h.coeffs_mut()[k] = PadicElement::from_integer(&f, 2 * k as i64 + 1);
        }
        let prod = h.mul(&g).unwrap();
        let (q, _loss) = prod.divide(&g).unwrap();
        assert!(q.eq_at_precision(&h));
    }

    #[test]
    fn twist_of_constant_is_constant() {
        let f = q5();
        let c = SeriesGamma1::constant(&f, PadicElement::from_integer(&f, 7), 10);
        let t = c.twist(3).unwrap();
        assert!(t.eq_at_precision(&c));
    }

    #[test]
    fn twist_of_x() {
        // X -> u(1+X) - 1 = p + (1+p) X for i = 1
        let f = q5();
        let x = SeriesGamma1::monomial(&f, 1, 10);
        let t = x.twist(1).unwrap();
        assert!(t.coeff(0).eq_at(&PadicElement::from_integer(&f, 5), 20));
        assert!(t.coeff(1).eq_at(&PadicElement::from_integer(&f, 6), 20));
        assert!(t.coeff(2).is_zero_at_precision());
    }

    #[test]
    fn twist_group_law() {
        let f = q5();
        let mut s = SeriesGamma1::zero(&f, 12);
        for k in 0..6 {
            s.coeffs_mut()[k] = PadicElement::from_integer(&f, (3 * k + 1) as i64);
        }
        let a = s.twist(2).unwrap().twist(3).unwrap();
        let b = s.twist(5).unwrap();
        assert!(a.eq_at_precision(&b));
    }

    #[test]
    fn twist_is_ring_homomorphism() {
        let f = q5();
        let mut s = SeriesGamma1::zero(&f, 10);
        let mut t = SeriesGamma1::zero(&f, 10);
        for k in 0..5 {
            s.coeffs_mut()[k] = PadicElement::from_integer(&f, k as i64 + 2);
            t.coeffs_mut()[k] = PadicElement::from_integer(&f, 2 * k as i64 - 3);
        }
        let lhs = s.mul(&t).unwrap().twist(2).unwrap();
        let rhs = s.twist(2).unwrap().mul(&t.twist(2).unwrap()).unwrap();
        assert!(lhs.eq_at_precision(&rhs));
    }

    #[test]
    fn growth_profile_of_constant() {
        let f = q5();
        let one = SeriesGamma1::one(&f, 30);
        assert_eq!(one.growth_profile().r_hat, Rational::from_integer(0));
    }

    #[test]
    fn evaluate_polynomial() {
        let f = q5();
        // f = 1 + 2X + 3X^2 at X = 5
        let mut s = SeriesGamma1::zero(&f, 8);
        s.coeffs_mut()[0] = PadicElement::from_integer(&f, 1);
        s.coeffs_mut()[1] = PadicElement::from_integer(&f, 2);
        s.coeffs_mut()[2] = PadicElement::from_integer(&f, 3);
        let x0 = PadicElement::from_integer(&f, 5);
        let v = s.evaluate_at(&x0, Rational::from_integer(1)).unwrap();
        assert_eq!(v, PadicElement::from_integer(&f, 1 + 10 + 75));
    }
}
