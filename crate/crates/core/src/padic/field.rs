use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::newton::Rational;

use super::PadicError;

/// Default cap on the absolute degree of user-constructed towers.
pub const DEFAULT_DEGREE_BOUND: usize = 8;

/// Cap on the degree of internally built evaluation towers (cyclotomic
/// extensions requested by character evaluation).
pub const EVAL_DEGREE_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    /// Lift of an irreducible residue polynomial; the step generator is a
    /// unit whose residue generates the residue extension.
    Unramified,
    /// Eisenstein polynomial; the step generator is a uniformizer of the
    /// step.
    Eisenstein,
    /// `Phi_{p^level}(1 + pi)`: adjoins a primitive `p^level`-th root of
    /// unity via `pi = zeta - 1`.
    Cyclotomic { level: u32 },
}

/// One extension step of a tower. The minimal polynomial is monic with
/// rational integer coefficients (all the towers this crate needs are of
/// that shape), stored little-endian including the leading 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionStep {
    pub kind: StepKind,
    pub minpoly: Vec<BigInt>,
    pub degree: usize,
    /// Exact absolute valuation of the step generator, read off the single
    /// slope of the step polynomial's Newton polygon (irreducible
    /// polynomials over a local field have one slope).
    pub root_valuation: Rational,
}

#[derive(Debug)]
pub(crate) struct FieldInner {
    pub p: u64,
    pub precision: i64,
    pub steps: Vec<ExtensionStep>,
    pub degree: usize,
    pub e: i64,
    pub f: i64,
    /// Whether the power-basis valuation formula
    /// `v(sum c_b . basis_b) = min_b (v_p(c_b) + v(basis_b))` is exact for
    /// this tower (true for Q_p, unramified, Eisenstein, unramified then
    /// Eisenstein, and cyclotomic steps over an unramified base).
    pub structural_exact: bool,
    /// Cumulative valuation of each flat basis vector.
    pub basis_valuations: Vec<Rational>,
}

/// Handle to a p-adic field: Q_p or a finite extension presented as a
/// tower of integral monic steps, at a fixed coefficient precision cap.
#[derive(Clone)]
pub struct PadicField {
    pub(crate) inner: Arc<FieldInner>,
}

impl fmt::Debug for PadicField {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            fmt,
            "PadicField(p={}, N={}, deg={}, e={}, f={})",
            self.prime(),
            self.precision(),
            self.degree(),
            self.ramification_index(),
            self.residue_degree()
        )
    }
}

impl PartialEq for PadicField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.precision == other.inner.precision
                && self.inner.steps == other.inner.steps)
    }
}
impl Eq for PadicField {}

fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

// ---- F_p[x] helpers for residue irreducibility (p < 2^31) ----

fn fp_mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn fp_poly_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn fp_poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    // m monic of degree >= 1
    let mut r = a.to_vec();
    fp_poly_trim(&mut r);
    let dm = m.len() - 1;
    debug_assert!(dm >= 1);
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let dr = r.len() - 1;
        if lead != 0 {
            for i in 0..dm {
                let sub = fp_mulmod(lead, m[i], p);
                r[dr - dm + i] = (r[dr - dm + i] + p - sub) % p;
            }
        }
        r.pop();
        fp_poly_trim(&mut r);
    }
    r
}

fn fp_poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + fp_mulmod(ai, bj, p)) % p;
        }
    }
    fp_poly_rem(&prod, m, p)
}

/// x^(p^k) mod m via repeated Frobenius.
fn fp_frobenius_power(k: u32, m: &[u64], p: u64) -> Vec<u64> {
    let mut x = vec![0u64, 1];
    x = fp_poly_rem(&x, m, p);
    for _ in 0..k {
        // raise to p-th power by square and multiply
        let mut acc = vec![1u64];
        let base = x.clone();
        let mut exp = p;
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = fp_poly_mulmod(&acc, &sq, m, p);
            }
            exp >>= 1;
            if exp > 0 {
                sq = fp_poly_mulmod(&sq.clone(), &sq, m, p);
            }
        }
        x = acc;
    }
    x
}

fn fp_poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_poly_trim(&mut a);
    fp_poly_trim(&mut b);
    loop {
        if b.is_empty() || (b.len() == 1 && b[0] == 0) {
            return a;
        }
        if b.len() == 1 {
            return b; // nonzero constant: gcd is a unit
        }
        let lead = *b.last().unwrap();
        let inv = fp_pow(lead, p - 2, p);
        let monic: Vec<u64> = b.iter().map(|&c| fp_mulmod(c, inv, p)).collect();
        let r = fp_poly_rem(&a, &monic, p);
        a = b;
        b = r;
    }
}

fn fp_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_mulmod(acc, b, p);
        }
        b = fp_mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

/// Irreducibility over F_p via the Frobenius criterion: g of degree d is
/// irreducible iff x^(p^d) = x mod g and gcd(x^(p^(d/q)) - x, g) = 1 for
/// every prime q | d.
fn fp_irreducible(g: &[u64], p: u64) -> bool {
    let d = g.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let frob_d = fp_frobenius_power(d as u32, g, p);
    // x^(p^d) - x must be 0 mod g
    let mut diff = frob_d;
    if diff.len() < 2 {
        diff.resize(2, 0);
    }
    diff[1] = (diff[1] + p - 1) % p;
    fp_poly_trim(&mut diff);
    if !(diff.len() == 1 && diff[0] == 0) {
        return false;
    }
    let mut rem = d;
    let mut q = 2usize;
    let mut prime_divs = Vec::new();
    while q * q <= rem {
        if rem % q == 0 {
            prime_divs.push(q);
            while rem % q == 0 {
                rem /= q;
            }
        }
        q += 1;
    }
    if rem > 1 {
        prime_divs.push(rem);
    }
    for q in prime_divs {
        let mut h = fp_frobenius_power((d / q) as u32, g, p);
        if h.len() < 2 {
            h.resize(2, 0);
        }
        h[1] = (h[1] + p - 1) % p;
        fp_poly_trim(&mut h);
        let g_gcd = fp_poly_gcd(g, &h, p);
        if g_gcd.len() > 1 {
            return false;
        }
    }
    true
}

fn vp_bigint(x: &BigInt, p: u64) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let p_big = BigInt::from(p);
    let mut v = 0u64;
    let mut cur = x.abs();
    while (&cur % &p_big).is_zero() {
        cur /= &p_big;
        v += 1;
    }
    Some(v)
}

impl PadicField {
    /// Q_p at `precision` digits, or `Q_p[y]/(g)` when a defining
    /// polynomial is supplied (little-endian integer coefficients,
    /// monic). Degree is capped at [`DEFAULT_DEGREE_BOUND`].
    pub fn make(p: u64, precision: i64, g: Option<&[i64]>) -> Result<PadicField, PadicError> {
        let g_big = g.map(|c| c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
        Self::make_with_bound(p, precision, g_big.as_deref(), DEFAULT_DEGREE_BOUND)
    }

    pub fn make_with_bound(
        p: u64,
        precision: i64,
        g: Option<&[BigInt]>,
        degree_bound: usize,
    ) -> Result<PadicField, PadicError> {
        if !is_odd_prime(p) {
            return Err(PadicError::CompositeP(p));
        }
        if p >= (1u64 << 31) {
            return Err(PadicError::ExtensionUnavailable(format!(
                "p = {p} exceeds the desk-scale bound 2^31"
            )));
        }
        if precision <= 0 {
            return Err(PadicError::PrecisionUnderflow(precision));
        }
        let mut steps = Vec::new();
        if let Some(g) = g {
            let step = classify_step(g, p, degree_bound)?;
            steps.push(step);
        }
        Ok(Self::from_steps(p, precision, steps))
    }

    pub(crate) fn from_steps(p: u64, precision: i64, steps: Vec<ExtensionStep>) -> PadicField {
        let degree = steps.iter().map(|s| s.degree).product::<usize>().max(1);
        let mut basis_valuations = vec![Rational::from_integer(0)];
        for step in &steps {
            let mut next = Vec::with_capacity(basis_valuations.len() * step.degree);
            for j in 0..step.degree {
                let jv = step.root_valuation * Rational::from_integer(j as i64);
                for v in &basis_valuations {
                    next.push(*v + jv);
                }
            }
            // flat index = inner + inner_dim * j, so order as inner-fastest
            let inner_dim = basis_valuations.len();
            let mut reordered = vec![Rational::from_integer(0); next.len()];
            for j in 0..step.degree {
                for i in 0..inner_dim {
                    reordered[i + inner_dim * j] = next[j * inner_dim + i];
                }
            }
            basis_valuations = reordered;
        }
        let mut e: i64 = 1;
        for s in &steps {
            e = num_integer::lcm(e, *s.root_valuation.denom());
        }
        let f = (degree as i64) / e;
        let structural_exact = {
            // exactness holds while each ramified step sits over a base
            // whose value group it refines with distinct cosets
            let mut ok = true;
            let mut base_e: i64 = 1;
            let mut seen_ramified = false;
            for s in &steps {
                match s.kind {
                    StepKind::Unramified => {
                        if seen_ramified {
                            ok = false;
                        }
                    }
                    StepKind::Eisenstein | StepKind::Cyclotomic { .. } => {
                        if seen_ramified || base_e != 1 {
                            ok = false;
                        }
                        seen_ramified = true;
                    }
                }
                base_e = num_integer::lcm(base_e, *s.root_valuation.denom());
            }
            ok
        };
        PadicField {
            inner: Arc::new(FieldInner {
                p,
                precision,
                steps,
                degree,
                e,
                f,
                structural_exact,
                basis_valuations,
            }),
        }
    }

    /// Extends `self` by a primitive `p^level`-th root of unity, modeled as
    /// `F[pi]/(Phi_{p^level}(1+pi))`. Over an unramified base the step is
    /// Eisenstein, hence certified irreducible; over a ramified base the
    /// quotient is used as a ring and congruence checks remain valid
    /// whether or not the step polynomial stays irreducible.
    pub fn cyclotomic_extension(&self, level: u32, max_degree: usize) -> Result<PadicField, PadicError> {
        if level == 0 {
            return Ok(self.clone());
        }
        let p = self.prime();
        let step_deg = (p as usize - 1) * (p as usize).pow(level - 1);
        let total = self.degree() * step_deg;
        if total > max_degree {
            return Err(PadicError::ExtensionUnavailable(format!(
                "zeta_{{p^{level}}} needs degree {total} > cap {max_degree}"
            )));
        }
        let minpoly = cyclotomic_in_one_plus_x(p, level);
        let mut steps = self.inner.steps.clone();
        steps.push(ExtensionStep {
            kind: StepKind::Cyclotomic { level },
            degree: step_deg,
            root_valuation: Rational::new(1, step_deg as i64),
            minpoly,
        });
        Ok(Self::from_steps(p, self.precision(), steps))
    }

    pub fn prime(&self) -> u64 {
        self.inner.p
    }
    pub fn precision(&self) -> i64 {
        self.inner.precision
    }
    pub fn degree(&self) -> usize {
        self.inner.degree
    }
    pub fn ramification_index(&self) -> i64 {
        self.inner.e
    }
    pub fn residue_degree(&self) -> i64 {
        self.inner.f
    }
    pub fn steps(&self) -> &[ExtensionStep] {
        &self.inner.steps
    }
    pub fn is_base(&self) -> bool {
        self.inner.steps.is_empty()
    }
    pub(crate) fn structural_exact(&self) -> bool {
        self.inner.structural_exact
    }
    pub(crate) fn basis_valuations(&self) -> &[Rational] {
        &self.inner.basis_valuations
    }

    /// A field with the same structure at a different precision cap.
    pub fn with_precision(&self, precision: i64) -> PadicField {
        Self::from_steps(self.prime(), precision, self.inner.steps.clone())
    }

    pub fn pow_p(&self, exp: i64) -> BigUint {
        BigUint::from(self.prime()).pow(exp.max(0) as u32)
    }
}

fn classify_step(g: &[BigInt], p: u64, degree_bound: usize) -> Result<ExtensionStep, PadicError> {
    let deg = g.len().saturating_sub(1);
    if deg < 1 {
        return Err(PadicError::BadDefiningPolynomial(
            "degree must be at least 1".into(),
        ));
    }
    if deg > degree_bound {
        return Err(PadicError::BadDefiningPolynomial(format!(
            "degree {deg} exceeds the tower bound {degree_bound}"
        )));
    }
    if !g.last().unwrap().is_one() {
        return Err(PadicError::BadDefiningPolynomial("must be monic".into()));
    }
    // Eisenstein: all lower coefficients divisible by p, constant exactly once.
    let lower_div = g[..deg].iter().all(|c| vp_bigint(c, p).map_or(true, |v| v >= 1));
    let const_v = vp_bigint(&g[0], p);
    if lower_div && const_v == Some(1) {
        return Ok(ExtensionStep {
            kind: StepKind::Eisenstein,
            degree: deg,
            root_valuation: Rational::new(1, deg as i64),
            minpoly: g.to_vec(),
        });
    }
    // Unramified: irreducible residue polynomial.
    let p_big = BigInt::from(p);
    let residue: Vec<u64> = g
        .iter()
        .map(|c| {
            let m = ((c % &p_big) + &p_big) % &p_big;
            m.to_string().parse::<u64>().unwrap()
        })
        .collect();
    let mut residue_trimmed = residue.clone();
    fp_poly_trim(&mut residue_trimmed);
    if residue_trimmed.len() != deg + 1 {
        return Err(PadicError::BadDefiningPolynomial(
            "leading coefficient vanishes mod p".into(),
        ));
    }
    if fp_irreducible(&residue_trimmed, p) {
        return Ok(ExtensionStep {
            kind: StepKind::Unramified,
            degree: deg,
            root_valuation: Rational::from_integer(0),
            minpoly: g.to_vec(),
        });
    }
    Err(PadicError::BadDefiningPolynomial(
        "reducible mod p and not Eisenstein".into(),
    ))
}

/// Integer coefficients of `Phi_{p^level}(1 + X) = sum_{a<p} (1+X)^(a p^(level-1))`,
/// little-endian, degree `(p-1) p^(level-1)`.
pub fn cyclotomic_in_one_plus_x(p: u64, level: u32) -> Vec<BigInt> {
    let pm1 = (p as usize).pow(level - 1);
    let deg = (p as usize - 1) * pm1;
    let mut out = vec![BigInt::zero(); deg + 1];
    for a in 0..p as usize {
        let n = a * pm1;
        // add binomial row C(n, j)
        let mut c = BigInt::one();
        out[0] += &c;
        for j in 1..=n.min(deg) {
            c = c * BigInt::from((n - j + 1) as u64) / BigInt::from(j as u64);
            out[j] += &c;
        }
    }
    out
}
