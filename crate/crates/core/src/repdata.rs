//! Representation data: weight vectors and Satake parameters, the derived
//! Hodge data, Newton/Hodge polygons, hypothesis checks, the critical
//! window, branch slopes, and the filtration arithmetic.

use serde::Serialize;
use thiserror::Error;

use crate::newton::{Polygon, Rational};
use crate::padic::{PadicElement, PadicError, PadicField};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("weight vector is not dominant at index {0}")]
    NotDominant(usize),
    #[error("purity fails at index {0}: mu_i + mu_(2n+1-i) differs from w")]
    PurityFailed(usize),
    #[error("Satake ordering violated at index {0}")]
    OrderingFailed(usize),
    #[error("pairing failed: {0}")]
    PairingFailed(String),
    #[error("polygon violation: {0}")]
    PolygonViolation(String),
    #[error("admissibility fails at filtration step {0}: t_N != t_H")]
    AdmissibilityFailed(usize),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// Convention for comparing the valuation of the pairing value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaConvention {
    /// `v(lambda) = h_i + h_(2n+1-i)` (the sum forced by purity).
    PairingSum,
    /// `v(lambda) = 2n - 1 - w` as stated alongside the pairing equation.
    PaperLiteral,
}

/// Hodge-Tate weights `h_i = mu_i + 2n - i`, strictly decreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeData {
    pub h: Vec<i64>,
}

impl HodgeData {
    pub fn weight_gap(&self, n: usize) -> i64 {
        self.h[n - 1] - self.h[n]
    }
}

/// `h_i = mu_i + 2n - i` (indices 1-based in the formula, 0-based in the
/// vectors). Requires dominance.
pub fn hodge_weights(mu: &[i64], n: usize) -> Result<HodgeData, RepError> {
    assert_eq!(mu.len(), 2 * n);
    for i in 1..mu.len() {
        if mu[i - 1] < mu[i] {
            return Err(RepError::NotDominant(i));
        }
    }
    let two_n = 2 * n as i64;
    let h: Vec<i64> = mu
        .iter()
        .enumerate()
        .map(|(i0, &m)| m + two_n - (i0 as i64 + 1))
        .collect();
    debug_assert!(h.windows(2).all(|w| w[0] > w[1]));
    Ok(HodgeData { h })
}

/// The purity weight `w` with `mu_i + mu_(2n+1-i) = w` for all `i`.
pub fn purity_check(mu: &[i64]) -> Result<i64, RepError> {
    let two_n = mu.len();
    let w = mu[0] + mu[two_n - 1];
    for i in 0..two_n {
        if mu[i] + mu[two_n - 1 - i] != w {
            return Err(RepError::PurityFailed(i + 1));
        }
    }
    Ok(w)
}

/// The validated input datum with its derived quantities.
#[derive(Debug, Clone)]
pub struct RepresentationDatum {
    pub field: PadicField,
    pub n: usize,
    pub mu: Vec<i64>,
    pub alphas: Vec<PadicElement>,
    pub hodge: HodgeData,
    pub w: i64,
    pub lambda: PadicElement,
    pub gpo_asserted: bool,
    pub theta_nontrivial_asserted: bool,
    pub lambda_convention: LambdaConvention,
}

impl RepresentationDatum {
    /// Validates dominance, the Satake ordering, purity and the pairing,
    /// and derives `h`, `w` and `lambda`.
    pub fn new(
        field: PadicField,
        n: usize,
        mu: Vec<i64>,
        alphas: Vec<PadicElement>,
        gpo_asserted: bool,
        theta_nontrivial_asserted: bool,
        lambda_convention: LambdaConvention,
    ) -> Result<RepresentationDatum, RepError> {
        assert_eq!(alphas.len(), 2 * n);
        let hodge = hodge_weights(&mu, n)?;
        let w = purity_check(&mu)?;
        let mut prev: Option<Rational> = None;
        for (i, a) in alphas.iter().enumerate() {
            let v = a.valuation()?;
            if let Some(pv) = prev {
                if v > pv {
                    return Err(RepError::OrderingFailed(i + 1));
                }
            }
            prev = Some(v);
        }
        let lambda = satake_pairing(&alphas)?;
        Ok(RepresentationDatum {
            field,
            n,
            mu,
            alphas,
            hodge,
            w,
            lambda,
            gpo_asserted,
            theta_nontrivial_asserted,
            lambda_convention,
        })
    }

    pub fn prime(&self) -> u64 {
        self.field.prime()
    }

    pub fn alpha_valuation(&self, i1: usize) -> Rational {
        self.alphas[i1 - 1].valuation().expect("validated nonzero")
    }

    /// Compares `v(lambda)` against the selected convention; a mismatch is
    /// reported as a warning string, never a rejection.
    pub fn lambda_convention_warning(&self) -> Option<String> {
        let v = self.lambda.valuation().ok()?;
        let two_n = 2 * self.n as i64;
        let pairing_sum = Rational::from_integer(self.hodge.h[0] + self.hodge.h[2 * self.n - 1]);
        let paper = Rational::from_integer(two_n - 1 - self.w);
        let (expected, label) = match self.lambda_convention {
            LambdaConvention::PairingSum => (pairing_sum, "pairing-sum"),
            LambdaConvention::PaperLiteral => (paper, "paper-literal"),
        };
        if v != expected {
            Some(format!(
                "v(lambda) = {v} differs from the {label} convention value {expected} \
                 (pairing-sum gives {pairing_sum}, paper-literal gives {paper})"
            ))
        } else {
            None
        }
    }
}

/// The common pairing value `lambda = alpha_i alpha_(2n+1-i)`.
pub fn satake_pairing(alphas: &[PadicElement]) -> Result<PadicElement, RepError> {
    let two_n = alphas.len();
    let lambda = alphas[0].mul(&alphas[two_n - 1])?;
    for i in 1..two_n / 2 {
        let other = alphas[i].mul(&alphas[two_n - 1 - i])?;
        let a = lambda.aprec().min(other.aprec());
        if !lambda.eq_at(&other, a) {
            return Err(RepError::PairingFailed(format!(
                "alpha_{} alpha_{} differs from alpha_1 alpha_{}",
                i + 1,
                two_n - i,
                two_n
            )));
        }
    }
    Ok(lambda)
}

/// Verdict of the polygon comparison.
#[derive(Debug, Clone, Serialize)]
pub struct PolygonVerdict {
    pub newton_above: bool,
    pub endpoints_equal: bool,
    /// Abscissas where the polygons differ.
    pub differs_at: Vec<i64>,
    /// Under (M.Slo): equal except possibly at abscissa n.
    pub equal_except_middle: bool,
}

/// Newton polygon of the Satake valuations against the Hodge polygon of
/// the weights. Errors with `PolygonViolation` when Newton dips below
/// Hodge or the endpoints differ.
pub fn polygons(datum: &RepresentationDatum) -> Result<(Polygon, Polygon, PolygonVerdict), RepError> {
    let slopes: Vec<Rational> = (1..=2 * datum.n)
        .map(|i| datum.alpha_valuation(i))
        .collect();
    let newton = Polygon::from_slopes(&slopes);
    let hodge_slopes: Vec<Rational> = datum
        .hodge
        .h
        .iter()
        .map(|&h| Rational::from_integer(h))
        .collect();
    let hodge = Polygon::from_slopes(&hodge_slopes);
    let mut differs = Vec::new();
    let mut above = true;
    for x in 0..=2 * datum.n as i64 {
        let ny = newton.value_at(x).unwrap();
        let hy = hodge.value_at(x).unwrap();
        if ny < hy {
            above = false;
        }
        if ny != hy {
            differs.push(x);
        }
    }
    let end = 2 * datum.n as i64;
    let endpoints_equal = newton.value_at(end) == hodge.value_at(end);
    if !above {
        return Err(RepError::PolygonViolation(
            "Newton polygon dips below the Hodge polygon".into(),
        ));
    }
    if !endpoints_equal {
        return Err(RepError::PolygonViolation("polygon endpoints differ".into()));
    }
    let equal_except_middle = differs.iter().all(|&x| x == datum.n as i64);
    let verdict = PolygonVerdict {
        newton_above: above,
        endpoints_equal,
        differs_at: differs,
        equal_except_middle,
    };
    Ok((newton, hodge, verdict))
}

/// Decidable o hypothesis checks plus echoed assertions. Failures are
/// carried in the report, never raised.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub mslo: bool,
    pub nord: bool,
    pub pos_decidable: bool,
    pub fl: bool,
    pub pol: bool,
    /// The equalities `v(alpha_i) = h_i` for `i <= n-1` forced by (M.Slo)
    /// with purity; checked, never assumed.
    pub derived_slope_equalities: bool,
    pub gpo_asserted: bool,
    pub theta_nontrivial_asserted: bool,
    pub lambda_warning: Option<String>,
    pub messages: Vec<String>,
}

impl HypothesisReport {
    pub fn all_decidable_pass(&self) -> bool {
        self.mslo && self.nord && self.pos_decidable && self.fl && self.derived_slope_equalities
    }

    pub fn named_failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.mslo {
            out.push("(M.Slo)");
        }
        if !self.nord {
            out.push("(N.ord)");
        }
        if !self.pos_decidable {
            out.push("(Pos)");
        }
        if !self.fl {
            out.push("(FL)");
        }
        if !self.derived_slope_equalities {
            out.push("(3.2)");
        }
        out
    }
}

pub fn check_hypotheses(datum: &RepresentationDatum) -> HypothesisReport {
    let n = datum.n;
    let h = &datum.hodge.h;
    let mut messages = Vec::new();
    let mut mslo = true;
    for i1 in (n + 2)..=(2 * n) {
        let v = datum.alpha_valuation(i1);
        if v != Rational::from_integer(h[i1 - 1]) {
            mslo = false;
            messages.push(format!("(M.Slo): v(alpha_{i1}) = {v} != h_{i1} = {}", h[i1 - 1]));
        }
    }
    let mut derived = true;
    for i1 in 1..n {
        let v = datum.alpha_valuation(i1);
        if v != Rational::from_integer(h[i1 - 1]) {
            derived = false;
            messages.push(format!(
                "slope equality: v(alpha_{i1}) = {v} != h_{i1} = {}",
                h[i1 - 1]
            ));
        }
    }
    let va_n = datum.alpha_valuation(n);
    let va_n1 = datum.alpha_valuation(n + 1);
    let hn = Rational::from_integer(h[n - 1]);
    let hn1 = Rational::from_integer(h[n]);
    let distinct = !datum.alphas[n - 1].eq_at(
        &datum.alphas[n],
        datum.alphas[n - 1].aprec().min(datum.alphas[n].aprec()),
    );
    let nord = hn > va_n && hn > va_n1 && va_n > hn1 && va_n1 > hn1 && distinct;
    if !nord {
        messages.push(format!(
            "(N.ord): need h_n > v(alpha_n), v(alpha_(n+1)) > h_(n+1) and distinct alphas; \
             got h_n = {hn}, v = ({va_n}, {va_n1}), h_(n+1) = {hn1}, distinct = {distinct}"
        ));
    }
    let pos_decidable = h[2 * n - 1] >= 0;
    if !pos_decidable {
        messages.push(format!("(Pos): h_2n = {} < 0", h[2 * n - 1]));
    }
    let gap = h[n - 1] - h[n];
    let fl = (datum.prime() as i64) > gap && gap > 1;
    if !fl {
        messages.push(format!("(FL): need p > h_n - h_(n+1) > 1, got gap {gap}"));
    }
    let sum = datum.alphas[n - 1].add(&datum.alphas[n]).expect("same field");
    let pol = sum.is_zero_at_precision();
    if pol && !nord {
        messages.push("(Pol) holds but (N.ord) fails; inputs are inconsistent with the pairing".into());
    }
    HypothesisReport {
        mslo,
        nord,
        pos_decidable,
        fl,
        pol,
        derived_slope_equalities: derived,
        gpo_asserted: datum.gpo_asserted,
        theta_nontrivial_asserted: datum.theta_nontrivial_asserted,
        lambda_warning: datum.lambda_convention_warning(),
        messages,
    }
}

/// The critical window `[h_(n+1) - n + 1, h_n - n]`, inclusive.
pub fn crit_range(hodge: &HodgeData, n: usize) -> (i64, i64) {
    (hodge.h[n] - n as i64 + 1, hodge.h[n - 1] - n as i64)
}

/// Which product of Satake parameters a branch uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `alpha = alpha_(n+1) alpha_(n+2) ... alpha_(2n)`
    Alpha,
    /// `beta = alpha_n alpha_(n+2) ... alpha_(2n)`
    Beta,
}

/// `r_lambda = v(branch product) - sum_{i=n+1}^{2n} h_i`.
pub fn r_lambda(datum: &RepresentationDatum, branch: Branch) -> Rational {
    let n = datum.n;
    let mut v = match branch {
        Branch::Alpha => datum.alpha_valuation(n + 1),
        Branch::Beta => datum.alpha_valuation(n),
    };
    for i1 in (n + 2)..=(2 * n) {
        v += datum.alpha_valuation(i1);
    }
    let h_sum: i64 = datum.hodge.h[n..].iter().sum();
    v - Rational::from_integer(h_sum)
}

/// The branch product itself as a field element.
pub fn branch_product(datum: &RepresentationDatum, branch: Branch) -> Result<PadicElement, RepError> {
    let n = datum.n;
    let mut acc = match branch {
        Branch::Alpha => datum.alphas[n].clone(),
        Branch::Beta => datum.alphas[n - 1].clone(),
    };
    for i1 in (n + 2)..=(2 * n) {
        acc = acc.mul(&datum.alphas[i1 - 1])?;
    }
    Ok(acc)
}

/// `r_lambda < mu_n - mu_(n+1) + 1`, the small-slope sanity bound.
pub fn small_slope_ok(datum: &RepresentationDatum, branch: Branch) -> bool {
    let bound = Rational::from_integer(datum.mu[datum.n - 1] - datum.mu[datum.n] + 1);
    r_lambda(datum, branch) < bound
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// One step of the filtration: the chosen lines, `t_N` as the sum of their
/// slopes and `t_H` as the sum of the first `dim` weights.
#[derive(Debug, Clone, Serialize)]
pub struct FiltrationStep {
    pub index: usize,
    pub dim: usize,
    /// 1-based indices of the eigenlines; the two middle indices appear
    /// together as the 2-dimensional block.
    pub lines: Vec<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub t_n: Rational,
    pub t_h: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiltrationSketch {
    pub steps: Vec<FiltrationStep>,
}

/// The filtration arithmetic: `D_i` for `i = 1..2n` with the two middle
/// steps sharing the 2-dimensional block, and `t_N(D_i) = t_H(D_i)`
/// asserted at every step.
pub fn build_filtration(datum: &RepresentationDatum) -> Result<FiltrationSketch, RepError> {
    let n = datum.n;
    let h = &datum.hodge.h;
    let mut steps = Vec::new();
    for i1 in 1..=2 * n {
        let (dim, lines): (usize, Vec<usize>) = if i1 <= n - 1 {
            (i1, (1..=i1).collect())
        } else if i1 == n || i1 == n + 1 {
            (n + 1, (1..=n + 1).collect())
        } else {
            (i1, (1..=i1).collect())
        };
        let mut t_n = Rational::from_integer(0);
        for &j in &lines {
            t_n += datum.alpha_valuation(j);
        }
        let t_h: i64 = h[..dim].iter().sum();
        if t_n != Rational::from_integer(t_h) {
            return Err(RepError::AdmissibilityFailed(i1));
        }
        steps.push(FiltrationStep {
            index: i1,
            dim,
            lines,
            t_n,
            t_h,
        });
    }
    Ok(FiltrationSketch { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q5() -> PadicField {
        PadicField::make(5, 20, None).unwrap()
    }

    fn el(f: &PadicField, n: i64) -> PadicElement {
        PadicElement::from_integer(f, n)
    }

    /// Flagship instance, Pollack variant: alphas (-p^6, p^3, -p^3, 1).
    pub(crate) fn flagship_pollack(f: &PadicField) -> RepresentationDatum {
        RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![el(f, -15625), el(f, 125), el(f, -125), el(f, 1)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap()
    }

    /// Flagship instance, generic variant: alphas (2 p^6, p^3, 2 p^3, 1).
    pub(crate) fn flagship_generic(f: &PadicField) -> RepresentationDatum {
        RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![el(f, 2 * 15625), el(f, 125), el(f, 250), el(f, 1)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap()
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(hodge_weights(&[0, 0], 1).unwrap().h, vec![1, 0]);
        assert_eq!(hodge_weights(&[3, 2, 1, 0], 2).unwrap().h, vec![6, 4, 2, 0]);
        assert!(matches!(
            hodge_weights(&[0, 1], 1),
            Err(RepError::NotDominant(1))
        ));
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity_check(&[3, 2, 1, 0]).unwrap(), 3);
        assert_eq!(purity_check(&[0, 0]).unwrap(), 0);
        assert!(matches!(purity_check(&[2, 0, 0, 0]), Err(RepError::PurityFailed(_))));
    }

    #[test]
    fn flagship_lambda_valuation() {
        let f = q5();
        let d = flagship_pollack(&f);
        assert_eq!(d.lambda.valuation().unwrap(), Rational::from_integer(6));
        // paper-literal would demand 2n-1-w = 0; warning under that flag
        let mut alt = d.clone();
        alt.lambda_convention = LambdaConvention::PaperLiteral;
        assert!(alt.lambda_convention_warning().is_some());
        assert!(d.lambda_convention_warning().is_none());
    }

    #[test]
    fn pairing_mismatch_rejected() {
        let f = q5();
        let r = RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![el(&f, 15625), el(&f, 125), el(&f, 125), el(&f, 2)],
            true,
            true,
            LambdaConvention::PairingSum,
        );
        assert!(matches!(r, Err(RepError::PairingFailed(_))));
    }

    #[test]
    fn flagship_polygons_differ_at_middle() {
        let f = q5();
        let (newton, hodge, verdict) = polygons(&flagship_pollack(&f)).unwrap();
        assert!(newton.is_valid() && hodge.is_valid());
        assert_eq!(verdict.differs_at, vec![2]);
        assert!(verdict.equal_except_middle);
        // vertex arithmetic from v(alpha) = (6,3,3,0) vs h = (6,4,2,0)
        assert_eq!(newton.value_at(2), Some(Rational::from_integer(3)));
        assert_eq!(hodge.value_at(2), Some(Rational::from_integer(2)));
    }

    #[test]
    fn ordinary_polygons_coincide() {
        let f = q5();
        let d = RepresentationDatum::new(
            f.clone(),
            1,
            vec![0, 0],
            vec![el(&f, 5), el(&f, 1)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        let (_, _, verdict) = polygons(&d).unwrap();
        assert!(verdict.differs_at.is_empty());
    }

    #[test]
    fn newton_below_hodge_rejected() {
        let f = q5();
        // valuations (7,3,3,-1) vs h = (6,4,2,0): Newton at x=1 is -1 < 0
        let neg = PadicElement::from_rational(&f, &BigInt::from(1), &BigInt::from(5)).unwrap();
        let d = RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![el(&f, 5i64.pow(7)), el(&f, 125), el(&f, 125), neg],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        assert!(matches!(polygons(&d), Err(RepError::PolygonViolation(_))));
    }

    #[test]
    fn flagship_hypotheses_pass() {
        let f = q5();
        let rep = check_hypotheses(&flagship_pollack(&f));
        assert!(rep.all_decidable_pass(), "{:?}", rep.messages);
        assert!(rep.pol);
        let rep2 = check_hypotheses(&flagship_generic(&f));
        assert!(rep2.all_decidable_pass(), "{:?}", rep2.messages);
        assert!(!rep2.pol);
    }

    #[test]
    fn mslo_failure_named() {
        let f = q5();
        // v(alpha_4) = 1 != h_4 = 0
        let d = RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![el(&f, 5i64.pow(5)), el(&f, 125), el(&f, 125), el(&f, 5)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        let rep = check_hypotheses(&d);
        assert!(!rep.mslo);
        assert!(rep.named_failures().contains(&"(M.Slo)"));
    }

    #[test]
    fn fl_gap_one_named() {
        // mu = (3,2,2,1): purity w = 4, h = (6,4,3,1), gap 1; alphas in the
        // ramified quadratic with v(alpha_2) = v(alpha_3) = 7/2
        let f = PadicField::make(5, 20, Some(&[-5, 0, 1])).unwrap();
        let y = PadicElement::basis_vector(&f, 1);
        let a2 = y.mul(&el(&f, 125)).unwrap();
        let a3 = a2.neg();
        let d = RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 2, 1],
            vec![el(&f, -(5i64.pow(6))), a2, a3, el(&f, 5)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        let rep = check_hypotheses(&d);
        assert!(!rep.fl);
        assert!(rep.named_failures().contains(&"(FL)"));
        assert!(rep.mslo && rep.nord);
    }

    #[test]
    fn nord_equal_alphas_named() {
        let f = q5();
        let d = RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![el(&f, 15625), el(&f, 125), el(&f, 125), el(&f, 1)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        let rep = check_hypotheses(&d);
        assert!(!rep.nord);
        assert!(rep.named_failures().contains(&"(N.ord)"));
    }

    #[test]
    fn crit_range_examples() {
        let h1 = hodge_weights(&[0, 0], 1).unwrap();
        assert_eq!(crit_range(&h1, 1), (0, 0));
        let h2 = hodge_weights(&[3, 2, 1, 0], 2).unwrap();
        assert_eq!(crit_range(&h2, 2), (1, 2));
        // size equals the weight gap
        assert_eq!(
            crit_range(&h2, 2).1 - crit_range(&h2, 2).0 + 1,
            h2.weight_gap(2)
        );
    }

    #[test]
    fn r_lambda_examples() {
        let f = q5();
        let d = flagship_pollack(&f);
        assert_eq!(r_lambda(&d, Branch::Alpha), Rational::from_integer(1));
        assert_eq!(r_lambda(&d, Branch::Beta), Rational::from_integer(1));
        assert!(small_slope_ok(&d, Branch::Alpha));
        // n=1 with v(alpha_2) = 1/2: r_alpha = 1/2
        let ram = PadicField::make(3, 15, Some(&[-3, 0, 1])).unwrap();
        let y = PadicElement::basis_vector(&ram, 1);
        let d1 = RepresentationDatum::new(
            ram.clone(),
            1,
            vec![0, 0],
            vec![y.clone(), y.neg()],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        assert_eq!(r_lambda(&d1, Branch::Alpha), Rational::new(1, 2));
    }

    #[test]
    fn filtration_flagship() {
        let f = q5();
        let sk = build_filtration(&flagship_pollack(&f)).unwrap();
        // D_2 = D_3 = E_1 + E', t_N = 6 + 6 = 12 = 6 + 4 + 2 = t_H
        let step2 = &sk.steps[1];
        assert_eq!(step2.dim, 3);
        assert_eq!(step2.t_n, Rational::from_integer(12));
        assert_eq!(step2.t_h, 12);
        // endpoint equality
        let last = sk.steps.last().unwrap();
        assert_eq!(last.t_n, Rational::from_integer(last.t_h));
    }

    #[test]
    fn filtration_perturbed_fails_at_middle() {
        let f = q5();
        // valuations (6,4,3,1): step 1 passes (6 = h_1) but
        // v(alpha_2) + v(alpha_3) = 7 != h_2 + h_3 = 6
        let d = RepresentationDatum::new(
            f.clone(),
            2,
            vec![3, 2, 1, 0],
            vec![
                el(&f, 5i64.pow(6)),
                el(&f, 5i64.pow(4)),
                el(&f, 5i64.pow(3)),
                el(&f, 5),
            ],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        assert!(matches!(
            build_filtration(&d),
            Err(RepError::AdmissibilityFailed(2))
        ));
    }

    #[test]
    fn ramified_satake_instance() {
        // GL_2 instance: p = 3, mu = (0,0), alphas y and 2y in Q_3(sqrt 3)
        let f = PadicField::make(3, 15, Some(&[-3, 0, 1])).unwrap();
        let y = PadicElement::from_rational_coords(
            &f,
            &[(BigInt::from(0), BigInt::from(1)), (BigInt::from(1), BigInt::from(1))],
        )
        .unwrap();
        let d = RepresentationDatum::new(
            f.clone(),
            1,
            vec![0, 0],
            vec![y.clone(), y.mul_i64(2)],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        let rep = check_hypotheses(&d);
        assert!(rep.mslo && rep.nord && rep.pos_decidable);
        assert!(!rep.fl); // gap 1
        assert!(!rep.pol);
        let dp = RepresentationDatum::new(
            f.clone(),
            1,
            vec![0, 0],
            vec![y.clone(), y.neg()],
            true,
            true,
            LambdaConvention::PairingSum,
        )
        .unwrap();
        assert!(check_hypotheses(&dp).pol);
    }
}
