//! The block-level matrices: `A` (the Frobenius block on the chosen
//! basis), the change-of-basis `Q` whose columns are the Frobenius
//! eigenvectors, and the logarithmic matrix with its evaluation-contract
//! certificate.
//!
//! The logarithmic matrix is normative only through its contract: at every
//! certified character `chi^j theta` (theta of wild conductor `p^m`,
//! `j = 0..w-1`, `m` on the certificate grid) the rows of `Q^{-1} M''`
//! satisfy `alpha_n^m row_1 = alpha_{n+1}^m row_2`. The explicit
//! antidiagonal half-logarithm block realizes it when
//! `alpha_n + alpha_{n+1} = 0`; the general builder assembles
//! `M'' = Q [[f+, f-], [rho^2 f+, rho^3 f-]]` from partial half-logarithm
//! products with `rho = alpha_n / alpha_{n+1}`, which satisfies the same
//! contract exactly on the grid and degenerates to the antidiagonal block
//! (up to constant units) in the trace-zero case.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::newton::Rational;
use crate::padic::{PadicElement, PadicError, PadicField};
use crate::repdata::RepresentationDatum;
use crate::series::io::{element_from_json, element_to_json, ElementJson, SeriesJson};
use crate::series::{CharacterSpec, SeriesError, SeriesGamma, SeriesGamma1};
use crate::special::{pollack_log, HalfLogSign};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogMatrixError {
    #[error("degenerate alphas: alpha_n = alpha_(n+1)")]
    DegenerateAlphas,
    #[error("Q is singular: {0}")]
    SingularQ(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no convergence at depth {0}")]
    NoConvergence(u32),
    #[error("contract failed at j = {j}, conductor p^{m}")]
    ContractFailed { j: i64, m: u32 },
    #[error("growth mismatch: {0}")]
    GrowthMismatch(String),
    #[error("matrix emitted without a full certificate")]
    UncertifiedMatrix,
    #[error("general and explicit blocks disagree beyond unit factors: {0}")]
    PollackMismatch(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// 2x2 matrix over the coefficient field.
#[derive(Debug, Clone)]
pub struct ElementMat2 {
    pub e: [[PadicElement; 2]; 2],
}

impl ElementMat2 {
    pub fn det(&self) -> Result<PadicElement, PadicError> {
        let ad = self.e[0][0].mul(&self.e[1][1])?;
        let bc = self.e[0][1].mul(&self.e[1][0])?;
        ad.sub(&bc)
    }

    /// `Q^{-1}` via the adjugate.
    pub fn inverse(&self) -> Result<ElementMat2, PadicError> {
        let det_inv = self.det()?.inverse()?;
        Ok(ElementMat2 {
            e: [
                [
                    self.e[1][1].mul(&det_inv)?,
                    self.e[0][1].neg().mul(&det_inv)?,
                ],
                [
                    self.e[1][0].neg().mul(&det_inv)?,
                    self.e[0][0].mul(&det_inv)?,
                ],
            ],
        })
    }

    pub fn mul_mat(&self, other: &ElementMat2) -> Result<ElementMat2, PadicError> {
        let mut rows = Vec::new();
        for i in 0..2 {
            let mut row = Vec::new();
            for j in 0..2 {
                let a = self.e[i][0].mul(&other.e[0][j])?;
                let b = self.e[i][1].mul(&other.e[1][j])?;
                row.push(a.add(&b)?);
            }
            rows.push(row);
        }
        Ok(ElementMat2 {
            e: [
                [rows[0][0].clone(), rows[0][1].clone()],
                [rows[1][0].clone(), rows[1][1].clone()],
            ],
        })
    }
}

/// The Frobenius block `[[0, -p^(2h) (a a')^{-1}], [1, p^h (a^{-1} + a'^{-1})]]`.
#[derive(Debug, Clone)]
pub struct PhiMatrixA {
    pub mat: ElementMat2,
    pub h_n1: i64,
}

/// `[[-p^h a'^{-1} b, -p^h a^{-1} b'], [b, b']]` with unit scalars `b, b'`.
#[derive(Debug, Clone)]
pub struct ChangeBasisQ {
    pub mat: ElementMat2,
    pub beta_n: PadicElement,
    pub beta_n1: PadicElement,
}

/// Build `A` from the two middle Satake parameters and `h_(n+1)`.
pub fn build_a(
    alpha_n: &PadicElement,
    alpha_n1: &PadicElement,
    h_n1: i64,
) -> Result<PhiMatrixA, LogMatrixError> {
    let field = alpha_n.field();
    if alpha_n.eq_at(alpha_n1, alpha_n.aprec().min(alpha_n1.aprec())) {
        return Err(LogMatrixError::DegenerateAlphas);
    }
    let p2h = PadicElement::p_power(field, 2 * h_n1);
    let ph = PadicElement::p_power(field, h_n1);
    let prod_inv = alpha_n.mul(alpha_n1)?.inverse()?;
    let a12 = p2h.mul(&prod_inv)?.neg();
    let trace = ph.mul(&alpha_n.inverse()?.add(&alpha_n1.inverse()?)?)?;
    Ok(PhiMatrixA {
        mat: ElementMat2 {
            e: [
                [PadicElement::zero(field), a12],
                [PadicElement::one(field), trace],
            ],
        },
        h_n1,
    })
}

/// Build `Q`; its columns are `A`-eigenvectors for `p^h/alpha_n` and
/// `p^h/alpha_(n+1)`.
pub fn build_q(
    alpha_n: &PadicElement,
    alpha_n1: &PadicElement,
    h_n1: i64,
    beta_n: &PadicElement,
    beta_n1: &PadicElement,
) -> Result<ChangeBasisQ, LogMatrixError> {
    let field = alpha_n.field();
    for b in [beta_n, beta_n1] {
        match b.valuation() {
            Ok(v) if v == Rational::from_integer(0) => {}
            _ => {
                return Err(LogMatrixError::SingularQ(
                    "beta scalars must be units".into(),
                ))
            }
        }
    }
    if alpha_n.eq_at(alpha_n1, alpha_n.aprec().min(alpha_n1.aprec())) {
        return Err(LogMatrixError::SingularQ("alpha_n = alpha_(n+1)".into()));
    }
    let ph = PadicElement::p_power(field, h_n1);
    let q11 = ph.mul(&alpha_n1.inverse()?)?.mul(beta_n)?.neg();
    let q12 = ph.mul(&alpha_n.inverse()?)?.mul(beta_n1)?.neg();
    let q = ElementMat2 {
        e: [[q11, q12], [beta_n.clone(), beta_n1.clone()]],
    };
    if q.det()?.is_zero_at_precision() {
        return Err(LogMatrixError::SingularQ("determinant vanishes".into()));
    }
    Ok(ChangeBasisQ {
        mat: q,
        beta_n: beta_n.clone(),
        beta_n1: beta_n1.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    PollackExplicit,
    GeneralIterative,
}

/// One row of the contract certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractCheck {
    pub j: i64,
    pub conductor_exp: u32,
    /// Certified lower bound for the residual valuations (4 entries).
    pub residual_vals: Vec<String>,
    /// Certified evaluation precision the residual was checked at.
    pub certified: i64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractCertificate {
    pub checks: Vec<ContractCheck>,
    pub all_passed: bool,
}

/// The triple `(A, Q, M_log')` with provenance and its certificate. The
/// untwisted block `M''` is kept alongside since the contract is stated
/// there.
#[derive(Debug, Clone)]
pub struct LogMatrixPack {
    pub a: PhiMatrixA,
    pub q: ChangeBasisQ,
    pub mlog_dprime: [[SeriesGamma; 2]; 2],
    pub mlog_prime: [[SeriesGamma; 2]; 2],
    pub provenance: Provenance,
    pub certificate: ContractCertificate,
    pub h_n1: i64,
    pub weight_gap: i64,
    /// Computed normalization units in the trace-zero case.
    pub d_plus: Option<PadicElement>,
    pub d_minus: Option<PadicElement>,
}

/// The data the block builders need, extracted from a validated datum.
#[derive(Debug, Clone)]
pub struct BlockData {
    pub field: PadicField,
    pub alpha_n: PadicElement,
    pub alpha_n1: PadicElement,
    pub h_n: i64,
    pub h_n1: i64,
}

impl BlockData {
    pub fn from_datum(d: &RepresentationDatum) -> BlockData {
        BlockData {
            field: d.field.clone(),
            alpha_n: d.alphas[d.n - 1].clone(),
            alpha_n1: d.alphas[d.n].clone(),
            h_n: d.hodge.h[d.n - 1],
            h_n1: d.hodge.h[d.n],
        }
    }

    pub fn weight_gap(&self) -> i64 {
        self.h_n - self.h_n1
    }

    fn is_pollack(&self) -> bool {
        match self.alpha_n.add(&self.alpha_n1) {
            Ok(s) => s.is_zero_at_precision(),
            Err(_) => false,
        }
    }

    /// Gate shared by both builders: `p > h_n - h_(n+1) >= 1`. The strict
    /// Fontaine-Laffaille inequality (gap > 1) is reported by the
    /// hypothesis checker; the elliptic-type gap-1 block is still built.
    fn check_gap(&self) -> Result<(), LogMatrixError> {
        let gap = self.weight_gap();
        if gap < 1 || gap >= self.field.prime() as i64 {
            return Err(LogMatrixError::HypothesisViolated(format!(
                "need p > h_n - h_(n+1) >= 1, got gap {gap} at p = {}",
                self.field.prime()
            )));
        }
        Ok(())
    }
}

/// Construction parameters; `None` depth selects the automatic cutoff.
#[derive(Debug, Clone)]
pub struct BuildParams {
    pub truncation: usize,
    pub depth: Option<u32>,
    /// Stabilization is checked mod `(p^stab_digits, X^stab_len)`.
    pub stab_digits: i64,
    pub stab_len: usize,
    /// Conductor exponents of the certificate grid.
    pub conductors: Vec<u32>,
    pub c_plus: Option<PadicElement>,
    pub c_minus: Option<PadicElement>,
}

impl BuildParams {
    pub fn new(truncation: usize) -> BuildParams {
        BuildParams {
            truncation,
            depth: None,
            stab_digits: 10,
            stab_len: truncation.min(64),
            conductors: vec![2, 3],
            c_plus: None,
            c_minus: None,
        }
    }
}

fn lift_halflog(
    field: &PadicField,
    sign: HalfLogSign,
    m: u32,
    len: usize,
    cutoff: Option<u32>,
) -> Result<SeriesGamma1, LogMatrixError> {
    let base = PadicField::make_with_bound(field.prime(), field.precision(), None, 1)
        .expect("base field");
    let s = pollack_log(&base, sign, m, len, cutoff)?;
    Ok(s.lift_to(field)?)
}

/// The explicit antidiagonal block `[[0, c- log-], [c+ log+, 0]]` with
/// `log± = log±_{p, h_n - h_(n+1)}`.
pub fn build_logmatrix_pollack(
    data: &BlockData,
    params: &BuildParams,
) -> Result<LogMatrixPack, LogMatrixError> {
    data.check_gap()?;
    if !data.is_pollack() {
        return Err(LogMatrixError::HypothesisViolated(
            "alpha_n + alpha_(n+1) != 0".into(),
        ));
    }
    let w = data.weight_gap() as u32;
    let field = &data.field;
    let c_plus = params
        .c_plus
        .clone()
        .unwrap_or_else(|| PadicElement::one(field));
    let c_minus = params
        .c_minus
        .clone()
        .unwrap_or_else(|| PadicElement::one(field));
    let log_plus = lift_halflog(field, HalfLogSign::Plus, w, params.truncation, params.depth)?;
    let log_minus = lift_halflog(field, HalfLogSign::Minus, w, params.truncation, params.depth)?;
    let zero = SeriesGamma::from_gamma1(&SeriesGamma1::zero(field, params.truncation));
    let m12 = SeriesGamma::from_gamma1(&log_minus.scale(&c_minus)?);
    let m21 = SeriesGamma::from_gamma1(&log_plus.scale(&c_plus)?);
    let mlog_dprime = [[zero.clone(), m12], [m21, zero]];
    finalize_pack(
        data,
        params,
        mlog_dprime,
        Provenance::PollackExplicit,
        Some((c_plus, c_minus)),
    )
}

/// The general builder: partial half-logarithm products assembled through
/// the eigenvector matrix, validated by stabilization, growth targets and
/// the evaluation contract. Requires `v(alpha_n) = v(alpha_(n+1))`; the
/// unequal-slope case has no bounded template on this side of the theory
/// and is refused with `GrowthMismatch`.
pub fn build_logmatrix_general(
    data: &BlockData,
    params: &BuildParams,
) -> Result<LogMatrixPack, LogMatrixError> {
    data.check_gap()?;
    let field = &data.field;
    let va = alpha_val(&data.alpha_n)?;
    let vb = alpha_val(&data.alpha_n1)?;
    let h_n = Rational::from_integer(data.h_n);
    let h_n1 = Rational::from_integer(data.h_n1);
    if !(h_n > va && h_n > vb && va > h_n1 && vb > h_n1) {
        return Err(LogMatrixError::HypothesisViolated(
            "middle slopes must lie strictly between h_(n+1) and h_n".into(),
        ));
    }
    if va != vb {
        return Err(LogMatrixError::GrowthMismatch(format!(
            "unequal middle slopes {va} and {vb}: no bounded general template"
        )));
    }
    let w = data.weight_gap() as u32;
    let assemble = |cutoff: Option<u32>| -> Result<[[SeriesGamma; 2]; 2], LogMatrixError> {
        let f_plus = lift_halflog(field, HalfLogSign::Plus, w, params.truncation, cutoff)?;
        let f_minus = lift_halflog(field, HalfLogSign::Minus, w, params.truncation, cutoff)?;
        let rho = data.alpha_n.div(&data.alpha_n1)?;
        let rho2 = rho.mul(&rho)?;
        let rho3 = rho2.mul(&rho)?;
        let q = build_q(
            &data.alpha_n,
            &data.alpha_n1,
            data.h_n1,
            &PadicElement::one(field),
            &PadicElement::one(field),
        )?;
        // M'' = Q [[f+, f-], [rho^2 f+, rho^3 f-]]
        let core = [
            [f_plus.clone(), f_minus.clone()],
            [f_plus.scale(&rho2)?, f_minus.scale(&rho3)?],
        ];
        let mut rows = Vec::new();
        for i in 0..2 {
            let mut row = Vec::new();
            for j in 0..2 {
                let t1 = core[0][j].scale(&q.mat.e[i][0])?;
                let t2 = core[1][j].scale(&q.mat.e[i][1])?;
                row.push(SeriesGamma::from_gamma1(&t1.add(&t2)?));
            }
            rows.push(row);
        }
        Ok([
            [rows[0][0].clone(), rows[0][1].clone()],
            [rows[1][0].clone(), rows[1][1].clone()],
        ])
    };
    // stabilization: successive iterates agree mod (p^stab_digits, X^stab_len)
    let (depth_lo, depth_hi) = match params.depth {
        Some(d) => (Some(d), Some(d + 2)),
        None => (None, None),
    };
    let m_lo = assemble(depth_lo).map_err(|e| match e {
        LogMatrixError::Series(SeriesError::CutoffInsufficient(_, _)) => {
            LogMatrixError::NoConvergence(depth_lo.unwrap_or(0))
        }
        e => e,
    })?;
    if let Some(d) = depth_lo {
        let m_hi = assemble(depth_hi).map_err(|e| match e {
            LogMatrixError::Series(SeriesError::CutoffInsufficient(_, _)) => {
                LogMatrixError::NoConvergence(d)
            }
            e => e,
        })?;
        for i in 0..2 {
            for j in 0..2 {
                let a = m_lo[i][j].component(0).truncate(params.stab_len);
                let b = m_hi[i][j].component(0).truncate(params.stab_len);
                let diff = a.sub(&b)?;
                for k in 0..diff.truncation() {
                    let c = diff.coeff(k);
                    if !c.is_zero_at(params.stab_digits.min(c.aprec())) {
                        return Err(LogMatrixError::NoConvergence(d));
                    }
                }
            }
        }
    }
    let pack = finalize_pack(data, params, m_lo, Provenance::GeneralIterative, None)?;
    if data.is_pollack() {
        // cross-validation against the explicit block, entrywise up to
        // certified unit series
        let explicit = build_logmatrix_pollack(data, params)?;
        pollack_agreement(&pack, &explicit)?;
    }
    Ok(pack)
}

fn alpha_val(a: &PadicElement) -> Result<Rational, LogMatrixError> {
    a.valuation()
        .map_err(|_| LogMatrixError::HypothesisViolated("alpha is zero at precision".into()))
}

/// Entrywise twist of `M''` into `M'`. Under the engine orientation the
/// audit window `k in [h_(n+1), h_n - 1]` on `M'` reduces to the contract
/// window `j = k - h_(n+1) in [0, w-1]` on `M''`, so the operator composes
/// `X -> u^{-h}(1+X) - 1` with the matching tame index shift.
pub fn twist_to_prime(
    m: &[[SeriesGamma; 2]; 2],
    h_n1: i64,
) -> Result<[[SeriesGamma; 2]; 2], LogMatrixError> {
    let mut rows = Vec::new();
    for mi in m {
        let mut row = Vec::new();
        for mij in mi {
            row.push(mij.twist(-h_n1)?);
        }
        rows.push(row);
    }
    Ok([
        [rows[0][0].clone(), rows[0][1].clone()],
        [rows[1][0].clone(), rows[1][1].clone()],
    ])
}

/// Evaluate `Q^{-1} M''` at `chi^j theta` and verify
/// `alpha_n^m row_1 = alpha_{n+1}^m row_2` entrywise at certified
/// precision.
pub fn check_contract(
    q: &ChangeBasisQ,
    mlog_dprime: &[[SeriesGamma; 2]; 2],
    alpha_n: &PadicElement,
    alpha_n1: &PadicElement,
    j: i64,
    theta: &CharacterSpec,
) -> Result<ContractCheck, LogMatrixError> {
    let m_exp = theta.m;
    if m_exp < 2 {
        return Err(LogMatrixError::HypothesisViolated(
            "contract characters need wild conductor exponent >= 2".into(),
        ));
    }
    let chi = CharacterSpec::new(j, theta.d, theta.m, theta.c);
    // evaluate the four entries
    let mut vals = Vec::new();
    for row in mlog_dprime {
        for entry in row {
            vals.push(entry.evaluate(&chi)?);
        }
    }
    let ext = vals[0].field().clone();
    let q_inv = q.mat.inverse()?;
    let lift = |x: &PadicElement| x.lift_to(&ext).map_err(LogMatrixError::Padic);
    let qi = [
        [lift(&q_inv.e[0][0])?, lift(&q_inv.e[0][1])?],
        [lift(&q_inv.e[1][0])?, lift(&q_inv.e[1][1])?],
    ];
    // R = Q^{-1} M(chi)
    let m_at = [[&vals[0], &vals[1]], [&vals[2], &vals[3]]];
    let mut r = Vec::new();
    for qrow in &qi {
        for col in 0..2 {
            let t = qrow[0].mul(m_at[0][col])?.add(&qrow[1].mul(m_at[1][col])?)?;
            r.push(t);
        }
    }
    let an_m = lift(alpha_n)?.pow_i64(m_exp as i64)?;
    let an1_m = lift(alpha_n1)?.pow_i64(m_exp as i64)?;
    let mut residual_vals = Vec::new();
    let mut certified = i64::MAX;
    let mut passed = true;
    for col in 0..2 {
        let lhs = an_m.mul(&r[col])?;
        let rhs = an1_m.mul(&r[2 + col])?;
        let diff = lhs.sub(&rhs)?;
        certified = certified.min(diff.aprec());
        if !diff.is_zero_at_precision() {
            passed = false;
        }
        let v = diff.val_lb();
        residual_vals.push(format!("{}/{}", v.numer(), v.denom()));
    }
    Ok(ContractCheck {
        j,
        conductor_exp: m_exp,
        residual_vals,
        certified,
        passed,
    })
}

/// Run the full certificate grid: every `j in 0..w-1` and every conductor
/// exponent in `params.conductors`.
pub fn certify(
    q: &ChangeBasisQ,
    mlog_dprime: &[[SeriesGamma; 2]; 2],
    alpha_n: &PadicElement,
    alpha_n1: &PadicElement,
    weight_gap: i64,
    conductors: &[u32],
) -> Result<ContractCertificate, LogMatrixError> {
    let mut checks = Vec::new();
    let mut all = true;
    for &m in conductors {
        for j in 0..weight_gap {
            let theta = CharacterSpec::new(0, 0, m, 1);
            let check = check_contract(q, mlog_dprime, alpha_n, alpha_n1, j, &theta)?;
            all &= check.passed;
            checks.push(check);
        }
    }
    Ok(ContractCertificate {
        checks,
        all_passed: all,
    })
}

fn finalize_pack(
    data: &BlockData,
    params: &BuildParams,
    mlog_dprime: [[SeriesGamma; 2]; 2],
    provenance: Provenance,
    c_units: Option<(PadicElement, PadicElement)>,
) -> Result<LogMatrixPack, LogMatrixError> {
    let field = &data.field;
    let q = build_q(
        &data.alpha_n,
        &data.alpha_n1,
        data.h_n1,
        &PadicElement::one(field),
        &PadicElement::one(field),
    )?;
    let a = build_a(&data.alpha_n, &data.alpha_n1, data.h_n1)?;
    let w = data.weight_gap();
    let certificate = certify(
        &q,
        &mlog_dprime,
        &data.alpha_n,
        &data.alpha_n1,
        w,
        &params.conductors,
    )?;
    if !certificate.all_passed {
        let bad = certificate.checks.iter().find(|c| !c.passed).unwrap();
        return Err(LogMatrixError::ContractFailed {
            j: bad.j,
            m: bad.conductor_exp,
        });
    }
    // growth check: rows of Q^{-1} M'' against ord(alpha_i) - h_(n+1)
    let q_inv = q.mat.inverse()?;
    let tol = Rational::new(15, 100);
    for i in 0..2 {
        let target = match i {
            0 => alpha_val(&data.alpha_n)? - Rational::from_integer(data.h_n1),
            _ => alpha_val(&data.alpha_n1)? - Rational::from_integer(data.h_n1),
        };
        for jcol in 0..2 {
            let entry = mlog_dprime[0][jcol]
                .component(0)
                .scale(&q_inv.e[i][0])?
                .add(&mlog_dprime[1][jcol].component(0).scale(&q_inv.e[i][1])?)?;
            if entry.is_zero_at_precision() {
                continue;
            }
            let r_hat = entry.growth_profile().r_hat;
            if r_hat > target + tol {
                return Err(LogMatrixError::GrowthMismatch(format!(
                    "row {} profile {r_hat} exceeds target {target} + 0.15",
                    i + 1
                )));
            }
        }
    }
    let mlog_prime = twist_to_prime(&mlog_dprime, data.h_n1)?;
    // computed d-units in the trace-zero case: row_1 of Q^{-1}M'' is
    // ((1/2) d+ log+, (1/2) d- log-)
    let (d_plus, d_minus) = match c_units {
        Some((c_plus, c_minus)) if data.is_pollack() => {
            let ph_inv = PadicElement::p_power(field, -data.h_n1);
            let dm = data.alpha_n.mul(&ph_inv)?.mul(&c_minus)?;
            (Some(c_plus), Some(dm))
        }
        None if data.is_pollack() => {
            let two = PadicElement::from_integer(field, 2);
            let ph_inv = PadicElement::p_power(field, -data.h_n1);
            let dm = data.alpha_n.mul(&ph_inv)?.mul(&two)?;
            (Some(two), Some(dm))
        }
        _ => (None, None),
    };
    Ok(LogMatrixPack {
        a,
        q,
        mlog_dprime,
        mlog_prime,
        provenance,
        certificate,
        h_n1: data.h_n1,
        weight_gap: w,
        d_plus,
        d_minus,
    })
}

/// Certified-unit comparison: `general = unit * explicit` entrywise, with
/// the unit and its inverse bounded at working precision. Zero entries
/// must be zero on both sides.
pub fn pollack_agreement(
    general: &LogMatrixPack,
    explicit: &LogMatrixPack,
) -> Result<Vec<Option<SeriesGamma1>>, LogMatrixError> {
    let mut units = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let g = general.mlog_dprime[i][j].component(0);
            let e = explicit.mlog_dprime[i][j].component(0);
            match (g.is_zero_at_precision(), e.is_zero_at_precision()) {
                (true, true) => units.push(None),
                (false, false) => {
                    let (ratio, _) = g.divide(e).map_err(|err| {
                        LogMatrixError::PollackMismatch(format!("entry ({i},{j}): {err}"))
                    })?;
                    // The division already verified g = ratio * e at the
                    // recorded precision. The unit certificate then asks
                    // that the distinguishable part of the quotient is a
                    // bounded series with bounded inverse and a nonzero
                    // constant term — a unit at working precision.
                    let unit = ratio.visible_part();
                    let unit_ok = !unit.coeff(0).is_zero_at_precision();
                    let bounded = unit.growth_profile().r_hat <= Rational::new(15, 100);
                    let inv_ok = SeriesGamma1::one(g.field(), unit.truncation())
                        .divide(&unit)
                        .map(|(inv, _)| {
                            inv.visible_part().growth_profile().r_hat <= Rational::new(15, 100)
                        })
                        .unwrap_or(false);
                    if !(unit_ok && bounded && inv_ok) {
                        return Err(LogMatrixError::PollackMismatch(format!(
                            "entry ({i},{j}) ratio is not a certified unit"
                        )));
                    }
                    units.push(Some(unit));
                }
                _ => {
                    return Err(LogMatrixError::PollackMismatch(format!(
                        "entry ({i},{j}) zero on one side only"
                    )))
                }
            }
        }
    }
    Ok(units)
}

// ---- JSON form ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogMatrixJson {
    pub provenance: Provenance,
    pub h_n1: i64,
    pub weight_gap: i64,
    pub alpha_n: ElementJson,
    pub alpha_n1: ElementJson,
    pub entries_prime: Vec<SeriesJson>,
    pub entries_dprime: Vec<SeriesJson>,
    pub certificate: ContractCertificate,
}

pub fn pack_to_json(pack: &LogMatrixPack, data: &BlockData) -> Result<LogMatrixJson, SeriesError> {
    let ser = |m: &[[SeriesGamma; 2]; 2]| -> Result<Vec<SeriesJson>, SeriesError> {
        let mut out = Vec::new();
        for row in m {
            for e in row {
                out.push(crate::series::io::series_to_json(e, None)?);
            }
        }
        Ok(out)
    };
    Ok(LogMatrixJson {
        provenance: pack.provenance,
        h_n1: pack.h_n1,
        weight_gap: pack.weight_gap,
        alpha_n: element_to_json(&data.alpha_n)?,
        alpha_n1: element_to_json(&data.alpha_n1)?,
        entries_prime: ser(&pack.mlog_prime)?,
        entries_dprime: ser(&pack.mlog_dprime)?,
        certificate: pack.certificate.clone(),
    })
}

pub fn pack_from_json(
    field: &PadicField,
    j: &LogMatrixJson,
) -> Result<(LogMatrixPack, BlockData), LogMatrixError> {
    let de = |items: &[SeriesJson]| -> Result<[[SeriesGamma; 2]; 2], SeriesError> {
        let mut v = Vec::new();
        for item in items {
            v.push(crate::series::io::series_from_json(item)?);
        }
        Ok([
            [v[0].clone(), v[1].clone()],
            [v[2].clone(), v[3].clone()],
        ])
    };
    let alpha_n = element_from_json(field, &j.alpha_n)?;
    let alpha_n1 = element_from_json(field, &j.alpha_n1)?;
    let data = BlockData {
        field: field.clone(),
        alpha_n: alpha_n.clone(),
        alpha_n1: alpha_n1.clone(),
        h_n: j.h_n1 + j.weight_gap,
        h_n1: j.h_n1,
    };
    let q = build_q(
        &alpha_n,
        &alpha_n1,
        j.h_n1,
        &PadicElement::one(field),
        &PadicElement::one(field),
    )?;
    let a = build_a(&alpha_n, &alpha_n1, j.h_n1)?;
    if !j.certificate.all_passed {
        return Err(LogMatrixError::UncertifiedMatrix);
    }
    let pack = LogMatrixPack {
        a,
        q,
        mlog_dprime: de(&j.entries_dprime)?,
        mlog_prime: de(&j.entries_prime)?,
        provenance: j.provenance,
        certificate: j.certificate.clone(),
        h_n1: j.h_n1,
        weight_gap: j.weight_gap,
        d_plus: None,
        d_minus: None,
    };
    Ok((pack, data))
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

    fn flagship_pollack_block(f: &PadicField) -> BlockData {
        BlockData {
            field: f.clone(),
            alpha_n: el(f, 125),
            alpha_n1: el(f, -125),
            h_n: 4,
            h_n1: 2,
        }
    }

    fn flagship_generic_block(f: &PadicField) -> BlockData {
        BlockData {
            field: f.clone(),
            alpha_n: el(f, 125),
            alpha_n1: el(f, 250),
            h_n: 4,
            h_n1: 2,
        }
    }

    #[test]
    fn a_matrix_pollack_shape() {
        let f = q5();
        let a = build_a(&el(&f, 125), &el(&f, -125), 2).unwrap();
        // A = [[0, p^4 alpha^-2], [1, 0]]
        assert!(a.mat.e[0][0].is_zero_at_precision());
        assert!(a.mat.e[1][1].is_zero_at_precision());
        let expect = PadicElement::from_rational(&f, &BigInt::from(625), &BigInt::from(125 * 125))
            .unwrap();
        assert_eq!(a.mat.e[0][1], expect);
        // det A = p^(2h) (alpha_n alpha_(n+1))^{-1}
        let det = a.mat.det().unwrap();
        let expect_det =
            PadicElement::from_rational(&f, &BigInt::from(-625), &BigInt::from(15625)).unwrap();
        assert_eq!(det, expect_det);
    }

    #[test]
    fn a_matrix_elliptic_analog() {
        // n = 1, h = (1, 0): h_2 = 0 so no p-powers appear
        let f = PadicField::make(3, 15, Some(&[-3, 0, 1])).unwrap();
        let y = PadicElement::basis_vector(&f, 1);
        let a = build_a(&y, &y.mul_i64(2), 0).unwrap();
        let prod_inv = y.mul(&y.mul_i64(2)).unwrap().inverse().unwrap();
        assert_eq!(a.mat.e[0][1], prod_inv.neg());
    }

    #[test]
    fn degenerate_alphas_rejected() {
        let f = q5();
        assert!(matches!(
            build_a(&el(&f, 125), &el(&f, 125), 2),
            Err(LogMatrixError::DegenerateAlphas)
        ));
    }

    #[test]
    fn q_matrix_pollack_and_det() {
        let f = q5();
        let one = PadicElement::one(&f);
        let q = build_q(&el(&f, 125), &el(&f, -125), 2, &one, &one).unwrap();
        // Q = [[p^2/125, -p^2/125], [1, 1]]
        let expect = PadicElement::from_rational(&f, &BigInt::from(25), &BigInt::from(125)).unwrap();
        assert_eq!(q.mat.e[0][0], expect);
        assert_eq!(q.mat.e[0][1], expect.neg());
        // det = 2 p^h alpha_n^{-1}
        let det = q.mat.det().unwrap();
        let expect_det =
            PadicElement::from_rational(&f, &BigInt::from(50), &BigInt::from(125)).unwrap();
        assert_eq!(det, expect_det);
    }

    #[test]
    fn q_columns_are_a_eigenvectors() {
        let f = q5();
        let one = PadicElement::one(&f);
        let data = flagship_generic_block(&f);
        let a = build_a(&data.alpha_n, &data.alpha_n1, data.h_n1).unwrap();
        let q = build_q(&data.alpha_n, &data.alpha_n1, data.h_n1, &one, &one).unwrap();
        for (col, alpha) in [(0usize, &data.alpha_n), (1usize, &data.alpha_n1)] {
            let v0 = &q.mat.e[0][col];
            let v1 = &q.mat.e[1][col];
            let av0 = a.mat.e[0][0].mul(v0).unwrap().add(&a.mat.e[0][1].mul(v1).unwrap()).unwrap();
            let av1 = a.mat.e[1][0].mul(v0).unwrap().add(&a.mat.e[1][1].mul(v1).unwrap()).unwrap();
            let lam = PadicElement::p_power(&f, data.h_n1).mul(&alpha.inverse().unwrap()).unwrap();
            assert_eq!(av0, lam.mul(v0).unwrap(), "col {col}");
            assert_eq!(av1, lam.mul(v1).unwrap(), "col {col}");
        }
    }

    #[test]
    fn singular_q_rejected() {
        let f = q5();
        let one = PadicElement::one(&f);
        assert!(matches!(
            build_q(&el(&f, 125), &el(&f, 125), 2, &one, &one),
            Err(LogMatrixError::SingularQ(_))
        ));
    }

    #[test]
    fn pollack_block_certifies() {
        let f = q5();
        let params = BuildParams::new(200);
        let pack = build_logmatrix_pollack(&flagship_pollack_block(&f), &params).unwrap();
        assert!(pack.certificate.all_passed);
        assert_eq!(pack.provenance, Provenance::PollackExplicit);
        // det of the antidiagonal block is -c+ c- log+ log-
        let det = SeriesGamma::det2(&pack.mlog_dprime).unwrap();
        let lp = lift_halflog(&f, HalfLogSign::Plus, 2, 200, None).unwrap();
        let lm = lift_halflog(&f, HalfLogSign::Minus, 2, 200, None).unwrap();
        let expect = SeriesGamma::from_gamma1(&lp.mul(&lm).unwrap()).neg();
        assert!(det.eq_at_precision(&expect));
    }

    #[test]
    fn pollack_requires_trace_zero() {
        let f = q5();
        let params = BuildParams::new(100);
        assert!(matches!(
            build_logmatrix_pollack(&flagship_generic_block(&f), &params),
            Err(LogMatrixError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn general_block_certifies_on_generic_input() {
        let f = q5();
        let params = BuildParams::new(200);
        let pack = build_logmatrix_general(&flagship_generic_block(&f), &params).unwrap();
        assert!(pack.certificate.all_passed);
        assert_eq!(pack.provenance, Provenance::GeneralIterative);
    }

    #[test]
    fn general_matches_pollack_up_to_units() {
        let f = q5();
        let params = BuildParams::new(200);
        // the builder runs the agreement check internally on trace-zero input
        let pack = build_logmatrix_general(&flagship_pollack_block(&f), &params).unwrap();
        // and the result is antidiagonal
        assert!(pack.mlog_dprime[0][0].is_zero_at_precision());
        assert!(pack.mlog_dprime[1][1].is_zero_at_precision());
    }

    #[test]
    fn shallow_depth_no_convergence() {
        let f = q5();
        let mut params = BuildParams::new(200);
        params.depth = Some(3);
        assert!(matches!(
            build_logmatrix_general(&flagship_generic_block(&f), &params),
            Err(LogMatrixError::NoConvergence(_))
        ));
    }

    #[test]
    fn corrupted_entry_fails_contract() {
        let f = q5();
        let params = BuildParams::new(200);
        let pack = build_logmatrix_pollack(&flagship_pollack_block(&f), &params).unwrap();
        let mut bad = pack.mlog_dprime.clone();
        // perturb one entry by p^{-1}
        let bump = SeriesGamma::from_gamma1(&SeriesGamma1::constant(
            &f,
            PadicElement::p_power(&f, -1),
            200,
        ));
        bad[0][1] = bad[0][1].add(&bump).unwrap();
        let data = flagship_pollack_block(&f);
        let cert = certify(
            &pack.q,
            &bad,
            &data.alpha_n,
            &data.alpha_n1,
            2,
            &[2, 3],
        )
        .unwrap();
        assert!(!cert.all_passed);
    }

    #[test]
    fn twist_to_prime_identity_when_h_zero() {
        let f = q5();
        let s = SeriesGamma::from_gamma1(&SeriesGamma1::monomial(&f, 1, 12));
        let z = SeriesGamma::from_gamma1(&SeriesGamma1::zero(&f, 12));
        let m = [[s.clone(), z.clone()], [z.clone(), s.clone()]];
        let t = twist_to_prime(&m, 0).unwrap();
        assert!(t[0][0].eq_at_precision(&s));
    }

    #[test]
    fn gl2_block_gap_one_builds() {
        // p = 3, n = 1, h = (1, 0): the elliptic-type gap-1 block is
        // accepted by the builders even though strict (FL) fails
        let f = PadicField::make(3, 15, Some(&[-3, 0, 1])).unwrap();
        let y = PadicElement::basis_vector(&f, 1);
        let data = BlockData {
            field: f.clone(),
            alpha_n: y.clone(),
            alpha_n1: y.neg(),
            h_n: 1,
            h_n1: 0,
        };
        let params = BuildParams::new(81);
        let pack = build_logmatrix_pollack(&data, &params).unwrap();
        assert!(pack.certificate.all_passed);
        let generic = BlockData {
            field: f.clone(),
            alpha_n: y.clone(),
            alpha_n1: y.mul_i64(2),
            h_n: 1,
            h_n1: 0,
        };
        let pack2 = build_logmatrix_general(&generic, &params).unwrap();
        assert!(pack2.certificate.all_passed);
    }
}

