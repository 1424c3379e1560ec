//! JSON forms of elements and series. Digits are little-endian base-p
//! strings per basis coordinate with precision annotations; round trips
//! are bit-exact on canonical representations.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::newton::Rational;
use crate::padic::{ExtensionStep, PadicElement, PadicField, StepKind};

use super::{SeriesError, SeriesGamma, SeriesGamma1, TailModel};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ElementJson {
    pub digits: Vec<String>,
    pub shift: i64,
    pub aprec: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StepJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldJson {
    pub e: i64,
    pub f: i64,
    #[serde(default)]
    pub g: Vec<StepJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeriesJson {
    pub p: u64,
    pub precision: i64,
    pub truncation: usize,
    pub field: FieldJson,
    pub components: Vec<Vec<ElementJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_intercept: Option<String>,
    #[serde(default)]
    pub exact_tail: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparse: Option<bool>,
}

fn fmt_err(msg: impl Into<String>) -> SeriesError {
    SeriesError::BadCharacter(msg.into())
}

fn digits_of(x: &BigUint, p: u64, len: usize) -> Result<String, SeriesError> {
    if p > 36 {
        return Err(fmt_err("digit strings support p <= 36"));
    }
    let mut out = String::with_capacity(len);
    let p_big = BigUint::from(p);
    let mut cur = x.clone();
    for _ in 0..len {
        let d = (&cur % &p_big).to_u32_digits().first().copied().unwrap_or(0);
        out.push(std::char::from_digit(d, 36).unwrap());
        cur /= &p_big;
    }
    Ok(out)
}

fn digits_parse(s: &str, p: u64) -> Result<BigUint, SeriesError> {
    let mut acc = BigUint::zero();
    let p_big = BigUint::from(p);
    for ch in s.chars().rev() {
        let d = ch
            .to_digit(36)
            .filter(|&d| (d as u64) < p)
            .ok_or_else(|| fmt_err(format!("bad base-{p} digit '{ch}'")))?;
        acc = acc * &p_big + BigUint::from(d);
    }
    Ok(acc)
}

pub fn element_to_json(x: &PadicElement) -> Result<ElementJson, SeriesError> {
    let c = x.canonicalize();
    let p = c.field().prime();
    let len = (c.aprec() + c.shift()).max(0) as usize;
    let digits: Result<Vec<String>, _> = c.coeffs().iter().map(|d| digits_of(d, p, len)).collect();
    Ok(ElementJson {
        digits: digits?,
        shift: c.shift(),
        aprec: c.aprec(),
    })
}

pub fn element_from_json(field: &PadicField, e: &ElementJson) -> Result<PadicElement, SeriesError> {
    if e.digits.len() != field.degree() {
        return Err(fmt_err(format!(
            "expected {} coordinates, found {}",
            field.degree(),
            e.digits.len()
        )));
    }
    let p = field.prime();
    let coeffs: Result<Vec<BigUint>, _> = e.digits.iter().map(|s| digits_parse(s, p)).collect();
    Ok(PadicElement::from_raw(field, e.shift, coeffs?, e.aprec))
}

fn rational_to_string(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rational_from_string(s: &str) -> Result<Rational, SeriesError> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n.trim().parse().map_err(|_| fmt_err(format!("bad rational '{s}'")))?;
    let d: i64 = d.trim().parse().map_err(|_| fmt_err(format!("bad rational '{s}'")))?;
    if d == 0 {
        return Err(fmt_err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

pub fn field_to_json(field: &PadicField) -> FieldJson {
    FieldJson {
        e: field.ramification_index(),
        f: field.residue_degree(),
        g: field
            .steps()
            .iter()
            .map(|s| StepJson {
                kind: match s.kind {
                    StepKind::Unramified => "unramified".into(),
                    StepKind::Eisenstein => "eisenstein".into(),
                    StepKind::Cyclotomic { .. } => "cyclotomic".into(),
                },
                level: match s.kind {
                    StepKind::Cyclotomic { level } => Some(level),
                    _ => None,
                },
                coeffs: s.minpoly.iter().map(|c| c.to_string()).collect(),
            })
            .collect(),
    }
}

pub fn field_from_json(p: u64, precision: i64, fj: &FieldJson) -> Result<PadicField, SeriesError> {
    let mut steps = Vec::new();
    for sj in &fj.g {
        let minpoly: Result<Vec<BigInt>, _> = sj
            .coeffs
            .iter()
            .map(|c| c.parse::<BigInt>().map_err(|_| fmt_err(format!("bad coefficient '{c}'"))))
            .collect();
        let minpoly = minpoly?;
        let degree = minpoly.len().saturating_sub(1);
        if degree == 0 {
            return Err(fmt_err("step polynomial must have positive degree"));
        }
        let (kind, root_valuation) = match sj.kind.as_str() {
            "unramified" => (StepKind::Unramified, Rational::from_integer(0)),
            "eisenstein" => (StepKind::Eisenstein, Rational::new(1, degree as i64)),
            "cyclotomic" => {
                let level = sj.level.ok_or_else(|| fmt_err("cyclotomic step without level"))?;
                (StepKind::Cyclotomic { level }, Rational::new(1, degree as i64))
            }
            other => return Err(fmt_err(format!("unknown step kind '{other}'"))),
        };
        steps.push(ExtensionStep {
            kind,
            minpoly,
            degree,
            root_valuation,
        });
    }
    Ok(PadicField::from_steps(p, precision, steps))
}

pub fn series_to_json(s: &SeriesGamma, name: Option<&str>) -> Result<SeriesJson, SeriesError> {
    let field = s.field();
    let (growth, intercept, exact) = match s.components()[0].tail() {
        TailModel::Zero => (None, None, true),
        TailModel::Growth { r, c } => (
            Some(rational_to_string(*r)),
            Some(rational_to_string(*c)),
            false,
        ),
        TailModel::Unknown => (None, None, false),
    };
    let components: Result<Vec<Vec<ElementJson>>, _> = s
        .components()
        .iter()
        .map(|c| c.coeffs().iter().map(element_to_json).collect())
        .collect();
    Ok(SeriesJson {
        p: field.prime(),
        precision: field.precision(),
        truncation: s.truncation(),
        field: field_to_json(field),
        components: components?,
        growth,
        growth_intercept: intercept,
        exact_tail: exact,
        name: name.map(String::from),
        sparse: Some(s.is_diagonal()),
    })
}

pub fn series_from_json(j: &SeriesJson) -> Result<SeriesGamma, SeriesError> {
    let field = field_from_json(j.p, j.precision, &j.field)?;
    let tail = if j.exact_tail {
        TailModel::Zero
    } else {
        match (&j.growth, &j.growth_intercept) {
            (Some(r), Some(c)) => TailModel::Growth {
                r: rational_from_string(r)?,
                c: rational_from_string(c)?,
            },
            _ => TailModel::Unknown,
        }
    };
    let mut components = Vec::with_capacity(j.components.len());
    for comp in &j.components {
        let coeffs: Result<Vec<PadicElement>, _> =
            comp.iter().map(|e| element_from_json(&field, e)).collect();
        components.push(SeriesGamma1::new(field.clone(), coeffs?, tail.clone()));
    }
    SeriesGamma::new(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicElement;

    #[test]
    fn element_round_trip() {
        let f = PadicField::make(5, 12, Some(&[-5, 0, 1])).unwrap();
        let x = PadicElement::from_rational_coords(
            &f,
            &[
                (BigInt::from(7), BigInt::from(2)),
                (BigInt::from(-3), BigInt::from(1)),
            ],
        )
        .unwrap();
        let j = element_to_json(&x).unwrap();
        let back = element_from_json(&f, &j).unwrap();
        assert_eq!(back, x);
        // bit exactness: serializing again gives identical JSON
        let j2 = element_to_json(&back).unwrap();
        assert_eq!(j, j2);
    }

    #[test]
    fn series_round_trip_bit_exact() {
        let f = PadicField::make(3, 10, None).unwrap();
        let mut s1 = SeriesGamma1::zero(&f, 6);
        for k in 0..6 {
            s1.coeffs_mut()[k] = PadicElement::from_integer(&f, 7 * k as i64 - 4);
        }
        let s1 = s1.with_tail(TailModel::Growth {
            r: Rational::new(1, 2),
            c: Rational::from_integer(-1),
        });
        let s = SeriesGamma::from_gamma1(&s1);
        let j = series_to_json(&s, Some("test")).unwrap();
        let text = serde_json::to_string(&j).unwrap();
        let parsed: SeriesJson = serde_json::from_str(&text).unwrap();
        let back = series_from_json(&parsed).unwrap();
        assert!(back.eq_at_precision(&s));
        let j2 = series_to_json(&back, Some("test")).unwrap();
        assert_eq!(serde_json::to_string(&j2).unwrap(), text);
    }
}
