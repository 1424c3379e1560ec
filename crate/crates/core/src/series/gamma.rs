use crate::newton::Rational;
use crate::padic::field::EVAL_DEGREE_BOUND;
use crate::padic::{PadicElement, PadicField};

use super::{CharacterSpec, SeriesError, SeriesGamma1};

/// A series over the full Iwasawa algebra: one wild-line series per tame
/// character index `j` (the idempotent component attached to `omega^j`).
/// Components multiply pointwise because distinct idempotents annihilate
/// each other.
#[derive(Debug, Clone)]
pub struct SeriesGamma {
    components: Vec<SeriesGamma1>,
    /// All components are identical (the image of a wild-line series);
    /// operations then work on one component and replicate.
    diagonal: bool,
}

impl SeriesGamma {
    pub fn new(components: Vec<SeriesGamma1>) -> Result<SeriesGamma, SeriesError> {
        let field = components
            .first()
            .ok_or(SeriesError::FieldMismatch)?
            .field()
            .clone();
        if components.len() != field.prime() as usize - 1 {
            return Err(SeriesError::FieldMismatch);
        }
        if components.iter().any(|c| c.field() != &field) {
            return Err(SeriesError::FieldMismatch);
        }
        Ok(SeriesGamma { components, diagonal: false })
    }

    /// Image of a wild-line series under the natural inclusion: the same
    /// series in every tame component (the idempotents sum to 1).
    pub fn from_gamma1(f: &SeriesGamma1) -> SeriesGamma {
        let n = f.field().prime() as usize - 1;
        SeriesGamma {
            components: vec![f.clone(); n],
            diagonal: true,
        }
    }

    pub fn zero(field: &PadicField, len: usize) -> SeriesGamma {
        Self::from_gamma1(&SeriesGamma1::zero(field, len))
    }

    pub fn field(&self) -> &PadicField {
        self.components[0].field()
    }

    pub fn truncation(&self) -> usize {
        self.components.iter().map(|c| c.truncation()).min().unwrap_or(0)
    }

    pub fn components(&self) -> &[SeriesGamma1] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &SeriesGamma1 {
        &self.components[j % self.components.len()]
    }

    /// True when every populated component equals component 0 (the image
    /// of a wild-line series); used as a sparse hint by the file formats.
    pub fn is_diagonal(&self) -> bool {
        self.components
            .iter()
            .skip(1)
            .all(|c| c.eq_at_precision(&self.components[0]))
    }

    fn zip_with(
        &self,
        other: &SeriesGamma,
        f: impl Fn(&SeriesGamma1, &SeriesGamma1) -> Result<SeriesGamma1, SeriesError>,
    ) -> Result<SeriesGamma, SeriesError> {
        if self.components.len() != other.components.len() {
            return Err(SeriesError::FieldMismatch);
        }
        if self.diagonal && other.diagonal {
            let one = f(&self.components[0], &other.components[0])?;
            return Ok(SeriesGamma {
                components: vec![one; self.components.len()],
                diagonal: true,
            });
        }
        let components: Result<Vec<_>, _> = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(SeriesGamma { components: components?, diagonal: false })
    }

    pub fn add(&self, other: &SeriesGamma) -> Result<SeriesGamma, SeriesError> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &SeriesGamma) -> Result<SeriesGamma, SeriesError> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &SeriesGamma) -> Result<SeriesGamma, SeriesError> {
        self.zip_with(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> SeriesGamma {
        SeriesGamma {
            components: self.components.iter().map(|c| c.neg()).collect(),
            diagonal: self.diagonal,
        }
    }

    pub fn scale(&self, scalar: &PadicElement) -> Result<SeriesGamma, SeriesError> {
        if self.diagonal {
            return Ok(Self::from_gamma1(&self.components[0].scale(scalar)?));
        }
        let components: Result<Vec<_>, _> =
            self.components.iter().map(|c| c.scale(scalar)).collect();
        Ok(SeriesGamma { components: components?, diagonal: false })
    }

    /// The twist operator: every wild component is composed with
    /// `X -> u^i (1+X) - 1` and the tame index shifts by `j -> j + i`
    /// mod `p - 1`.
    pub fn twist(&self, i: i64) -> Result<SeriesGamma, SeriesError> {
        if self.diagonal {
            // equal components are invariant under the index shift
            return Ok(Self::from_gamma1(&self.components[0].twist(i)?));
        }
        let n = self.components.len() as i64;
        let twisted: Result<Vec<_>, _> = self.components.iter().map(|c| c.twist(i)).collect();
        let twisted = twisted?;
        let mut components = vec![None; n as usize];
        for (j, c) in twisted.into_iter().enumerate() {
            let nj = ((j as i64 + i) % n + n) % n;
            components[nj as usize] = Some(c);
        }
        Ok(SeriesGamma {
            components: components.into_iter().map(Option::unwrap).collect(),
            diagonal: false,
        })
    }

    /// Evaluation at a character: selects the tame component by the full
    /// tame exponent `(k + d) mod (p-1)` and evaluates the wild series at
    /// `X = u^k zeta - 1`, with `zeta` a primitive `p^(m-1)`-th root of
    /// unity when the wild part is nontrivial.
    pub fn evaluate(&self, chi: &CharacterSpec) -> Result<PadicElement, SeriesError> {
        let field = self.field();
        let p = field.prime();
        chi.validate(p)?;
        let comp = self.component(chi.tame_component(p));
        let (x0, x0_val) = evaluation_point(field, chi)?;
        match x0 {
            None => {
                // X0 = 0 exactly: the value is the constant coefficient
                Ok(comp.coeff(0).clone())
            }
            Some(x0) => comp.evaluate_at(&x0, x0_val),
        }
    }

    pub fn ledger_floor(&self) -> i64 {
        self.components.iter().map(|c| c.ledger_floor()).min().unwrap_or(0)
    }

    pub fn is_zero_at_precision(&self) -> bool {
        self.components.iter().all(|c| c.is_zero_at_precision())
    }

    pub fn eq_at_precision(&self, other: &SeriesGamma) -> bool {
        self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.eq_at_precision(b))
    }

    pub fn map_components(
        &self,
        f: impl Fn(&SeriesGamma1) -> Result<SeriesGamma1, SeriesError>,
    ) -> Result<SeriesGamma, SeriesError> {
        if self.diagonal {
            return Ok(Self::from_gamma1(&f(&self.components[0])?));
        }
        let components: Result<Vec<_>, _> = self.components.iter().map(f).collect();
        Ok(SeriesGamma { components: components?, diagonal: false })
    }

    /// Determinant of a 2x2 matrix of series: `ad - bc` with the ledger
    /// propagated through the coefficient arithmetic.
    pub fn det2(m: &[[SeriesGamma; 2]; 2]) -> Result<SeriesGamma, SeriesError> {
        let ad = m[0][0].mul(&m[1][1])?;
        let bc = m[0][1].mul(&m[1][0])?;
        ad.sub(&bc)
    }
}

/// The evaluation point `u^k zeta - 1` in the smallest tower containing it,
/// together with a certified positive lower bound for its valuation:
/// `1 / ((p-1) p^(m-2))` for wild conductor `p^m`, `m >= 2`, and
/// `1 + v_p(k)` otherwise. Returns `None` for the exact zero point.
pub fn evaluation_point(
    field: &PadicField,
    chi: &CharacterSpec,
) -> Result<(Option<PadicElement>, Rational), SeriesError> {
    let p = field.prime();
    let level = chi.wild_level();
    if level == 0 {
        if chi.k == 0 {
            return Ok((None, Rational::from_integer(field.precision())));
        }
        let u = PadicElement::from_integer(field, 1 + p as i64);
        let uk = u.pow_i64(chi.k).map_err(SeriesError::Padic)?;
        let x0 = uk.sub(&PadicElement::one(field)).map_err(SeriesError::Padic)?;
        let v = Rational::from_integer(1 + crate::padic::element::vp_i64(chi.k, p));
        return Ok((Some(x0), v));
    }
    let ext = field
        .cyclotomic_extension(level, EVAL_DEGREE_BOUND)
        .map_err(|e| SeriesError::ExtensionUnavailable(e.to_string()))?;
    // zeta = (1 + pi)^c where pi is the last step generator
    let sub_degree: usize = ext.degree() / ext.steps().last().unwrap().degree;
    let pi = PadicElement::basis_vector(&ext, sub_degree);
    let zeta = pi
        .add(&PadicElement::one(&ext))
        .and_then(|z| z.pow_i64(chi.c as i64))
        .map_err(SeriesError::Padic)?;
    let u = PadicElement::from_integer(&ext, 1 + p as i64);
    let uk = u.pow_i64(chi.k).map_err(SeriesError::Padic)?;
    let x0 = uk
        .mul(&zeta)
        .and_then(|z| z.sub(&PadicElement::one(&ext)))
        .map_err(SeriesError::Padic)?;
    let denom = (p as i64 - 1) * (p as i64).pow(level - 1);
    Ok((Some(x0), Rational::new(1, denom)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> PadicField {
        PadicField::make(5, 20, None).unwrap()
    }

    #[test]
    fn delta_components_multiply_pointwise() {
        let f = q5();
        let a = SeriesGamma::from_gamma1(&SeriesGamma1::monomial(&f, 1, 8));
        let b = SeriesGamma::from_gamma1(&SeriesGamma1::one(&f, 8));
        let prod = a.mul(&b).unwrap();
        assert!(prod.eq_at_precision(&a));
    }

    #[test]
    fn twist_shifts_tame_indices() {
        let f = q5();
        // put a marker constant in component 0 only
        let mut comps = vec![SeriesGamma1::zero(&f, 4); 4];
        comps[0] = SeriesGamma1::constant(&f, PadicElement::from_integer(&f, 9), 4);
        let s = SeriesGamma::new(comps).unwrap();
        let t = s.twist(1).unwrap();
        assert!(t.component(1).coeff(0).eq_at(&PadicElement::from_integer(&f, 9), 20));
        assert!(t.component(0).is_zero_at_precision());
        // and twisting is additive on indices
        let t2 = s.twist(6).unwrap(); // 6 mod 4 = 2
        assert!(t2.component(2).coeff(0).eq_at(&PadicElement::from_integer(&f, 9), 20));
    }

    #[test]
    fn evaluation_point_trivial_character() {
        let f = q5();
        let (x0, _) = evaluation_point(&f, &CharacterSpec::twist_power(0)).unwrap();
        assert!(x0.is_none());
        let (x1, v1) = evaluation_point(&f, &CharacterSpec::twist_power(1)).unwrap();
        // u - 1 = p
        assert_eq!(x1.unwrap(), PadicElement::from_integer(&f, 5));
        assert_eq!(v1, Rational::from_integer(1));
    }

    #[test]
    fn evaluation_point_wild() {
        let f = q5();
        let chi = CharacterSpec::new(0, 0, 2, 1);
        let (x0, v) = evaluation_point(&f, &chi).unwrap();
        let x0 = x0.unwrap();
        assert_eq!(v, Rational::new(1, 4));
        assert_eq!(x0.valuation().unwrap(), Rational::new(1, 4));
    }

    #[test]
    fn evaluate_polynomial_at_wild_character() {
        // Phi_1(1+X) evaluated at zeta_5 - 1 must be exactly 0;
        // at the trivial character it is p
        let f = q5();
        let phi: Vec<num_bigint::BigInt> =
            crate::padic::field::cyclotomic_in_one_plus_x(5, 1);
        let s = SeriesGamma::from_gamma1(&SeriesGamma1::from_integer_coeffs(&f, &phi, 16));
        let at_triv = s.evaluate(&CharacterSpec::twist_power(0)).unwrap();
        assert_eq!(at_triv, PadicElement::from_integer(&f, 5));
        let chi = CharacterSpec::new(0, 0, 2, 1);
        let at_wild = s.evaluate(&chi).unwrap();
        assert!(at_wild.is_zero_at_precision());
    }
}
