use std::path::PathBuf;

use num_bigint::BigInt;
use serde::Deserialize;

use iwasawa::padic::{PadicElement, PadicField};
use iwasawa::repdata::{LambdaConvention, RepresentationDatum};

#[derive(Debug, Deserialize)]
pub struct RunConfig {
    pub rep: RepSection,
    #[serde(default)]
    pub precision: PrecisionSection,
    #[serde(default)]
    pub io: IoSection,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
pub struct RepSection {
    pub p: u64,
    pub n: usize,
    pub mu: Vec<i64>,
    /// One entry per Satake parameter: exact rationals per power-basis
    /// coordinate, e.g. `[["125"], ["-125"]]` or `[["0", "1"]]` for the
    /// generator of a quadratic extension.
    pub alphas: Vec<Vec<String>>,
    /// Defining polynomial of the coefficient field extension
    /// (little-endian integers), absent for Q_p.
    #[serde(default)]
    pub field_poly: Option<Vec<i64>>,
    #[serde(default)]
    pub gpo_asserted: bool,
    #[serde(default)]
    pub theta_nontrivial_asserted: bool,
    /// "pairing-sum" (default) or "paper-literal".
    #[serde(default)]
    pub lambda_convention: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct PrecisionSection {
    #[serde(default = "default_digits")]
    pub digits: i64,
    /// 0 means the default `p^4`.
    #[serde(default)]
    pub truncation: usize,
    /// Certificate/audit grid of wild conductor exponents.
    #[serde(default = "default_grid")]
    pub grid: Vec<u32>,
    /// Half-logarithm cutoff level; 0 selects the automatic rule.
    #[serde(default)]
    pub depth: u32,
    /// Stabilization tolerance in digits for the general builder.
    #[serde(default = "default_stab")]
    pub tolerance: i64,
    #[serde(default = "default_denom")]
    pub denominator_bound: i64,
}

fn default_digits() -> i64 {
    20
}
fn default_grid() -> Vec<u32> {
    vec![2, 3]
}
fn default_stab() -> i64 {
    10
}
fn default_denom() -> i64 {
    2
}

impl Default for PrecisionSection {
    fn default() -> Self {
        PrecisionSection {
            digits: default_digits(),
            truncation: 0,
            grid: default_grid(),
            depth: 0,
            tolerance: default_stab(),
            denominator_bound: default_denom(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct IoSection {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

pub struct Resolved {
    pub field: PadicField,
    pub datum: RepresentationDatum,
    pub truncation: usize,
    pub grid: Vec<u32>,
    pub depth: Option<u32>,
    pub tolerance: i64,
    pub denominator_bound: i64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn parse_rational(s: &str) -> Result<(BigInt, BigInt), String> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
    let d: BigInt = d.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
    Ok((n, d))
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let rep = &self.rep;
        let field = PadicField::make(rep.p, self.precision.digits, rep.field_poly.as_deref())
            .map_err(|e| format!("field: {e}"))?;
        if rep.mu.len() != 2 * rep.n || rep.alphas.len() != 2 * rep.n {
            return Err(format!(
                "mu and alphas must have length 2n = {}",
                2 * rep.n
            ));
        }
        let mut alphas = Vec::with_capacity(rep.alphas.len());
        for coords in &rep.alphas {
            let parsed: Result<Vec<(BigInt, BigInt)>, String> =
                coords.iter().map(|s| parse_rational(s)).collect();
            let el = PadicElement::from_rational_coords(&field, &parsed?)
                .map_err(|e| format!("alpha: {e}"))?;
            alphas.push(el);
        }
        let convention = match self.rep.lambda_convention.as_deref() {
            None | Some("pairing-sum") => LambdaConvention::PairingSum,
            Some("paper-literal") => LambdaConvention::PaperLiteral,
            Some(other) => return Err(format!("unknown lambda convention '{other}'")),
        };
        let datum = RepresentationDatum::new(
            field.clone(),
            rep.n,
            rep.mu.clone(),
            alphas,
            rep.gpo_asserted,
            rep.theta_nontrivial_asserted,
            convention,
        )
        .map_err(|e| format!("rep: {e}"))?;
        let truncation = if self.precision.truncation == 0 {
            (rep.p as usize).pow(4)
        } else {
            self.precision.truncation
        };
        if self.precision.digits <= 0 || truncation == 0 {
            return Err("precision values must be positive".into());
        }
        if self.precision.grid.iter().any(|&m| m < 2) {
            return Err("grid conductor exponents must be at least 2 (conductor p^2)".into());
        }
        Ok(Resolved {
            field,
            datum,
            truncation,
            grid: self.precision.grid.clone(),
            depth: if self.precision.depth == 0 {
                None
            } else {
                Some(self.precision.depth)
            },
            tolerance: self.precision.tolerance,
            denominator_bound: self.precision.denominator_bound,
            seed: self.seed,
            out_dir: self
                .io
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}
