//! Batch front-end: config ingestion, command dispatch, file I/O and
//! report emission. Exit codes: 0 success, 2 config error, 3 hypothesis
//! or contract failure, 4 precision exhaustion.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::{Resolved, RunConfig};
use iwasawa::factor::{
    self, consistency_audit, decompose, synthesize, FactorError, PairGenerator, PrecisionLedger,
    SignedPair, UnboundedPair,
};
use iwasawa::logmatrix::{
    build_logmatrix_general, build_logmatrix_pollack, pack_to_json, BlockData, BuildParams,
    LogMatrixPack,
};
use iwasawa::repdata::{self, check_hypotheses, crit_range, r_lambda, Branch};
use iwasawa::series::io::{series_from_json, series_to_json, SeriesJson};
use iwasawa::series::{CharacterSpec, SeriesGamma};
use iwasawa::special::{ell, ell_tilde, log_series, pollack_log, HalfLogSign};

#[derive(Parser)]
#[command(name = "iwasawa", about = "Signed p-adic L-function engine", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Coefficient precision in digits (overrides the config).
    #[arg(long, global = true)]
    precision: Option<i64>,
    /// Series truncation length (overrides the config).
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Certificate grid, e.g. "p2,p3".
    #[arg(long, global = true)]
    grid: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the representation datum and report the hypothesis checks.
    Check,
    /// Emit the Newton and Hodge polygons, the verdict and the filtration.
    Polygons,
    /// Build and certify the logarithmic matrix pack.
    Logmatrix,
    /// Apply Q^{-1} M' to a signed pair (seeded random when no input).
    Synthesize {
        /// Signed pair JSON produced earlier; omitted = seeded random pair.
        #[arg(long)]
        pair: Option<PathBuf>,
    },
    /// Decompose an unbounded pair back into a signed pair.
    Decompose {
        /// Unbounded pair JSON produced by synthesize.
        #[arg(long)]
        pair: PathBuf,
    },
    /// Evaluate a series file (or a named series) at a character list.
    Eval {
        #[arg(long)]
        series: Option<PathBuf>,
        /// Named series: "ell:i", "elltilde:i", "log".
        #[arg(long)]
        named: Option<String>,
        /// Characters "k:d:m:c" separated by commas.
        #[arg(long)]
        chars: String,
    },
    /// Emit the half-logarithms, their valuation profiles and the product
    /// identity report.
    Pollack,
}

#[derive(Serialize)]
struct ProvenanceBlock {
    p: u64,
    precision: i64,
    truncation: usize,
    seed: u64,
    version: String,
}

fn provenance(r: &Resolved) -> ProvenanceBlock {
    ProvenanceBlock {
        p: r.field.prime(),
        precision: r.field.precision(),
        truncation: r.truncation,
        seed: r.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Hypothesis(msg)) => {
            eprintln!("hypothesis/contract failure: {msg}");
            ExitCode::from(3)
        }
        Err(AppError::Precision(msg)) => {
            eprintln!("precision exhaustion: {msg}");
            ExitCode::from(4)
        }
    }
}

enum AppError {
    Config(String),
    Hypothesis(String),
    Precision(String),
}

impl From<FactorError> for AppError {
    fn from(e: FactorError) -> AppError {
        match e {
            FactorError::PrecisionExhausted | FactorError::EvaluationImprecise(_) => {
                AppError::Precision(e.to_string())
            }
            other => AppError::Hypothesis(other.to_string()),
        }
    }
}

fn load_config(cli: &Cli) -> Result<Resolved, AppError> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| AppError::Config(format!("{}: {e}", cli.config.display())))?;
    let mut cfg: RunConfig =
        toml::from_str(&text).map_err(|e| AppError::Config(format!("parse: {e}")))?;
    if let Some(n) = cli.precision {
        cfg.precision.digits = n;
    }
    if let Some(m) = cli.truncation {
        cfg.precision.truncation = m;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(grid) = &cli.grid {
        let parsed: Result<Vec<u32>, _> = grid
            .split(',')
            .map(|s| s.trim().trim_start_matches('p').parse::<u32>())
            .collect();
        cfg.precision.grid = parsed.map_err(|_| AppError::Config(format!("bad grid '{grid}'")))?;
    }
    let mut resolved = cfg.resolve().map_err(AppError::Config)?;
    if let Some(out) = &cli.out {
        resolved.out_dir = out.clone();
    }
    fs::create_dir_all(&resolved.out_dir)
        .map_err(|e| AppError::Config(format!("out dir: {e}")))?;
    Ok(resolved)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Config(format!("serialize: {e}")))?;
    fs::write(path, text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<ExitCode, AppError> {
    let r = load_config(cli)?;
    match &cli.command {
        Command::Check => cmd_check(&r),
        Command::Polygons => cmd_polygons(&r),
        Command::Logmatrix => cmd_logmatrix(&r).map(|_| ExitCode::SUCCESS),
        Command::Synthesize { pair } => cmd_synthesize(&r, pair.as_deref()),
        Command::Decompose { pair } => cmd_decompose(&r, pair),
        Command::Eval { series, named, chars } => {
            cmd_eval(&r, series.as_deref(), named.as_deref(), chars)
        }
        Command::Pollack => cmd_pollack(&r),
    }
}

#[derive(Serialize)]
struct CheckOutput {
    provenance: ProvenanceBlock,
    report: repdata::HypothesisReport,
    crit_range: (i64, i64),
    r_alpha: String,
    r_beta: String,
    small_slope_ok: bool,
}

fn cmd_check(r: &Resolved) -> Result<ExitCode, AppError> {
    let report = check_hypotheses(&r.datum);
    let out = CheckOutput {
        provenance: provenance(r),
        report: report.clone(),
        crit_range: crit_range(&r.datum.hodge, r.datum.n),
        r_alpha: r_lambda(&r.datum, Branch::Alpha).to_string(),
        r_beta: r_lambda(&r.datum, Branch::Beta).to_string(),
        small_slope_ok: repdata::small_slope_ok(&r.datum, Branch::Alpha)
            && repdata::small_slope_ok(&r.datum, Branch::Beta),
    };
    write_json(&r.out_dir.join("check.json"), &out)?;
    println!(
        "hypotheses: (M.Slo)={} (N.ord)={} (Pos)={} (FL)={} (Pol)={}",
        report.mslo, report.nord, report.pos_decidable, report.fl, report.pol
    );
    println!(
        "asserted: (G.Po)={} theta-nontrivial={}",
        report.gpo_asserted, report.theta_nontrivial_asserted
    );
    if let Some(w) = &report.lambda_warning {
        println!("warning: {w}");
    }
    for m in &report.messages {
        println!("note: {m}");
    }
    if report.all_decidable_pass() {
        println!("all decidable checks pass");
        Ok(ExitCode::SUCCESS)
    } else {
        Err(AppError::Hypothesis(format!(
            "failed: {}",
            report.named_failures().join(", ")
        )))
    }
}

fn cmd_polygons(r: &Resolved) -> Result<ExitCode, AppError> {
    let (newton, hodge, verdict) =
        repdata::polygons(&r.datum).map_err(|e| AppError::Hypothesis(e.to_string()))?;
    let p = provenance(r);
    let mut csv = format!(
        "# provenance p={} N={} M={} seed={} version={}\n# section,x,newton,hodge\n",
        p.p, p.precision, p.truncation, p.seed, p.version
    );
    for x in 0..=(2 * r.datum.n as i64) {
        csv.push_str(&format!(
            "polygon,{x},{},{}\n",
            newton.value_at(x).unwrap(),
            hodge.value_at(x).unwrap()
        ));
    }
    csv.push_str(&format!(
        "verdict,newton_above={},differs_at={:?},equal_except_middle={}\n",
        verdict.newton_above, verdict.differs_at, verdict.equal_except_middle
    ));
    match repdata::build_filtration(&r.datum) {
        Ok(sk) => {
            for step in &sk.steps {
                csv.push_str(&format!(
                    "filtration,{},dim={},t_N={},t_H={}\n",
                    step.index, step.dim, step.t_n, step.t_h
                ));
            }
        }
        Err(e) => {
            csv.push_str(&format!("filtration,error,{e}\n"));
            fs::write(r.out_dir.join("polygons.csv"), csv)
                .map_err(|e| AppError::Config(e.to_string()))?;
            return Err(AppError::Hypothesis(e.to_string()));
        }
    }
    fs::write(r.out_dir.join("polygons.csv"), &csv)
        .map_err(|e| AppError::Config(e.to_string()))?;
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn build_pack(r: &Resolved) -> Result<(LogMatrixPack, BlockData), AppError> {
    let data = BlockData::from_datum(&r.datum);
    let mut params = BuildParams::new(r.truncation);
    params.depth = r.depth;
    params.stab_digits = r.tolerance;
    params.conductors = r.grid.clone();
    let report = check_hypotheses(&r.datum);
    let pack = if report.pol {
        build_logmatrix_pollack(&data, &params)
    } else {
        build_logmatrix_general(&data, &params)
    }
    .map_err(|e| AppError::Hypothesis(e.to_string()))?;
    Ok((pack, data))
}

fn cmd_logmatrix(r: &Resolved) -> Result<(LogMatrixPack, BlockData), AppError> {
    let (pack, data) = build_pack(r)?;
    #[derive(Serialize)]
    struct Out {
        provenance: ProvenanceBlock,
        #[serde(flatten)]
        pack: iwasawa::logmatrix::LogMatrixJson,
    }
    let out = Out {
        provenance: provenance(r),
        pack: pack_to_json(&pack, &data).map_err(|e| AppError::Hypothesis(e.to_string()))?,
    };
    write_json(&r.out_dir.join("logmatrix.json"), &out)?;
    println!(
        "logmatrix: provenance {:?}, certificate passed = {}",
        pack.provenance, pack.certificate.all_passed
    );
    Ok((pack, data))
}

#[derive(Serialize, Deserialize)]
struct SignedPairJson {
    sharp: SeriesJson,
    flat: SeriesJson,
    denominator_bound: i64,
}

#[derive(Serialize, Deserialize)]
struct UnboundedPairJson {
    alpha: SeriesJson,
    beta: SeriesJson,
    r_alpha: String,
    r_beta: String,
    ledger: PrecisionLedger,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_deep: Option<SeriesJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta_deep: Option<SeriesJson>,
}

fn parse_rational_str(s: &str) -> Result<iwasawa::newton::Rational, AppError> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n
        .parse()
        .map_err(|_| AppError::Config(format!("bad rational {s}")))?;
    let d: i64 = d
        .parse()
        .map_err(|_| AppError::Config(format!("bad rational {s}")))?;
    Ok(iwasawa::newton::Rational::new(n, d))
}

fn cmd_synthesize(r: &Resolved, pair_path: Option<&Path>) -> Result<ExitCode, AppError> {
    let (pack, _) = cmd_logmatrix(r)?;
    let signed = match pair_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            let json: SignedPairJson =
                serde_json::from_str(&text).map_err(|e| AppError::Config(e.to_string()))?;
            SignedPair::new(
                series_from_json(&json.sharp).map_err(|e| AppError::Config(e.to_string()))?,
                series_from_json(&json.flat).map_err(|e| AppError::Config(e.to_string()))?,
                json.denominator_bound,
            )
        }
        None => {
            let mut gen = PairGenerator::new(r.seed, 0);
            let support = (r.truncation / 4).max(8);
            gen.random_signed_pair(&r.field, r.truncation, support, r.denominator_bound)
        }
    };
    let u = synthesize(&signed, &pack, &r.datum)?;
    let audit = consistency_audit(&u, &r.datum, &r.grid)?;
    let ser = |s: &SeriesGamma, name: &str| {
        series_to_json(s, Some(name)).map_err(|e| AppError::Config(e.to_string()))
    };
    let out = UnboundedPairJson {
        alpha: ser(&u.alpha, "L(alpha)")?,
        beta: ser(&u.beta, "L(beta)")?,
        r_alpha: u.r_alpha.to_string(),
        r_beta: u.r_beta.to_string(),
        ledger: u.ledger.clone(),
        alpha_deep: match &u.alpha_deep {
            Some(s) => Some(ser(&SeriesGamma::from_gamma1(s), "deep")?),
            None => None,
        },
        beta_deep: match &u.beta_deep {
            Some(s) => Some(ser(&SeriesGamma::from_gamma1(s), "deep")?),
            None => None,
        },
    };
    let signed_out = SignedPairJson {
        sharp: ser(&signed.sharp, "L#")?,
        flat: ser(&signed.flat, "Lb")?,
        denominator_bound: r.denominator_bound,
    };
    write_json(&r.out_dir.join("signed_pair.json"), &signed_out)?;
    write_json(&r.out_dir.join("unbounded_pair.json"), &out)?;
    write_json(&r.out_dir.join("synthesize_audit.json"), &audit)?;
    if !audit.passed {
        return Err(AppError::Hypothesis("synthesized pair failed its audit".into()));
    }
    println!(
        "synthesize: ledger loss {} digits, audit passed = {}",
        u.ledger.total(),
        audit.passed
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_decompose(r: &Resolved, pair_path: &Path) -> Result<ExitCode, AppError> {
    let (pack, _) = build_pack(r)?;
    let text = fs::read_to_string(pair_path)
        .map_err(|e| AppError::Config(format!("{}: {e}", pair_path.display())))?;
    let json: UnboundedPairJson =
        serde_json::from_str(&text).map_err(|e| AppError::Config(e.to_string()))?;
    let to_deep = |s: &Option<SeriesJson>| -> Result<Option<iwasawa::series::SeriesGamma1>, AppError> {
        Ok(match s {
            Some(j) => Some(
                series_from_json(j)
                    .map_err(|e| AppError::Config(e.to_string()))?
                    .component(0)
                    .clone(),
            ),
            None => None,
        })
    };
    let u = UnboundedPair {
        alpha: series_from_json(&json.alpha).map_err(|e| AppError::Config(e.to_string()))?,
        beta: series_from_json(&json.beta).map_err(|e| AppError::Config(e.to_string()))?,
        r_alpha: parse_rational_str(&json.r_alpha)?,
        r_beta: parse_rational_str(&json.r_beta)?,
        ledger: json.ledger.clone(),
        alpha_deep: to_deep(&json.alpha_deep)?,
        beta_deep: to_deep(&json.beta_deep)?,
    };
    let (signed, ledger, audit) = decompose(&u, &pack, &r.datum, &r.grid, r.denominator_bound)?;
    let nonzero_input = !u.alpha.is_zero_at_precision() || !u.beta.is_zero_at_precision();
    let report = factor::nonvanishing_report(&signed, nonzero_input);
    #[derive(Serialize)]
    struct Out {
        provenance: ProvenanceBlock,
        sharp: SeriesJson,
        flat: SeriesJson,
        cert_sharp: factor::BoundednessCertificate,
        cert_flat: factor::BoundednessCertificate,
        ledger: PrecisionLedger,
        nonvanishing: factor::NonvanishingReport,
    }
    let out = Out {
        provenance: provenance(r),
        sharp: series_to_json(&signed.sharp, Some("L#"))
            .map_err(|e| AppError::Config(e.to_string()))?,
        flat: series_to_json(&signed.flat, Some("Lb"))
            .map_err(|e| AppError::Config(e.to_string()))?,
        cert_sharp: signed.cert_sharp.clone(),
        cert_flat: signed.cert_flat.clone(),
        ledger: ledger.clone(),
        nonvanishing: report,
    };
    write_json(&r.out_dir.join("decomposed_pair.json"), &out)?;
    write_json(&r.out_dir.join("decompose_audit.json"), &audit)?;
    println!("decompose: total ledger loss {} digits", ledger.total());
    Ok(ExitCode::SUCCESS)
}

fn parse_chars(s: &str) -> Result<Vec<CharacterSpec>, AppError> {
    s.split(',')
        .map(|item| {
            let parts: Vec<&str> = item.trim().split(':').collect();
            if parts.len() != 4 {
                return Err(AppError::Config(format!(
                    "character '{item}' must be k:d:m:c"
                )));
            }
            let k = parts[0].parse().map_err(|_| AppError::Config("bad k".into()))?;
            let d = parts[1].parse().map_err(|_| AppError::Config("bad d".into()))?;
            let m = parts[2].parse().map_err(|_| AppError::Config("bad m".into()))?;
            let c = parts[3].parse().map_err(|_| AppError::Config("bad c".into()))?;
            Ok(CharacterSpec::new(k, d, m, c))
        })
        .collect()
}

fn cmd_eval(
    r: &Resolved,
    series_path: Option<&Path>,
    named: Option<&str>,
    chars: &str,
) -> Result<ExitCode, AppError> {
    let series: SeriesGamma = match (series_path, named) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            let json: SeriesJson =
                serde_json::from_str(&text).map_err(|e| AppError::Config(e.to_string()))?;
            series_from_json(&json).map_err(|e| AppError::Config(e.to_string()))?
        }
        (None, Some(name)) => {
            let base =
                iwasawa::padic::PadicField::make(r.field.prime(), r.field.precision(), None)
                    .map_err(|e| AppError::Config(e.to_string()))?;
            let g1 = if let Some(i) = name.strip_prefix("ell:") {
                let i: i64 = i
                    .parse()
                    .map_err(|_| AppError::Config("bad ell index".into()))?;
                ell(&base, i, r.truncation).map_err(|e| AppError::Hypothesis(e.to_string()))?
            } else if let Some(i) = name.strip_prefix("elltilde:") {
                let i: u32 = i.parse().map_err(|_| AppError::Config("bad index".into()))?;
                ell_tilde(&base, i, r.truncation)
                    .map_err(|e| AppError::Hypothesis(e.to_string()))?
            } else if name == "log" {
                log_series(&base, r.truncation)
            } else {
                return Err(AppError::Config(format!("unknown named series '{name}'")));
            };
            SeriesGamma::from_gamma1(&g1)
        }
        _ => {
            return Err(AppError::Config(
                "exactly one of --series / --named is required".into(),
            ))
        }
    };
    let chars = parse_chars(chars)?;
    let mut csv = String::from("# k,d,m,c,value,valuation,certified\n");
    for chi in &chars {
        match series.evaluate(chi) {
            Ok(v) => {
                let val = v
                    .valuation()
                    .map(|x| x.to_string())
                    .unwrap_or_else(|_| "zero".into());
                let digits: Vec<String> = iwasawa::series::io::element_to_json(&v)
                    .map(|e| e.digits)
                    .unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{},{},\"{}\",{},{}\n",
                    chi.k,
                    chi.d,
                    chi.m,
                    chi.c,
                    digits.join(";"),
                    val,
                    v.aprec()
                ));
            }
            Err(e) => {
                csv.push_str(&format!(
                    "{},{},{},{},error,{e},\n",
                    chi.k, chi.d, chi.m, chi.c
                ));
            }
        }
    }
    fs::write(r.out_dir.join("eval.csv"), &csv).map_err(|e| AppError::Config(e.to_string()))?;
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_pollack(r: &Resolved) -> Result<ExitCode, AppError> {
    let h = &r.datum.hodge.h;
    let n = r.datum.n;
    let gap = h[n - 1] - h[n];
    let report = check_hypotheses(&r.datum);
    if !report.fl {
        return Err(AppError::Hypothesis(format!(
            "(FL) fails: p > h_n - h_(n+1) > 1 required, got gap {gap}"
        )));
    }
    let w = gap as u32;
    let base = iwasawa::padic::PadicField::make(r.field.prime(), r.field.precision(), None)
        .map_err(|e| AppError::Config(e.to_string()))?;
    let series_err = |e: iwasawa::series::SeriesError| AppError::Precision(e.to_string());
    let mut csv = String::from("# series,k,valuation\n");
    for (name, sign) in [("plus", HalfLogSign::Plus), ("minus", HalfLogSign::Minus)] {
        let lg = pollack_log(&base, sign, w, r.truncation, r.depth)
            .map_err(|e| AppError::Hypothesis(e.to_string()))?;
        let gamma = SeriesGamma::from_gamma1(&lg);
        let json = series_to_json(&gamma, Some(&format!("log_{name}_{w}")))
            .map_err(|e| AppError::Config(e.to_string()))?;
        write_json(&r.out_dir.join(format!("log_{name}.json")), &json)?;
        for (k, c) in lg.coeffs().iter().enumerate() {
            csv.push_str(&format!("{name},{k},{}\n", c.val_lb()));
        }
        let profile = lg.growth_profile();
        println!(
            "log_{name}: fitted slope {} (declared growth {w}/2)",
            profile.r_hat
        );
    }
    fs::write(r.out_dir.join("pollack_profile.csv"), &csv)
        .map_err(|e| AppError::Config(e.to_string()))?;
    // product identity: log+ log- prod_j Tw^{-j}(X) = prod_j (1/p^2) Tw^{-j}(log)
    let lp = pollack_log(&base, HalfLogSign::Plus, w, r.truncation, r.depth)
        .map_err(|e| AppError::Hypothesis(e.to_string()))?;
    let lm = pollack_log(&base, HalfLogSign::Minus, w, r.truncation, r.depth)
        .map_err(|e| AppError::Hypothesis(e.to_string()))?;
    let x = iwasawa::series::SeriesGamma1::monomial(&base, 1, r.truncation);
    let mut lhs = lp.mul(&lm).map_err(series_err)?;
    let mut rhs = iwasawa::series::SeriesGamma1::one(&base, r.truncation);
    let p_inv2 = iwasawa::padic::PadicElement::p_power(&base, -2);
    for j in 0..w {
        lhs = lhs
            .mul(&x.twist(-(j as i64)).map_err(series_err)?)
            .map_err(series_err)?;
        let factor = log_series(&base, r.truncation)
            .twist(-(j as i64))
            .map_err(series_err)?
            .scale(&p_inv2)
            .map_err(series_err)?;
        rhs = rhs.mul(&factor).map_err(series_err)?;
    }
    let diff = lhs.sub(&rhs).map_err(series_err)?;
    let min_res = diff
        .coeffs()
        .iter()
        .map(|c| c.val_lb().min(iwasawa::newton::Rational::from_integer(c.aprec())))
        .min()
        .unwrap();
    println!("half-log product identity: min residual valuation {min_res}");
    #[derive(Serialize)]
    struct IdentityReport {
        provenance: ProvenanceBlock,
        weight_gap: i64,
        min_residual_valuation: String,
    }
    write_json(
        &r.out_dir.join("pollack_identity.json"),
        &IdentityReport {
            provenance: provenance(r),
            weight_gap: gap,
            min_residual_valuation: min_res.to_string(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}
