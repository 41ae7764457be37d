//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the
//! computation hits a domain error (equilibrium rates, poles, ...), 2 for
//! usage and configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{assemble_h, BoundaryRates, ProcessSpec};
use crate::mpo::{build_g, contract, Direction};
use crate::observables::{correlate_dehp, correlate_direct, correlate_dual_with, CorrelatorSpec, XConvention};
use crate::report::{json_f64, write_reports, ReportFormat};
use crate::scalar::{Rational, Scalar};
use crate::steady::{dehp_mps, dual_bernoulli, map_through, oracle, SteadyState};
use crate::suite::{constrained_partner, run_suite, summary_by_check, SuiteConfig, SuiteSummary, VariantChoice};
use crate::verify::{
    check_closure, check_composed_intertwining, check_intertwining, check_spectra, CheckReport, ScalarMode,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const ANGLE_TOL: f64 = 1e-9;
const CORRELATOR_TOL: f64 = 1e-8;
const SPECTRUM_TOL: f64 = 1e-8;
const INTERTWINING_TOL: f64 = 1e-9;
const CLOSURE_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "ssep-mpo", version, about = "MPO intertwiners for the open symmetric exclusion process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the verification suite described by a config file.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, value_enum)]
        mode: Option<ScalarMode>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// DEHP, Bernoulli-mapped and null-vector steady states with pairwise angles.
    SteadyState {
        #[arg(long)]
        rates: BoundaryRates,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "float")]
        mode: ScalarMode,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Density correlator, directly and through the dual process.
    Correlate {
        #[arg(long)]
        rates: BoundaryRates,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        sites: Vec<usize>,
        #[arg(long, value_enum, default_value = "yr")]
        variant: VariantArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenvalues of the driven generator and of its equilibrium dual.
    Spectrum {
        #[arg(long)]
        rates: BoundaryRates,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Composition checks: with two rate sets, the composed intertwiner;
    /// with three, the closure of the composition.
    ComposeCheck {
        /// Repeat two or three times; all sets must share α+γ and β+δ.
        /// With one set, two partners are drawn from --seed.
        #[arg(long, num_args = 1)]
        rates: Vec<BoundaryRates>,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum VariantArg {
    Yr,
    Yl,
    Both,
}

impl From<VariantArg> for VariantChoice {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Yr => VariantChoice::Yr,
            VariantArg::Yl => VariantChoice::Yl,
            VariantArg::Both => VariantChoice::Both,
        }
    }
}

/// Exit code for a library error: malformed input is a usage error,
/// everything else a failed computation.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Index(_) | Error::InvalidSpec(_) | Error::Config(_) | Error::InvalidRates(_) | Error::DimensionOverflow { .. } => {
            EXIT_USAGE
        }
        _ => EXIT_FAIL,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code_for(&err)
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Verify { config, seed, variant, mode, output } => {
            let mut cfg = SuiteConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(v) = variant {
                cfg.variant = v.into();
            }
            if let Some(m) = mode {
                cfg.scalar_mode = m;
            }
            cmd_verify(&cfg, &output, stdout, stderr)
        }
        Command::SteadyState { rates, n, variant, mode, output } => {
            let (value, ok) = match mode {
                ScalarMode::Float => steady_state_report::<f64>(&rates, n, variant.into())?,
                ScalarMode::Exact => steady_state_report::<Rational>(&rates, n, variant.into())?,
            };
            emit_value(&value, &output, stdout)?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Correlate { rates, n, sites, variant, output } => {
            let spec = CorrelatorSpec::new(sites, rates, n)?;
            let (value, ok) = correlate_report(&spec, variant.into())?;
            emit_value(&value, &output, stdout)?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Spectrum { rates, n, variant, output } => {
            let (value, ok) = spectrum_report(&rates, n, variant.into())?;
            emit_value(&value, &output, stdout)?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::ComposeCheck { rates, n, variant, seed, output } => {
            let sets = compose_sets(rates, seed)?;
            let reports = compose_reports(&sets, n, variant.into())?;
            emit_reports(&reports, &output, stdout)?;
            Ok(if SuiteSummary::of(&reports).all_passed() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

pub fn cmd_verify(cfg: &SuiteConfig, output: &OutputArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let reports = run_suite(cfg)?;
    let mut out = output.clone();
    if let Some(file) = &cfg.output {
        out.out = out.out.or_else(|| file.path.clone());
        out.format = out.format.or(Some(file.format));
    }
    emit_reports(&reports, &out, stdout)?;
    for (name, s) in summary_by_check(&reports) {
        let _ = writeln!(stderr, "{name:<22} {:>4} passed {:>4} failed {:>4} errored", s.passed, s.failed, s.errored);
    }
    let total = SuiteSummary::of(&reports);
    let _ = writeln!(stderr, "{} of {} checks passed", total.passed, total.total);
    Ok(if total.all_passed() { EXIT_PASS } else { EXIT_FAIL })
}

fn open_out(output: &OutputArgs, stdout: &mut dyn Write, f: &mut dyn FnMut(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &output.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| Error::Config(e.to_string()))
        }
        None => f(stdout),
    }
}

fn emit_reports(reports: &[CheckReport], output: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    let format = output.format.unwrap_or_default();
    open_out(output, stdout, &mut |w| write_reports(reports, format, w))
}

/// JSON as is; CSV as `key,value` rows with dotted paths.
fn emit_value(value: &Value, output: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    let format = output.format.unwrap_or_default();
    open_out(output, stdout, &mut |w| match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Config(e.to_string()))?;
            writeln!(w).map_err(|e| Error::Config(e.to_string()))
        }
        ReportFormat::Csv => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["key", "value"]).map_err(|e| Error::Config(e.to_string()))?;
            for (k, v) in rows {
                csv.write_record([k, v]).map_err(|e| Error::Config(e.to_string()))?;
            }
            csv.flush().map_err(|e| Error::Config(e.to_string()))
        }
    })
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn configuration(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

fn state_json(state: &SteadyState<f64>) -> Value {
    Value::Array(state.vector.0.iter().map(|x| json_f64(*x)).collect())
}

/// Steady states three ways and their pairwise angles; `ok` when every
/// angle is within tolerance.
pub fn steady_state_report<T: Scalar>(rates: &BoundaryRates, n: usize, variants: VariantChoice) -> Result<(Value, bool)> {
    let dehp = dehp_mps::<T>(rates, n)?.to_f64();
    let o = oracle(&ProcessSpec::non_equilibrium(n, *rates))?;
    let mut states = Map::new();
    let mut angles = Map::new();
    let mut scalars = Map::new();
    states.insert("configuration".into(), Value::Array((0..1 << n).map(|i| Value::String(configuration(i, n))).collect()));
    states.insert("dehp".into(), state_json(&dehp));
    states.insert("oracle".into(), state_json(&o));
    let mut ok = true;
    let mut record = |key: String, angle: f64, angles: &mut Map<String, Value>| {
        ok &= angle <= ANGLE_TOL;
        angles.insert(key, json_f64(angle));
    };
    record("dehp_oracle".into(), dehp.vector.angle_to(&o.vector), &mut angles);
    for &variant in variants.variants() {
        let g = build_g::<T>(rates, n, variant)?;
        let mapped = map_through(&g, &dual_bernoulli::<T>(rates, n, variant)?)?.to_f64();
        let name = format!("mapped_{}", variant.name());
        record(format!("{name}_oracle"), mapped.vector.angle_to(&o.vector), &mut angles);
        record(format!("{name}_dehp"), mapped.vector.angle_to(&dehp.vector), &mut angles);
        scalars.insert(name.clone(), json_f64(mapped.dehp_scalar.unwrap_or(f64::NAN)));
        states.insert(name, state_json(&mapped));
    }
    let value = json!({
        "rates": rates.to_string(),
        "n": n,
        "mode": if T::EXACT { "exact" } else { "float" },
        "states": states,
        "angles": angles,
        "dehp_scalars": scalars,
        "dehp_normalization": json_f64(dehp.normalization),
    });
    Ok((value, ok))
}

/// Direct value, the DEHP cross-check, dual values under both insertion
/// conventions and the convention(s) that match.
pub fn correlate_report(spec: &CorrelatorSpec, variants: VariantChoice) -> Result<(Value, bool)> {
    let direct = correlate_direct(spec)?;
    let dehp = correlate_dehp::<f64>(spec)?;
    let mut dual = Map::new();
    let mut chosen = Vec::new();
    for &variant in variants.variants() {
        for conv in XConvention::ALL {
            let value = correlate_dual_with::<f64>(spec, conv, variant)?;
            let key = format!("{}_{}", variant.name(), conv.name());
            if (value - direct).abs() <= CORRELATOR_TOL * direct.abs().max(1.0) {
                chosen.push(Value::String(key.clone()));
            }
            dual.insert(key, json_f64(value));
        }
    }
    let ok = !chosen.is_empty();
    let value = json!({
        "rates": spec.rates.to_string(),
        "n": spec.n,
        "sites": spec.sites,
        "direct": json_f64(direct),
        "dehp": json_f64(dehp),
        "dual": dual,
        "chosen_convention": chosen,
    });
    Ok((value, ok))
}

/// Sorted spectra of `H_NE` and each requested dual, with the matching
/// distance and the condition number of `G`.
pub fn spectrum_report(rates: &BoundaryRates, n: usize, variants: VariantChoice) -> Result<(Value, bool)> {
    let sorted = |spec: &ProcessSpec| -> Result<Value> {
        let mut ev = assemble_h::<f64>(spec)?.eigenvalues()?;
        ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        Ok(Value::Array(ev.iter().map(|z| json!([json_f64(z.re), json_f64(z.im)])).collect()))
    };
    let mut value = Map::new();
    value.insert("rates".into(), Value::String(rates.to_string()));
    value.insert("n".into(), Value::from(n));
    value.insert("ne".into(), sorted(&ProcessSpec::non_equilibrium(n, *rates))?);
    let mut ok = true;
    for &variant in variants.variants() {
        let report = check_spectra(rates, n, variant, SPECTRUM_TOL)?;
        ok &= report.passed;
        let g = contract(&build_g::<f64>(rates, n, variant)?)?;
        value.insert(
            format!("e_{}", variant.name()),
            json!({
                "eigenvalues": sorted(&ProcessSpec::dual(n, *rates, variant))?,
                "mismatch": json_f64(report.residual),
                "condition_g": json_f64(g.condition_number()),
                "intertwining": json_f64(check_intertwining::<f64>(rates, n, Direction::NeToE, variant, INTERTWINING_TOL)?.residual),
            }),
        );
    }
    Ok((Value::Object(value), ok))
}

fn compose_sets(mut rates: Vec<BoundaryRates>, seed: u64) -> Result<Vec<BoundaryRates>> {
    match rates.len() {
        1 => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let base = rates[0];
            rates.push(constrained_partner(&base, &mut rng));
            rates.push(constrained_partner(&base, &mut rng));
            Ok(rates)
        }
        2 | 3 => Ok(rates),
        k => Err(Error::InvalidSpec(format!("compose-check takes one to three --rates, got {k}"))),
    }
}

fn compose_reports(sets: &[BoundaryRates], n: usize, variants: VariantChoice) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for &variant in variants.variants() {
        reports.push(check_composed_intertwining(&sets[0], &sets[1], n, variant, INTERTWINING_TOL)?);
        if let [a, b, c] = sets {
            reports.push(check_closure(a, b, c, n, variant, CLOSURE_TOL)?);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ssep-mpo").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn correlate_symmetric_single_site() {
        let (code, out, _) = run_args(&["correlate", "--rates", "2,1,0.5,1", "--n", "1", "--sites", "1", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["chosen_convention"], json!(["yr_x_times_yinv"]));
    }

    #[test]
    fn correlate_out_of_range_is_usage_error() {
        let (code, _, err) = run_args(&["correlate", "--rates", "1,1,0,0", "--n", "4", "--sites", "5"]);
        assert_eq!(code, 2);
        assert!(err.contains("1..=4"));
    }

    #[test]
    fn steady_state_equilibrium_rates_fail() {
        let (code, _, err) = run_args(&["steady-state", "--rates", "1,1,1,1", "--n", "2"]);
        assert_eq!(code, 1);
        assert!(err.contains("equilibrium"), "{err}");
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(run_args(&["spectrum", "--rates", "1,1,0", "--n", "2"]).0, 2);
        assert_eq!(run_args(&["verify", "--config", "/nonexistent/suite.toml"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
    }

    #[test]
    fn csv_flattening() {
        let mut rows = Vec::new();
        flatten("", &json!({"a": [1, {"b": "x"}], "c": null}), &mut rows);
        assert_eq!(
            rows,
            vec![("a.0".into(), "1".into()), ("a.1.b".into(), "x".into()), ("c".into(), String::new())]
        );
    }
}
