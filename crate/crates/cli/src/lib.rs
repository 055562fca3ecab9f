//! Command-line front end for `convineq`.
//!
//! Every subcommand prints a JSON report on standard output holding the
//! resolved configuration, the library version and the result. `coeffs` and
//! `family` print their CSV there instead when no `--output` is given. Exit
//! status is 0 on success, 2 when `verify` finds a violation, and 1 on any
//! error, which is reported as one line of JSON on standard error.

pub mod args;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;

use args::{
    Cli, CltArgs, CoeffsArgs, Command, ConstructArgs, FamilyArgs, FamilyName, Kind, Method,
    MomentsArgs, Regime, SourceArgs, VerifyArgs,
};
use convineq::analyze::{self, DemoOptions, MassRegime, Verdict};
use convineq::clt::{self, ExperimentConfig, WKind};
use convineq::construct::{self, SeriesOptions};
use convineq::families::{self, PoissonParams, SincParams};
use convineq::grid::{integrate, sample, GridFunction, GridSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    command: &'static str,
    version: &'static str,
    config: &'a Cli,
    result: R,
}

/// Outcome of a successful parse and run: what to print and how to exit.
pub struct Outcome {
    pub stdout: Vec<u8>,
    pub code: i32,
}

/// Runs the command line `argv` (program name first).
pub fn run<I, T>(argv: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = with_config(argv.into_iter().map(Into::into).collect())?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            return Ok(Outcome {
                stdout: e.render().to_string().into_bytes(),
                code: EXIT_OK,
            });
        }
        Err(e) => bail!("{}", first_line(&e.render().to_string())),
    };
    let mut out = Vec::new();
    let code = match &cli.command {
        Command::Coeffs(a) => coeffs(&cli, a, &mut out)?,
        Command::Family(a) => family(&cli, a, &mut out)?,
        Command::Construct(a) => construct_cmd(&cli, a, &mut out)?,
        Command::Verify(a) => verify(&cli, a, &mut out)?,
        Command::Moments(a) => moments(&cli, a, &mut out)?,
        Command::Clt(a) => clt_cmd(&cli, a, &mut out)?,
    };
    Ok(Outcome { stdout: out, code })
}

/// The single-line JSON written to standard error on failure.
pub fn error_line(err: &anyhow::Error) -> String {
    let msg = format!("{err:#}");
    serde_json::json!({ "error": first_line(&msg) }).to_string()
}

fn first_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("")
        .trim_start_matches("error: ")
        .to_owned()
}

/// Splices the flags from `--config` in right after the subcommand name.
fn with_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut sub = None;
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy().into_owned();
        if tok == "--config" {
            path = argv.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = tok.strip_prefix("--config=") {
            path = Some(p.into());
        } else if sub.is_none() && !tok.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (path, sub) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let name = argv[sub].to_string_lossy().into_owned();
    let tokens = config::config_tokens(&text, &name)?;
    let tail = argv.split_off(sub + 1);
    argv.extend(tokens.into_iter().map(OsString::from));
    argv.extend(tail);
    Ok(argv)
}

fn emit<R: Serialize>(cli: &Cli, result: R, out: &mut Vec<u8>) -> Result<()> {
    let report = Report {
        command: cli.command.name(),
        version: convineq::VERSION,
        config: cli,
        result,
    };
    serde_json::to_writer_pretty(&mut *out, &report)?;
    out.push(b'\n');
    Ok(())
}

fn write_function(path: &Path, g: &GridFunction) -> Result<()> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    if is_json {
        std::io::Write::write_all(&mut w, g.to_json()?.as_bytes())?;
        std::io::Write::flush(&mut w)?;
    } else {
        g.write_csv(w)?;
    }
    Ok(())
}

fn read_function(path: &Path) -> Result<GridFunction> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let g = if is_json {
        GridFunction::from_json_bytes(&bytes)?
    } else {
        GridFunction::read_csv(bytes.as_slice())?
    };
    Ok(g)
}

fn one_dimensional(name: &str, dim: usize) -> Result<()> {
    if dim != 1 {
        bail!("family {name} is only available in one dimension");
    }
    Ok(())
}

fn load(src: &SourceArgs) -> Result<GridFunction> {
    if let Some(path) = &src.input {
        return read_function(path);
    }
    let Some(family) = src.family else {
        bail!("give either --input or --family");
    };
    let g = &src.grid;
    let spec = GridSpec::new(g.dim, g.extent, g.points)?;
    let f = match family {
        FamilyName::Poisson => sample(
            &spec,
            families::poisson(PoissonParams::new(src.a, src.t, g.dim)?),
        )?,
        FamilyName::Margin => sample(
            &spec,
            families::poisson_inequality_margin(src.a, src.t, g.dim)?,
        )?,
        FamilyName::Sinc => {
            one_dimensional("sinc", g.dim)?;
            sample(
                &spec,
                families::sinc_counterexample(SincParams::new(src.a)?),
            )?
        }
        FamilyName::Gaussian => construct::gaussian_residual(&spec, src.mass, src.sigma)?,
        FamilyName::Bump => construct::Bump::from(src.bump).sample(&spec, src.mass)?,
        FamilyName::HeavyTail => {
            one_dimensional("heavy-tail", g.dim)?;
            sample(&spec, families::heavy_tail_density())?
        }
        FamilyName::Uniform => {
            one_dimensional("uniform", g.dim)?;
            sample(&spec, families::unit_variance_uniform())?
        }
        FamilyName::Reverse => {
            one_dimensional("reverse", g.dim)?;
            families::reverse_example(&spec, src.a, src.delta)?
        }
    };
    Ok(f)
}

#[derive(Serialize)]
struct CoeffsResult {
    n: usize,
    last_coefficient: f64,
    partial_sum: f64,
    complement: f64,
}

fn coeffs(cli: &Cli, a: &CoeffsArgs, out: &mut Vec<u8>) -> Result<i32> {
    let table = convineq::coeff::build_coeffs(a.n)?;
    match &a.output {
        None => table.write_csv(&mut *out)?,
        Some(path) => {
            let file =
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write_csv(std::io::BufWriter::new(file))?;
            let result = CoeffsResult {
                n: a.n,
                last_coefficient: table.coeff(a.n),
                partial_sum: table.partial_sum(a.n),
                complement: table.complement(a.n),
            };
            emit(cli, result, out)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FamilyResult {
    spec: GridSpec,
    mass: f64,
    max_abs: f64,
    value_at_origin: f64,
}

fn family(cli: &Cli, a: &FamilyArgs, out: &mut Vec<u8>) -> Result<i32> {
    if a.source.family.is_none() {
        bail!("family needs --family");
    }
    let f = load(&a.source)?;
    match &a.output {
        None => f.write_csv(&mut *out)?,
        Some(path) => {
            write_function(path, &f)?;
            let result = FamilyResult {
                spec: *f.spec(),
                mass: integrate(&f),
                max_abs: f.max_abs(),
                value_at_origin: f.value_at_origin(),
            };
            emit(cli, result, out)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ConstructResult {
    b: f64,
    predicted_mass: f64,
    series: Option<construct::SeriesDiagnostics>,
    spectral_mass: Option<f64>,
    /// L1 distance between the two constructions.
    discrepancy: Option<f64>,
}

fn construct_cmd(cli: &Cli, a: &ConstructArgs, out: &mut Vec<u8>) -> Result<i32> {
    let u = load(&a.source)?;
    let options = SeriesOptions {
        epsilon: a.epsilon,
        max_terms: a.max_terms,
        terms: a.terms,
    };
    let series = match a.method {
        Method::Series | Method::Both => Some(construct::build_series(&u, &options)?),
        Method::Spectral => None,
    };
    let spectral = match a.method {
        Method::Spectral | Method::Both => Some(construct::build_spectral(&u)?),
        Method::Series => None,
    };
    let discrepancy = match (&series, &spectral) {
        (Some(s), Some(f)) => Some(construct::crosscheck(s, f)?),
        _ => None,
    };
    if let Some(path) = &a.output {
        let f = series
            .as_ref()
            .map(|s| &s.f)
            .or(spectral.as_ref())
            .expect("one method ran");
        write_function(path, f)?;
    }
    let b = integrate(&u);
    let result = ConstructResult {
        b,
        predicted_mass: construct::predicted_mass(b.clamp(0.0, 0.25)),
        series: series.map(|s| s.diagnostics),
        spectral_mass: spectral.as_ref().map(integrate),
        discrepancy,
    };
    emit(cli, result, out)?;
    Ok(EXIT_OK)
}

fn verify(cli: &Cli, a: &VerifyArgs, out: &mut Vec<u8>) -> Result<i32> {
    let f = load(&a.source)?;
    let tolerance = a
        .tolerance
        .unwrap_or_else(|| analyze::default_tolerance(&f));
    let (report, u) = analyze::verify_with_residual(&f, tolerance)?;
    if let Some(path) = &a.output {
        write_function(path, &u)?;
    }
    let code = match report.verdict {
        Verdict::Solution => EXIT_OK,
        Verdict::Violation => EXIT_VIOLATION,
    };
    emit(cli, report, out)?;
    Ok(code)
}

#[derive(Serialize)]
struct MomentsResult {
    build: Option<construct::SeriesDiagnostics>,
    scans: Vec<analyze::MomentReport>,
}

fn moments(cli: &Cli, a: &MomentsArgs, out: &mut Vec<u8>) -> Result<i32> {
    let g = load(&a.source)?;
    let result = match a.demo {
        None => MomentsResult {
            build: None,
            scans: a
                .p
                .iter()
                .map(|&p| analyze::moment_scan(&g, p, a.levels))
                .collect::<convineq::Result<_>>()?,
        },
        Some(regime) => {
            let regime = match regime {
                Regime::Critical => MassRegime::Critical,
                Regime::Subcritical => MassRegime::Subcritical,
            };
            let mut options = DemoOptions::for_regime(regime);
            if let Some(e) = a.epsilon {
                options.series.epsilon = Some(e);
            }
            if let Some(gf) = a.guard {
                options.guard_factor = gf;
            }
            let demo = analyze::critical_moment_theorem_demo(&g, regime, a.levels, &options)?;
            MomentsResult {
                build: Some(demo.build),
                scans: demo.scans,
            }
        }
    };
    if let Some(path) = &a.output {
        let mut w = csv_writer(path)?;
        w.write_record(["p", "window", "value", "increment"])?;
        for s in &result.scans {
            for (k, (win, v)) in s.windows.iter().zip(&s.values).enumerate() {
                let inc = if k == 0 {
                    String::new()
                } else {
                    s.growth_increments[k - 1].to_string()
                };
                w.write_record([s.p.to_string(), win.to_string(), v.to_string(), inc])?;
            }
        }
        w.flush()?;
    }
    emit(cli, result, out)?;
    Ok(EXIT_OK)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn clt_cmd(cli: &Cli, a: &CltArgs, out: &mut Vec<u8>) -> Result<i32> {
    let kind = match a.kind {
        Kind::FiniteVariance => WKind::FiniteVariance,
        Kind::InfiniteVariance => WKind::InfiniteVariance,
    };
    let mut config = ExperimentConfig::new(kind, a.n.clone(), a.samples, a.seed);
    if a.w_extent.is_some() || a.w_points.is_some() {
        config.w_grid = GridSpec::new(
            1,
            a.w_extent.unwrap_or(config.w_grid.extent()),
            a.w_points.unwrap_or(config.w_grid.points_per_axis()),
        )?;
    }
    if a.out_extent.is_some() || a.out_points.is_some() {
        config.out_grid = GridSpec::new(
            1,
            a.out_extent.unwrap_or(config.out_grid.extent()),
            a.out_points.unwrap_or(config.out_grid.points_per_axis()),
        )?;
    }
    let results = clt::run_experiment_radii(&config, &a.radii)?;
    if let Some(path) = &a.output {
        let mut w = csv_writer(path)?;
        w.write_record(["R", "n", "p_grid", "phi", "p_mc", "stderr", "mass"])?;
        for r in &results {
            for (i, n) in r.n_list.iter().enumerate() {
                let (p_mc, se) = r
                    .mc_values
                    .get(i)
                    .map(|m| (m.p.to_string(), m.stderr.to_string()))
                    .unwrap_or_default();
                w.write_record([
                    r.radius.to_string(),
                    n.to_string(),
                    r.p_values[i].to_string(),
                    r.phi_values[i].to_string(),
                    p_mc,
                    se,
                    r.masses[i].to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    emit(cli, results, out)?;
    Ok(EXIT_OK)
}
