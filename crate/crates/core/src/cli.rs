//! Command-line front end. Every command renders its CSV into memory, so
//! the same code path serves normal runs, manifest replay and tests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, LogDensity, Partition};
use crate::entropy::{entropy, entropy_curve, CurveFamily, McEstimate};
use crate::error::{Error, Result};
use crate::information::{kl_direct, kl_lcfusn_vs_lsn, mutual_information_of, Direction};
use crate::oracle::{entropy_quadrature, kl_quadrature, mi_quadrature, QuadratureConfig};
use crate::specfile::{load_lsn, load_spec, read_points};
use crate::stream::{SeedStream, SHARD_SIZE};

pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "skewinfo",
    version,
    about = "Entropy, mutual information and KL divergence for skew-normal families"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo shards (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Shannon entropy of a distribution file.
    Entropy(EntropyArgs),
    /// Mutual information between two blocks of a canonical LCFUSN vector.
    Mutinfo(MutinfoArgs),
    /// Divergence between an LCFUSN law and an LSN law.
    Kl(KlArgs),
    /// Draw i.i.d. samples.
    Sample(SampleArgs),
    /// Evaluate the log-density at points read from a CSV file.
    Density(DensityArgs),
    /// Entropy over a parameter grid, plus a gnuplot script.
    Curve(CurveArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (stdout when absent). A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EntropyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Append a quadrature value (dimension <= 2).
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MutinfoArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Size of the leading block; the rest form the second block.
    #[arg(long)]
    pub partition: usize,
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum DirectionArg {
    /// D(LCFUSN || LSN)
    ZToY,
    /// D(LSN || LCFUSN)
    YToZ,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::ZToY => Direction::ZToY,
            DirectionArg::YToZ => Direction::YToZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KlArgs {
    /// LCFUSN distribution file.
    #[arg(long)]
    pub spec: PathBuf,
    /// LSN distribution file sharing mu and Sigma.
    #[arg(long)]
    pub lsn: PathBuf,
    #[arg(long, value_enum, default_value_t = DirectionArg::ZToY)]
    pub direction: DirectionArg,
    #[arg(long)]
    pub oracle: bool,
    /// Append the estimate obtained from the two log-densities directly.
    #[arg(long)]
    pub direct: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// CSV of evaluation points, one per row.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum CurveFamilyArg {
    Sn,
    Lsn,
    /// CFUSN_{1,2} over (delta1, delta2)
    Cfusn12,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub family: CurveFamilyArg,
    /// `start:stop:step` for alpha, or for delta1.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// `start:stop:step` for delta2 (defaults to --grid).
    #[arg(long, allow_hyphen_values = true)]
    pub grid2: Option<String>,
    /// Comma-separated variances, one curve each (sn / lsn).
    #[arg(long, default_value = "1")]
    pub sigma2: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the regenerated output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub spec_files: Vec<PathBuf>,
    pub seed: u64,
    pub n_samples: usize,
    pub tool_version: String,
    pub timestamp: String,
    pub output: Option<PathBuf>,
    pub invocation: Command,
}

/// Rendered results of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub csv: String,
    pub plot_script: Option<String>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn scale(bits: bool) -> f64 {
    if bits {
        1.0 / std::f64::consts::LN_2
    } else {
        1.0
    }
}

fn unit(bits: bool) -> &'static str {
    if bits {
        "bits"
    } else {
        "nats"
    }
}

fn estimate_cols(e: &McEstimate) -> String {
    format!(
        "{},{},{},{}",
        num(e.value),
        num(e.std_error),
        num(e.closed_form_part),
        num(e.mc_part)
    )
}

fn oracle_cols(e: &McEstimate, oracle: f64) -> String {
    format!(",{},{}", num(oracle), num((e.value - oracle).abs()))
}

fn absolute(p: &Path) -> PathBuf {
    fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Entropy(_) => "entropy",
            Command::Mutinfo(_) => "mutinfo",
            Command::Kl(_) => "kl",
            Command::Sample(_) => "sample",
            Command::Density(_) => "density",
            Command::Curve(_) => "curve",
            Command::Replay(_) => "replay",
        }
    }

    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Entropy(a) => a.run.out.as_ref(),
            Command::Mutinfo(a) => a.run.out.as_ref(),
            Command::Kl(a) => a.run.out.as_ref(),
            Command::Sample(a) => a.out.as_ref(),
            Command::Density(a) => a.out.as_ref(),
            Command::Curve(a) => a.run.out.as_ref(),
            Command::Replay(a) => a.out.as_ref(),
        }
    }

    fn set_out(&mut self, out: Option<PathBuf>) {
        match self {
            Command::Entropy(a) => a.run.out = out,
            Command::Mutinfo(a) => a.run.out = out,
            Command::Kl(a) => a.run.out = out,
            Command::Sample(a) => a.out = out,
            Command::Density(a) => a.out = out,
            Command::Curve(a) => a.run.out = out,
            Command::Replay(a) => a.out = out,
        }
    }

    fn seed_and_samples(&self) -> (u64, usize) {
        match self {
            Command::Entropy(a) => (a.run.seed, a.run.samples),
            Command::Mutinfo(a) => (a.run.seed, a.run.samples),
            Command::Kl(a) => (a.run.seed, a.run.samples),
            Command::Curve(a) => (a.run.seed, a.run.samples),
            Command::Sample(a) => (a.seed, a.count),
            Command::Density(_) | Command::Replay(_) => (0, 0),
        }
    }

    /// Input paths made absolute, so a manifest can be replayed from any
    /// working directory.
    fn with_absolute_inputs(&self) -> Command {
        let mut c = self.clone();
        match &mut c {
            Command::Entropy(a) => a.spec = absolute(&a.spec),
            Command::Mutinfo(a) => a.spec = absolute(&a.spec),
            Command::Kl(a) => {
                a.spec = absolute(&a.spec);
                a.lsn = absolute(&a.lsn);
            }
            Command::Sample(a) => a.spec = absolute(&a.spec),
            Command::Density(a) => {
                a.spec = absolute(&a.spec);
                a.points = absolute(&a.points);
            }
            Command::Replay(a) => a.manifest = absolute(&a.manifest),
            Command::Curve(_) => {}
        }
        c
    }

    fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Command::Entropy(a) => vec![a.spec.clone()],
            Command::Mutinfo(a) => vec![a.spec.clone()],
            Command::Kl(a) => vec![a.spec.clone(), a.lsn.clone()],
            Command::Sample(a) => vec![a.spec.clone()],
            Command::Density(a) => vec![a.spec.clone(), a.points.clone()],
            Command::Replay(a) => vec![a.manifest.clone()],
            Command::Curve(_) => vec![],
        }
    }
}

/// Runs a command and returns its output without touching the file system
/// beyond reading inputs.
pub fn render(cmd: &Command) -> Result<Rendered> {
    let csv = match cmd {
        Command::Entropy(a) => render_entropy(a)?,
        Command::Mutinfo(a) => render_mutinfo(a)?,
        Command::Kl(a) => render_kl(a)?,
        Command::Sample(a) => render_sample(a)?,
        Command::Density(a) => render_density(a)?,
        Command::Curve(a) => return render_curve(a),
        Command::Replay(a) => {
            let m = read_manifest(&a.manifest)?;
            return render(&m.invocation);
        }
    };
    Ok(Rendered { csv, plot_script: None })
}

fn render_entropy(a: &EntropyArgs) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let k = scale(a.run.bits);
    let stream = SeedStream::with_domain(a.run.seed, "entropy");
    let e = entropy(&spec, &stream, a.run.samples)?.scaled(k);
    let mut s = format!(
        "family,n,m,estimate_{u},std_error,closed_form_part,mc_part,n_samples,seed",
        u = unit(a.run.bits)
    );
    if a.oracle {
        s.push_str(",oracle_value,abs_diff");
    }
    s.push('\n');
    write!(
        s,
        "{},{},{},{},{},{}",
        spec.family(),
        spec.dim(),
        spec.skew_dim(),
        estimate_cols(&e),
        e.n_samples,
        a.run.seed
    )
    .ok();
    if a.oracle {
        let q = entropy_quadrature(&spec, &QuadratureConfig::default())? * k;
        s.push_str(&oracle_cols(&e, q));
    }
    s.push('\n');
    Ok(s)
}

fn render_mutinfo(a: &MutinfoArgs) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let n = spec.dim();
    if a.partition == 0 || a.partition >= n {
        return Err(Error::InvalidPartition(format!(
            "leading block size must lie in 1..{n}, got {}",
            a.partition
        )));
    }
    let part = Partition::new(a.partition, n - a.partition)?;
    let k = scale(a.run.bits);
    let stream = SeedStream::with_domain(a.run.seed, "mutinfo");
    let e = mutual_information_of(&spec, &part, &stream, a.run.samples)?.scaled(k);
    let mut s = format!(
        "family,n,m,n1,n2,estimate_{u},std_error,closed_form_part,mc_part,n_samples,seed",
        u = unit(a.run.bits)
    );
    if a.oracle {
        s.push_str(",oracle_value,abs_diff");
    }
    s.push('\n');
    write!(
        s,
        "{},{},{},{},{},{},{},{}",
        spec.family(),
        n,
        spec.skew_dim(),
        a.partition,
        n - a.partition,
        estimate_cols(&e),
        e.n_samples,
        a.run.seed
    )
    .ok();
    if a.oracle {
        let (DistributionSpec::Cfusn(c) | DistributionSpec::LogCfusn(c)) = &spec else {
            unreachable!("mutual_information_of accepted the spec")
        };
        let q = mi_quadrature(c.skew(), &part, &QuadratureConfig::default())? * k;
        s.push_str(&oracle_cols(&e, q));
    }
    s.push('\n');
    Ok(s)
}

fn render_kl(a: &KlArgs) -> Result<String> {
    let z = load_spec(&a.spec)?;
    let y = load_lsn(&a.lsn)?;
    let dir: Direction = a.direction.into();
    let k = scale(a.run.bits);
    let stream = SeedStream::with_domain(a.run.seed, "kl");
    let e = kl_lcfusn_vs_lsn(&z, &y, dir, &stream, a.run.samples)?.scaled(k);
    let mut s = format!(
        "family,n,m,direction,estimate_{u},std_error,closed_form_part,mc_part,n_samples,seed",
        u = unit(a.run.bits)
    );
    if a.direct {
        s.push_str(",direct_estimate,direct_std_error");
    }
    if a.oracle {
        s.push_str(",oracle_value,abs_diff");
    }
    s.push('\n');
    let dir_name = match a.direction {
        DirectionArg::ZToY => "z-to-y",
        DirectionArg::YToZ => "y-to-z",
    };
    write!(
        s,
        "{},{},{},{},{},{},{}",
        z.family(),
        z.dim(),
        z.skew_dim(),
        dir_name,
        estimate_cols(&e),
        e.n_samples,
        a.run.seed
    )
    .ok();
    let y_as_spec = y.to_lcfusn()?;
    if a.direct {
        let direct_stream = SeedStream::with_domain(a.run.seed, "kl-direct");
        let d = match dir {
            Direction::ZToY => kl_direct(&z, &y, &direct_stream, a.run.samples)?,
            Direction::YToZ => kl_direct(&y_as_spec, &z, &direct_stream, a.run.samples)?,
        }
        .scaled(k);
        write!(s, ",{},{}", num(d.value), num(d.std_error)).ok();
    }
    if a.oracle {
        let cfg = QuadratureConfig::default();
        let q = match dir {
            Direction::ZToY => kl_quadrature(&z, &y, &cfg)?,
            Direction::YToZ => kl_quadrature(&y_as_spec, &z, &cfg)?,
        } * k;
        s.push_str(&oracle_cols(&e, q));
    }
    s.push('\n');
    Ok(s)
}

fn coord_header(n: usize) -> String {
    (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

fn render_sample(a: &SampleArgs) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let stream = SeedStream::with_domain(a.seed, "sample");
    let mut s = coord_header(spec.dim());
    s.push('\n');
    let shards = a.count.div_ceil(SHARD_SIZE);
    for shard in 0..shards {
        let mut rng = stream.substream(shard as u64);
        let len = SHARD_SIZE.min(a.count - shard * SHARD_SIZE);
        for _ in 0..len {
            let x = spec.draw(&mut rng);
            let row: Vec<String> = x.iter().map(|&v| num(v)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
    }
    Ok(s)
}

fn render_density(a: &DensityArgs) -> Result<String> {
    let spec = load_spec(&a.spec)?;
    let points = read_points(&a.points)?;
    let mut s = coord_header(spec.dim());
    s.push_str(",log_pdf\n");
    for (i, p) in points.iter().enumerate() {
        let l = spec.log_pdf(p).map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => Error::Parse(format!(
                "{}: row {}: expected {expected} coordinates, found {found}",
                a.points.display(),
                i + 1
            )),
            other => other,
        })?;
        let row: Vec<String> = p.iter().map(|&v| num(v)).collect();
        writeln!(s, "{},{}", row.join(","), num(l)).ok();
    }
    Ok(s)
}

/// Parses `start:stop:step` into the inclusive arithmetic grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Parse(format!("grid '{text}' is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (v[0], v[1], v[2]);
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Parse(format!("grid '{text}' has too many points")));
    }
    Ok((0..count)
        .map(|i| {
            let x = start + i as f64 * step;
            if (x / step).abs() < 1e-9 {
                0.0
            } else {
                x
            }
        })
        .collect())
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{p}' in '{text}' is not a number")))
        })
        .collect()
}

fn render_curve(a: &CurveArgs) -> Result<Rendered> {
    let k = scale(a.run.bits);
    let u = unit(a.run.bits);
    let stream = SeedStream::with_domain(a.run.seed, "curve");
    let g1 = parse_grid(&a.grid)?;
    let mut s = String::new();
    let script = match a.family {
        CurveFamilyArg::Sn | CurveFamilyArg::Lsn => {
            if a.grid2.is_some() {
                return Err(Error::Parse("--grid2 applies to cfusn12 only".into()));
            }
            let variances = parse_list(&a.sigma2)?;
            writeln!(
                s,
                "family,sigma2,alpha,entropy_{u},std_error,closed_form_part,mc_part,n_samples,seed"
            )
            .ok();
            let grid: Vec<Vec<f64>> = g1.iter().map(|&x| vec![x]).collect();
            for &v in &variances {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {v}")));
                }
                let fam = if a.family == CurveFamilyArg::Sn {
                    CurveFamily::SkewNormal { sigma: v.sqrt() }
                } else {
                    CurveFamily::LogSkewNormal { sigma: v.sqrt() }
                };
                for p in entropy_curve(fam, &grid, &stream, a.run.samples)? {
                    let e = p.estimate.scaled(k);
                    writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        if a.family == CurveFamilyArg::Sn { "sn" } else { "lsn" },
                        num(v),
                        num(p.coords[0]),
                        estimate_cols(&e),
                        e.n_samples,
                        a.run.seed
                    )
                    .ok();
                }
            }
            curve_script_1d(a, &variances)
        }
        CurveFamilyArg::Cfusn12 => {
            let g2 = match &a.grid2 {
                Some(t) => parse_grid(t)?,
                None => g1.clone(),
            };
            writeln!(
                s,
                "family,delta1,delta2,entropy_{u},std_error,closed_form_part,mc_part,n_samples,seed"
            )
            .ok();
            let grid: Vec<Vec<f64>> = g1.iter().flat_map(|&x| g2.iter().map(move |&y| vec![x, y])).collect();
            let points = entropy_curve(CurveFamily::Cfusn12, &grid, &stream, a.run.samples)?;
            for p in &points {
                let e = p.estimate.scaled(k);
                writeln!(
                    s,
                    "cfusn12,{},{},{},{},{}",
                    num(p.coords[0]),
                    num(p.coords[1]),
                    estimate_cols(&e),
                    e.n_samples,
                    a.run.seed
                )
                .ok();
            }
            curve_script_2d(a, g1.len(), g2.len())
        }
    };
    Ok(Rendered {
        csv: s,
        plot_script: Some(script),
    })
}

fn data_name(a: &CurveArgs) -> String {
    a.run
        .out
        .as_ref()
        .and_then(|p| p.file_name())
        .map_or_else(|| "curve.csv".to_string(), |f| f.to_string_lossy().into_owned())
}

fn curve_script_1d(a: &CurveArgs, variances: &[f64]) -> String {
    let data = data_name(a);
    let name = if a.family == CurveFamilyArg::Sn { "SN" } else { "LSN" };
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").ok();
    writeln!(s, "set key autotitle columnhead").ok();
    writeln!(s, "set xlabel 'alpha'").ok();
    writeln!(s, "set ylabel 'entropy ({})'", unit(a.run.bits)).ok();
    writeln!(s, "set title '{name}(0, sigma^2, alpha)'").ok();
    let plots: Vec<String> = variances
        .iter()
        .map(|v| format!("'{data}' using 3:($2=={v:?} ? $4 : 1/0):5 with yerrorlines title 'sigma^2 = {v}'"))
        .collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).ok();
    s
}

fn curve_script_2d(a: &CurveArgs, rows: usize, cols: usize) -> String {
    let data = data_name(a);
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").ok();
    writeln!(s, "set xlabel 'delta1'").ok();
    writeln!(s, "set ylabel 'delta2'").ok();
    writeln!(s, "set zlabel 'entropy ({})'", unit(a.run.bits)).ok();
    writeln!(s, "set title 'CFUSN_{{1,2}}(delta1, delta2)'").ok();
    writeln!(s, "set dgrid3d {rows},{cols}").ok();
    writeln!(s, "set pm3d").ok();
    writeln!(s, "splot '{data}' every ::1 using 2:3:4 with lines notitle").ok();
    s
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn plot_path(out: &Path) -> PathBuf {
    out.with_extension("gp")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs `cmd`, writes its output (and manifest) and returns the CSV text.
pub fn execute(cmd: &Command) -> Result<String> {
    if let Command::Replay(r) = cmd {
        return replay(r);
    }
    let invocation = cmd.with_absolute_inputs();
    let rendered = render(&invocation)?;
    if let Some(out) = cmd.out() {
        write_file(out, &rendered.csv)?;
        if let Some(script) = &rendered.plot_script {
            write_file(&plot_path(out), script)?;
        }
        let (seed, n_samples) = cmd.seed_and_samples();
        let mut recorded = invocation.clone();
        recorded.set_out(Some(absolute(out)));
        let manifest = RunManifest {
            command: cmd.name().to_string(),
            spec_files: invocation.inputs(),
            seed,
            n_samples,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            output: Some(absolute(out)),
            invocation: recorded,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        write_file(&manifest_path(out), &(json + "\n"))?;
    }
    Ok(rendered.csv)
}

fn replay(r: &ReplayArgs) -> Result<String> {
    let manifest = read_manifest(&r.manifest)?;
    if manifest.tool_version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.tool_version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let mut inv = manifest.invocation.clone();
    inv.set_out(None);
    let rendered = render(&inv)?;
    if let Some(out) = &r.out {
        write_file(out, &rendered.csv)?;
    }
    if let Some(orig) = &manifest.output {
        match fs::read_to_string(orig) {
            Ok(prev) if prev == rendered.csv => eprintln!("replay matches {}", orig.display()),
            Ok(_) => {
                return Err(Error::Io(format!("replayed output differs from {}", orig.display())));
            }
            Err(_) => eprintln!("recorded output {} not found; nothing to compare", orig.display()),
        }
    }
    Ok(rendered.csv)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match execute(&cli.command) {
        Ok(csv) => {
            if cli.command.out().is_none() {
                print!("{csv}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}
