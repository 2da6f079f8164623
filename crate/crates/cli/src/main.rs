mod config;

use clap::{Args, Parser, Subcommand};
use config::{env_seed, Config, Lags};
use dtnoise::covariance::{cov_1d, CovKind, FamilyProvider, NoiseModel, NoiseModel2D, TabulatedCov};
use dtnoise::report::{
    self, acceptance, field_cells, fraction_within, mc_rows, mosaic, write_correlation_csv, write_cov_csv,
    write_field_csv, write_mc_csv, write_pgm, write_table_csv, TableId,
};
use dtnoise::simulate::{mc_run_1d, mc_run_2d, SimConfig};
use dtnoise::spectra::{parse_filter_file, FilterBank, LinearPhase, Taper, WaveletFamily, DEFAULT_PRODUCT_DEPTH};
use dtnoise::xcorr::{correlation_sequence, Method};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(dtnoise::Error),
    Acceptance(usize),
}

impl From<dtnoise::Error> for CliError {
    fn from(e: dtnoise::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Acceptance(_) => 1,
            CliError::Lib(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Acceptance(n) => write!(f, "{n} acceptance criteria failed"),
        }
    }
}

/// Second-order statistics of noise in dual-tree wavelet decompositions.
#[derive(Parser, Debug)]
#[command(name = "dtnoise", version)]
struct Cli {
    /// `key = value` file supplying defaults for any long option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving output files (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Primal/dual cross-correlation sequence.
    Xcorr(XcorrArgs),
    /// Reference table with printed values alongside.
    Table(TableArgs),
    /// Noise covariance of wavelet coefficients.
    Cov(CovArgs),
    /// Monte Carlo estimates against theory.
    Mc(McArgs),
    /// 2D theory and Monte Carlo covariance mosaics.
    Field2d(FieldArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
struct FamilyArgs {
    /// shannon, meyer, haar, franklin, spline<p> or custom.
    #[arg(long)]
    family: Option<String>,
    /// Number of bands.
    #[arg(long = "M")]
    bands: Option<usize>,
    /// Meyer transition width.
    #[arg(long)]
    eps: Option<f64>,
    /// Meyer taper: standard, cubic or linear.
    #[arg(long)]
    taper: Option<String>,
    /// Delay of the dual scaling function.
    #[arg(long)]
    d: Option<i64>,
    /// Filter file for the custom family.
    #[arg(long)]
    filters: Option<PathBuf>,
    /// Packet depth when the filter file holds a two-filter pair.
    #[arg(long)]
    packet_depth: Option<u32>,
    /// Number of factors in the infinite product.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args, Debug)]
struct XcorrArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    mprime: Option<usize>,
    /// `a..b`, `a` or `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    lags: Option<Lags>,
    /// auto, closed, quad or recursion.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// asymptotic_haar, dyadic_theory, meyer_first, meyer_last, hadamard or interband.
    id: Option<String>,
}

#[derive(Args, Debug, Default)]
struct NoiseArgs {
    /// white, exponential or table.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// CSV of `tau,value` rows for tabulated noise.
    #[arg(long)]
    noise_table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CovArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    mprime: Option<usize>,
    /// Level.
    #[arg(long, allow_hyphen_values = true)]
    j: Option<i32>,
    /// primal_dual, primal_primal or dual_dual.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lags: Option<Lags>,
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SimArgs {
    /// Coarsest level.
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; defaults to DTNOISE_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    lags: Option<Lags>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Signal length in unit lengths.
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Side of the square domain in unit lengths.
    #[arg(long)]
    side: Option<usize>,
    /// Level shown in the mosaics.
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Pixels per lag in the mosaics.
    #[arg(long)]
    scale: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only these criteria.
    #[arg(long)]
    criterion: Vec<usize>,
}

struct Ctx {
    cfg: Config,
    out: Option<PathBuf>,
}

impl Ctx {
    /// Writes to `DIR/name` under `--out`, otherwise to stdout.
    fn emit(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> dtnoise::Result<()>) -> Result<(), CliError> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let mut w = BufWriter::new(File::create(dir.join(name))?);
                f(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = BufWriter::new(stdout.lock());
                f(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    fn file(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> dtnoise::Result<()>) -> Result<PathBuf, CliError> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        Ok(path)
    }

    /// Summary lines go to stdout unless stdout carries CSV.
    fn note(&self, msg: &str) {
        if self.out.is_some() {
            println!("{msg}");
        } else {
            eprintln!("{msg}");
        }
    }
}

fn family(cfg: &Config, a: &FamilyArgs) -> Result<WaveletFamily, CliError> {
    let label: String = cfg.required(a.family.clone(), "family")?;
    let bands: Option<usize> = cfg.pick(a.bands, "M")?;
    let fam = match label.as_str() {
        "meyer" => {
            let bands = bands.unwrap_or(2);
            let eps = cfg.or(a.eps, "eps", 1.0 / (bands as f64 + 1.0))?;
            let taper = Taper::parse(&cfg.or(a.taper.clone(), "taper", "standard".to_string())?)?;
            WaveletFamily::meyer_with(bands, eps, taper, Some(LinearPhase::half_sample(bands)))?
        }
        "custom" => {
            let path: PathBuf = cfg.required(a.filters.clone(), "filters")?;
            let filters = parse_filter_file(&path)?;
            let bank = match cfg.pick(a.packet_depth, "packet-depth")? {
                Some(p) if filters.len() == 2 => FilterBank::packet(filters[0].clone(), filters[1].clone(), p)?,
                Some(_) => return Err(CliError::Usage("--packet-depth needs exactly two filters".into())),
                None => FilterBank::new(filters)?,
            };
            let depth = cfg.or(a.depth, "depth", DEFAULT_PRODUCT_DEPTH)?;
            let fam = WaveletFamily::custom_fir(bank, depth)?;
            if let Some(b) = bands {
                if b != fam.bands() {
                    return Err(CliError::Usage(format!("--M {b} but the filter bank has {} bands", fam.bands())));
                }
            }
            fam
        }
        other => report::family_from_label(other, bands.unwrap_or(2), None, false)?,
    };
    Ok(fam)
}

fn noise(cfg: &Config, a: &NoiseArgs) -> Result<NoiseModel, CliError> {
    let kind: String = cfg.or(a.noise.clone(), "noise", "white".to_string())?;
    let model = match kind.as_str() {
        "white" => NoiseModel::white(cfg.or(a.sigma2, "sigma2", 1.0)?),
        "exponential" | "exp" => NoiseModel::exponential(cfg.or(a.amplitude, "amplitude", 1.0)?, cfg.or(a.alpha, "alpha", 1.0)?),
        "table" | "tabulated" => {
            let path: PathBuf = cfg.required(a.noise_table.clone(), "noise-table")?;
            NoiseModel::Tabulated(TabulatedCov::from_csv_path(&path)?)
        }
        other => return Err(CliError::Usage(format!("unknown noise model '{other}'"))),
    };
    model.validate()?;
    Ok(model)
}

fn method(cfg: &Config, flag: Option<String>) -> Result<Method, CliError> {
    Ok(Method::parse(&cfg.or(flag, "method", "auto".to_string())?)?)
}

fn seed(cfg: &Config, flag: Option<u64>) -> Result<u64, CliError> {
    match cfg.pick(flag, "seed")? {
        Some(s) => Ok(s),
        None => env_seed(),
    }
}

fn cmd_xcorr(ctx: &Ctx, a: XcorrArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let fam = family(cfg, &a.family)?;
    let m = cfg.required(a.m, "m")?;
    let mp = cfg.or(a.mprime, "mprime", m)?;
    let lags = cfg.or(a.lags, "lags", Lags((-3..=3).collect()))?;
    let d = cfg.or(a.family.d, "d", 0)?;
    let lags: Vec<f64> = lags.0.iter().map(|&l| l as f64).collect();
    let seq = correlation_sequence(&fam, m, mp, d, &lags, method(cfg, a.method)?)?;
    ctx.emit("xcorr.csv", |w| write_correlation_csv(&[seq], w))
}

fn cmd_table(ctx: &Ctx, a: TableArgs) -> Result<(), CliError> {
    let id: String = ctx.cfg.required(a.id, "table")?;
    let id = TableId::parse(&id)?;
    let rows = report::build_table(id)?;
    ctx.emit(&format!("table_{id}.csv"), |w| write_table_csv(&rows, w))
}

fn cmd_cov(ctx: &Ctx, a: CovArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let fam = family(cfg, &a.family)?;
    let model = noise(cfg, &a.noise)?;
    let m = cfg.required(a.m, "m")?;
    let mp = cfg.or(a.mprime, "mprime", m)?;
    let j = cfg.or(a.j, "j", 1)?;
    let kind = CovKind::parse(&cfg.or(a.kind, "kind", "primal_dual".to_string())?)?;
    let d = cfg.or(a.family.d, "d", 0)?;
    let lags = cfg.or(a.lags, "lags", Lags((-3..=3).collect()))?;
    let provider = FamilyProvider::new(&fam, m, mp, d, kind)?.with_method(method(cfg, a.method)?);
    let seq = cov_1d(&model, &provider, j, &lags.0)?;
    ctx.emit("cov.csv", |w| write_cov_csv(&[seq], w))
}

fn sim_config(cfg: &Config, fam: WaveletFamily, d: i64, s: &SimArgs, length: usize, oversample: usize) -> Result<SimConfig, CliError> {
    let mut c = SimConfig::new(fam, cfg.or(s.levels, "levels", 1)?, length);
    c.d = d;
    c.oversample = cfg.or(s.oversample, "oversample", oversample)?;
    c.runs = cfg.or(s.runs, "runs", c.runs)?;
    c.base_seed = seed(cfg, s.seed)?;
    Ok(c)
}

fn cmd_mc(ctx: &Ctx, a: McArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let fam = family(cfg, &a.family)?;
    let model = noise(cfg, &a.noise)?;
    let d = cfg.or(a.family.d, "d", 0)?;
    let length = cfg.or(a.length, "length", 1 << 12)?;
    let config = sim_config(cfg, fam.clone(), d, &a.sim, length, 16)?;
    let lags = cfg.or(a.sim.lags.clone(), "lags", Lags((0..=3).collect()))?;
    let est = mc_run_1d(&config, &model, &lags.0)?;

    let mut theory: BTreeMap<(u32, usize, usize, &'static str), Vec<f64>> = BTreeMap::new();
    for e in &est {
        let key = (e.j, e.m, e.mprime, e.kind.as_str());
        if !theory.contains_key(&key) {
            let p = FamilyProvider::new(&fam, e.m, e.mprime, d, e.kind)?;
            theory.insert(key, cov_1d(&model, &p, e.j as i32, &lags.0)?.values);
        }
    }
    let rows = mc_rows(&est, |e| {
        let i = lags.0.iter().position(|&l| l == e.lag).unwrap();
        Ok(theory[&(e.j, e.m, e.mprime, e.kind.as_str())][i])
    })?;
    ctx.emit("mc.csv", |w| write_mc_csv(&rows, w))?;
    let frac = fraction_within(rows.iter().map(|r| r.z));
    ctx.note(&format!(
        "{:.1}% of {} cells within 3 standard errors (biased circular sample covariance, {} runs)",
        100.0 * frac,
        rows.len(),
        config.runs
    ));
    Ok(())
}

fn cmd_field2d(ctx: &Ctx, a: FieldArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let fam = family(cfg, &a.family)?;
    let d = cfg.or(a.family.d, "d", 0)?;
    let sigma2 = cfg.or(a.sigma2, "sigma2", 1.0)?;
    let levels = cfg.or(a.sim.levels, "levels", 1)?;
    let coarse = fam.bands().pow(levels);
    let side = cfg.or(a.side, "side", coarse * 252usize.div_ceil(coarse))?;
    let config = sim_config(cfg, fam.clone(), d, &a.sim, side, 8)?;
    let level = cfg.or(a.level, "level", 1)?;
    if level < 1 || level > config.levels {
        return Err(CliError::Usage(format!("--level must lie in 1..={}", config.levels)));
    }
    let lags = cfg.or(a.sim.lags.clone(), "lags", Lags((0..=3).collect()))?;
    let pairs: Vec<(i64, i64)> = lags.0.iter().flat_map(|&x| lags.0.iter().map(move |&y| (x, y))).collect();
    let est = mc_run_2d(&config, &NoiseModel2D::White { sigma2 }, &pairs, false)?;
    let cells = field_cells(&fam, d, sigma2, level, &est)?;
    let scale = cfg.or(a.scale, "scale", 8)?;
    ctx.file("field2d.csv", |w| write_field_csv(&cells, w))?;
    let bands = fam.bands();
    let t = mosaic(bands, &cells, |c| c.theory, scale)?;
    let m = mosaic(bands, &cells, |c| c.mc, scale)?;
    let tp = ctx.file("field2d_theory.pgm", |w| write_pgm(&t, w))?;
    let mp = ctx.file("field2d_mc.pgm", |w| write_pgm(&m, w))?;
    let zs = cells.iter().map(|c| dtnoise::simulate::z_score(c.mc, c.stderr, c.theory));
    println!(
        "level {level}: {:.1}% of {} cells within 3 standard errors; images {} and {}",
        100.0 * fraction_within(zs),
        cells.len(),
        tp.display(),
        mp.display()
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let numbers: Vec<usize> = if a.criterion.is_empty() {
        (1..=acceptance::CRITERIA).collect()
    } else {
        a.criterion
    };
    let mut failed = 0;
    for n in &numbers {
        if !(1..=acceptance::CRITERIA).contains(n) {
            return Err(CliError::Usage(format!("criteria are numbered 1..={}", acceptance::CRITERIA)));
        }
    }
    for n in numbers.iter().copied() {
        let c = acceptance::run(n);
        println!("{c}");
        if !c.passed {
            failed += 1;
        }
    }
    println!("{}/{} criteria passed", numbers.len() - failed, numbers.len());
    if failed > 0 {
        Err(CliError::Acceptance(failed))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let out = match cli.out {
        Some(o) => Some(o),
        None => cfg.pick::<PathBuf>(None, "out")?,
    };
    let ctx = Ctx { cfg, out };
    match cli.command {
        Command::Xcorr(a) => cmd_xcorr(&ctx, a),
        Command::Table(a) => cmd_table(&ctx, a),
        Command::Cov(a) => cmd_cov(&ctx, a),
        Command::Mc(a) => cmd_mc(&ctx, a),
        Command::Field2d(a) => cmd_field2d(&ctx, a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dtnoise: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
