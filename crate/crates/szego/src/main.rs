//! Command-line interface. Five subcommands cover the pipeline: `coeff`
//! (boundary coefficients), `trace` (spectral deficit at one alpha),
//! `sweep` (deficit vs. prediction over an alpha grid), `ee`
//! (entanglement-entropy scaling for the thermal Fermi state), and
//! `scaling-limit` (coefficient continuity under symbol scaling). Every
//! run prints its CSV to stdout; with `--out DIR` the same bytes are also
//! written as a file. Floats carry 12 significant digits.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use szego::coeffs::{a_d_coefficient, b1_coefficient, b_d_coefficient, QuadratureSpec};
use szego::geometry::{parse_region, Region};
use szego::harness::{
    default_alphas, ee_scaling, emit_plotdata, fmt_g12, parse_config, scaling_limit_check,
    szego_sweep, CsvReport,
};
use szego::operators::d_alpha_trace;
use szego::symbols::{fermi_symbol, gaussian_symbol, FermiParams, Symbol};
use szego::testfuncs::{parse_test_function, TestFunction};
use szego::{Error, Result};

#[derive(Parser)]
#[command(
    name = "szego",
    version,
    about = "Trace asymptotics of truncated Wiener-Hopf operators: boundary \
             coefficients, spectral deficits, and entanglement-entropy scaling"
)]
struct Cli {
    /// key = value file supplying a default for any long flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory to write CSV / plot-data artifacts into
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker-pool size (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Boundary coefficient of the trace expansion
    Coeff(CoeffArgs),
    /// Spectral trace deficit of the truncated operator at one alpha
    Trace(TraceArgs),
    /// Alpha sweep of the deficit against the coefficient prediction
    Sweep(SweepArgs),
    /// Entanglement-entropy scaling for the thermal Fermi state
    Ee(EeArgs),
    /// Coefficient-level scaling-limit check for an interpolated symbol family
    ScalingLimit(ScalingArgs),
}

#[derive(Args)]
struct CoeffArgs {
    /// Symbol name: gaussian | fermi
    #[arg(long)]
    symbol: Option<String>,
    /// Test function: poly:p | renyi:gamma | abs:gamma | tlog
    #[arg(long)]
    f: Option<String>,
    /// Region: interval:a,b | halfline | disk:R | polygon:x1,y1;...
    #[arg(long)]
    region: Option<String>,
    /// Replace the region by box \ region with this box half-width
    #[arg(long, value_name = "L")]
    complement_box: Option<f64>,
    /// Ambient dimension when no region is given (1: half-line edge
    /// coefficient, 2: directed half-plane coefficient)
    #[arg(long)]
    dim: Option<usize>,
    /// Boundary direction x,y for the half-plane coefficient (d = 2)
    #[arg(long, value_name = "X,Y")]
    direction: Option<String>,
    /// Finest principal-value truncation level
    #[arg(long, value_name = "EPS")]
    eps_min: Option<f64>,
    /// Momentum-integration cutoff
    #[arg(long, value_name = "XI")]
    xi_cutoff: Option<f64>,
    /// Fermi temperature
    #[arg(long = "T", value_name = "T")]
    temperature: Option<f64>,
    /// Fermi chemical potential
    #[arg(long)]
    mu: Option<f64>,
    /// Fermi dispersion; only "xi2" (h = |xi|^2) is supported
    #[arg(long)]
    hamiltonian: Option<String>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Grid points per kernel oscillation length
    #[arg(long)]
    grid_density: Option<f64>,
    /// Symbol name: gaussian | fermi
    #[arg(long)]
    symbol: Option<String>,
    /// Test function: poly:p | renyi:gamma | abs:gamma | tlog
    #[arg(long)]
    f: Option<String>,
    /// Region: interval:a,b | halfline | disk:R | polygon:x1,y1;...
    #[arg(long)]
    region: Option<String>,
    /// Replace the region by box \ region with this box half-width
    #[arg(long, value_name = "L")]
    complement_box: Option<f64>,
    /// Report the refined-grid deficit instead of the base-grid one
    #[arg(long)]
    refine_check: bool,
    /// Subtract f(0) so the test function vanishes at zero
    #[arg(long)]
    shift_f0: bool,
    #[arg(long = "T", value_name = "T")]
    temperature: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    hamiltonian: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated increasing alpha list (default 10,20,40,80 in d=1;
    /// 4,6,8,10 in d=2)
    #[arg(long, value_name = "A1,A2,...")]
    alphas: Option<String>,
    #[arg(long)]
    grid_density: Option<f64>,
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long, value_name = "L")]
    complement_box: Option<f64>,
    #[arg(long)]
    shift_f0: bool,
    #[arg(long, value_name = "EPS")]
    eps_min: Option<f64>,
    #[arg(long, value_name = "XI")]
    xi_cutoff: Option<f64>,
    #[arg(long = "T", value_name = "T")]
    temperature: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    hamiltonian: Option<String>,
}

#[derive(Args)]
struct EeArgs {
    /// Renyi index
    #[arg(long)]
    gamma: Option<f64>,
    /// Bounded region whose scaled copy is the entangling cut
    #[arg(long)]
    region: Option<String>,
    /// Half-width of the auxiliary box truncating the complement
    #[arg(long, value_name = "L")]
    box_half_width: Option<f64>,
    #[arg(long, value_name = "A1,A2,...")]
    alphas: Option<String>,
    #[arg(long)]
    grid_density: Option<f64>,
    #[arg(long, value_name = "EPS")]
    eps_min: Option<f64>,
    #[arg(long, value_name = "XI")]
    xi_cutoff: Option<f64>,
    #[arg(long = "T", value_name = "T")]
    temperature: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    hamiltonian: Option<String>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Limit symbol a0: gaussian | fermi
    #[arg(long)]
    symbol0: Option<String>,
    /// Far end a1 of the family a0 + lambda (a1 - a0)
    #[arg(long)]
    symbol1: Option<String>,
    /// Test function applied to the scaled family
    #[arg(long)]
    f: Option<String>,
    /// Homogeneous model of f near zero, used at the limit
    #[arg(long)]
    f_model: Option<String>,
    /// Homogeneity exponent of the lambda^(-gamma) rescaling
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated lambda list in (0, 1]
    #[arg(long, value_name = "L1,L2,...")]
    lambdas: Option<String>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long, value_name = "L")]
    complement_box: Option<f64>,
    #[arg(long, value_name = "EPS")]
    eps_min: Option<f64>,
    #[arg(long, value_name = "XI")]
    xi_cutoff: Option<f64>,
    #[arg(long = "T", value_name = "T")]
    temperature: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    hamiltonian: Option<String>,
}

/// Config-file values; CLI flags take precedence, later file lines beat
/// earlier ones.
struct Cfg(Vec<(String, String)>);

impl Cfg {
    fn load(path: &Option<PathBuf>) -> Result<Cfg> {
        match path {
            None => Ok(Cfg(Vec::new())),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                    path: p.display().to_string(),
                    source: e,
                })?;
                Ok(Cfg(parse_config(&text)?))
            }
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn string(&self, cli: &Option<String>, key: &str) -> Option<String> {
        cli.clone().or_else(|| self.raw(key).map(str::to_string))
    }

    fn f64(&self, cli: Option<f64>, key: &str) -> Result<Option<f64>> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self
                .raw(key)
                .map(|s| s.parse::<f64>().map_err(|_| bad_key(key, s)))
                .transpose(),
        }
    }

    fn usize(&self, cli: Option<usize>, key: &str) -> Result<Option<usize>> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self
                .raw(key)
                .map(|s| s.parse::<usize>().map_err(|_| bad_key(key, s)))
                .transpose(),
        }
    }

    fn flag(&self, cli: bool, key: &str) -> Result<bool> {
        if cli {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some(s) => match s {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(bad_key(key, other)),
            },
        }
    }

    fn list(&self, cli: &Option<String>, key: &str) -> Result<Option<Vec<f64>>> {
        match self.string(cli, key) {
            None => Ok(None),
            Some(text) => parse_f64_list(&text, key).map(Some),
        }
    }
}

fn bad_key(key: &str, value: &str) -> Error {
    Error::Config(format!("cannot parse value {value:?} for key {key}"))
}

fn parse_f64_list(text: &str, key: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad_key(key, p)))
        .collect()
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required {what} (flag or config key)")))
}

fn build_quad(eps_min: Option<f64>, xi_cutoff: Option<f64>) -> Result<QuadratureSpec> {
    let mut q = QuadratureSpec::default();
    if let Some(e) = eps_min {
        q = q.with_eps_min(e);
    }
    if let Some(x) = xi_cutoff {
        q.xi_cutoff = x;
    }
    q.validate()?;
    Ok(q)
}

fn build_region(text: Option<String>, complement_box: Option<f64>) -> Result<Option<Region>> {
    let Some(t) = text else {
        return Ok(None);
    };
    let r = parse_region(&t)?;
    match complement_box {
        Some(l) => Ok(Some(r.complement_in_box(l)?)),
        None => Ok(Some(r)),
    }
}

fn fermi_params(
    cfg: &Cfg,
    temperature: Option<f64>,
    mu: Option<f64>,
    hamiltonian: &Option<String>,
    dim: usize,
) -> Result<FermiParams> {
    if let Some(h) = cfg.string(hamiltonian, "hamiltonian") {
        if h != "xi2" {
            return Err(Error::Config(format!(
                "unsupported hamiltonian '{h}'; only \"xi2\" is available"
            )));
        }
    }
    let t = cfg.f64(temperature, "T")?.unwrap_or(1.0);
    let m = cfg.f64(mu, "mu")?.unwrap_or(1.0);
    Ok(FermiParams::xi_squared(t, m, dim))
}

fn build_symbol(name: &str, p: &FermiParams) -> Result<Symbol> {
    match name {
        "gaussian" => gaussian_symbol(p.dim),
        "fermi" => fermi_symbol(p),
        other => Err(Error::Config(format!(
            "unknown symbol '{other}'; expected gaussian | fermi"
        ))),
    }
}

fn maybe_shift(f: TestFunction, shift: bool) -> TestFunction {
    if shift {
        f.shifted_to_zero()
    } else {
        f
    }
}

/// Print the CSV to stdout and, when an output directory is set, also
/// write the identical bytes to `<dir>/<filename>`.
fn deliver(csv: &str, out: &Option<PathBuf>, filename: &str) -> Result<()> {
    print!("{csv}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        let p = dir.join(filename);
        std::fs::write(&p, csv).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
    }
    Ok(())
}

fn run_coeff(args: CoeffArgs, cfg: &Cfg, out: &Option<PathBuf>) -> Result<()> {
    let quad = build_quad(
        cfg.f64(args.eps_min, "eps-min")?,
        cfg.f64(args.xi_cutoff, "xi-cutoff")?,
    )?;
    let f = parse_test_function(&need(cfg.string(&args.f, "f"), "--f")?)?;
    let region = build_region(
        cfg.string(&args.region, "region"),
        cfg.f64(args.complement_box, "complement-box")?,
    )?;
    let dim = match (&region, cfg.usize(args.dim, "dim")?) {
        (Some(r), Some(d)) if r.dim != d => {
            return Err(Error::DimensionMismatch {
                expected: r.dim,
                got: d,
            })
        }
        (Some(r), _) => r.dim,
        (None, d) => d.unwrap_or(1),
    };
    let p = fermi_params(cfg, args.temperature, args.mu, &args.hamiltonian, dim)?;
    let sym = build_symbol(&need(cfg.string(&args.symbol, "symbol"), "--symbol")?, &p)?;
    let result = match &region {
        Some(r) => {
            let one = |_x: [f64; 2]| 1.0;
            b_d_coefficient(&sym, &one, r, &f, &quad)?
        }
        None if dim == 1 => b1_coefficient(&sym, &f, &quad)?,
        None => {
            let dir_text = cfg
                .string(&args.direction, "direction")
                .unwrap_or_else(|| "1,0".to_string());
            let v = parse_f64_list(&dir_text, "direction")?;
            if v.len() != 2 {
                return Err(Error::Config(format!(
                    "direction must be two numbers x,y, got {dir_text:?}"
                )));
            }
            a_d_coefficient(&sym, [v[0], v[1]], &f, &quad)?
        }
    };
    let csv = format!(
        "value,pv_error,tail_error,nodes\n{},{},{},{}\n",
        fmt_g12(result.value),
        fmt_g12(result.pv_extrapolation_error),
        fmt_g12(result.tail_error),
        result.nodes_used
    );
    deliver(&csv, out, "coeff.csv")
}

fn run_trace(args: TraceArgs, cfg: &Cfg, out: &Option<PathBuf>) -> Result<()> {
    let region = need(
        build_region(
            cfg.string(&args.region, "region"),
            cfg.f64(args.complement_box, "complement-box")?,
        )?,
        "--region",
    )?;
    let p = fermi_params(cfg, args.temperature, args.mu, &args.hamiltonian, region.dim)?;
    let sym = build_symbol(&need(cfg.string(&args.symbol, "symbol"), "--symbol")?, &p)?;
    let f = maybe_shift(
        parse_test_function(&need(cfg.string(&args.f, "f"), "--f")?)?,
        cfg.flag(args.shift_f0, "shift-f0")?,
    );
    let alpha = need(cfg.f64(args.alpha, "alpha")?, "--alpha")?;
    let density = cfg.f64(args.grid_density, "grid-density")?.unwrap_or(4.0);
    let refine = cfg.flag(args.refine_check, "refine-check")?;
    let t = d_alpha_trace(&sym, &f, &region, alpha, density, refine)?;
    let csv = format!(
        "alpha,n,trace_f,trace_smoothed,d_alpha,resolution_estimate\n{},{},{},{},{},{}\n",
        fmt_g12(t.alpha),
        t.n,
        fmt_g12(t.trace_f),
        fmt_g12(t.trace_smoothed),
        fmt_g12(t.d_alpha),
        fmt_g12(t.resolution_estimate)
    );
    deliver(&csv, out, "trace.csv")
}

fn run_sweep(args: SweepArgs, cfg: &Cfg, out: &Option<PathBuf>) -> Result<()> {
    let quad = build_quad(
        cfg.f64(args.eps_min, "eps-min")?,
        cfg.f64(args.xi_cutoff, "xi-cutoff")?,
    )?;
    let region = need(
        build_region(
            cfg.string(&args.region, "region"),
            cfg.f64(args.complement_box, "complement-box")?,
        )?,
        "--region",
    )?;
    let p = fermi_params(cfg, args.temperature, args.mu, &args.hamiltonian, region.dim)?;
    let sym = build_symbol(&need(cfg.string(&args.symbol, "symbol"), "--symbol")?, &p)?;
    let f = maybe_shift(
        parse_test_function(&need(cfg.string(&args.f, "f"), "--f")?)?,
        cfg.flag(args.shift_f0, "shift-f0")?,
    );
    let alphas = cfg
        .list(&args.alphas, "alphas")?
        .unwrap_or_else(|| default_alphas(region.dim));
    let density = cfg.f64(args.grid_density, "grid-density")?.unwrap_or(4.0);
    let report = szego_sweep(&sym, &f, &region, &alphas, density, &quad)?;
    for (al, msg) in &report.skipped {
        eprintln!("skipped alpha = {al}: {msg}");
    }
    eprintln!(
        "coefficient = {} (pv_error {}, tail_error {}), fitted_slope = {}",
        fmt_g12(report.coefficient.value),
        fmt_g12(report.coefficient.pv_extrapolation_error),
        fmt_g12(report.coefficient.tail_error),
        fmt_g12(report.fitted_slope)
    );
    deliver(&report.csv(), out, "sweep.csv")?;
    if let Some(dir) = out {
        emit_plotdata(&report, &dir.join("sweep_plot.txt"))?;
    }
    Ok(())
}

fn run_ee(args: EeArgs, cfg: &Cfg, out: &Option<PathBuf>) -> Result<()> {
    let quad = build_quad(
        cfg.f64(args.eps_min, "eps-min")?,
        cfg.f64(args.xi_cutoff, "xi-cutoff")?,
    )?;
    let region = need(
        build_region(cfg.string(&args.region, "region"), None)?,
        "--region",
    )?;
    let p = fermi_params(cfg, args.temperature, args.mu, &args.hamiltonian, region.dim)?;
    let gamma = cfg.f64(args.gamma, "gamma")?.unwrap_or(1.0);
    let l = need(cfg.f64(args.box_half_width, "box-half-width")?, "--box-half-width")?;
    let alphas = cfg
        .list(&args.alphas, "alphas")?
        .unwrap_or_else(|| default_alphas(region.dim));
    let density = cfg.f64(args.grid_density, "grid-density")?.unwrap_or(4.0);
    let report = ee_scaling(&p, gamma, &region, &alphas, l, density, &quad)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for (al, msg) in &report.skipped {
        eprintln!("skipped alpha = {al}: {msg}");
    }
    eprintln!(
        "coefficient = {} (pv_error {}, tail_error {})",
        fmt_g12(report.coefficient.value),
        fmt_g12(report.coefficient.pv_extrapolation_error),
        fmt_g12(report.coefficient.tail_error)
    );
    deliver(&report.csv(), out, "ee.csv")
}

fn run_scaling(args: ScalingArgs, cfg: &Cfg, out: &Option<PathBuf>) -> Result<()> {
    let quad = build_quad(
        cfg.f64(args.eps_min, "eps-min")?,
        cfg.f64(args.xi_cutoff, "xi-cutoff")?,
    )?;
    let region = need(
        build_region(
            cfg.string(&args.region, "region"),
            cfg.f64(args.complement_box, "complement-box")?,
        )?,
        "--region",
    )?;
    let p = fermi_params(cfg, args.temperature, args.mu, &args.hamiltonian, region.dim)?;
    let a0 = build_symbol(
        &need(cfg.string(&args.symbol0, "symbol0"), "--symbol0")?,
        &p,
    )?;
    let a1 = build_symbol(
        &need(cfg.string(&args.symbol1, "symbol1"), "--symbol1")?,
        &p,
    )?;
    let f = parse_test_function(&need(cfg.string(&args.f, "f"), "--f")?)?;
    let f_model = parse_test_function(&need(cfg.string(&args.f_model, "f-model"), "--f-model")?)?;
    let gamma = need(cfg.f64(args.gamma, "gamma")?, "--gamma")?;
    let lambdas = cfg
        .list(&args.lambdas, "lambdas")?
        .unwrap_or_else(|| vec![0.5, 0.2, 0.1]);
    let report =
        scaling_limit_check(&a0, &a1, &f, &f_model, gamma, &lambdas, &region, &quad)?;
    deliver(&report.csv(), out, "scaling_limit.csv")
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Cfg::load(&cli.config)?;
    if let Some(n) = cfg.usize(cli.threads, "threads")? {
        // Ignore the error of a pool that is already initialized.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let out = cli
        .out
        .or_else(|| cfg.raw("out").map(PathBuf::from));
    match cli.cmd {
        Cmd::Coeff(a) => run_coeff(a, &cfg, &out),
        Cmd::Trace(a) => run_trace(a, &cfg, &out),
        Cmd::Sweep(a) => run_sweep(a, &cfg, &out),
        Cmd::Ee(a) => run_ee(a, &cfg, &out),
        Cmd::ScalingLimit(a) => run_scaling(a, &cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
