use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Lyapunov exponents, phase transitions and simulation of the recursion
/// `x_{i+1} = a_i x_i + b_i`.
#[derive(Debug, Parser)]
#[command(name = "lyapexp", version, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (0 lets the runtime decide).
    #[arg(long, global = true, env = "LYAPEXP_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Flat `key=value` file mirroring the long flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Exact,
    Meanfield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseKind {
    None,
    Constant,
    Exponential,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// λ(ρ, β; q) with branch data, bounds and the mean-field value.
    Lyapunov(LyapunovArgs),
    /// F(a; ρ) on a grid.
    Bigf(BigFArgs),
    /// Transition curve β_cr(ρ) with coexisting order parameters.
    Phase(PhaseArgs),
    /// Critical point of the exact and/or mean-field model.
    Critical(CriticalArgs),
    /// Mean-field λ̄(ρ, β) and its stationary points.
    Meanfield(MeanFieldArgs),
    /// Monte Carlo or exact moments of x_n.
    Simulate(SimulateArgs),
    /// Critical exponent and jump prefactors near the critical point.
    Exponent(ExponentArgs),
    /// Polylog bounds and large-a expansion of J(a; ρ).
    Appendixb(AppendixBArgs),
}

/// Comma list `a,b,c` or inclusive linear range `start:stop:count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty grid".into());
    }
    let number = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("invalid number {t:?}: {e}"))
            .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("non-finite value {t:?}")) })
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range {s:?} must be start:stop:count"));
        }
        let (start, stop) = (number(parts[0])?, number(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|e| format!("invalid count {:?}: {e}", parts[2]))?;
        if count == 0 {
            return Err("range count must be positive".into());
        }
        if count == 1 {
            return Ok(Grid(vec![start]));
        }
        let step = (stop - start) / (count - 1) as f64;
        return Ok(Grid((0..count).map(|k| if k + 1 == count { stop } else { start + step * k as f64 }).collect()));
    }
    s.split(',').map(number).collect::<Result<Vec<_>, _>>().map(Grid)
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[arg(long, value_parser = parse_grid, default_value = "0.025,0.05,0.125,0.2")]
    pub rho: Grid,
    #[arg(long, value_parser = parse_grid, default_value = "0:20:41")]
    pub beta: Grid,
    #[arg(long, default_value_t = 1)]
    pub q: u32,
}

#[derive(Debug, Args)]
pub struct BigFArgs {
    #[arg(long, value_parser = parse_grid, default_value = "0.01,0.05,0.123,0.2,0.5")]
    pub rho: Grid,
    /// Points with a ≤ log ρ lie outside the domain of F and are skipped.
    #[arg(long, value_parser = parse_grid, default_value = "-5:10:301")]
    pub a: Grid,
    #[arg(long, default_value_t = 1e-14)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-15)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 4000)]
    pub max_subdivisions: usize,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    /// Values must lie below ρ_c ≈ 0.1233.
    #[arg(long, value_parser = parse_grid, default_value = "0.005:0.12:24")]
    pub rho: Grid,
    /// Add the mean-field transition line β = −3 log ρ.
    #[arg(long)]
    pub mean_field: bool,
    /// Also write the critical-point record as JSON to this path.
    #[arg(long, value_name = "PATH")]
    pub critical_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Defaults to both models.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
}

#[derive(Debug, Args)]
pub struct MeanFieldArgs {
    #[arg(long, value_parser = parse_grid, default_value = "0.01,0.05,0.1353352832366127,0.2")]
    pub rho: Grid,
    #[arg(long, value_parser = parse_grid, default_value = "0:20:21")]
    pub beta: Grid,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    /// Sets σ²τ = 2β/n² with τ = 1/n.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub q: u32,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    #[arg(long, value_enum, default_value_t = NoiseKind::None)]
    pub noise: NoiseKind,
    /// Constant value, exponential mean or uniform upper end.
    #[arg(long, default_value_t = 1.0)]
    pub noise_param: f64,
    /// Exact enumeration instead of Monte Carlo (b ≡ 0, (q+1)^n ≤ 2^20).
    #[arg(long)]
    pub exact: bool,
    /// Add the law-of-large-numbers ladder.
    #[arg(long)]
    pub lln: bool,
    /// Add the central-limit comparison.
    #[arg(long)]
    pub clt: bool,
    /// Add per-path quantiles of log x_n.
    #[arg(long)]
    pub per_path: bool,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[arg(long, value_enum, default_value_t = Model::Exact)]
    pub model: Model,
    /// Lower end of the relative window |β − β_c|/β_c.
    #[arg(long, default_value_t = 1e-4)]
    pub window_lo: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub window_hi: f64,
    /// Curve points, log-spaced over the window.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct AppendixBArgs {
    #[arg(long, value_parser = parse_grid, default_value = "5,10,50,200")]
    pub a: Grid,
    #[arg(long, value_parser = parse_grid, default_value = "0.01,0.05,0.2")]
    pub rho: Grid,
}
