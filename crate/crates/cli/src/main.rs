//! `fbk` — command-line harness for the Fourier-Bessel kernel library.
//!
//! Every subcommand reads a line-oriented `key = value` config file
//! (lists comma-separated, `#` comments). Sweep verdicts map to exit
//! codes: 0 = WITHIN, 2 = VIOLATED, 3 = INCOMPLETE; other runtime
//! failures exit 1.

use clap::{Parser, Subcommand};
use fbk_core::envelopes::{heat_envelope_interval, subordinated_envelope_interval};
use fbk_core::kernels::{kernel_grid, kernel_series_budget};
use fbk_core::sweep::{export_report, report_to_csv, report_to_json, run_sweep, ReportFormat};
use fbk_core::transference::interval_transference_check;
use fbk_core::{BasisCache, KernelQuery, Order, SpectralBasis, SweepConfig};
use serde_json::json;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fbk", about = "Fourier-Bessel kernels on (0,1): spectra, kernels, envelopes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bessel zeros and normalizers for one order (keys: nu, count)
    Zeros {
        #[arg(long)]
        config: PathBuf,
    },
    /// One kernel value (keys: nu, alpha, t, x, y, tol, max_terms)
    Kernel {
        #[arg(long)]
        config: PathBuf,
    },
    /// Kernel on a tensor grid (keys: nu, alpha, t, tol, xy_grid, max_terms)
    KernelGrid {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Envelope bounds at a point (keys: nu, alpha, t, x, y, c)
    Envelope {
        #[arg(long)]
        config: PathBuf,
    },
    /// d=1 transference identity residual (keys: alpha, t, x, y)
    TransferCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Kernel-vs-envelope ratio sweep; exit code encodes the verdict
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Report destination (summary always goes to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format: csv or json
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

struct Kv(HashMap<String, String>);

impl Kv {
    fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Kv(map))
    }

    fn f64(&self, key: &str) -> Result<f64, String> {
        self.0
            .get(key)
            .ok_or_else(|| format!("missing key `{key}`"))?
            .parse()
            .map_err(|_| format!("bad number for `{key}`"))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.0.get(key) {
            Some(v) => v.parse().map_err(|_| format!("bad number for `{key}`")),
            None => Ok(default),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, String> {
        match self.0.get(key) {
            Some(v) => v.parse().map_err(|_| format!("bad integer for `{key}`")),
            None => Ok(default),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, String> {
        self.0
            .get(key)
            .ok_or_else(|| format!("missing key `{key}`"))?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| format!("bad number `{}` in `{key}`", s.trim()))
            })
            .collect()
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn run(cmd: Cmd) -> Result<ExitCode, String> {
    let err = |e: fbk_core::Error| e.to_string();
    match cmd {
        Cmd::Zeros { config } => {
            let kv = Kv::load(&config)?;
            let nu = kv.f64("nu")?;
            let count = kv.usize_or("count", 10)?;
            let basis = SpectralBasis::new(Order::new(nu).map_err(err)?, count).map_err(err)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "nu": nu,
                    "zeros": basis.zeros(),
                    "normalizers": basis.normalizers(),
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Kernel { config } => {
            let kv = Kv::load(&config)?;
            let (nu, alpha, t) = (kv.f64("nu")?, kv.f64("alpha")?, kv.f64("t")?);
            let (x, y) = (kv.f64("x")?, kv.f64("y")?);
            let tol = kv.f64_or("tol", 1e-8)?;
            let max_terms = kv.usize_or("max_terms", 4_000_000)?;
            let q = KernelQuery::new(Order::new(nu).map_err(err)?, alpha, t, x, y, tol)
                .map_err(err)?;
            let cache = BasisCache::new();
            let v = kernel_series_budget(&q, &cache, max_terms).map_err(err)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "nu": nu, "alpha": alpha, "t": t, "x": x, "y": y,
                    "kernel": v.value,
                    "terms_used": v.terms_used,
                    "tail_estimate": v.tail_estimate,
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::KernelGrid { config, out } => {
            let kv = Kv::load(&config)?;
            let (nu, alpha, t) = (kv.f64("nu")?, kv.f64("alpha")?, kv.f64("t")?);
            let tol = kv.f64_or("tol", 1e-8)?;
            let grid = kv.list("xy_grid")?;
            let max_terms = kv.usize_or("max_terms", 4_000_000)?;
            let cache = BasisCache::new();
            let g = kernel_grid(
                Order::new(nu).map_err(err)?,
                alpha,
                t,
                tol,
                &grid,
                &grid,
                &cache,
                max_terms,
            )
            .map_err(err)?;
            let mut csv = String::from("x,y,kernel\n");
            for (i, &x) in grid.iter().enumerate() {
                for (j, &y) in grid.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        fmt17(x),
                        fmt17(y),
                        fmt17(g.values[i * grid.len() + j])
                    ));
                }
            }
            match out {
                Some(p) => std::fs::write(&p, csv)
                    .map_err(|e| format!("cannot write {}: {e}", p.display()))?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Envelope { config } => {
            let kv = Kv::load(&config)?;
            let (nu, alpha, t) = (kv.f64("nu")?, kv.f64("alpha")?, kv.f64("t")?);
            let (x, y) = (kv.f64("x")?, kv.f64("y")?);
            let order = Order::new(nu).map_err(err)?;
            let (lower, upper, c) = if (alpha - 2.0).abs() < 1e-12 {
                let c = kv.f64_or("c", 2.0)?;
                let e = heat_envelope_interval(order, t, x, y, c).map_err(err)?;
                (e.lower, e.upper, e.constant_c)
            } else {
                let v = subordinated_envelope_interval(order, alpha, t, x, y).map_err(err)?;
                (v, v, 1.0)
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "nu": nu, "alpha": alpha, "t": t, "x": x, "y": y,
                    "env_lo": lower, "env_hi": upper, "c": c,
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::TransferCheck { config } => {
            let kv = Kv::load(&config)?;
            let (alpha, t) = (kv.f64("alpha")?, kv.f64("t")?);
            let (x, y) = (kv.f64("x")?, kv.f64("y")?);
            let cache = BasisCache::new();
            let (lhs, rhs) = interval_transference_check(alpha, t, x, y, &cache).map_err(err)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "alpha": alpha, "t": t, "x": x, "y": y,
                    "spectral": lhs,
                    "interval_images": rhs,
                    "rel_error": (lhs - rhs).abs() / lhs.abs(),
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep {
            config,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let cfg = SweepConfig::parse(&text).map_err(err)?;
            let fmt = match format.as_str() {
                "csv" => ReportFormat::Csv,
                "json" => ReportFormat::Json,
                other => return Err(format!("unknown format `{other}` (expected csv or json)")),
            };
            let cache = BasisCache::new();
            let report = run_sweep(&cfg, &cache).map_err(err)?;
            if let Some(p) = out {
                export_report(&report, fmt, &p).map_err(err)?;
            } else if fmt == ReportFormat::Csv {
                print!("{}", report_to_csv(&report));
            } else {
                println!("{}", report_to_json(&report).map_err(err)?);
            }
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&report.summary).unwrap()
            );
            Ok(ExitCode::from(report.summary.verdict.exit_code() as u8))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
