//! Grid sweeps comparing kernels against their envelopes, with CSV/JSON
//! report serialization. The sweep is deterministic: fixed grid order,
//! fixed summation order, no shared mutable state.

use crate::envelopes::{heat_envelope_interval, subordinated_envelope_interval};
use crate::error::{Error, Result};
use crate::kernels::{heat_closed_form, kernel_grid, poisson_closed_form, default_image_count};
use crate::specfun::Order;
use crate::spectrum::BasisCache;

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Hard cap on the number of sweep grid points.
pub const POINT_BUDGET: usize = 10_000_000;

/// Per-point term budget for the series evaluations inside a sweep.
const SWEEP_MAX_TERMS: usize = 8_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub nu_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub xy_grid: Vec<f64>,
    pub tol: f64,
    pub c_candidates: Vec<f64>,
    /// Verdict bracket; `None` picks the per-alpha default at verdict time
    /// ([1/10, 10] for alpha = 2, [1/50, 50] otherwise).
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            nu_list: vec![-0.5, 0.0, 0.5, 1.0],
            alpha_list: vec![2.0],
            t_grid: vec![0.01, 0.0316, 0.1, 0.316, 1.0],
            xy_grid: vec![0.01, 0.05, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95, 0.99],
            tol: 1e-8,
            c_candidates: vec![1.1, 1.5, 2.0, 4.0, 8.0, 10.0],
            bracket_lo: None,
            bracket_hi: None,
        }
    }
}

impl SweepConfig {
    /// Line-oriented `key = value` text; lists are comma-separated, `#`
    /// starts a comment. Unknown keys are rejected, missing keys keep their
    /// defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let list = |v: &str| -> Result<Vec<f64>> {
                v.split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| {
                            Error::Config(format!("line {}: bad number `{s}`", lineno + 1))
                        })
                    })
                    .collect()
            };
            let scalar = |v: &str| -> Result<f64> {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("line {}: bad number `{v}`", lineno + 1))
                })
            };
            match key {
                "nu_list" => cfg.nu_list = list(value)?,
                "alpha_list" => cfg.alpha_list = list(value)?,
                "t_grid" => cfg.t_grid = list(value)?,
                "xy_grid" => cfg.xy_grid = list(value)?,
                "c_candidates" => cfg.c_candidates = list(value)?,
                "tol" => cfg.tol = scalar(value)?,
                "bracket_lo" => cfg.bracket_lo = Some(scalar(value)?),
                "bracket_hi" => cfg.bracket_hi = Some(scalar(value)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu_list.is_empty()
            || self.alpha_list.is_empty()
            || self.t_grid.is_empty()
            || self.xy_grid.is_empty()
        {
            return Err(Error::Config("all grids must be non-empty".into()));
        }
        for &nu in &self.nu_list {
            Order::new(nu)?;
        }
        for &a in &self.alpha_list {
            if !(a > 0.0 && a <= 2.0) {
                return Err(Error::Config(format!("alpha={a} outside (0, 2]")));
            }
        }
        for &t in &self.t_grid {
            if !(t > 0.0) {
                return Err(Error::Config(format!("t={t} must be positive")));
            }
        }
        for &v in &self.xy_grid {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("grid point {v} outside (0,1)")));
            }
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(Error::Config(format!("tol={} outside (0, 1e-2]", self.tol)));
        }
        for &c in &self.c_candidates {
            if !(c > 1.0) {
                return Err(Error::Config(format!("c candidate {c} must exceed 1")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.bracket_lo, self.bracket_hi) {
            if !(lo > 0.0 && lo < hi) {
                return Err(Error::Config(format!("bad bracket [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.nu_list.len()
            * self.alpha_list.len()
            * self.t_grid.len()
            * self.xy_grid.len()
            * self.xy_grid.len()
    }

    fn bracket_for(&self, alpha: f64) -> (f64, f64) {
        let default = if (alpha - 2.0).abs() < 1e-12 {
            (0.1, 10.0)
        } else {
            (0.02, 50.0)
        };
        (
            self.bracket_lo.unwrap_or(default.0),
            self.bracket_hi.unwrap_or(default.1),
        )
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointRecord {
    pub nu: f64,
    pub alpha: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// None marks a point whose kernel evaluation failed.
    pub kernel: Option<f64>,
    pub env_lo: Option<f64>,
    pub env_hi: Option<f64>,
    pub ratio_lo: Option<f64>,
    pub ratio_hi: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum Verdict {
    #[serde(rename = "WITHIN")]
    Within,
    #[serde(rename = "VIOLATED")]
    Violated,
    #[serde(rename = "INCOMPLETE")]
    Incomplete,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Within => 0,
            Verdict::Violated => 2,
            Verdict::Incomplete => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointKey {
    pub nu: f64,
    pub alpha: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepSummary {
    /// min over points of kernel/env_lo (checked against bracket_lo)
    pub min_ratio: Option<f64>,
    /// max over points of kernel/env_hi (checked against bracket_hi)
    pub max_ratio: Option<f64>,
    pub argmin: Option<PointKey>,
    pub argmax: Option<PointKey>,
    /// Gaussian-rate constant selected for the alpha = 2 envelopes.
    pub c_used: Option<f64>,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub failed_points: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RatioReport {
    pub points: Vec<PointRecord>,
    pub summary: SweepSummary,
}

fn key_of(r: &PointRecord) -> PointKey {
    PointKey {
        nu: r.nu,
        alpha: r.alpha,
        t: r.t,
        x: r.x,
        y: r.y,
    }
}

/// Build the summary over finished records. The bracket passed in is the
/// one the verdict is judged against (the per-alpha brackets have already
/// been resolved by the caller for mixed-alpha sweeps).
pub(crate) fn summarize(
    points: Vec<PointRecord>,
    bracket: (f64, f64),
    c_used: Option<f64>,
    per_point_bracket: impl Fn(&PointRecord) -> (f64, f64),
) -> RatioReport {
    let mut min_ratio: Option<f64> = None;
    let mut max_ratio: Option<f64> = None;
    let mut argmin = None;
    let mut argmax = None;
    let mut failed = 0usize;
    let mut violated = false;
    for r in &points {
        match (r.ratio_lo, r.ratio_hi) {
            (Some(lo), Some(hi)) => {
                if min_ratio.map_or(true, |m| lo < m) {
                    min_ratio = Some(lo);
                    argmin = Some(key_of(r));
                }
                if max_ratio.map_or(true, |m| hi > m) {
                    max_ratio = Some(hi);
                    argmax = Some(key_of(r));
                }
                let (blo, bhi) = per_point_bracket(r);
                if lo < blo || hi > bhi {
                    violated = true;
                }
            }
            _ => failed += 1,
        }
    }
    let verdict = if violated {
        Verdict::Violated
    } else if failed > 0 || points.is_empty() {
        Verdict::Incomplete
    } else {
        Verdict::Within
    };
    RatioReport {
        points,
        summary: SweepSummary {
            min_ratio,
            max_ratio,
            argmin,
            argmax,
            c_used,
            bracket_lo: bracket.0,
            bracket_hi: bracket.1,
            failed_points: failed,
            verdict,
        },
    }
}

/// Kernel values over the (x,y) grid for one (nu, alpha, t), row-major over
/// xy_grid x xy_grid. Closed forms are used at nu = +-1/2 with alpha in
/// {1, 2}; everything else goes through the series grid evaluator.
fn kernel_chunk(
    order: Order,
    alpha: f64,
    t: f64,
    tol: f64,
    grid: &[f64],
    cache: &BasisCache,
) -> Vec<Option<f64>> {
    let nu = order.value();
    let half = (nu.abs() - 0.5).abs() < 1e-12;
    if half && (alpha - 1.0).abs() < 1e-12 {
        return grid
            .iter()
            .flat_map(|&x| {
                grid.iter()
                    .map(move |&y| poisson_closed_form(order, t, x, y).ok())
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    if half && (alpha - 2.0).abs() < 1e-12 {
        let images = default_image_count(t);
        return grid
            .iter()
            .flat_map(|&x| {
                grid.iter()
                    .map(move |&y| heat_closed_form(order, t, x, y, images).ok())
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    match kernel_grid(order, alpha, t, tol, grid, grid, cache, SWEEP_MAX_TERMS) {
        Ok(g) => g.values.into_iter().map(Some).collect(),
        Err(_) => vec![None; grid.len() * grid.len()],
    }
}

/// Run the configured sweep. Point failures are recorded, never fatal; the
/// budget guard rejects oversized grids before any evaluation.
pub fn run_sweep(config: &SweepConfig, cache: &BasisCache) -> Result<RatioReport> {
    config.validate()?;
    let n_points = config.point_count();
    if n_points > POINT_BUDGET {
        return Err(Error::CapacityExhausted {
            capacity: POINT_BUDGET,
            needed: n_points,
        });
    }

    // pass 1: kernels, in deterministic grid order
    struct Raw {
        nu: f64,
        alpha: f64,
        t: f64,
        x: f64,
        y: f64,
        kernel: Option<f64>,
    }
    let mut raws: Vec<Raw> = Vec::with_capacity(n_points);
    for &nu in &config.nu_list {
        let order = Order::new(nu)?;
        for &alpha in &config.alpha_list {
            for &t in &config.t_grid {
                let chunk = kernel_chunk(order, alpha, t, config.tol, &config.xy_grid, cache);
                let mut it = chunk.into_iter();
                for &x in &config.xy_grid {
                    for &y in &config.xy_grid {
                        raws.push(Raw {
                            nu,
                            alpha,
                            t,
                            x,
                            y,
                            kernel: it.next().unwrap(),
                        });
                    }
                }
            }
        }
    }

    // pass 2: pick the smallest Gaussian-rate c validating the alpha = 2
    // points; fall back to the candidate with the smallest worst violation
    let has_heat = config.alpha_list.iter().any(|&a| (a - 2.0).abs() < 1e-12);
    let c_used = if has_heat {
        let mut best: Option<(f64, f64)> = None; // (score, c)
        for &c in &config.c_candidates {
            let mut score = 1.0_f64; // max of bracket-violation factors, 1 = clean
            for r in raws.iter().filter(|r| (r.alpha - 2.0).abs() < 1e-12) {
                let (blo, bhi) = config.bracket_for(2.0);
                if let Some(k) = r.kernel {
                    let order = Order::new(r.nu)?;
                    let e = heat_envelope_interval(order, r.t, r.x, r.y, c)?;
                    score = score.max(blo * e.lower / k).max(k / (bhi * e.upper));
                }
            }
            let better = match best {
                None => true,
                Some((s, _)) => score < s - 1e-12,
            };
            if better {
                best = Some((score, c));
            }
            if score <= 1.0 {
                break; // candidates are scanned in order; smallest valid c wins
            }
        }
        best.map(|(_, c)| c)
    } else {
        None
    };

    // pass 3: envelopes and ratios
    let mut points = Vec::with_capacity(raws.len());
    for r in raws {
        let order = Order::new(r.nu)?;
        let (env_lo, env_hi) = if (r.alpha - 2.0).abs() < 1e-12 {
            let c = c_used.unwrap_or(2.0);
            let e = heat_envelope_interval(order, r.t, r.x, r.y, c)?;
            (e.lower, e.upper)
        } else {
            let v = subordinated_envelope_interval(order, r.alpha, r.t, r.x, r.y)?;
            (v, v)
        };
        let (kernel, elo, ehi, rlo, rhi) = match r.kernel {
            Some(k) => (
                Some(k),
                Some(env_lo),
                Some(env_hi),
                Some(k / env_lo),
                Some(k / env_hi),
            ),
            None => (None, None, None, None, None),
        };
        points.push(PointRecord {
            nu: r.nu,
            alpha: r.alpha,
            t: r.t,
            x: r.x,
            y: r.y,
            kernel,
            env_lo: elo,
            env_hi: ehi,
            ratio_lo: rlo,
            ratio_hi: rhi,
        });
    }

    // the summary-level bracket reports the strictest one in play; each
    // point is judged against its own alpha's bracket
    let bracket = config
        .alpha_list
        .iter()
        .map(|&a| config.bracket_for(a))
        .fold((f64::INFINITY, 0.0_f64), |acc, b| {
            (acc.0.min(b.0), acc.1.max(b.1))
        });
    let cfg = config.clone();
    Ok(summarize(points, bracket, c_used, move |r| {
        cfg.bracket_for(r.alpha)
    }))
}

/// 17 significant digits, enough to reproduce any f64 exactly.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt17(v),
        None => "NaN".into(),
    }
}

pub fn report_to_csv(report: &RatioReport) -> String {
    let mut out = String::from("nu,alpha,t,x,y,kernel,env_lo,env_hi,ratio_lo,ratio_hi\n");
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt17(p.nu),
            fmt17(p.alpha),
            fmt17(p.t),
            fmt17(p.x),
            fmt17(p.y),
            fmt_opt(p.kernel),
            fmt_opt(p.env_lo),
            fmt_opt(p.env_hi),
            fmt_opt(p.ratio_lo),
            fmt_opt(p.ratio_hi),
        );
    }
    out
}

pub fn report_to_json(report: &RatioReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub fn export_report(report: &RatioReport, format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Csv => report_to_csv(report),
        ReportFormat::Json => report_to_json(report)?,
    };
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parse_round_trip() {
        let text = "
            # comment
            nu_list = 0.5, -0.5
            alpha_list = 1
            t_grid = 0.1, 1
            xy_grid = 0.25, 0.75
            tol = 1e-9
            bracket_lo = 0.02
            bracket_hi = 50
        ";
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.nu_list, vec![0.5, -0.5]);
        assert_eq!(cfg.point_count(), 2 * 1 * 2 * 4);
        assert_eq!(cfg.bracket_lo, Some(0.02));
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(SweepConfig::parse("nu_list = -2").is_err());
        assert!(SweepConfig::parse("alpha_list = 3").is_err());
        assert!(SweepConfig::parse("xy_grid = 0, 0.5").is_err());
        assert!(SweepConfig::parse("mystery = 1").is_err());
        assert!(SweepConfig::parse("no equals sign here").is_err());
    }

    #[test]
    fn budget_guard_fails_fast() {
        let mut cfg = SweepConfig::default();
        cfg.xy_grid = (1..=4000).map(|i| i as f64 / 4001.0).collect();
        let cache = BasisCache::new();
        match run_sweep(&cfg, &cache) {
            Err(Error::CapacityExhausted { capacity, needed }) => {
                assert_eq!(capacity, POINT_BUDGET);
                assert!(needed > POINT_BUDGET);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_self_comparison() {
        // envelope := kernel oracle gives ratios identically 1
        let k = poisson_closed_form(Order::new(0.5).unwrap(), 1.0, 0.5, 0.5).unwrap();
        let rec = PointRecord {
            nu: 0.5,
            alpha: 1.0,
            t: 1.0,
            x: 0.5,
            y: 0.5,
            kernel: Some(k),
            env_lo: Some(k),
            env_hi: Some(k),
            ratio_lo: Some(k / k),
            ratio_hi: Some(k / k),
        };
        let rep = summarize(vec![rec], (0.02, 50.0), None, |_| (0.02, 50.0));
        assert_eq!(rep.summary.min_ratio, Some(1.0));
        assert_eq!(rep.summary.max_ratio, Some(1.0));
        assert_eq!(rep.summary.verdict, Verdict::Within);
    }

    #[test]
    fn small_sweep_runs_and_serializes() {
        let cfg = SweepConfig {
            nu_list: vec![0.5],
            alpha_list: vec![1.0],
            t_grid: vec![0.1, 1.0],
            xy_grid: vec![0.25, 0.75],
            ..SweepConfig::default()
        };
        let cache = BasisCache::new();
        let rep = run_sweep(&cfg, &cache).unwrap();
        assert_eq!(rep.points.len(), 8);
        assert_eq!(rep.summary.failed_points, 0);

        let csv = report_to_csv(&rep);
        assert_eq!(csv.lines().count(), 9); // header + 8 rows
        assert!(csv.starts_with("nu,alpha,t,x,y,kernel,env_lo,env_hi,ratio_lo,ratio_hi\n"));

        let json = report_to_json(&rep).unwrap();
        let back: RatioReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.summary, rep.summary);
        assert_eq!(back.points, rep.points);
    }

    #[test]
    fn empty_points_header_only_csv() {
        let rep = summarize(vec![], (0.1, 10.0), None, |_| (0.1, 10.0));
        let csv = report_to_csv(&rep);
        assert_eq!(csv, "nu,alpha,t,x,y,kernel,env_lo,env_hi,ratio_lo,ratio_hi\n");
        assert_eq!(rep.summary.verdict, Verdict::Incomplete);
    }

    #[test]
    fn determinism_byte_for_byte() {
        let cfg = SweepConfig {
            nu_list: vec![0.0, 0.5],
            alpha_list: vec![2.0],
            t_grid: vec![0.05, 0.2],
            xy_grid: vec![0.1, 0.5, 0.9],
            ..SweepConfig::default()
        };
        let a = run_sweep(&cfg, &BasisCache::new()).unwrap();
        let b = run_sweep(&cfg, &BasisCache::new()).unwrap();
        assert_eq!(report_to_csv(&a), report_to_csv(&b));
        assert_eq!(report_to_json(&a).unwrap(), report_to_json(&b).unwrap());
    }

    #[test]
    fn verdict_exit_codes() {
        assert_eq!(Verdict::Within.exit_code(), 0);
        assert_eq!(Verdict::Violated.exit_code(), 2);
        assert_eq!(Verdict::Incomplete.exit_code(), 3);
    }

    #[test]
    fn csv_uses_17_significant_digits() {
        let v = std::f64::consts::PI;
        let s = fmt17(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
        assert!(s.contains("3.141592653589793"));
    }
}
