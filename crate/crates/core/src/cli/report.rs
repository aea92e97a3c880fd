//! Reports and their text renderings.
//!
//! Tables round to four decimals; JSON reports keep full precision.

use serde::{Deserialize, Serialize};

use super::problem_file::ProblemFile;
use crate::auglag::{AugCriticalPoint, AugLagConfig, OuterIterate};
use crate::solver::{self, Classification, CriticalPoint, SolverConfig};

pub const CAVEAT_CONVEXITY: &str =
    "global-min certificate assumes the positive dual region is convex (not verified)";
pub const CAVEAT_MAX_LABEL: &str =
    "biggest-local-max label is a sign test on G and the multipliers";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(flatten)]
    pub point: CriticalPoint,
    pub gap: f64,
    /// Gap above `1e−6·(1 + |P|)` or dual value undefined.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: ProblemFile,
    pub config: SolverConfig,
    pub rows: Vec<ReportRow>,
    /// Index into `rows` of the selected global minimum.
    pub global: Option<usize>,
    pub caveats: Vec<String>,
    pub timing_ms: f64,
}

pub fn gap_tolerance(primal: f64) -> f64 {
    1e-6 * (1.0 + primal.abs())
}

impl RunReport {
    pub fn new(
        problem: ProblemFile,
        config: SolverConfig,
        points: Vec<CriticalPoint>,
        timing_ms: f64,
    ) -> Self {
        let global = solver::select_global(&points)
            .and_then(|g| points.iter().position(|q| std::ptr::eq(q, g)));
        let rows: Vec<ReportRow> = points
            .into_iter()
            .map(|point| {
                let gap = solver::verify_gap(&point);
                let flagged = point.dual_value.is_none() || gap > gap_tolerance(point.primal_value);
                ReportRow {
                    point,
                    gap,
                    flagged,
                }
            })
            .collect();
        let mut caveats = Vec::new();
        if global.is_some() {
            caveats.push(CAVEAT_CONVEXITY.to_string());
        }
        if rows
            .iter()
            .any(|r| r.point.classification == Classification::BiggestLocalMaxCertified)
        {
            caveats.push(CAVEAT_MAX_LABEL.to_string());
        }
        Self {
            problem,
            config,
            rows,
            global,
            caveats,
            timing_ms,
        }
    }

    pub fn points(&self) -> Vec<CriticalPoint> {
        self.rows.iter().map(|r| r.point.clone()).collect()
    }

    pub fn render_table(&self) -> String {
        let headers = [
            "#", "x", "lambda", "mu", "sigma", "f", "P^d", "G min", "G max", "gap", "class",
        ];
        let body = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let q = &r.point;
                let sigma: Vec<f64> = q
                    .dual
                    .sigma_f
                    .iter()
                    .chain(&q.dual.sigma_g)
                    .chain(&q.dual.sigma_h)
                    .copied()
                    .collect();
                vec![
                    (i + 1).to_string(),
                    vec4(&q.x),
                    vec4(&q.dual.lambda),
                    vec4(&q.dual.mu),
                    vec4(&sigma),
                    num4(q.primal_value),
                    opt4(q.dual_value),
                    num4(q.g_eigenvalues[0]),
                    num4(*q.g_eigenvalues.last().unwrap()),
                    format!("{:.1e}{}", r.gap, if r.flagged { "!" } else { "" }),
                    q.classification.label().to_string(),
                ]
            })
            .collect();
        let mut out = render_table(&headers, body);
        match self.global {
            Some(i) => out.push_str(&format!("global minimum: row {}\n", i + 1)),
            None => out.push_str("global minimum: none certified\n"),
        }
        for c in &self.caveats {
            out.push_str(&format!("note: {c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemReport {
    pub problem: ProblemFile,
    pub config: SolverConfig,
    pub mu_k: Vec<f64>,
    pub nu: f64,
    pub points: Vec<AugCriticalPoint>,
    pub caveats: Vec<String>,
    pub timing_ms: f64,
}

impl SubproblemReport {
    pub fn render_table(&self) -> String {
        let headers = [
            "#", "x", "tau", "sigma", "L", "P^d", "G min", "G max", "mu+tau", "class",
        ];
        let body = self
            .points
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let sigma: Vec<f64> = q.sigma_f.iter().chain(&q.sigma_h).copied().collect();
                vec![
                    (i + 1).to_string(),
                    vec4(&q.x),
                    vec4(&q.tau),
                    vec4(&sigma),
                    num4(q.l_value),
                    opt4(q.dual_value),
                    num4(q.g_eigenvalues[0]),
                    num4(*q.g_eigenvalues.last().unwrap()),
                    vec4(&q.mu_plus_tau),
                    q.classification.label().to_string(),
                ]
            })
            .collect();
        let mut out = format!("mu_k = {}, nu = {}\n", vec4(&self.mu_k), num4(self.nu));
        out.push_str(&render_table(&headers, body));
        for c in &self.caveats {
            out.push_str(&format!("note: {c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterLoopReport {
    pub problem: ProblemFile,
    pub config: SolverConfig,
    pub auglag: AugLagConfig,
    pub history: Vec<OuterIterate>,
    pub converged: bool,
    pub timing_ms: f64,
}

impl OuterLoopReport {
    pub fn render_table(&self) -> String {
        let headers = [
            "k",
            "mu_k",
            "nu_k",
            "x_k",
            "|h|",
            "L",
            "P^d",
            "mu_k+1",
            "certified",
        ];
        let body = self
            .history
            .iter()
            .map(|it| {
                vec![
                    it.k.to_string(),
                    vec4(&it.mu),
                    num4(it.nu),
                    vec4(&it.x),
                    format!("{:.3e}", it.h_inf),
                    num4(it.l_value),
                    opt4(it.dual_value),
                    vec4(&it.mu_next),
                    if it.certified { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        let mut out = render_table(&headers, body);
        out.push_str(if self.converged {
            "feasibility tolerance reached\n"
        } else {
            "feasibility tolerance not reached\n"
        });
        out
    }
}

pub fn num4(v: f64) -> String {
    let s = format!("{v:.4}");
    // avoid "-0.0000"
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn opt4(v: Option<f64>) -> String {
    v.map_or_else(|| "undef".to_string(), num4)
}

pub fn vec4(v: &[f64]) -> String {
    match v {
        [] => "-".to_string(),
        [x] => num4(*x),
        _ => format!(
            "({})",
            v.iter().map(|x| num4(*x)).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// Right-aligned plain-text table.
pub fn render_table(headers: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(headers.to_vec());
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// `%.17g`-style number: 17 significant digits, scientific notation.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `x,value` and LF line endings.
pub fn curve_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("x,value\n");
    for &(x, v) in samples {
        out.push_str(&sig17(x));
        out.push(',');
        out.push_str(&sig17(v));
        out.push('\n');
    }
    out
}
