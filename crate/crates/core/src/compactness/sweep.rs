//! Radial sweeps of the diagnostics over a polar grid.

use super::{c1_trace, c2_trace, gamma1, gamma2, omega_norm, product_kernel_norm, truncation_policy, zheng_product};
use super::{Bounded, GammaOptions, GammaResult};
use crate::error::{Error, Result};
use crate::scalar::*;
use crate::symbols::{DiskPoint, MatrixSymbol};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::str::FromStr;

/// Largest admissible radius is `1 - BOUNDARY_EPS`.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    C1,
    C2,
    Zheng,
    Gamma1,
    Gamma2,
    Omega,
    ProductKernel,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::C1,
        Quantity::C2,
        Quantity::Zheng,
        Quantity::Gamma1,
        Quantity::Gamma2,
        Quantity::Omega,
        Quantity::ProductKernel,
    ];

    /// Column name in the report.
    pub fn column(&self) -> &'static str {
        match self {
            Quantity::C1 => "c1",
            Quantity::C2 => "c2",
            Quantity::Zheng => "zheng",
            Quantity::Gamma1 => "gamma1",
            Quantity::Gamma2 => "gamma2",
            Quantity::Omega => "omega_norm",
            Quantity::ProductKernel => "product_kernel_norm",
        }
    }

    /// Comma separated list; empty input gives an empty set.
    pub fn parse_list(s: &str) -> Result<Vec<Quantity>> {
        let mut v: Vec<Quantity> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(Quantity::from_str)
            .collect::<Result<_>>()?;
        v.sort();
        v.dedup();
        Ok(v)
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "c1" => Quantity::C1,
            "c2" => Quantity::C2,
            "zheng" => Quantity::Zheng,
            "gamma1" => Quantity::Gamma1,
            "gamma2" => Quantity::Gamma2,
            "omega" | "omega_norm" => Quantity::Omega,
            "product_kernel" | "product_kernel_norm" => Quantity::ProductKernel,
            other => return Err(Error::Parse(format!("unknown quantity `{other}`"))),
        })
    }
}

/// Rays by angle and increasing radii in `(0, 1 - BOUNDARY_EPS]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    rays: Vec<f64>,
    radii: Vec<f64>,
}

impl SweepGrid {
    pub fn new(rays: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if rays.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("ray angles must be finite".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("radii must be strictly increasing".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r <= 1.0 - BOUNDARY_EPS)) {
            return Err(Error::OutsideDisk {
                modulus: *r,
                limit: 1.0 - BOUNDARY_EPS,
            });
        }
        let mut rays = rays;
        rays.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        rays.dedup();
        Ok(SweepGrid { rays, radii })
    }

    /// `lo:hi:count` (inclusive, evenly spaced) or a comma separated list.
    pub fn parse_radii(s: &str) -> Result<Vec<f64>> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let lo = parse_f64(parts[0])?;
            let hi = parse_f64(parts[1])?;
            let count: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad radius count `{}`", parts[2])))?;
            return Ok(match count {
                0 => Vec::new(),
                1 => vec![lo],
                c => (0..c).map(|i| lo + (hi - lo) * i as f64 / (c - 1) as f64).collect(),
            });
        }
        parse_list(s)
    }

    pub fn parse_rays(s: &str) -> Result<Vec<f64>> {
        parse_list(s)
    }

    pub fn rays(&self) -> &[f64] {
        &self.rays
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `(theta, r)` in sweep order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rays
            .iter()
            .flat_map(|t| self.radii.iter().map(move |r| (*t, *r)))
            .collect()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_f64).collect()
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions<T: Real> {
    pub gamma: GammaOptions<T>,
}

/// One grid point. Quantities not requested (or not defined, such as the
/// scalar criterion for `n > 1`) are `None`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DiagnosticRow {
    pub theta: f64,
    pub r: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub zheng: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub omega_norm: Option<f64>,
    pub product_kernel_norm: Option<f64>,
    /// Argmin as rows of `[re, im]` pairs.
    pub gamma1_argmin: Option<Vec<Vec<[f64; 2]>>>,
    pub gamma2_argmin: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub tail_bound: f64,
    pub errors: Vec<String>,
}

impl DiagnosticRow {
    pub fn get(&self, q: Quantity) -> Option<f64> {
        match q {
            Quantity::C1 => self.c1,
            Quantity::C2 => self.c2,
            Quantity::Zheng => self.zheng,
            Quantity::Gamma1 => self.gamma1,
            Quantity::Gamma2 => self.gamma2,
            Quantity::Omega => self.omega_norm,
            Quantity::ProductKernel => self.product_kernel_norm,
        }
    }

    fn slot(&mut self, q: Quantity) -> &mut Option<f64> {
        match q {
            Quantity::C1 => &mut self.c1,
            Quantity::C2 => &mut self.c2,
            Quantity::Zheng => &mut self.zheng,
            Quantity::Gamma1 => &mut self.gamma1,
            Quantity::Gamma2 => &mut self.gamma2,
            Quantity::Omega => &mut self.omega_norm,
            Quantity::ProductKernel => &mut self.product_kernel_norm,
        }
    }
}

/// Least-squares slope in `r` and monotonicity of one quantity along a ray.
#[derive(Debug, Clone, Serialize)]
pub struct RayTrend {
    pub theta: f64,
    pub quantity: Quantity,
    pub slope: f64,
    pub decreasing: bool,
    pub first: f64,
    pub last: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DiagnosticReport {
    pub quantities: Vec<Quantity>,
    pub rows: Vec<DiagnosticRow>,
    pub trends: Vec<RayTrend>,
}

pub const CSV_HEADER: &str = "theta,r,c1,c2,zheng,gamma1,gamma2,omega_norm,product_kernel_norm,N,tail_bound";

impl DiagnosticReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.errors.is_empty()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest value of `q` over the rows at radius `r`.
    pub fn max_at(&self, q: Quantity, r: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|row| row.r == r)
            .filter_map(|row| row.get(q))
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{:e}",
                row.theta,
                row.r,
                cell(row.c1),
                cell(row.c2),
                cell(row.zheng),
                cell(row.gamma1),
                cell(row.gamma2),
                cell(row.omega_norm),
                cell(row.product_kernel_norm),
                row.truncation,
                row.tail_bound
            );
        }
        s
    }

    /// Summary with per-ray trends, grid maxima and failures.
    pub fn summary_json(&self) -> serde_json::Value {
        let maxima: serde_json::Map<String, serde_json::Value> = self
            .quantities
            .iter()
            .map(|q| {
                let m = self.rows.iter().filter_map(|r| r.get(*q)).fold(None, |a: Option<f64>, b| {
                    Some(a.map_or(b, |a| a.max(b)))
                });
                (q.column().to_string(), serde_json::json!(m))
            })
            .collect();
        let failures: Vec<_> = self
            .rows
            .iter()
            .filter(|r| !r.errors.is_empty())
            .map(|r| serde_json::json!({"theta": r.theta, "r": r.r, "errors": r.errors}))
            .collect();
        serde_json::json!({
            "points": self.rows.len(),
            "quantities": self.quantities,
            "max": maxima,
            "trends": self.trends,
            "failures": failures,
        })
    }
}

fn argmin_rows<T: Real>(a: &CMat<T>) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [to_f64(a[(i, j)].re), to_f64(a[(i, j)].im)]).collect())
        .collect()
}

fn point<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    theta: f64,
    r: f64,
    which: &[Quantity],
    opts: &SweepOptions<T>,
) -> DiagnosticRow {
    let mut row = DiagnosticRow {
        theta,
        r,
        truncation: truncation_policy(r),
        ..Default::default()
    };
    let z = match DiskPoint::polar(lit::<T>(r), lit::<T>(theta)) {
        Ok(z) => z,
        Err(e) => {
            row.errors.push(e.to_string());
            return row;
        }
    };
    let mut bound = 0.0f64;
    for &q in which {
        let scalar: Result<Option<Bounded<T>>> = match q {
            Quantity::C1 => c1_trace(phi, psi, &z).map(Some),
            Quantity::C2 => c2_trace(phi, psi, &z).map(Some),
            Quantity::Zheng if phi.n() == 1 => zheng_product(phi, psi, &z).map(Some),
            Quantity::Zheng => Ok(None),
            Quantity::Omega => omega_norm(phi, psi, &z).map(Some),
            Quantity::ProductKernel => product_kernel_norm(phi, psi, &z).map(Some),
            Quantity::Gamma1 | Quantity::Gamma2 => {
                let res: Result<GammaResult<T>> = if q == Quantity::Gamma1 {
                    gamma1(phi, psi, &z, &opts.gamma)
                } else {
                    gamma2(phi, psi, &z, &opts.gamma)
                };
                res.map(|g| {
                    let a = Some(argmin_rows(&g.a));
                    if q == Quantity::Gamma1 {
                        row.gamma1_argmin = a;
                    } else {
                        row.gamma2_argmin = a;
                    }
                    Some(Bounded {
                        value: g.value,
                        bound: g.tail_bound,
                    })
                })
            }
        };
        match scalar {
            Ok(Some(b)) => {
                *row.slot(q) = Some(to_f64(b.value));
                bound = bound.max(to_f64(b.bound));
            }
            Ok(None) => {}
            Err(e) => row.errors.push(format!("{}: {e}", q.column())),
        }
    }
    row.tail_bound = bound;
    row
}

fn trends(rows: &[DiagnosticRow], which: &[Quantity], rays: &[f64]) -> Vec<RayTrend> {
    let mut out = Vec::new();
    for &theta in rays {
        for &q in which {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.theta == theta)
                .filter_map(|r| r.get(q).map(|v| (r.r, v)))
                .collect();
            if pts.is_empty() {
                continue;
            }
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            out.push(RayTrend {
                theta,
                quantity: q,
                slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
                decreasing: pts.windows(2).all(|w| w[1].1 <= w[0].1),
                first: pts[0].1,
                last: pts[pts.len() - 1].1,
            });
        }
    }
    out
}

/// Evaluates the requested quantities at every grid point in parallel. Rows
/// come back sorted by `(theta, r)`; a failing point keeps its row with the
/// error recorded.
pub fn radial_sweep<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    grid: &SweepGrid,
    which: &[Quantity],
    opts: &SweepOptions<T>,
) -> Result<DiagnosticReport> {
    if phi.n() != psi.n() {
        return Err(Error::Dimension(format!("block sizes {} and {} differ", phi.n(), psi.n())));
    }
    let mut which = which.to_vec();
    which.sort();
    which.dedup();
    if which.is_empty() {
        return Ok(DiagnosticReport::default());
    }
    let rows: Vec<DiagnosticRow> = grid
        .points()
        .into_par_iter()
        .map(|(t, r)| point(phi, psi, t, r, &which, opts))
        .collect();
    let trends = trends(&rows, &which, grid.rays());
    Ok(DiagnosticReport {
        quantities: which,
        rows,
        trends,
    })
}
