//! Least-squares laws for error-versus-resource data and their inversion.
//!
//! All logarithms are base 10: a log-linear law reads
//! `log10(err) = χ·D + λ`, a log-log law `log10(err) = χ·log10(calls) + λ`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math;
use crate::solvers::{Status, MACHINE_FLOOR};
use crate::{Error, Result};

/// Errors below this are at machine precision and excluded from log-linear fits.
pub const SATURATION_FLOOR: f64 = 10.0 * MACHINE_FLOOR;

/// Coordinate transform of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    /// `log10 y` against `x`.
    LogLinear,
    /// `log10 y` against `log10 x`.
    LogLog,
    /// `y` against `x`.
    Linear,
}

impl FitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FitKind::LogLinear => "loglinear",
            FitKind::LogLog => "loglog",
            FitKind::Linear => "linear",
        }
    }
}

/// A fitted straight line in transformed coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitModel {
    pub kind: FitKind,
    /// Slope `χ`.
    pub chi: f64,
    /// Intercept `λ`.
    pub lambda: f64,
    /// Standard errors and `cov(χ, λ)`; `None` with only two points.
    pub chi_se: Option<f64>,
    pub lambda_se: Option<f64>,
    pub covariance: Option<f64>,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Lower quartile, median and upper quartile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Quartiles with linear interpolation between order statistics.
/// `None` for empty input; NaNs are ignored.
pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos as usize;
        let hi = (lo + 1).min(v.len() - 1);
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    };
    Some(Quartiles {
        lower: q(0.25),
        median: q(0.5),
        upper: q(0.75),
    })
}

/// One summarised cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_sites: usize,
    /// Krylov dimension or oracle-call budget.
    pub control: f64,
    /// Fractional energy error (the median when summarising many seeds).
    pub frac_error: f64,
    pub quartiles: Option<Quartiles>,
    /// Krylov dimension behind the point when `control` is a budget.
    pub dim: Option<usize>,
    pub status: Status,
}

impl SweepPoint {
    pub fn new(n_sites: usize, control: f64, frac_error: f64) -> Self {
        Self {
            n_sites,
            control,
            frac_error,
            quartiles: None,
            dim: None,
            status: Status::Ok,
        }
    }
}

/// Ordinary least squares in the coordinates of `kind`.
///
/// Points with non-positive errors (for the log kinds) are skipped, and
/// log-linear fits also skip unstable or failed points and errors at the
/// machine floor.
pub fn fit(points: &[SweepPoint], kind: FitKind) -> Result<FitModel> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in points {
        let usable = match kind {
            FitKind::LogLinear => p.frac_error > SATURATION_FLOOR && p.status == Status::Ok,
            FitKind::LogLog => p.frac_error > 0.0 && p.control > 0.0,
            FitKind::Linear => p.frac_error.is_finite(),
        };
        if !usable || !p.control.is_finite() {
            continue;
        }
        let (x, y) = match kind {
            FitKind::LogLinear => (p.control, math::log10(p.frac_error)),
            FitKind::LogLog => (math::log10(p.control), math::log10(p.frac_error)),
            FitKind::Linear => (p.control, p.frac_error),
        };
        xs.push(x);
        ys.push(y);
    }
    ols(&xs, &ys, kind)
}

fn ols(xs: &[f64], ys: &[f64], kind: FitKind) -> Result<FitModel> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 1e-300 || !sxx.is_finite() {
        return Err(Error::invalid("points", "abscissae are degenerate"));
    }
    let chi = sxy / sxx;
    let lambda = my - chi * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - lambda - chi * x;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let (chi_se, lambda_se, covariance) = if n >= 3 {
        let s2 = ssr / (nf - 2.0);
        let var_chi = s2 / sxx;
        let var_lambda = s2 * (1.0 / nf + mx * mx / sxx);
        (Some(math::sqrt(var_chi)), Some(math::sqrt(var_lambda)), Some(-mx * var_chi))
    } else {
        (None, None, None)
    };
    Ok(FitModel {
        kind,
        chi,
        lambda,
        chi_se,
        lambda_se,
        covariance,
        r_squared,
        n_points: n,
    })
}

/// A value with an optional standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: Option<f64>,
}

impl FitModel {
    /// Evaluate the law at `x`, in original units.
    pub fn predict(&self, x: f64) -> f64 {
        match self.kind {
            FitKind::LogLinear => math::pow(10.0, self.chi * x + self.lambda),
            FitKind::LogLog => math::pow(10.0, self.chi * math::log10(x) + self.lambda),
            FitKind::Linear => self.chi * x + self.lambda,
        }
    }
}

/// Control value at which the law reaches `target_error`, with first-order
/// error propagation including the `χ`–`λ` covariance.
pub fn extrapolate_requirement(model: &FitModel, target_error: f64) -> Result<Estimate> {
    let level = match model.kind {
        FitKind::Linear => {
            if model.chi == 0.0 {
                return Err(Error::invalid("chi", "zero slope has no crossing"));
            }
            target_error
        }
        _ => {
            if model.chi >= 0.0 {
                return Err(Error::invalid("chi", "non-negative slope has no crossing"));
            }
            if target_error <= 0.0 {
                return Err(Error::invalid("target_error", "must be positive"));
            }
            math::log10(target_error)
        }
    };
    let u = (level - model.lambda) / model.chi;
    let se_u = match (model.chi_se, model.lambda_se, model.covariance) {
        (Some(sc), Some(sl), Some(cov)) => {
            let var = (sl * sl + u * u * sc * sc + 2.0 * u * cov) / (model.chi * model.chi);
            Some(math::sqrt(var.max(0.0)))
        }
        _ => None,
    };
    Ok(match model.kind {
        FitKind::LogLog => {
            let value = math::pow(10.0, u);
            Estimate {
                value,
                se: se_u.map(|s| value * math::ln(10.0) * s),
            }
        }
        _ => Estimate { value: u, se: se_u },
    })
}

/// For each `(N, budget)`, the Krylov dimension with the lowest median error.
/// Ties go to the smaller dimension. Output is sorted by `N`, then budget.
pub fn best_median_curve(sweep: &[SweepPoint]) -> Vec<SweepPoint> {
    let mut best: BTreeMap<(usize, u64), SweepPoint> = BTreeMap::new();
    for p in sweep {
        if p.frac_error.is_nan() {
            continue;
        }
        let key = (p.n_sites, p.control.to_bits());
        let replace = match best.get(&key) {
            None => true,
            Some(b) => p.frac_error < b.frac_error || (p.frac_error == b.frac_error && p.dim.unwrap_or(0) < b.dim.unwrap_or(0)),
        };
        if replace {
            best.insert(key, *p);
        }
    }
    let mut out: Vec<SweepPoint> = best.into_values().collect();
    out.sort_by(|a, b| a.n_sites.cmp(&b.n_sites).then(a.control.total_cmp(&b.control)));
    out
}

/// Kendall rank correlation (tau-b).
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tie_x += 1;
            } else if dy == 0.0 {
                tie_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let denom = math::sqrt(((concordant + discordant + tie_x) * (concordant + discordant + tie_y)) as f64);
    if denom == 0.0 {
        0.0
    } else {
        (concordant - discordant) as f64 / denom
    }
}
