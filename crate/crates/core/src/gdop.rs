//! Geometry matrix, GDOP and the empirical distributions used to report
//! visibility campaigns.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector3};

use crate::orbits::{GroundSite, Topocentric};
use crate::{Error, Result};

/// HᵀH with a condition number above this is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Rows `[−u_e, −u_n, −u_u, 1]` from local ENU line-of-sight unit vectors.
pub fn geometry_matrix_from_los(los: &[Vector3<f64>]) -> Result<DMatrix<f64>> {
    if los.is_empty() {
        return Err(Error::EmptyInput("line-of-sight list"));
    }
    let mut h = DMatrix::zeros(los.len(), 4);
    for (i, u) in los.iter().enumerate() {
        let n = u.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateGeometry(format!("line of sight {i} has zero length")));
        }
        let u = u / n;
        h[(i, 0)] = -u.x;
        h[(i, 1)] = -u.y;
        h[(i, 2)] = -u.z;
        h[(i, 3)] = 1.0;
    }
    Ok(h)
}

/// Geometry matrix for satellites given in ECEF, in the site's ENU frame.
pub fn geometry_matrix(site: &GroundSite, sats_ecef_m: &[Vector3<f64>]) -> Result<DMatrix<f64>> {
    let topo = Topocentric::new(site);
    let los = sats_ecef_m
        .iter()
        .map(|s| topo.line_of_sight(s).map(|(u, _)| u))
        .collect::<Result<Vec<_>>>()?;
    geometry_matrix_from_los(&los)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdopValue {
    pub gdop: f64,
    /// 2-norm condition number of HᵀH.
    pub condition: f64,
}

fn normal_matrix(h: &DMatrix<f64>) -> Result<Matrix4<f64>> {
    if h.ncols() != 4 {
        return Err(Error::param("H", format!("need 4 columns, got {}", h.ncols())));
    }
    if h.nrows() < 4 {
        return Err(Error::param("H", format!("need at least 4 rows, got {}", h.nrows())));
    }
    let mut n = Matrix4::zeros();
    for r in h.row_iter() {
        for i in 0..4 {
            for j in i..4 {
                n[(i, j)] += r[i] * r[j];
            }
        }
    }
    for i in 0..4 {
        for j in 0..i {
            n[(i, j)] = n[(j, i)];
        }
    }
    Ok(n)
}

/// sqrt(trace((HᵀH)⁻¹)) through a Cholesky factorisation, after a
/// conditioning check on the symmetric eigenvalues.
pub fn gdop_detailed(h: &DMatrix<f64>) -> Result<GdopValue> {
    let n = normal_matrix(h)?;
    let eig = SymmetricEigen::new(n).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    log::trace!("HᵀH condition number {condition:.3e}");
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::SingularGeometry(condition));
    }
    let chol = n.cholesky().ok_or(Error::SingularGeometry(condition))?;
    let inv = chol.inverse();
    let trace = inv.trace();
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(Error::SingularGeometry(condition));
    }
    Ok(GdopValue { gdop: trace.sqrt(), condition })
}

pub fn gdop(h: &DMatrix<f64>) -> Result<f64> {
    gdop_detailed(h).map(|g| g.gdop)
}

/// Empirical P(n > N) for N = 0 ..= max(counts).
pub fn ccdf(counts: &[u32]) -> Result<Vec<(u32, f64)>> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("ccdf counts"));
    }
    let max = *counts.iter().max().expect("non-empty");
    let mut hist = vec![0usize; max as usize + 1];
    for &c in counts {
        hist[c as usize] += 1;
    }
    let total = counts.len() as f64;
    let mut above = counts.len();
    let mut out = Vec::with_capacity(hist.len());
    for (n, h) in hist.iter().enumerate() {
        above -= h;
        out.push((n as u32, above as f64 / total));
    }
    Ok(out)
}

/// Empirical CDF P(v ≤ x) at each distinct value, ascending.
pub fn cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("cdf values"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::param("values", "NaN in CDF input"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = p,
            _ => out.push((*x, p)),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased (n − 1) estimate; zero for a single value.
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptyInput("summary values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Summary { count: values.len(), mean, std })
}
