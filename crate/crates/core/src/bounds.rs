//! Guaranteed lower bounds from the Crouzeix-Raviart eigenvalues and upper
//! bounds from the conforming P1 eigenvalues.
//!
//! With `C_h` a bound for the boundary trace of the projection error,
//!
//! ```text
//! C_h = 0.6711 * max_{K on boundary} h_K / sqrt(H_K) + 0.1893 / sqrt(lambda_h1) * max_K h_K
//! ```
//!
//! every exact eigenvalue satisfies `lambda_i >= lambda_h,i / (1 + C_h^2 lambda_h,i)`.
//! Here `h_K` is the longest edge of `K`, `H_K = 2|K|/|e|` its height over the
//! boundary edge `e`, and `lambda_h1` a lower estimate of the first CR
//! eigenvalue. Smaller `lambda_h,i` inputs never raise the bound and a smaller
//! `lambda_h1` never lowers `C_h`, so enclosure lower ends can be fed in
//! directly.

use crate::assembly::{assemble, ElementKind};
use crate::eigensolve::{certify, solve_largest, to_lambda, Enclosure, Pencil};
use crate::error::{BoundsError, MeshError, SolverError};
use crate::mesh::{check_admissibility, compute_geometry, DomainTag, GeometryTable, Mesh};

/// Constant of the local L^2 interpolation error estimate
/// `||u - Pi u||_K <= C_INTERP h_K |u - Pi u|_{1,K}`.
pub const C_INTERP: f64 = 0.1893;
/// Constant of the edge trace estimate
/// `||u - Pi u||_e <= C_TRACE h_K / sqrt(H_K) |u - Pi u|_{1,K}`.
pub const C_TRACE: f64 = 0.6711;

/// Number of eigenvalues reported by default.
pub const DEFAULT_K: usize = 5;

/// Relative pad applied to `C_h` in certified mode.
pub const CH_UPWARD_PAD: f64 = 1e-12;

/// High-accuracy approximations of the first five Steklov eigenvalues of the
/// unit square (computed on a much finer mesh; not guaranteed).
pub const UNIT_SQUARE_REFERENCE: [f64; 5] = [0.240079, 1.492293, 1.492293, 2.082616, 4.733516];

/// Same for the L-shaped domain (0,2)^2 \ [1,2]^2.
pub const LSHAPE_REFERENCE: [f64; 5] = [0.34141, 0.61686, 0.98427, 1.69206, 1.70092];

pub fn reference_for(domain: DomainTag) -> Option<&'static [f64]> {
    match domain {
        DomainTag::Square => Some(&UNIT_SQUARE_REFERENCE),
        DomainTag::LShape => Some(&LSHAPE_REFERENCE),
        DomainTag::External => None,
    }
}

/// `lambda / (1 + c^2 lambda)`.
pub fn lower_bound_map(lambda_h: f64, c_h: f64) -> f64 {
    lambda_h / (1.0 + c_h * c_h * lambda_h)
}

/// `C_h` from the mesh geometry and a lower estimate of `lambda_h1`.
pub fn compute_ch(geometry: &GeometryTable, lambda_h1_lower: f64) -> Result<f64, BoundsError> {
    let (trace, interp) = ch_terms(geometry, lambda_h1_lower)?;
    Ok(trace + interp)
}

/// [`compute_ch`] with both terms padded upward by [`CH_UPWARD_PAD`]
/// relative.
pub fn compute_ch_upward(geometry: &GeometryTable, lambda_h1_lower: f64) -> Result<f64, BoundsError> {
    let (trace, interp) = ch_terms(geometry, lambda_h1_lower)?;
    Ok((trace + interp) * (1.0 + CH_UPWARD_PAD))
}

fn ch_terms(geometry: &GeometryTable, lambda_h1_lower: f64) -> Result<(f64, f64), BoundsError> {
    if !(lambda_h1_lower > 0.0) {
        return Err(BoundsError::NonPositiveLambda(lambda_h1_lower));
    }
    let ratio = geometry
        .max_h_over_sqrt_height
        .ok_or(BoundsError::NoBoundaryGeometry)?;
    Ok((
        C_TRACE * ratio,
        C_INTERP / lambda_h1_lower.sqrt() * geometry.max_h,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    /// One-based eigenvalue index.
    pub index: usize,
    /// Guaranteed lower bound.
    pub lower: f64,
    /// Computed Crouzeix-Raviart eigenvalue.
    pub lambda_h: f64,
    /// Value fed into the lower-bound map: the enclosure lower end when
    /// certified, `lambda_h` otherwise.
    pub lambda_h_lower: f64,
    /// Upper bound from P1 (certified upper end when certified).
    pub upper: f64,
    /// Computed P1 eigenvalue.
    pub lambda_p1: f64,
    pub cr_enclosure: Option<Enclosure>,
    pub p1_enclosure: Option<Enclosure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub domain: DomainTag,
    /// Column heading, e.g. `1/8`.
    pub label: String,
    /// Mesh size; defaults to the largest `h_K`.
    pub h: f64,
    pub elements: usize,
    pub max_h: f64,
    pub c_h: f64,
    pub certified: bool,
    pub rows: Vec<BoundRow>,
}

impl BoundsReport {
    pub fn with_label(mut self, label: impl Into<String>, h: f64) -> Self {
        self.label = label.into();
        self.h = h;
        self
    }

    pub fn lower(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.upper).collect()
    }

    pub fn lambda_h(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lambda_h).collect()
    }
}

/// Computed (and optionally certified) eigenvalues of one discrete space.
struct SpaceEigen {
    lambda: Vec<f64>,
    enclosures: Option<Vec<Enclosure>>,
}

fn space_eigenvalues(
    mesh: &Mesh,
    kind: ElementKind,
    k: usize,
    certified: bool,
) -> Result<SpaceEigen, BoundsError> {
    let asm = assemble(mesh, kind)?;
    let pencil = Pencil::from_assembled(&asm);
    let spectrum = solve_largest(&pencil, k)?;
    let lambda = to_lambda(&spectrum, k)?;
    let enclosures = if certified {
        Some(
            spectrum
                .mu
                .iter()
                .zip(&spectrum.vectors)
                .map(|(&mu, x)| certify(&pencil, mu, x))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    Ok(SpaceEigen { lambda, enclosures })
}

/// Full pipeline on one mesh: CR eigenvalues, `C_h`, the lower-bound map,
/// and P1 upper bounds.
pub fn compute_bounds(mesh: &Mesh, k: usize, certified: bool) -> Result<BoundsReport, BoundsError> {
    let report = check_admissibility(mesh);
    if !report.passed() {
        return Err(MeshError::Inadmissible(Box::new(report)).into());
    }
    let geometry = compute_geometry(mesh)?;

    let (cr, p1) = rayon::join(
        || space_eigenvalues(mesh, ElementKind::CrouzeixRaviart, k, certified),
        || space_eigenvalues(mesh, ElementKind::P1, k, certified),
    );
    let (cr, p1) = (cr?, p1?);

    let lambda_lower: Vec<f64> = match &cr.enclosures {
        Some(enc) => enc.iter().map(|e| 1.0 / e.mu_interval().1).collect(),
        None => cr.lambda.clone(),
    };
    let c_h = if certified {
        compute_ch_upward(&geometry, lambda_lower[0])?
    } else {
        compute_ch(&geometry, lambda_lower[0])?
    };

    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let upper = match &p1.enclosures {
            Some(enc) => {
                let (_, hi) = enc[i].lambda_interval().ok_or_else(|| {
                    SolverError::CertificationUnavailable(format!("P1 enclosure {} reaches zero", i + 1))
                })?;
                hi
            }
            None => p1.lambda[i],
        };
        rows.push(BoundRow {
            index: i + 1,
            lower: lower_bound_map(lambda_lower[i], c_h),
            lambda_h: cr.lambda[i],
            lambda_h_lower: lambda_lower[i],
            upper,
            lambda_p1: p1.lambda[i],
            cr_enclosure: cr.enclosures.as_ref().map(|e| e[i]),
            p1_enclosure: p1.enclosures.as_ref().map(|e| e[i]),
        });
    }

    Ok(BoundsReport {
        domain: mesh.domain(),
        label: format!("{} elements", mesh.num_triangles()),
        h: geometry.max_h,
        elements: mesh.num_triangles(),
        max_h: geometry.max_h,
        c_h,
        certified,
        rows,
    })
}

/// Total errors against reference values and the observed rates between
/// consecutive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub err_lower: Vec<f64>,
    pub err_upper: Vec<f64>,
    /// `sigma[j] = log2(err[j-1] / err[j])`; `None` for the first level.
    pub sigma_lower: Vec<Option<f64>>,
    pub sigma_upper: Vec<Option<f64>>,
}

/// `Err = sum_i |ref_i - bound_i|` over the reference indices, per level, and
/// `sigma = log2(Err(h) / Err(h/2))` between consecutive levels.
pub fn convergence_rates(reports: &[BoundsReport], reference: &[f64]) -> Result<RateTable, BoundsError> {
    let mut err_lower = Vec::with_capacity(reports.len());
    let mut err_upper = Vec::with_capacity(reports.len());
    for r in reports {
        if r.rows.len() < reference.len() {
            return Err(BoundsError::Mismatch(format!(
                "report '{}' has {} rows, reference has {}",
                r.label,
                r.rows.len(),
                reference.len()
            )));
        }
        err_lower.push(
            reference
                .iter()
                .zip(&r.rows)
                .map(|(t, row)| (t - row.lower).abs())
                .sum(),
        );
        err_upper.push(
            reference
                .iter()
                .zip(&r.rows)
                .map(|(t, row)| (t - row.upper).abs())
                .sum(),
        );
    }
    Ok(RateTable {
        sigma_lower: rates(&err_lower),
        sigma_upper: rates(&err_upper),
        err_lower,
        err_upper,
    })
}

pub fn rates(err: &[f64]) -> Vec<Option<f64>> {
    (0..err.len())
        .map(|j| (j > 0).then(|| (err[j - 1] / err[j]).log2()))
        .collect()
}
