//! Classification of converged configurations.

use serde::{Deserialize, Serialize};

use crate::fov::{AttainmentSet, BoundaryApproximant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Near-circular boundary with f around 0.5.
    CrabbDisk,
    /// f around 1 with the maximum attained at a boundary vertex.
    IceCream,
    Other,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::CrabbDisk => "crabb_disk",
            Classification::IceCream => "ice_cream",
            Classification::Other => "other",
        };
        write!(f, "{s}")
    }
}

const CRABB_F_TOL: f64 = 5e-4;
const CIRCLE_RTOL: f64 = 1e-4;
const ICE_F_TOL: f64 = 1e-3;

pub fn classify(f: f64, boundary: &BoundaryApproximant, attainment: &AttainmentSet) -> Classification {
    if (f - 0.5).abs() <= CRABB_F_TOL && is_near_circle(boundary) {
        return Classification::CrabbDisk;
    }
    if (f - 1.0).abs() <= ICE_F_TOL && has_vertex_attainment(boundary, attainment) {
        return Classification::IceCream;
    }
    Classification::Other
}

/// Relative radius variation about the centroid of the full boundary.
fn is_near_circle(boundary: &BoundaryApproximant) -> bool {
    if boundary.degenerate.is_some() {
        return false;
    }
    let pts = boundary.full_boundary_samples();
    if pts.len() < 8 {
        return false;
    }
    let centroid = pts.iter().sum::<num_complex::Complex64>() / pts.len() as f64;
    let mut rmin = f64::MAX;
    let mut rmax: f64 = 0.0;
    let mut rsum = 0.0;
    for z in &pts {
        let r = (z - centroid).norm();
        rmin = rmin.min(r);
        rmax = rmax.max(r);
        rsum += r;
    }
    let rmean = rsum / pts.len() as f64;
    rmean > 0.0 && (rmax - rmin) <= CIRCLE_RTOL * rmean
}

/// The leading attainment point sits on a vertex: the boundary
/// parameterization spends a macroscopic theta interval at (essentially)
/// that point. Degenerate single-point boundaries count: they are the
/// fully collapsed cone.
fn has_vertex_attainment(boundary: &BoundaryApproximant, attainment: &AttainmentSet) -> bool {
    if boundary.degenerate.is_some() {
        return true;
    }
    let Some(lead) = attainment.points.first() else {
        return false;
    };
    let tol = 1e-4 * boundary.diameter.max(1e-300);
    let mut near = 0usize;
    let mut total = 0usize;
    for arc in &boundary.arcs {
        for s in &arc.samples {
            total += 1;
            if (s.z - lead.z).norm() <= tol {
                near += 1;
            }
        }
    }
    if total == 0 {
        return false;
    }
    let span = boundary.domain.1 - boundary.domain.0;
    let width = span * near as f64 / total as f64;
    width >= (4.0 * span / total as f64).max(0.02)
}
