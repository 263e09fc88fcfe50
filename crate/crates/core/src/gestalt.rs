//! Geometric detectors behind the Gestalt predicates of the statement
//! language: circular arrangement, mirror symmetry, proximity clustering and
//! the "flower" grouping.
//!
//! All thresholds are relative to the figure (fitted radius, mean object
//! size) or to the unit canvas, and all of them live in [`GestaltConfig`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ObjectSpec;

/// RMS distance from the best-fit line below which centers count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GestaltError {
    #[error("degenerate input: centers are collinear or coincident, circle fit is singular")]
    DegenerateInput,
    #[error("need at least {needed} objects, got {got}")]
    TooFewObjects { needed: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GestaltConfig {
    /// Max RMS radial residual as a fraction of the fitted radius.
    pub circular_residual_tol: f64,
    /// Max center mismatch (canvas units) between an object and the mirror
    /// image of its partner.
    pub symmetry_match_tol: f64,
    pub symmetry_axis_steps: usize,
    /// Single-linkage threshold as a multiple of the mean object size.
    pub cluster_eps_factor: f64,
}

impl Default for GestaltConfig {
    fn default() -> Self {
        Self {
            circular_residual_tol: 0.08,
            symmetry_match_tol: 0.05,
            symmetry_axis_steps: 36,
            cluster_eps_factor: 1.5,
        }
    }
}

impl GestaltConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.circular_residual_tol > 0.0
            && self.symmetry_match_tol > 0.0
            && self.cluster_eps_factor > 0.0)
        {
            return Err("gestalt tolerances must be > 0".into());
        }
        if self.symmetry_axis_steps < 4 {
            return Err(format!("symmetry_axis_steps must be >= 4, got {}", self.symmetry_axis_steps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: (f64, f64),
    pub radius: f64,
    /// Root-mean-square of `|p - center| - radius` over the fitted points.
    pub rms_residual: f64,
}

/// Algebraic (Kåsa) least-squares circle through a point set.
///
/// Solves `x² + y² + D·x + E·y + F = 0` in the least-squares sense, working in
/// coordinates relative to the centroid so the result is translation
/// invariant and well conditioned.
pub fn fit_circle(points: &[(f64, f64)]) -> Result<CircleFit, GestaltError> {
    if points.len() < 3 {
        return Err(GestaltError::TooFewObjects { needed: 3, got: points.len() });
    }
    let n = points.len() as f64;
    let (cx, cy) = centroid(points);

    // Spread around the best-fit line: smallest eigenvalue of the covariance.
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (u, v) = (x - cx, y - cy);
        sxx += u * u;
        syy += v * v;
        sxy += u * v;
    }
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let lambda_min = (tr - (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0;
    if lambda_min.max(0.0).sqrt() <= COLLINEAR_TOL {
        return Err(GestaltError::DegenerateInput);
    }

    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(x, y) in points {
        let (u, v) = (x - cx, y - cy);
        let row = [u, v, 1.0];
        let b = -(u * u + v * v);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * b;
        }
    }
    let [d, e, f] = solve3(ata, atb).ok_or(GestaltError::DegenerateInput)?;
    let (uc, vc) = (-d / 2.0, -e / 2.0);
    let r2 = uc * uc + vc * vc - f;
    if r2.is_nan() || r2 <= 0.0 {
        return Err(GestaltError::DegenerateInput);
    }
    let radius = r2.sqrt();
    let center = (uc + cx, vc + cy);
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = (x - center.0).hypot(y - center.1) - radius;
            r * r
        })
        .sum();
    Ok(CircleFit { center, radius, rms_residual: (ss / n).sqrt() })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let k = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (cell, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *cell -= k * p;
            }
            b[row] -= k * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = ((row + 1)..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn centroid(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    (sx / n, sy / n)
}

fn mean_size(objs: &[ObjectSpec]) -> f64 {
    objs.iter().map(|o| o.size).sum::<f64>() / objs.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularArrangement {
    pub accepted: bool,
    pub fit: Option<CircleFit>,
    /// Set when no circle could be fitted at all.
    pub diagnostic: Option<GestaltError>,
}

pub fn is_circular_arrangement(objs: &[ObjectSpec], cfg: &GestaltConfig) -> CircularArrangement {
    let points: Vec<_> = objs.iter().map(ObjectSpec::center).collect();
    match fit_circle(&points) {
        Ok(fit) => {
            let accepted = fit.rms_residual <= cfg.circular_residual_tol * fit.radius
                && fit.radius > mean_size(objs);
            CircularArrangement { accepted, fit: Some(fit), diagnostic: None }
        }
        Err(e) => CircularArrangement { accepted: false, fit: None, diagnostic: Some(e) },
    }
}

/// A reflection axis through `point` with direction angle `angle` (radians,
/// measured from the +x axis toward +y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub point: (f64, f64),
    pub angle: f64,
}

impl Axis {
    pub fn reflect(&self, p: (f64, f64)) -> (f64, f64) {
        let (dx, dy) = (self.angle.cos(), self.angle.sin());
        let (u, v) = (p.0 - self.point.0, p.1 - self.point.1);
        let t = u * dx + v * dy;
        (self.point.0 + 2.0 * t * dx - u, self.point.1 + 2.0 * t * dy - v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry {
    pub symmetric: bool,
    /// Matching axis with the smallest worst-case mismatch.
    pub axis: Option<Axis>,
    /// `pairing[i]` is the object that `i` maps onto under the axis.
    pub pairing: Vec<usize>,
    pub max_mismatch: f64,
}

pub fn is_symmetric(objs: &[ObjectSpec], cfg: &GestaltConfig) -> Symmetry {
    let none = Symmetry { symmetric: false, axis: None, pairing: Vec::new(), max_mismatch: f64::INFINITY };
    if objs.len() < 2 {
        return none;
    }
    let points: Vec<_> = objs.iter().map(ObjectSpec::center).collect();
    let c = centroid(&points);
    let steps = cfg.symmetry_axis_steps.max(1);
    let mut best = none;
    for k in 0..steps {
        let axis = Axis { point: c, angle: PI * k as f64 / steps as f64 };
        let mirrored: Vec<_> = points.iter().map(|&p| axis.reflect(p)).collect();
        let compatible = |i: usize, j: usize| {
            let (a, b) = (&objs[i], &objs[j]);
            a.shape == b.shape
                && a.color == b.color
                && (mirrored[i].0 - b.x).hypot(mirrored[i].1 - b.y) <= cfg.symmetry_match_tol
        };
        if let Some(pairing) = exchanging_matching(objs.len(), compatible) {
            let worst = pairing
                .iter()
                .enumerate()
                .map(|(i, &j)| (mirrored[i].0 - objs[j].x).hypot(mirrored[i].1 - objs[j].y))
                .fold(0.0, f64::max);
            if worst < best.max_mismatch {
                best = Symmetry { symmetric: true, axis: Some(axis), pairing, max_mismatch: worst };
            }
        }
    }
    best
}

/// A perfect matching that exchanges at least one pair of distinct objects.
///
/// An axis that maps every object onto itself (all centers on the axis) is
/// not a mirror symmetry.
fn exchanging_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let pairing = perfect_matching(n, &edge)?;
    if pairing.iter().enumerate().any(|(i, &j)| i != j) {
        return Some(pairing);
    }
    (0..n).find_map(|fixed| perfect_matching(n, |i, j| !(i == fixed && j == fixed) && edge(i, j)))
}

/// Kuhn's augmenting-path matching on an `n × n` bipartite graph.
fn perfect_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| edge(i, j)).collect()).collect();
    let mut match_right: Vec<Option<usize>> = vec![None; n];

    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if match_right[j].is_none_or(|k| augment(k, adj, seen, match_right)) {
                match_right[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, &adj, &mut seen, &mut match_right) {
            return None;
        }
    }
    let mut pairing = vec![0; n];
    for (j, m) in match_right.iter().enumerate() {
        pairing[m.expect("perfect matching covers every vertex")] = j;
    }
    Some(pairing)
}

/// Single-linkage clusters over center distance with threshold
/// `cluster_eps_factor × mean size`. Each cluster is sorted ascending and the
/// clusters are ordered by their smallest index.
pub fn cluster_by_proximity(objs: &[ObjectSpec], cfg: &GestaltConfig) -> Vec<Vec<usize>> {
    let n = objs.len();
    let eps = cfg.cluster_eps_factor * mean_size(objs);
    let mut label = vec![usize::MAX; n];
    let mut clusters = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        label[start] = id;
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if label[j] == usize::MAX
                    && (objs[i].x - objs[j].x).hypot(objs[i].y - objs[j].y) <= eps
                {
                    label[j] = id;
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    clusters
}

/// A core object ringed by at least three petals that share shape and color
/// and whose ring is centered on the core.
///
/// Every object other than the core must be a petal, so callers narrow the
/// candidate group (e.g. with a selector) before asking.
pub fn is_flower(objs: &[ObjectSpec], cfg: &GestaltConfig) -> bool {
    if objs.len() < 4 {
        return false;
    }
    (0..objs.len()).any(|core| {
        let petals: Vec<ObjectSpec> =
            objs.iter().enumerate().filter(|&(i, _)| i != core).map(|(_, o)| *o).collect();
        let uniform = petals
            .iter()
            .all(|p| p.shape == petals[0].shape && p.color == petals[0].color);
        if !uniform {
            return false;
        }
        let ring = is_circular_arrangement(&petals, cfg);
        match (ring.accepted, ring.fit) {
            (true, Some(fit)) => {
                let off = (fit.center.0 - objs[core].x).hypot(fit.center.1 - objs[core].y);
                off <= cfg.circular_residual_tol * fit.radius
            }
            _ => false,
        }
    })
}
