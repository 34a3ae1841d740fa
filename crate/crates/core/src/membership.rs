//! Per-level membership values extracted from the footprint of uncertainty.
//!
//! Point-wise, center-of-weights and area values are computed twice, once
//! against the UMF components and once against the LMF components, each with
//! that fit's own domain map. The Karnik–Mendel variant instead clusters the
//! gray range at the stage-one partition points and type-reduces the
//! interval centroid of every cluster.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fou::Fou;
use crate::gaussfit::MixtureFit;
use crate::histogram::NormalizedHistogram;
use crate::{Series, LEVELS};

/// Fuzzifier used by the KM centroid unless configured otherwise.
pub const DEFAULT_FUZZIFIER: f64 = 2.0;

const KM_MAX_ITERS: usize = 100;
const KM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[derive(clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MvMethod {
    Pointwise,
    Cow,
    Area,
    Km,
}

impl MvMethod {
    pub const ALL: [MvMethod; 4] = [MvMethod::Pointwise, MvMethod::Cow, MvMethod::Area, MvMethod::Km];

    pub fn name(self) -> &'static str {
        match self {
            MvMethod::Pointwise => "pointwise",
            MvMethod::Cow => "cow",
            MvMethod::Area => "area",
            MvMethod::Km => "km",
        }
    }
}

impl fmt::Display for MvMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MvMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MvMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::contract(format!("unknown membership method {s:?}")))
    }
}

/// Membership values against one bound (upper or lower).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundMv {
    pub values: Series,
    /// Per-component value for the reach-constant methods, empty for point-wise.
    pub per_component: Vec<f64>,
    /// Components whose overlap with the histogram was empty.
    pub zero_overlap: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct It2MembershipValues {
    pub method: MvMethod,
    pub upper: BoundMv,
    pub lower: BoundMv,
}

/// `1 − |F_{d(g)}(g) − H(g)|`, clamped to `[0, 1]`.
pub fn mv_pointwise(fit: &MixtureFit, h: &NormalizedHistogram) -> BoundMv {
    let mut values = [0.0; LEVELS];
    for (g, v) in values.iter_mut().enumerate() {
        let f = fit.gaussians[fit.domain_of(g)].eval(g as f64);
        *v = (1.0 - (f - h.values()[g]).abs()).clamp(0.0, 1.0);
    }
    BoundMv {
        values,
        per_component: Vec::new(),
        zero_overlap: Vec::new(),
    }
}

fn overlap(fit: &MixtureFit, i: usize, h: &NormalizedHistogram) -> Series {
    let mut out = [0.0; LEVELS];
    for (g, o) in out.iter_mut().enumerate() {
        *o = fit.gaussians[i].eval(g as f64).min(h.values()[g]);
    }
    out
}

fn spread_by_domain(fit: &MixtureFit, per_component: &[f64]) -> Series {
    let mut values = [0.0; LEVELS];
    for (g, v) in values.iter_mut().enumerate() {
        *v = per_component[fit.domain_of(g)];
    }
    values
}

/// Center of weight of each component's overlap with the histogram.
/// `None` where the overlap is empty.
pub fn overlap_centers(fit: &MixtureFit, h: &NormalizedHistogram) -> Vec<Option<f64>> {
    (0..fit.len())
        .map(|i| {
            let w = overlap(fit, i, h);
            let mass: f64 = w.iter().sum();
            (mass > 0.0).then(|| {
                w.iter()
                    .enumerate()
                    .map(|(g, &x)| x * g as f64)
                    .sum::<f64>()
                    / mass
            })
        })
        .collect()
}

/// `M_CW(i) = F_i(ḡ_i)` spread over the reach of component `i`.
pub fn mv_center_of_weights(fit: &MixtureFit, h: &NormalizedHistogram) -> BoundMv {
    let mut zero_overlap = Vec::new();
    let per_component: Vec<f64> = overlap_centers(fit, h)
        .into_iter()
        .enumerate()
        .map(|(i, center)| match center {
            Some(c) => fit.gaussians[i].eval(c).clamp(0.0, 1.0),
            None => {
                zero_overlap.push(i);
                0.0
            }
        })
        .collect();
    BoundMv {
        values: spread_by_domain(fit, &per_component),
        per_component,
        zero_overlap,
    }
}

/// `M_A(i) = Σ min(F_i, H) / Σ F_i` spread over the reach of component `i`.
pub fn mv_area(fit: &MixtureFit, h: &NormalizedHistogram) -> Result<BoundMv> {
    let mut zero_overlap = Vec::new();
    let mut per_component = Vec::with_capacity(fit.len());
    for i in 0..fit.len() {
        let mass: f64 = fit.component_series(i).iter().sum();
        if !(mass > 0.0) {
            return Err(Error::contract(format!("component {i} has zero mass")));
        }
        let shared: f64 = overlap(fit, i, h).iter().sum();
        if shared == 0.0 {
            zero_overlap.push(i);
        }
        per_component.push((shared / mass).clamp(0.0, 1.0));
    }
    Ok(BoundMv {
        values: spread_by_domain(fit, &per_component),
        per_component,
        zero_overlap,
    })
}

/// Upper and lower membership values for one of the three per-bound methods.
pub fn it2_membership(
    method: MvMethod,
    fou: &Fou,
    h: &NormalizedHistogram,
) -> Result<It2MembershipValues> {
    let run = |fit: &MixtureFit| -> Result<BoundMv> {
        match method {
            MvMethod::Pointwise => Ok(mv_pointwise(fit, h)),
            MvMethod::Cow => Ok(mv_center_of_weights(fit, h)),
            MvMethod::Area => mv_area(fit, h),
            MvMethod::Km => Err(Error::contract(
                "the KM method has no upper/lower split, use mv_km",
            )),
        }
    };
    Ok(It2MembershipValues {
        method,
        upper: run(&fou.umf_fit)?,
        lower: run(&fou.lmf_fit)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Right end `v_R`: lower memberships left of the switch point, upper right of it.
    Right,
    /// Left end `v_L`: upper memberships left of the switch point, lower right of it.
    Left,
}

/// Converged interval-centroid end for one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct KmBoundary {
    pub centroid: f64,
    /// Final primary membership of each pattern in the cluster.
    pub memberships: Vec<f64>,
    /// 0-based index `k` of the last pattern on the left of the switch.
    pub switch_index: usize,
    pub iterations: usize,
}

/// `Σ x_i u_i^m / Σ u_i^m` over patterns `x_i = first_level + i`.
pub fn weighted_centroid(first_level: usize, u: &[f64], m: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &ui) in u.iter().enumerate() {
        let w = ui.powf(m);
        num += (first_level + i) as f64 * w;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// Membership assignment with the switch after pattern `k` (0-based).
pub fn switch_assignment(umf: &[f64], lmf: &[f64], k: usize, side: Side) -> Vec<f64> {
    (0..umf.len())
        .map(|i| match (side, i <= k) {
            (Side::Right, true) | (Side::Left, false) => lmf[i],
            (Side::Right, false) | (Side::Left, true) => umf[i],
        })
        .collect()
}

/// Iterative switch-point search for one end of the interval centroid.
///
/// `umf` and `lmf` are the bounds restricted to the cluster, whose first
/// level is `first_level`; pattern `i` is gray level `first_level + i`.
pub fn km_boundary(
    umf: &[f64],
    lmf: &[f64],
    first_level: usize,
    m: f64,
    side: Side,
) -> Result<KmBoundary> {
    if umf.len() != lmf.len() || umf.is_empty() {
        return Err(Error::contract("cluster bounds must be non-empty and aligned"));
    }
    if !(m > 1.0) {
        return Err(Error::contract(format!("fuzzifier must exceed 1, got {m}")));
    }
    let n = umf.len();
    let mid: Vec<f64> = umf.iter().zip(lmf).map(|(u, l)| 0.5 * (u + l)).collect();
    let mut v = weighted_centroid(first_level, &mid, m).ok_or_else(|| {
        Error::contract(format!(
            "all memberships are zero on the cluster starting at level {first_level}"
        ))
    })?;
    if n == 1 {
        let only = match side {
            Side::Right => umf[0],
            Side::Left => lmf[0],
        };
        return Ok(KmBoundary {
            centroid: v,
            memberships: vec![only],
            switch_index: 0,
            iterations: 0,
        });
    }
    for iter in 1..=KM_MAX_ITERS {
        let k = ((v - first_level as f64).floor().max(0.0) as usize).min(n - 2);
        let u = switch_assignment(umf, lmf, k, side);
        // an assignment with no mass leaves the estimate where it is
        let next = weighted_centroid(first_level, &u, m).unwrap_or(v);
        if (next - v).abs() < KM_EPS {
            return Ok(KmBoundary {
                centroid: next,
                memberships: u,
                switch_index: k,
                iterations: iter,
            });
        }
        v = next;
    }
    Err(Error::Convergence(format!(
        "KM centroid did not settle within {KM_MAX_ITERS} iterations"
    )))
}

/// [`km_boundary`] on the footprint restricted to `[start, end]`.
pub fn km_boundary_centroid(
    fou: &Fou,
    start: usize,
    end: usize,
    m: f64,
    side: Side,
) -> Result<f64> {
    if start > end || end >= LEVELS {
        return Err(Error::contract(format!("invalid cluster [{start}, {end}]")));
    }
    km_boundary(&fou.umf[start..=end], &fou.lmf[start..=end], start, m, side).map(|b| b.centroid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmCluster {
    pub start: usize,
    pub end: usize,
    pub v_left: f64,
    pub v_right: f64,
    /// Crisp center `(v_L + v_R) / 2`.
    pub center: f64,
    /// Final memberships from the `v_L` search, one per level of the cluster.
    pub left_memberships: Vec<f64>,
    /// Final memberships from the `v_R` search.
    pub right_memberships: Vec<f64>,
}

impl KmCluster {
    pub fn contains(&self, g: usize) -> bool {
        (self.start..=self.end).contains(&g)
    }

    /// Type-reduced membership `(u^L + u^R) / 2` at level `g` of the cluster.
    pub fn type_reduced(&self, g: usize) -> f64 {
        let i = g - self.start;
        0.5 * (self.left_memberships[i] + self.right_memberships[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmMembershipValues {
    pub mv: Series,
    pub clusters: Vec<KmCluster>,
    pub fuzzifier: f64,
}

/// Integer clusters tiling `0..=255`: level `g` belongs to cluster `j` when
/// `pp_{j-1} < g ≤ pp_j`. Empty clusters are dropped.
pub fn clusters_from_partition_points(partition_points: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(partition_points.len() + 1);
    let mut start = 0usize;
    for &pp in partition_points {
        let end = pp.floor();
        if end < start as f64 {
            continue;
        }
        let end = (end as usize).min(LEVELS - 1);
        out.push((start, end));
        start = end + 1;
        if start >= LEVELS {
            return out;
        }
    }
    out.push((start, LEVELS - 1));
    out
}

pub fn mv_km(fou: &Fou, partition_points: &[f64], m: f64) -> Result<KmMembershipValues> {
    let mut mv = [0.0; LEVELS];
    let mut clusters = Vec::new();
    for (start, end) in clusters_from_partition_points(partition_points) {
        let umf = &fou.umf[start..=end];
        let lmf = &fou.lmf[start..=end];
        let right = km_boundary(umf, lmf, start, m, Side::Right)?;
        let left = km_boundary(umf, lmf, start, m, Side::Left)?;
        let center = 0.5 * (left.centroid + right.centroid);
        let cluster = KmCluster {
            start,
            end,
            v_left: left.centroid,
            v_right: right.centroid,
            center,
            left_memberships: left.memberships,
            right_memberships: right.memberships,
        };
        let sample = (center.round() as usize).clamp(start, end);
        let value = cluster.type_reduced(sample).clamp(0.0, 1.0);
        mv[start..=end].fill(value);
        clusters.push(cluster);
    }
    Ok(KmMembershipValues {
        mv,
        clusters,
        fuzzifier: m,
    })
}
