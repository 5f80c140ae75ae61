//! Node clusters at each end of the link and the parabolic (Fresnel)
//! internode-distance approximation.
//!
//! Local frames put the x axis along the line of sight. A [`NodeCluster`]
//! holds 3-D positions inside a ball; a [`DiscCluster`] holds the (y, z)
//! projections inside a disc.

use rand::Rng;

use crate::error::{Error, Result};
use crate::report::CsvReport;
use crate::seed::rng_from_seed;

pub type Point3 = [f64; 3];
pub type Point2 = [f64; 2];

/// Range must exceed the largest node offset by this factor.
pub const MIN_RANGE_RATIO: f64 = 100.0;

const CONTAINMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeCluster {
    pub nodes: Vec<Point3>,
    pub radius_m: f64,
    /// Seed the cluster was sampled from, if any.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscCluster {
    pub nodes: Vec<Point2>,
    pub disc_radius_m: f64,
    pub seed: Option<u64>,
}

fn norm3(p: &Point3) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn norm2(p: &Point2) -> f64 {
    p[0].hypot(p[1])
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::invariant(format!("cluster radius must be > 0, got {radius}")))
    }
}

impl NodeCluster {
    pub fn new(nodes: Vec<Point3>, radius_m: f64) -> Result<Self> {
        check_radius(radius_m)?;
        if nodes.is_empty() {
            return Err(Error::invariant("cluster needs at least one node"));
        }
        let limit = radius_m * (1.0 + CONTAINMENT_SLACK);
        if let Some(p) = nodes.iter().find(|p| norm3(p) > limit) {
            return Err(Error::invariant(format!(
                "node {p:?} lies outside the ball of radius {radius_m}"
            )));
        }
        Ok(Self {
            nodes,
            radius_m,
            seed: None,
        })
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_offset(&self) -> f64 {
        self.nodes.iter().map(norm3).fold(0.0, f64::max)
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new("cluster3d", &["idx", "x", "y", "z"]);
        for (i, p) in self.nodes.iter().enumerate() {
            r.push(vec![i.into(), p[0].into(), p[1].into(), p[2].into()]);
        }
        r
    }
}

impl DiscCluster {
    pub fn new(nodes: Vec<Point2>, disc_radius_m: f64) -> Result<Self> {
        check_radius(disc_radius_m)?;
        if nodes.is_empty() {
            return Err(Error::invariant("cluster needs at least one node"));
        }
        let limit = disc_radius_m * (1.0 + CONTAINMENT_SLACK);
        if let Some(p) = nodes.iter().find(|p| norm2(p) > limit) {
            return Err(Error::invariant(format!(
                "node {p:?} lies outside the disc of radius {disc_radius_m}"
            )));
        }
        Ok(Self {
            nodes,
            disc_radius_m,
            seed: None,
        })
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    /// `|S| = πR²`.
    pub fn area_m2(&self) -> f64 {
        std::f64::consts::PI * self.disc_radius_m * self.disc_radius_m
    }

    pub fn to_report(&self) -> CsvReport {
        let mut r = CsvReport::new("cluster2d", &["idx", "y", "z"]);
        for (i, p) in self.nodes.iter().enumerate() {
            r.push(vec![i.into(), p[0].into(), p[1].into()]);
        }
        r
    }
}

/// `M` points i.i.d. uniform in the ball, by rejection from the bounding cube.
pub fn sample_ball_cluster(radius_m: f64, m: usize, seed: u64) -> Result<NodeCluster> {
    check_radius(radius_m)?;
    if m == 0 {
        return Err(Error::invariant("cluster size M must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut nodes = Vec::with_capacity(m);
    while nodes.len() < m {
        let p: Point3 = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
            nodes.push([p[0] * radius_m, p[1] * radius_m, p[2] * radius_m]);
        }
    }
    Ok(NodeCluster {
        nodes,
        radius_m,
        seed: Some(seed),
    })
}

/// `M` points i.i.d. uniform in the disc, by rejection from the bounding square.
pub fn sample_disc_cluster(disc_radius_m: f64, m: usize, seed: u64) -> Result<DiscCluster> {
    check_radius(disc_radius_m)?;
    if m == 0 {
        return Err(Error::invariant("cluster size M must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut nodes = Vec::with_capacity(m);
    while nodes.len() < m {
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        if y * y + z * z <= 1.0 {
            nodes.push([y * disc_radius_m, z * disc_radius_m]);
        }
    }
    Ok(DiscCluster {
        nodes,
        disc_radius_m,
        seed: Some(seed),
    })
}

/// Drops the line-of-sight coordinate.
pub fn project_to_disc(cluster: &NodeCluster) -> DiscCluster {
    DiscCluster {
        nodes: cluster.nodes.iter().map(|p| [p[1], p[2]]).collect(),
        disc_radius_m: cluster.radius_m,
        seed: cluster.seed,
    }
}

pub(crate) fn check_range_ratio(u_t: &Point3, v_r: &Point3, d: f64) -> Result<()> {
    let reach = norm3(u_t).max(norm3(v_r));
    if !(d.is_finite() && d > 0.0) || d < MIN_RANGE_RATIO * reach {
        return Err(Error::invariant(format!(
            "range {d} m is not >= {MIN_RANGE_RATIO} x node offset {reach} m"
        )));
    }
    Ok(())
}

/// Parabolic approximation of the path-length deviation from `d`:
/// `(x_R − x_T) + [(y_R − y_T)² + (z_R − z_T)²] / (2d)`.
pub fn fresnel_distance(u_t: &Point3, v_r: &Point3, d: f64) -> Result<f64> {
    check_range_ratio(u_t, v_r, d)?;
    let dy = v_r[1] - u_t[1];
    let dz = v_r[2] - u_t[2];
    Ok((v_r[0] - u_t[0]) + (dy * dy + dz * dz) / (2.0 * d))
}

/// Exact Euclidean path length minus `d`, evaluated without cancellation.
pub fn exact_distance_offset(u_t: &Point3, v_r: &Point3, d: f64) -> f64 {
    let dx = v_r[0] - u_t[0];
    let dy = v_r[1] - u_t[1];
    let dz = v_r[2] - u_t[2];
    let along = d + dx;
    let lateral2 = dy * dy + dz * dz;
    let full = (along * along + lateral2).sqrt();
    dx + lateral2 / (full + along)
}
