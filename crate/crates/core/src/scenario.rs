//! System parameters and BS/node geometry.

use thiserror::Error;

use crate::numerics::SeededRng;

/// Physical and algorithmic constants of one simulated system.
///
/// Powers are in watts, ratios linear. Defaults are the reference scenario:
/// 8 transmit and 12 receive antennas, 4 nodes, 1 W budget, -90 dBm antenna
/// and sensing noise, -100 dBm decoder noise, 10 dB SINR targets, 1 nW
/// harvesting target, Rician factor 5.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_nodes: usize,
    pub p_max: f64,
    pub sigma2_c: f64,
    pub sigma2_s: f64,
    pub delta2: f64,
    pub gamma: f64,
    pub eta: f64,
    pub e_min: f64,
    pub rcs: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub alpha_nlos: f64,
    pub l0: f64,
    pub d0: f64,
    pub zeta: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub gr_samples: usize,
    pub chi_ramp_iters: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_tx: 8,
            n_rx: 12,
            n_nodes: 4,
            p_max: dbm_to_watts(30.0),
            sigma2_c: dbm_to_watts(-90.0),
            sigma2_s: dbm_to_watts(-90.0),
            delta2: dbm_to_watts(-100.0),
            gamma: db_to_linear(10.0),
            eta: db_to_linear(10.0),
            e_min: 1e-9,
            rcs: 1.0,
            kappa: 5.0,
            alpha: 2.0,
            alpha_nlos: 3.2,
            l0: db_to_linear(-40.0),
            d0: 1.0,
            zeta: 1.0,
            tau: 1e-8,
            max_iters: 50,
            gr_samples: 100,
            chi_ramp_iters: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        fn bad(name: &'static str, reason: impl Into<String>) -> Result<(), ParamError> {
            Err(ParamError::Invalid {
                name,
                reason: reason.into(),
            })
        }
        let positive = [
            ("p_max", self.p_max),
            ("sigma2_c", self.sigma2_c),
            ("sigma2_s", self.sigma2_s),
            ("delta2", self.delta2),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("e_min", self.e_min),
            ("rcs", self.rcs),
            ("l0", self.l0),
            ("d0", self.d0),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(name, format!("must be finite and > 0, got {v}"));
            }
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return bad("zeta", format!("must lie in (0, 1], got {}", self.zeta));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad("kappa", format!("must be finite and >= 0, got {}", self.kappa));
        }
        for (name, v) in [("alpha", self.alpha), ("alpha_nlos", self.alpha_nlos)] {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        for (name, v) in [
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_nodes", self.n_nodes),
            ("max_iters", self.max_iters),
            ("chi_ramp_iters", self.chi_ramp_iters),
        ] {
            if v == 0 {
                return bad(name, "must be >= 1");
            }
        }
        Ok(())
    }

    /// Full-strength constraint thresholds.
    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            gamma: self.gamma,
            eta: self.eta,
            e_min: self.e_min,
        }
    }

    pub fn n_total(&self) -> usize {
        self.n_tx + self.n_rx
    }
}

/// Per-node targets for communication SINR, sensing SINR and harvested power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub gamma: f64,
    pub eta: f64,
    pub e_min: f64,
}

impl Thresholds {
    pub fn scaled(&self, chi: f64) -> Self {
        Self {
            gamma: self.gamma * chi,
            eta: self.eta * chi,
            e_min: self.e_min * chi,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("node has zero horizontal offset from the BS; azimuth undefined")]
    DegenerateGeometry,
}

/// Direction cosines of a node as seen from the BS.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeAngles {
    pub sin_theta: f64,
    pub cos_phi: f64,
    /// `sin_theta * cos_phi`, the array phase parameter.
    pub beta: f64,
}

/// Azimuth/elevation terms from BS and node coordinates.
pub fn angles_from_positions(bs: [f64; 3], node: [f64; 3]) -> Result<NodeAngles, GeometryError> {
    let dx = bs[0] - node[0];
    let dy = bs[1] - node[1];
    let dz = bs[2] - node[2];
    let horizontal = (dx * dx + dy * dy).sqrt();
    if horizontal == 0.0 {
        return Err(GeometryError::DegenerateGeometry);
    }
    let dist = (horizontal * horizontal + dz * dz).sqrt();
    let sin_theta = (dy / horizontal).clamp(-1.0, 1.0);
    let cos_phi = (dz / dist).clamp(-1.0, 1.0);
    Ok(NodeAngles {
        sin_theta,
        cos_phi,
        beta: sin_theta * cos_phi,
    })
}

/// BS and node positions with the derived per-node distance and angles.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioGeometry {
    pub bs_position: [f64; 3],
    pub node_positions: Vec<[f64; 3]>,
    pub distances: Vec<f64>,
    pub sin_theta: Vec<f64>,
    pub cos_phi: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ScenarioGeometry {
    pub fn from_positions(bs_position: [f64; 3], node_positions: Vec<[f64; 3]>) -> Result<Self, GeometryError> {
        let mut geo = Self {
            bs_position,
            distances: Vec::with_capacity(node_positions.len()),
            sin_theta: Vec::with_capacity(node_positions.len()),
            cos_phi: Vec::with_capacity(node_positions.len()),
            beta: Vec::with_capacity(node_positions.len()),
            node_positions,
        };
        for node in &geo.node_positions {
            let angles = angles_from_positions(bs_position, *node)?;
            let d: f64 = (0..3).map(|i| (bs_position[i] - node[i]).powi(2)).sum::<f64>().sqrt();
            geo.distances.push(d);
            geo.sin_theta.push(angles.sin_theta);
            geo.cos_phi.push(angles.cos_phi);
            geo.beta.push(angles.beta);
        }
        Ok(geo)
    }

    pub fn n_nodes(&self) -> usize {
        self.node_positions.len()
    }

    /// The first `count` nodes.
    pub fn truncated(&self, count: usize) -> Self {
        let count = count.min(self.n_nodes());
        Self {
            bs_position: self.bs_position,
            node_positions: self.node_positions[..count].to_vec(),
            distances: self.distances[..count].to_vec(),
            sin_theta: self.sin_theta[..count].to_vec(),
            cos_phi: self.cos_phi[..count].to_vec(),
            beta: self.beta[..count].to_vec(),
        }
    }
}

/// Drops `count` ground nodes uniformly in a square centred under the BS.
///
/// Nodes landing exactly below the BS are redrawn.
pub fn place_nodes_uniform(rng: &mut SeededRng, count: usize, half_side: f64, bs_height: f64) -> ScenarioGeometry {
    assert!(count >= 1 && half_side > 0.0);
    let bs = [0.0, 0.0, bs_height];
    let mut nodes = Vec::with_capacity(count);
    while nodes.len() < count {
        let x = rng.uniform(-half_side, half_side);
        let y = rng.uniform(-half_side, half_side);
        if x == 0.0 && y == 0.0 {
            continue;
        }
        nodes.push([x, y, 0.0]);
    }
    ScenarioGeometry::from_positions(bs, nodes).expect("degenerate nodes were redrawn")
}
