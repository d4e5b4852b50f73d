//! Cell geometry, large-scale path loss and reproducible small-scale fading.
//!
//! Every link is drawn from its own ChaCha stream keyed by
//! `(master_seed, trial_index, link)`, so a realization does not depend on
//! trial order, and the direct links of a trial are the same whatever the
//! number of RIS elements.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub type Position = [f64; 3];

/// Converts a dB value to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

/// Radio links of the cell. `Br` is BS to RIS, `Rn` RIS to UE_n, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Bn,
    Bf,
    Nf,
    Br,
    Rf,
    Rn,
    Nr,
}

impl Link {
    pub const ALL: [Link; 7] = [
        Link::Bn,
        Link::Bf,
        Link::Nf,
        Link::Br,
        Link::Rf,
        Link::Rn,
        Link::Nr,
    ];
}

/// Path-loss exponent of each link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossExponents {
    pub bn: f64,
    pub bf: f64,
    pub nf: f64,
    pub br: f64,
    pub rf: f64,
    pub rn: f64,
    pub nr: f64,
}

impl PathLossExponents {
    pub fn get(&self, link: Link) -> f64 {
        match link {
            Link::Bn => self.bn,
            Link::Bf => self.bf,
            Link::Nf => self.nf,
            Link::Br => self.br,
            Link::Rf => self.rf,
            Link::Rn => self.rn,
            Link::Nr => self.nr,
        }
    }
}

impl Default for PathLossExponents {
    fn default() -> Self {
        Self {
            bn: 3.5,
            bf: 4.0,
            nf: 4.0,
            br: 2.2,
            rf: 2.2,
            rn: 3.0,
            nr: 3.0,
        }
    }
}

/// Deterministic component of the Rician links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LosMode {
    #[default]
    AllOnes,
    /// Uniform linear array response `e^{jπ m sin(angle)}`.
    Steering { angle_rad: f64 },
}

/// Geometry, budgets and channel statistics. All quantities are linear
/// (watts, ratios, meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub bs: Position,
    pub ris: Position,
    pub ue_n: Position,
    pub ue_f: Position,
    /// Number of RIS elements M.
    pub elements: usize,
    pub p_bs: f64,
    pub p_n: f64,
    pub sigma2_n: f64,
    pub sigma2_f: f64,
    pub rho0: f64,
    pub d0: f64,
    pub eta: PathLossExponents,
    pub kappa_br: f64,
    pub kappa_rf: f64,
    pub omega_si: f64,
    pub rate_n: f64,
    pub rate_f: f64,
    pub los: LosMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bs: [0.0, 10.0, 0.0],
            ris: [80.0, 10.0, 0.0],
            ue_n: [40.0, 0.0, 0.0],
            ue_f: [80.0, 0.0, 0.0],
            elements: 32,
            p_bs: dbm_to_watts(33.0),
            p_n: dbm_to_watts(23.0),
            sigma2_n: dbm_to_watts(-90.0),
            sigma2_f: dbm_to_watts(-90.0),
            rho0: db_to_linear(-30.0),
            d0: 1.0,
            eta: PathLossExponents::default(),
            kappa_br: db_to_linear(3.0),
            kappa_rf: db_to_linear(3.0),
            omega_si: db_to_linear(-100.0),
            rate_n: 1.0,
            rate_f: 2.0,
            los: LosMode::AllOnes,
        }
    }
}

fn distance(a: &Position, b: &Position) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl ScenarioConfig {
    pub fn with_elements(mut self, m: usize) -> Self {
        self.elements = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_bs", self.p_bs),
            ("p_n", self.p_n),
            ("sigma2_n", self.sigma2_n),
            ("sigma2_f", self.sigma2_f),
            ("rho0", self.rho0),
            ("d0", self.d0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("kappa_br", self.kappa_br),
            ("kappa_rf", self.kappa_rf),
            ("omega_si", self.omega_si),
            ("rate_n", self.rate_n),
            ("rate_f", self.rate_f),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        for link in Link::ALL {
            let e = self.eta.get(link);
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("eta.{link:?} must be >= 0, got {e}")));
            }
        }
        let nodes = [self.bs, self.ris, self.ue_n, self.ue_f];
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if !(distance(&nodes[i], &nodes[j]) > 0.0) {
                    return Err(Error::Config("node positions must be distinct".into()));
                }
            }
        }
        Ok(())
    }

    pub fn link_distance(&self, link: Link) -> f64 {
        let (a, b) = match link {
            Link::Bn => (&self.bs, &self.ue_n),
            Link::Bf => (&self.bs, &self.ue_f),
            Link::Nf => (&self.ue_n, &self.ue_f),
            Link::Br => (&self.bs, &self.ris),
            Link::Rf => (&self.ris, &self.ue_f),
            Link::Rn | Link::Nr => (&self.ris, &self.ue_n),
        };
        distance(a, b)
    }

    pub fn link_path_loss(&self, link: Link) -> f64 {
        path_loss(self.link_distance(link), self.eta.get(link), self.rho0, self.d0)
            .expect("validated geometry")
    }
}

/// One draw of every channel in the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub h_bn: Complex64,
    pub h_bf: Complex64,
    pub h_nf: Complex64,
    pub h_br: Vec<Complex64>,
    pub h_rn: Vec<Complex64>,
    pub h_rf: Vec<Complex64>,
    /// RIS to UE_f during the second (cooperative) slot of HD relaying.
    pub h_rf_hat: Vec<Complex64>,
    pub h_nr: Vec<Complex64>,
    /// |h_SI|^2 before scaling by the relay power.
    pub gamma_si_raw: f64,
}

impl ChannelRealization {
    pub fn elements(&self) -> usize {
        self.h_br.len()
    }

    /// Same direct links with the RIS removed.
    pub fn without_ris(&self) -> Self {
        Self {
            h_br: Vec::new(),
            h_rn: Vec::new(),
            h_rf: Vec::new(),
            h_rf_hat: Vec::new(),
            h_nr: Vec::new(),
            ..self.clone()
        }
    }

    pub fn check_shapes(&self) -> Result<()> {
        let m = self.h_br.len();
        for v in [&self.h_rn, &self.h_rf, &self.h_rf_hat, &self.h_nr] {
            if v.len() != m {
                return Err(Error::Shape {
                    expected: m,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// `rho0 * (d / d0)^(-eta)`.
pub fn path_loss(d: f64, eta: f64, rho0: f64, d0: f64) -> Result<f64> {
    if !(d > 0.0) || !(d0 > 0.0) || !(rho0 > 0.0) {
        return domain(format!("path_loss needs d, d0, rho0 > 0 (got {d}, {d0}, {rho0})"));
    }
    Ok(rho0 * (d / d0).powf(-eta))
}

fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. CN(0, pl) entries.
pub fn sample_rayleigh<R: Rng + ?Sized>(dim: usize, pl: f64, rng: &mut R) -> Vec<Complex64> {
    let s = pl.max(0.0).sqrt();
    (0..dim).map(|_| standard_complex(rng) * s).collect()
}

pub fn sample_rician<R: Rng + ?Sized>(
    dim: usize,
    pl: f64,
    kappa: f64,
    los: &[Complex64],
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if los.len() != dim {
        return Err(Error::Shape {
            expected: dim,
            got: los.len(),
        });
    }
    if !(kappa >= 0.0) {
        return domain(format!("kappa must be >= 0, got {kappa}"));
    }
    let s = pl.max(0.0).sqrt();
    let w_nlos = (1.0 / (1.0 + kappa)).sqrt();
    let w_los = (kappa / (1.0 + kappa)).sqrt();
    Ok(los
        .iter()
        .map(|&l| (standard_complex(rng) * w_nlos + l * w_los) * s)
        .collect())
}

pub fn los_vector(mode: LosMode, dim: usize) -> Vec<Complex64> {
    match mode {
        LosMode::AllOnes => vec![Complex64::new(1.0, 0.0); dim],
        LosMode::Steering { angle_rad } => (0..dim)
            .map(|m| Complex64::from_polar(1.0, std::f64::consts::PI * m as f64 * angle_rad.sin()))
            .collect(),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(master_seed, trial_index, stream)`.
pub fn stream_rng(master_seed: u64, trial_index: u64, stream: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(master_seed) ^ trial_index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}

// Stream ids. Kept stable so stored seeds stay reproducible.
const S_BN: u64 = 1;
const S_BF: u64 = 2;
const S_NF: u64 = 3;
const S_BR: u64 = 4;
const S_RN: u64 = 5;
const S_RF: u64 = 6;
const S_RF_HAT: u64 = 7;
const S_NR: u64 = 8;
const S_SI: u64 = 9;
/// First stream id free for callers (randomization, init phases).
pub const FIRST_USER_STREAM: u64 = 64;

pub fn generate_realization(
    cfg: &ScenarioConfig,
    trial_index: u64,
    master_seed: u64,
) -> ChannelRealization {
    let m = cfg.elements;
    let rng = |s| stream_rng(master_seed, trial_index, s);
    let scalar = |link, s| sample_rayleigh(1, cfg.link_path_loss(link), &mut rng(s))[0];
    let los = los_vector(cfg.los, m);
    let rician = |link, kappa, s| {
        sample_rician(m, cfg.link_path_loss(link), kappa, &los, &mut rng(s)).expect("los has length M")
    };
    let h_si = sample_rayleigh(1, cfg.omega_si, &mut rng(S_SI))[0];
    ChannelRealization {
        h_bn: scalar(Link::Bn, S_BN),
        h_bf: scalar(Link::Bf, S_BF),
        h_nf: scalar(Link::Nf, S_NF),
        h_br: rician(Link::Br, cfg.kappa_br, S_BR),
        h_rn: sample_rayleigh(m, cfg.link_path_loss(Link::Rn), &mut rng(S_RN)),
        h_rf: rician(Link::Rf, cfg.kappa_rf, S_RF),
        h_rf_hat: rician(Link::Rf, cfg.kappa_rf, S_RF_HAT),
        h_nr: sample_rayleigh(m, cfg.link_path_loss(Link::Nr), &mut rng(S_NR)),
        gamma_si_raw: h_si.norm_sqr(),
    }
}
