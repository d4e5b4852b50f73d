//! Semidefinite relaxation of the RIS phase-shift step.
//!
//! For a link `h + Σ conj(h_rx[m]) e^{jθ_m} h_tx[m]` let
//! `g = h_rx ⊙ conj(h_tx)` and `v̄ = [e^{jθ_1}, …, e^{jθ_M}, 1]ᵀ`. Then
//!
//! ```text
//! |h + g^H e^{jθ}|² = v̄^H Q v̄ + |h|²,   Q = [[g g^H, g h], [conj(h) g^H, 0]],
//! ```
//!
//! so every rate constraint becomes linear in `V = v̄ v̄^H`. Dropping
//! `rank V = 1` leaves the SDP solved by [`crate::sdp`], and phases are read
//! back from random vectors drawn with covariance `V`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::gains::{wrap_angle, Mode, PhaseVector};
use crate::linalg::{eig_factor, CMatrix};
use crate::power::{PowerSolution, SinrTargets};
use crate::scenario::{ChannelRealization, ScenarioConfig};
use crate::sdp::{min_of, SdpInstance, SdpSolution, TraceConstraint};

/// Lifted constraints of one phase-optimization step.
#[derive(Debug, Clone)]
pub struct LiftedProblem {
    pub q_bn: CMatrix,
    pub q_bf: CMatrix,
    /// UE_n to UE_f through the RIS; FD only.
    pub q_nf: Option<CMatrix>,
    pub direct_bn: f64,
    pub direct_bf: f64,
    pub direct_nf: f64,
    pub instance: SdpInstance,
    pub mode: Mode,
}

impl LiftedProblem {
    /// Normalized margins of the original constraints at phases `theta`.
    pub fn margins(&self, theta: &PhaseVector) -> Vec<f64> {
        self.instance.rank_one_margins(&lifting_vector(theta))
    }

    pub fn min_margin(&self, theta: &PhaseVector) -> f64 {
        min_of(&self.margins(theta))
    }

    pub fn elements(&self) -> usize {
        self.instance.n() - 1
    }
}

/// `[e^{jθ_1}, …, e^{jθ_M}, 1]`.
pub fn lifting_vector(theta: &PhaseVector) -> Vec<Complex64> {
    let mut v = theta.unit_modulus();
    v.push(Complex64::new(1.0, 0.0));
    v
}

/// Bordered matrix `Q` of the link `h_direct + h_rx^H diag(e^{jθ}) h_tx`.
pub fn cascade_matrix(h_direct: Complex64, h_rx: &[Complex64], h_tx: &[Complex64]) -> CMatrix {
    let m = h_rx.len();
    let g: Vec<Complex64> = h_rx.iter().zip(h_tx).map(|(r, t)| r * t.conj()).collect();
    DMatrix::from_fn(m + 1, m + 1, |i, j| match (i < m, j < m) {
        (true, true) => g[i] * g[j].conj(),
        (true, false) => g[i] * h_direct,
        (false, true) => h_direct.conj() * g[j].conj(),
        (false, false) => Complex64::new(0.0, 0.0),
    })
}

/// Phases that add every cascaded term in phase with `h_direct`, maximizing
/// `combined_gain(h_direct, h_rx, θ, h_tx)`.
pub fn align_phases(h_direct: Complex64, h_rx: &[Complex64], h_tx: &[Complex64]) -> PhaseVector {
    let target = h_direct.arg();
    PhaseVector::new(
        h_rx.iter()
            .zip(h_tx)
            .map(|(r, t)| {
                let a = r.conj() * t;
                if a.norm() == 0.0 {
                    0.0
                } else {
                    target - a.arg()
                }
            })
            .collect(),
    )
}

/// Phases for the cooperative slot: UE_n's relayed copy through the RIS adds
/// coherently to the direct UE_n to UE_f link.
pub fn ct_phase_alignment(h_nf: Complex64, h_nr: &[Complex64], h_rf_hat: &[Complex64]) -> PhaseVector {
    align_phases(h_nf, h_rf_hat, h_nr)
}

fn normalized(a: CMatrix, b: f64) -> TraceConstraint {
    let s = 1.0 / (b.abs() + 1.0);
    TraceConstraint {
        a: a * Complex64::new(s, 0.0),
        b: b * s,
    }
}

fn scaled(q: &CMatrix, k: f64) -> CMatrix {
    q * Complex64::new(k, 0.0)
}

struct Links {
    q_bn: CMatrix,
    q_bf: CMatrix,
    d_bn: f64,
    d_bf: f64,
}

fn bs_links(ch: &ChannelRealization) -> Links {
    Links {
        q_bn: cascade_matrix(ch.h_bn, &ch.h_rn, &ch.h_br),
        q_bf: cascade_matrix(ch.h_bf, &ch.h_rf, &ch.h_br),
        d_bn: ch.h_bn.norm_sqr(),
        d_bf: ch.h_bf.norm_sqr(),
    }
}

/// HD constraints on the first-slot phases. `sinr2` is the relayed SINR at
/// UE_f, fixed by the cooperative-slot phases.
pub fn build_hd_lifting(
    ch: &ChannelRealization,
    p: &PowerSolution,
    t: &SinrTargets,
    sinr2: f64,
    cfg: &ScenarioConfig,
) -> LiftedProblem {
    let l = bs_links(ch);
    let (an, af) = (p.alpha_n, p.alpha_f);
    let kn = cfg.p_bs / cfg.sigma2_n;
    let kf = cfg.p_bs / cfg.sigma2_f;

    let k1 = an * kn;
    let c = (t.t_f - sinr2).max(0.0);
    let k2 = (af - c * an) * kf;
    let k3 = (af - t.t_f * an) * kn;
    let constraints = vec![
        normalized(scaled(&l.q_bn, k1), t.t_n - k1 * l.d_bn),
        normalized(scaled(&l.q_bf, k2), c - k2 * l.d_bf),
        normalized(scaled(&l.q_bn, k3), t.t_f - k3 * l.d_bn),
    ];
    let instance = SdpInstance::new(ch.elements() + 1, constraints).expect("bordered matrices are Hermitian");
    LiftedProblem {
        q_bn: l.q_bn,
        q_bf: l.q_bf,
        q_nf: None,
        direct_bn: l.d_bn,
        direct_bf: l.d_bf,
        direct_nf: ch.h_nf.norm_sqr(),
        instance,
        mode: Mode::Hd,
    }
}

/// FD constraints on the single phase vector. The relay receives through
/// the same RIS channel it transmits on.
pub fn build_fd_lifting(ch: &ChannelRealization, p: &PowerSolution, t: &SinrTargets, cfg: &ScenarioConfig) -> LiftedProblem {
    let l = bs_links(ch);
    let q_nf = cascade_matrix(ch.h_nf, &ch.h_rf, &ch.h_rn);
    let d_nf = ch.h_nf.norm_sqr();
    let (an, af, beta) = (p.alpha_n, p.alpha_f, p.beta);
    let kn = cfg.p_bs / cfg.sigma2_n;
    let kf = cfg.p_bs / cfg.sigma2_f;
    // Self-interference plus noise at UE_n, in units of σ_n².
    let si = beta * cfg.p_n * ch.gamma_si_raw / cfg.sigma2_n + 1.0;

    let k1 = an * kn;
    let k2f = (af - t.t_f * an) * kf;
    let k2d = beta * cfg.p_n / cfg.sigma2_f;
    let k3 = (af - t.t_f * an) * kn;
    let constraints = vec![
        normalized(scaled(&l.q_bn, k1), t.t_n * si - k1 * l.d_bn),
        normalized(
            scaled(&l.q_bf, k2f) + scaled(&q_nf, k2d),
            t.t_f - k2f * l.d_bf - k2d * d_nf,
        ),
        normalized(scaled(&l.q_bn, k3), t.t_f * si - k3 * l.d_bn),
    ];
    let instance = SdpInstance::new(ch.elements() + 1, constraints).expect("bordered matrices are Hermitian");
    LiftedProblem {
        q_bn: l.q_bn,
        q_bf: l.q_bf,
        q_nf: Some(q_nf),
        direct_bn: l.d_bn,
        direct_bf: l.d_bf,
        direct_nf: d_nf,
        instance,
        mode: Mode::Fd,
    }
}

/// Outcome of Gaussian randomization.
#[derive(Debug, Clone)]
pub struct Randomized {
    /// Best of the incumbent and every sample.
    pub theta: PhaseVector,
    pub min_margin: f64,
    /// Best sample alone, if any sample was usable.
    pub best_sample: Option<(PhaseVector, f64)>,
}

/// Phases `θ_m = arg(v̄_m / v̄_{M+1})` of `v̄ = U Σ^{1/2} r`,
/// `r ~ CN(0, I)`, keeping the incumbent unless a sample beats it.
pub fn randomize<R: Rng + ?Sized>(
    sol: &SdpSolution,
    lifted: &LiftedProblem,
    num_samples: usize,
    rng: &mut R,
    incumbent: &PhaseVector,
) -> Randomized {
    let mut best = (incumbent.clone(), lifted.min_margin(incumbent));
    let m = lifted.elements();
    if m == 0 {
        return Randomized {
            theta: best.0,
            min_margin: best.1,
            best_sample: None,
        };
    }
    let n = m + 1;
    let factor = eig_factor(&sol.v).expect("solver returns a PSD matrix");
    let b = DMatrix::from_fn(n, n, |i, j| factor.u[(i, j)] * factor.lambda[j].sqrt());
    let mut best_sample: Option<(PhaseVector, f64)> = None;
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..num_samples {
        for z in r.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = (0..n).map(|j| b[(i, j)] * r[j]).sum();
        }
        let anchor = v[m];
        if anchor.norm() == 0.0 {
            continue;
        }
        let theta = PhaseVector::new(v[..m].iter().map(|x| wrap_angle((x / anchor).arg())).collect());
        let margin = lifted.min_margin(&theta);
        if best_sample.as_ref().is_none_or(|(_, s)| margin > *s) {
            best_sample = Some((theta, margin));
        }
    }
    if let Some((theta, margin)) = &best_sample {
        if *margin > best.1 {
            best = (theta.clone(), *margin);
        }
    }
    Randomized {
        theta: best.0,
        min_margin: best.1,
        best_sample,
    }
}

/// [`randomize`] reduced to the selected phases.
pub fn gaussian_randomization<R: Rng + ?Sized>(
    sol: &SdpSolution,
    lifted: &LiftedProblem,
    num_samples: usize,
    rng: &mut R,
    incumbent: &PhaseVector,
) -> PhaseVector {
    randomize(sol, lifted, num_samples, rng, incumbent).theta
}
