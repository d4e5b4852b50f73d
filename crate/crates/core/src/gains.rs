//! Effective link gains for a fixed phase configuration.
//!
//! The cascaded term of a link is `h_rx^H diag(e^{jθ}) h_tx`, so element `m`
//! contributes `conj(h_rx[m]) e^{jθ_m} h_tx[m]`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ChannelRealization, ScenarioConfig};

/// Relaying mode of UE_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hd,
    Fd,
}

/// RIS phase shifts, each wrapped into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseVector(Vec<f64>);

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseVector {
    pub fn new(theta: Vec<f64>) -> Self {
        Self(theta.into_iter().map(wrap_angle).collect())
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `e^{jθ_m}` for every element.
    pub fn unit_modulus(&self) -> Vec<Complex64> {
        self.0.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }
}

/// SNR-like gains normalized by noise power and scaled by the budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGains {
    pub gamma_bn: f64,
    pub gamma_bf: f64,
    pub gamma_d: f64,
    pub gamma_si: f64,
    pub mode: Mode,
}

impl LinkGains {
    pub fn hd(gamma_bn: f64, gamma_bf: f64, gamma_d: f64) -> Self {
        Self {
            gamma_bn,
            gamma_bf,
            gamma_d,
            gamma_si: 0.0,
            mode: Mode::Hd,
        }
    }

    pub fn fd(gamma_bn: f64, gamma_bf: f64, gamma_d: f64, gamma_si: f64) -> Self {
        Self {
            gamma_bn,
            gamma_bf,
            gamma_d,
            gamma_si,
            mode: Mode::Fd,
        }
    }
}

/// Complex amplitude `h_direct + Σ conj(h_rx[m]) e^{jθ_m} h_tx[m]`.
pub fn combined_amplitude(
    h_direct: Complex64,
    h_rx: &[Complex64],
    theta: &PhaseVector,
    h_tx: &[Complex64],
) -> Result<Complex64> {
    let m = theta.len();
    for len in [h_rx.len(), h_tx.len()] {
        if len != m {
            return Err(Error::Shape { expected: m, got: len });
        }
    }
    Ok(h_rx
        .iter()
        .zip(h_tx)
        .zip(theta.as_slice())
        .fold(h_direct, |acc, ((rx, tx), &t)| {
            acc + rx.conj() * Complex64::from_polar(1.0, t) * tx
        }))
}

pub fn combined_gain(
    h_direct: Complex64,
    h_rx: &[Complex64],
    theta: &PhaseVector,
    h_tx: &[Complex64],
) -> Result<f64> {
    combined_amplitude(h_direct, h_rx, theta, h_tx).map(|a| a.norm_sqr())
}

pub fn hd_gains(
    ch: &ChannelRealization,
    theta1: &PhaseVector,
    theta2: &PhaseVector,
    cfg: &ScenarioConfig,
) -> Result<LinkGains> {
    let bn = combined_gain(ch.h_bn, &ch.h_rn, theta1, &ch.h_br)?;
    let bf = combined_gain(ch.h_bf, &ch.h_rf, theta1, &ch.h_br)?;
    let d = combined_gain(ch.h_nf, &ch.h_rf_hat, theta2, &ch.h_nr)?;
    Ok(LinkGains::hd(
        cfg.p_bs * bn / cfg.sigma2_n,
        cfg.p_bs * bf / cfg.sigma2_f,
        cfg.p_n * d / cfg.sigma2_f,
    ))
}

/// FD gains: one phase vector for all links and the relay receives through
/// the same RIS channel it transmits on (`h_nr = h_rn`).
pub fn fd_gains(ch: &ChannelRealization, theta: &PhaseVector, cfg: &ScenarioConfig) -> Result<LinkGains> {
    let bn = combined_gain(ch.h_bn, &ch.h_rn, theta, &ch.h_br)?;
    let bf = combined_gain(ch.h_bf, &ch.h_rf, theta, &ch.h_br)?;
    let d = combined_gain(ch.h_nf, &ch.h_rf, theta, &ch.h_rn)?;
    Ok(LinkGains::fd(
        cfg.p_bs * bn / cfg.sigma2_n,
        cfg.p_bs * bf / cfg.sigma2_f,
        cfg.p_n * d / cfg.sigma2_f,
        cfg.p_n * ch.gamma_si_raw / cfg.sigma2_n,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_realization;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn combined_gain_examples() {
        let one = c(1.0, 0.0);
        assert_eq!(combined_gain(c(0.3, 0.4), &[], &PhaseVector::zeros(0), &[]).unwrap(), 0.25);
        assert!((combined_gain(one, &[one], &PhaseVector::zeros(1), &[one]).unwrap() - 4.0).abs() < 1e-15);
        let th = PhaseVector::new(vec![FRAC_PI_2, FRAC_PI_2]);
        assert!((combined_gain(one, &[one, one], &th, &[one, one]).unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(
            combined_gain(one, &[one], &PhaseVector::zeros(2), &[one, one]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn phase_vector_wraps() {
        let p = PhaseVector::new(vec![-0.5, 7.0, TAU, -1e-300]);
        assert!(p.as_slice().iter().all(|&t| (0.0..TAU).contains(&t)));
        assert!((p.as_slice()[0] - (TAU - 0.5)).abs() < 1e-12);
        assert_eq!(p.as_slice()[2], 0.0);
    }

    #[test]
    fn gains_scale_with_budgets() {
        let cfg = ScenarioConfig::default().with_elements(4);
        let ch = generate_realization(&cfg, 0, 3);
        let th = PhaseVector::new(vec![0.1, 1.0, 2.0, 3.0]);
        let g = hd_gains(&ch, &th, &th, &cfg).unwrap();
        let mut doubled = cfg.clone();
        doubled.p_bs *= 2.0;
        let g2 = hd_gains(&ch, &th, &th, &doubled).unwrap();
        assert!((g2.gamma_bn / g.gamma_bn - 2.0).abs() < 1e-12);
        assert!((g2.gamma_bf / g.gamma_bf - 2.0).abs() < 1e-12);
        assert_eq!(g2.gamma_d, g.gamma_d);
        assert_eq!(g.gamma_si, 0.0);
        assert_eq!(g.mode, Mode::Hd);
    }

    #[test]
    fn gain_ratios() {
        let cfg = ScenarioConfig {
            p_bs: 2.0,
            p_n: 0.2,
            sigma2_n: 1e-12,
            sigma2_f: 1e-12,
            ..ScenarioConfig::default()
        };
        let mut ch = generate_realization(&cfg.clone().with_elements(0), 0, 0);
        ch.h_bn = c(1e-9f64.sqrt(), 0.0);
        ch.gamma_si_raw = 5e-13;
        let g = fd_gains(&ch, &PhaseVector::zeros(0), &cfg).unwrap();
        assert!((g.gamma_bn - 2000.0).abs() < 1e-9);
        assert!((g.gamma_si - 0.1).abs() < 1e-12);

        let zero = ChannelRealization {
            h_bn: c(0.0, 0.0),
            h_bf: c(0.0, 0.0),
            h_nf: c(0.0, 0.0),
            h_br: vec![c(0.0, 0.0); 2],
            h_rn: vec![c(0.0, 0.0); 2],
            h_rf: vec![c(0.0, 0.0); 2],
            h_rf_hat: vec![c(0.0, 0.0); 2],
            h_nr: vec![c(0.0, 0.0); 2],
            gamma_si_raw: 0.0,
        };
        let th = PhaseVector::zeros(2);
        let g = hd_gains(&zero, &th, &th, &cfg).unwrap();
        assert_eq!((g.gamma_bn, g.gamma_bf, g.gamma_d), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fd_without_ris_uses_direct_links() {
        let cfg = ScenarioConfig::default().with_elements(6);
        let ch = generate_realization(&cfg, 11, 5);
        let g = fd_gains(&ch.without_ris(), &PhaseVector::zeros(0), &cfg).unwrap();
        assert_eq!(g.gamma_bn, cfg.p_bs * ch.h_bn.norm_sqr() / cfg.sigma2_n);
        assert_eq!(g.gamma_d, cfg.p_n * ch.h_nf.norm_sqr() / cfg.sigma2_f);
    }

    fn cvec(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), m)
    }

    proptest! {
        #[test]
        fn bounded_by_coherent_sum(
            (hd, rx, tx, th) in (0usize..6).prop_flat_map(|m| (
                (-1.0..1.0f64, -1.0..1.0f64),
                cvec(m),
                cvec(m),
                prop::collection::vec(0.0..TAU, m),
            ))
        ) {
            let hd = c(hd.0, hd.1);
            let g = combined_gain(hd, &rx, &PhaseVector::new(th), &tx).unwrap();
            let bound = (hd.norm() + rx.iter().zip(&tx).map(|(a, b)| a.norm() * b.norm()).sum::<f64>()).powi(2);
            prop_assert!(g <= bound * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn global_rotation_invariance(
            (rx, tx, th) in (1usize..6).prop_flat_map(|m| (cvec(m), cvec(m), prop::collection::vec(0.0..TAU, m))),
            phi in 0.0..TAU,
        ) {
            let th = PhaseVector::new(th);
            let hd = c(0.3, -0.2);
            let rot = Complex64::from_polar(1.0, phi);
            let g = combined_gain(hd, &rx, &th, &tx).unwrap();
            let tx_rot: Vec<_> = tx.iter().map(|x| x * rot).collect();
            let g_rot = combined_gain(hd * rot, &rx, &th, &tx_rot).unwrap();
            prop_assert!((g - g_rot).abs() <= 1e-12 * (1.0 + g));
        }
    }
}
