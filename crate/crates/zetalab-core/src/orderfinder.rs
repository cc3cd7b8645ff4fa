//! Order of vanishing and leading coefficient at a point, measured by the
//! argument principle on a circular contour.
//!
//! The winding number is accepted only when every consecutive phase step is
//! below pi/2 after adaptive sample doubling, and the total phase closes on
//! an integer multiple of 2 pi; otherwise the measurement is rejected rather
//! than rounded. A silently wrong integer is the one failure mode this
//! module must never have.

use crate::hp::{tol_quarter, Cplx};
use rayon::prelude::*;
use rug::Float;
use std::f64::consts::PI;
use thiserror::Error;

/// Hard cap on adaptive sample doubling.
pub const SAMPLE_CAP: usize = 1 << 16;

#[derive(Error, Debug)]
pub enum OrderError {
    /// |f| dips below tolerance somewhere on the contour.
    #[error("ZeroOnContour: min modulus {min_modulus} below tolerance on the contour")]
    ZeroOnContour { min_modulus: f64 },
    /// Phase steps stayed too coarse at the sample cap, or the total phase
    /// did not close on an integer winding.
    #[error("UnwrapFailure: no reliable unwrapping with {samples} samples")]
    UnwrapFailure { samples: usize },
    /// Circle averages diverge or are pure oscillation: the assumed order m
    /// is wrong.
    #[error("InconsistentOrder: circle averages inconsistent with order {order}")]
    InconsistentOrder { order: i64 },
}

/// Outcome of a winding measurement on one contour.
#[derive(Clone, Debug)]
pub struct ContourOrderReport {
    pub center: Cplx,
    pub radius: f64,
    pub samples: usize,
    /// Zeros minus poles inside, with multiplicity.
    pub winding: i64,
    pub min_modulus_on_contour: f64,
    pub leading_coefficient: Option<Cplx>,
    /// Spread of the leading-coefficient fit across radii (0 when absent).
    pub residual: f64,
}

impl std::fmt::Display for ContourOrderReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (cre, cim) = self.center.to_f64();
        write!(
            f,
            "contour center ({cre}, {cim}) radius {} samples {}: winding {} (min |f| on contour {:.3e})",
            self.radius, self.samples, self.winding, self.min_modulus_on_contour
        )?;
        if let Some(c) = &self.leading_coefficient {
            let (re, im) = c.to_f64();
            write!(
                f,
                "; leading coefficient ({re:.10e}, {im:.10e}) residual {:.3e}",
                self.residual
            )?;
        }
        Ok(())
    }
}

fn circle_values<F>(f: &F, center: &Cplx, radius: f64, n: usize) -> Vec<Cplx>
where
    F: Fn(&Cplx) -> Cplx + Sync,
{
    let prec = center.prec();
    // evaluated in parallel, consumed strictly in index order
    (0..n)
        .into_par_iter()
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let p = Cplx::with_val(prec, radius * theta.cos(), radius * theta.sin());
            f(&center.add(&p))
        })
        .collect()
}

/// Argument-principle winding number of f on the circle |s - center| = radius.
pub fn winding_order<F>(
    f: &F,
    center: &Cplx,
    radius: f64,
    samples: usize,
) -> Result<ContourOrderReport, OrderError>
where
    F: Fn(&Cplx) -> Cplx + Sync,
{
    assert!(radius > 0.0);
    let prec = center.prec();
    let mut n = samples.max(64);
    loop {
        let vals = circle_values(f, center, radius, n);
        let mut min_mod = f64::INFINITY;
        let mut max_mod: f64 = 0.0;
        let mut phases = Vec::with_capacity(n);
        let mut finite = true;
        for v in &vals {
            if !v.is_finite() {
                finite = false;
                break;
            }
            let m = v.abs().to_f64();
            min_mod = min_mod.min(m);
            max_mod = max_mod.max(m);
            phases.push(v.arg().to_f64());
        }
        if !finite {
            return Err(OrderError::UnwrapFailure { samples: n });
        }
        if min_mod < tol_quarter(prec).to_f64() * max_mod {
            return Err(OrderError::ZeroOnContour {
                min_modulus: min_mod,
            });
        }
        let mut total = 0.0;
        let mut coarse = false;
        for k in 0..n {
            let mut step = phases[(k + 1) % n] - phases[k];
            while step > PI {
                step -= 2.0 * PI;
            }
            while step <= -PI {
                step += 2.0 * PI;
            }
            if step.abs() >= PI / 2.0 {
                coarse = true;
                break;
            }
            total += step;
        }
        if coarse {
            if n >= SAMPLE_CAP {
                return Err(OrderError::UnwrapFailure { samples: n });
            }
            n *= 2;
            continue;
        }
        let w = total / (2.0 * PI);
        let rounded = w.round();
        if (w - rounded).abs() > 0.25 {
            return Err(OrderError::UnwrapFailure { samples: n });
        }
        return Ok(ContourOrderReport {
            center: center.clone(),
            radius,
            samples: n,
            winding: rounded as i64,
            min_modulus_on_contour: min_mod,
            leading_coefficient: None,
            residual: 0.0,
        });
    }
}

const COEFF_SAMPLES: usize = 128;

/// Leading coefficient c in f(s) ~ c (s - center)^m, from circle averages of
/// f(s)/(s-center)^m over a decreasing list of radii, with one Richardson
/// extrapolation step in the radius.
pub fn leading_coefficient<F>(
    f: &F,
    m: i64,
    center: &Cplx,
    radii: &[f64],
) -> Result<(Cplx, f64), OrderError>
where
    F: Fn(&Cplx) -> Cplx + Sync,
{
    assert!(radii.len() >= 3, "need at least 3 radii");
    assert!(
        radii.windows(2).all(|w| w[0] > w[1]) && radii[radii.len() - 1] > 0.0,
        "radii must be positive and decreasing"
    );
    let prec = center.prec();
    let mut averages: Vec<Cplx> = Vec::new();
    for &r in radii {
        let vals = circle_values(f, center, r, COEFF_SAMPLES);
        let mut mean = Cplx::zero(prec);
        let mut rms = Float::new(prec);
        for (k, v) in vals.iter().enumerate() {
            let theta = 2.0 * PI * k as f64 / COEFF_SAMPLES as f64;
            // divide by (s-center)^m = r^m e^{i m theta}
            let phase = m as f64 * theta;
            let denom_inv = Cplx::with_val(
                prec,
                (-phase).cos() / r.powi(m as i32),
                (-phase).sin() / r.powi(m as i32),
            );
            let term = v.mul(&denom_inv);
            rms += term.norm_sqr();
            mean = mean.add(&term);
        }
        let nf = Float::with_val(prec, COEFF_SAMPLES);
        mean = Cplx {
            re: mean.re / &nf,
            im: mean.im / &nf,
        };
        let rms = (rms / &nf).sqrt();
        // wrong m leaves pure oscillation: tiny mean against a large rms
        if mean.abs() < rms * 0.25f64 {
            return Err(OrderError::InconsistentOrder { order: m });
        }
        averages.push(mean);
    }
    // divergence as the radius shrinks also signals a wrong order
    for w in averages.windows(2) {
        let (a, b) = (w[0].abs().to_f64(), w[1].abs().to_f64());
        if b > 4.0 * a {
            return Err(OrderError::InconsistentOrder { order: m });
        }
    }
    // Richardson step on the two smallest radii, assuming an error linear in r
    let k = averages.len();
    let (rb, rs) = (radii[k - 2], radii[k - 1]);
    let (ab, asm) = (&averages[k - 2], &averages[k - 1]);
    let scale = Float::with_val(prec, 1.0 / (rb - rs));
    let extrap = asm
        .mul_real(&Float::with_val(prec, rb))
        .sub(&ab.mul_real(&Float::with_val(prec, rs)))
        .mul_real(&scale);
    let residual = averages
        .iter()
        .map(|a| a.sub(&extrap).abs().to_f64())
        .fold(0.0, f64::max);
    Ok((extrap, residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 128;

    fn c0() -> Cplx {
        Cplx::zero(PREC)
    }

    #[test]
    fn simple_zero() {
        let f = |s: &Cplx| s.clone();
        let r = winding_order(&f, &c0(), 0.5, 64).unwrap();
        assert_eq!(r.winding, 1);
    }

    #[test]
    fn synthetic_fried_double_zero() {
        // f(s) = (2 pi s)^2 (1 + s/3)
        let f = |s: &Cplx| {
            let two_pi = Float::with_val(PREC, 2.0 * PI);
            let z = s.mul_real(&two_pi).powi(2);
            let one_plus = Cplx::one(PREC).add(&s.mul_real(&Float::with_val(PREC, 1.0 / 3.0)));
            z.mul(&one_plus)
        };
        let r = winding_order(&f, &c0(), 0.1, 64).unwrap();
        assert_eq!(r.winding, 2);
    }

    #[test]
    fn simple_pole() {
        let f = |s: &Cplx| s.recip();
        let r = winding_order(&f, &c0(), 0.5, 64).unwrap();
        assert_eq!(r.winding, -1);
    }

    #[test]
    fn two_nearby_zeros() {
        let f = |s: &Cplx| {
            let a = s.sub(&Cplx::with_val(PREC, 0.01, 0.0));
            let b = s.add(&Cplx::with_val(PREC, 0.01, 0.0));
            a.mul(&b)
        };
        let r = winding_order(&f, &c0(), 0.5, 64).unwrap();
        assert_eq!(r.winding, 2);
    }

    #[test]
    fn zero_on_contour_rejected() {
        let f = |s: &Cplx| s.sub(&Cplx::with_val(PREC, 0.5, 0.0));
        match winding_order(&f, &c0(), 0.5, 64) {
            Err(OrderError::ZeroOnContour { .. }) => {}
            other => panic!("expected ZeroOnContour, got {other:?}"),
        }
    }

    #[test]
    fn scale_invariance_and_additivity() {
        let f = |s: &Cplx| s.clone();
        let scaled = |s: &Cplx| s.mul_real(&Float::with_val(PREC, -7.3));
        let product = |s: &Cplx| s.mul(s).mul(&s.recip());
        let base = winding_order(&f, &c0(), 0.4, 64).unwrap().winding;
        assert_eq!(winding_order(&scaled, &c0(), 0.4, 64).unwrap().winding, base);
        // winding(s^2 * 1/s) = 2 - 1
        assert_eq!(winding_order(&product, &c0(), 0.4, 64).unwrap().winding, 1);
    }

    #[test]
    fn sample_doubling_is_stable() {
        let f = |s: &Cplx| s.powi(3);
        let a = winding_order(&f, &c0(), 0.3, 64).unwrap();
        let b = winding_order(&f, &c0(), 0.3, 1024).unwrap();
        assert_eq!(a.winding, 3);
        assert_eq!(b.winding, 3);
    }

    #[test]
    fn leading_coefficient_pure_power() {
        let f = |s: &Cplx| s.mul_real(&Float::with_val(PREC, 2.0 * PI)).powi(2);
        let (c, res) = leading_coefficient(&f, 2, &c0(), &[0.1, 0.05, 0.025]).unwrap();
        let four_pi_sq = 4.0 * PI * PI;
        assert!((c.re.to_f64() - four_pi_sq).abs() < 1e-8);
        assert!(c.im.to_f64().abs() < 1e-8);
        assert!(res < 1e-8);
    }

    #[test]
    fn leading_coefficient_with_correction() {
        let f = |s: &Cplx| {
            let z = s.mul_real(&Float::with_val(PREC, 2.0 * PI)).powi(2);
            z.mul(&Cplx::one(PREC).add(&s.mul_real(&Float::with_val(PREC, 1.0 / 3.0))))
        };
        let (c, _) = leading_coefficient(&f, 2, &c0(), &[0.1, 0.05, 0.025]).unwrap();
        assert!((c.re.to_f64() - 4.0 * PI * PI).abs() < 1e-6);
    }

    #[test]
    fn leading_coefficient_scales() {
        let f = |s: &Cplx| s.powi(2);
        let g = |s: &Cplx| s.powi(2).mul_real(&Float::with_val(PREC, 5.0));
        let (cf, _) = leading_coefficient(&f, 2, &c0(), &[0.1, 0.05, 0.025]).unwrap();
        let (cg, _) = leading_coefficient(&g, 2, &c0(), &[0.1, 0.05, 0.025]).unwrap();
        assert!((cg.re.to_f64() / cf.re.to_f64() - 5.0).abs() < 1e-8);
    }

    #[test]
    fn wrong_order_detected() {
        let f = |s: &Cplx| s.powi(2);
        for m in [1, 3] {
            match leading_coefficient(&f, m, &c0(), &[0.1, 0.05, 0.025]) {
                Err(OrderError::InconsistentOrder { .. }) => {}
                other => panic!("expected InconsistentOrder for m={m}, got {other:?}"),
            }
        }
    }
}
