//! Ruelle and Selberg zeta functions as truncated Euler products over a
//! length spectrum, with heuristic truncation-error reports and the
//! telescoping Selberg-relation check zeta_R(s) = zeta_S(s)/zeta_S(s+1).
//!
//! Everything here works in the log domain: each factor contributes a
//! principal-branch logarithm, summed in the fixed sorted order of the
//! spectrum. Values are exp of the accumulated log, so products of thousands
//! of near-unit factors neither underflow nor lose the branch bookkeeping.

use crate::hp::Cplx;
use crate::spectrum::LengthSpectrum;
use rug::Float;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZetaKind {
    Ruelle,
    /// Selberg product truncated at m = M.
    Selberg(u32),
    /// Fredholm determinant truncated at order N.
    SchottkyDeterminant(u32),
}

impl std::fmt::Display for ZetaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZetaKind::Ruelle => write!(f, "ruelle"),
            ZetaKind::Selberg(m) => write!(f, "selberg({m})"),
            ZetaKind::SchottkyDeterminant(n) => write!(f, "schottky-determinant({n})"),
        }
    }
}

/// A zeta value at one point with its truncation-error report.
#[derive(Clone, Debug)]
pub struct ZetaEvaluation {
    pub s: Cplx,
    pub value: Cplx,
    pub log_value: Cplx,
    /// Heuristic bound on |log error|; infinite outside the convergence
    /// half-plane Re s > 1.
    pub truncation_bound: Float,
    pub kind: ZetaKind,
    /// Digest of the spectrum or Schottky group the value came from.
    pub source: String,
    /// Factors skipped because they were numerically 1 or exactly 0 at the
    /// working precision.
    pub skipped_factors: u32,
}

/// Least-squares fit of the observed counting function to c * e^L / L,
/// used to calibrate the truncation bound. Heuristic by design: the sharp
/// prime-geodesic constant is out of scope.
pub fn calibrate_rho(spec: &LengthSpectrum) -> f64 {
    let lo = match spec.systole() {
        Some(s) => s.to_f64(),
        None => return 1.0,
    };
    let hi = spec.cutoff;
    let mut num = 0.0;
    let mut den = 0.0;
    let steps = 24;
    for i in 0..=steps {
        let l = lo + (hi - lo) * i as f64 / steps as f64;
        let n: u64 = spec
            .entries
            .iter()
            .filter(|e| e.length.to_f64() <= l)
            .map(|e| e.multiplicity as u64)
            .sum();
        let f = l.exp() / l;
        num += n as f64 * f;
        den += f * f;
    }
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

fn spectrum_tail_bound(spec: &LengthSpectrum, s: &Cplx) -> Float {
    let prec = s.prec();
    let sigma = s.re.to_f64();
    if sigma > 1.0 {
        let rho = calibrate_rho(spec);
        Float::with_val(
            prec,
            rho * (-(sigma - 1.0) * spec.cutoff).exp() / (sigma - 1.0),
        )
    } else {
        Float::with_val(prec, rug::float::Special::Infinity)
    }
}

/// log(1 - e^{-z l}) on the principal branch, or None when the factor is
/// numerically 1 (|e^{-zl}| below working precision) or exactly 0.
fn log_factor(z: &Cplx, ell: &Float) -> Option<Cplx> {
    let prec = z.prec();
    let e = z.mul_real(ell).neg().exp();
    // |e^{-zl}| too small to move the factor off 1 at this precision
    if e.abs() < Float::with_val(prec, Float::i_exp(1, -(prec as i32))) {
        return None;
    }
    let f = Cplx::one(prec).sub(&e);
    if f.abs().is_zero() {
        return None;
    }
    Some(f.ln())
}

fn finish(
    spec: &LengthSpectrum,
    s: &Cplx,
    log_value: Cplx,
    skipped: u32,
    kind: ZetaKind,
    bound: Float,
) -> ZetaEvaluation {
    ZetaEvaluation {
        s: s.clone(),
        value: log_value.exp(),
        log_value,
        truncation_bound: bound,
        kind,
        source: spec.group_id.clone(),
        skipped_factors: skipped,
    }
}

/// Truncated Ruelle Euler product prod (1 - e^{-s l}) over the spectrum.
pub fn ruelle_product(spec: &LengthSpectrum, s: &Cplx) -> ZetaEvaluation {
    let prec = s.prec();
    let mut log_value = Cplx::zero(prec);
    let mut skipped = 0;
    for e in &spec.entries {
        match log_factor(s, &e.length) {
            Some(lf) => {
                log_value = log_value.add(&lf.mul_real(&Float::with_val(prec, e.multiplicity)))
            }
            None => skipped += e.multiplicity,
        }
    }
    let bound = spectrum_tail_bound(spec, s);
    finish(spec, s, log_value, skipped, ZetaKind::Ruelle, bound)
}

/// Truncated Selberg product prod_l prod_{m=0..M} (1 - e^{-(m+s) l}).
pub fn selberg_product(spec: &LengthSpectrum, s: &Cplx, m_max: u32) -> ZetaEvaluation {
    let prec = s.prec();
    let mut log_value = Cplx::zero(prec);
    let mut skipped = 0;
    for m in 0..=m_max {
        let sm = s.add(&Cplx::with_val(prec, m as f64, 0.0));
        for e in &spec.entries {
            match log_factor(&sm, &e.length) {
                Some(lf) => {
                    log_value = log_value.add(&lf.mul_real(&Float::with_val(prec, e.multiplicity)))
                }
                None => skipped += e.multiplicity,
            }
        }
    }
    // spectrum tail of the m=0 layer plus the m-tail from level M+1 on
    let mut bound = spectrum_tail_bound(spec, s);
    if let Some(sys) = spec.systole() {
        let count = spec.total_multiplicity() as f64;
        let sigma = s.re.to_f64();
        let mtail = count * (-(m_max as f64 + 1.0 + sigma) * sys.to_f64()).exp();
        bound += Float::with_val(prec, mtail);
    }
    finish(spec, s, log_value, skipped, ZetaKind::Selberg(m_max), bound)
}

/// Check the Selberg relation on a SHARED truncated spectrum:
/// residual = |log zeta_R(s) - log zeta_S(s) + log zeta_S(s+1)|, and the
/// exact telescoping remainder bound sum mult * |log(1 - e^{-(M+1+s) l})|.
/// With consistent truncation the relation holds up to the level-(M+1)
/// factors, so residual <= bound identically.
pub fn selberg_relation_residual(spec: &LengthSpectrum, s: &Cplx, m_max: u32) -> (Float, Float) {
    let prec = s.prec();
    let zr = ruelle_product(spec, s);
    let zs = selberg_product(spec, s, m_max);
    let zs1 = selberg_product(spec, &s.add(&Cplx::one(prec)), m_max);
    let residual = zr.log_value.sub(&zs.log_value).add(&zs1.log_value).abs();

    let shift = Cplx::with_val(prec, m_max as f64 + 1.0, 0.0).add(s);
    let mut bound = Float::new(prec);
    for e in &spec.entries {
        if let Some(lf) = log_factor(&shift, &e.length) {
            bound += lf.abs() * e.multiplicity;
        }
    }
    // for real s the remainder saturates the bound exactly; widen by the
    // rounding slack of the three product evaluations so the comparison is
    // meaningful at working precision
    let slack = crate::hp::tol_half(prec);
    bound = bound.clone() + bound * &slack + slack.clone();
    (residual, bound)
}

/// CSV header matching [`csv_row`].
pub fn csv_header() -> &'static str {
    "s_re,s_im,kind,log_re,log_im,value_re,value_im,trunc_bound"
}

fn fmt_digits(f: &Float, digits: usize) -> String {
    if f.is_finite() {
        f.to_string_radix(10, Some(digits))
    } else {
        "inf".to_owned()
    }
}

/// One CSV row with the given number of significant decimal digits.
pub fn csv_row(ev: &ZetaEvaluation, digits: usize) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        fmt_digits(&ev.s.re, digits),
        fmt_digits(&ev.s.im, digits),
        ev.kind,
        fmt_digits(&ev.log_value.re, digits),
        fmt_digits(&ev.log_value.im, digits),
        fmt_digits(&ev.value.re, digits),
        fmt_digits(&ev.value.im, digits),
        fmt_digits(&ev.truncation_bound, digits),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_bolza_group, Word};
    use crate::hp::tol_half;
    use crate::spectrum::{enumerate_spectrum, LengthSpectrum, SpectrumEntry};

    const PREC: u32 = 200;

    fn toy_spectrum(entries: &[(f64, u32)]) -> LengthSpectrum {
        LengthSpectrum {
            entries: entries
                .iter()
                .map(|&(l, m)| SpectrumEntry {
                    length: Float::with_val(PREC, l),
                    multiplicity: m,
                    word: Word::parse_tokens("a1").unwrap(),
                })
                .collect(),
            cutoff: entries.iter().map(|e| e.0).fold(0.0, f64::max),
            group_name: "toy".into(),
            group_id: "toy".into(),
            precision_bits: PREC,
            complete: true,
        }
    }

    #[test]
    fn single_factor_ruelle() {
        let spec = toy_spectrum(&[(1.0, 1)]);
        let ev = ruelle_product(&spec, &Cplx::with_val(PREC, 1.0, 0.0));
        let expect = 1.0 - (-1.0f64).exp();
        assert!((ev.value.re.to_f64() - expect).abs() < 1e-15);
        assert!(ev.value.im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn empty_spectrum_is_one() {
        let spec = toy_spectrum(&[]);
        let ev = ruelle_product(&spec, &Cplx::with_val(PREC, 2.5, 1.0));
        assert!((ev.value.re.to_f64() - 1.0).abs() < 1e-30);
        assert!(ev.log_value.abs().to_f64() < 1e-30);
    }

    #[test]
    fn two_factor_selberg() {
        let spec = toy_spectrum(&[(1.0, 1)]);
        let ev = selberg_product(&spec, &Cplx::with_val(PREC, 1.0, 0.0), 1);
        let expect = (1.0 - (-1.0f64).exp()) * (1.0 - (-2.0f64).exp());
        assert!((ev.value.re.to_f64() - expect).abs() < 1e-15);
    }

    #[test]
    fn selberg_m0_equals_ruelle() {
        let spec = toy_spectrum(&[(1.0, 2), (1.7, 4)]);
        let s = Cplx::with_val(PREC, 2.0, 0.5);
        let r = ruelle_product(&spec, &s);
        let z = selberg_product(&spec, &s, 0);
        assert!(r.log_value.sub(&z.log_value).abs().to_f64() < 1e-58);
    }

    #[test]
    fn value_is_exp_log() {
        let spec = toy_spectrum(&[(1.0, 3), (2.2, 5)]);
        let ev = ruelle_product(&spec, &Cplx::with_val(PREC, 1.5, -0.7));
        assert!(ev.log_value.exp().sub(&ev.value).abs() < tol_half(PREC));
    }

    #[test]
    fn hand_telescoped_residual() {
        // single entry l=1, s=2, M=0: residual = |log(1 - e^{-3})| exactly
        let spec = toy_spectrum(&[(1.0, 1)]);
        let s = Cplx::with_val(PREC, 2.0, 0.0);
        let (residual, bound) = selberg_relation_residual(&spec, &s, 0);
        let expect = -(1.0 - (-3.0f64).exp()).ln();
        assert!((residual.to_f64() - expect).abs() < 1e-15);
        assert!(residual <= bound);
    }

    #[test]
    fn residual_below_bound_on_toy() {
        let spec = toy_spectrum(&[(1.0, 2), (1.3, 6)]);
        for (re, im) in [(2.0, 0.0), (3.0, 0.0), (2.0, 1.0)] {
            let s = Cplx::with_val(PREC, re, im);
            let (residual, bound) = selberg_relation_residual(&spec, &s, 20);
            assert!(residual <= bound, "s = {re}+{im}i");
        }
    }

    #[test]
    fn bound_shrinks_with_m() {
        let spec = toy_spectrum(&[(1.0, 1)]);
        let s = Cplx::with_val(PREC, 2.0, 0.0);
        let (_, b20) = selberg_relation_residual(&spec, &s, 20);
        let (_, b25) = selberg_relation_residual(&spec, &s, 25);
        let ratio = (b25 / b20).to_f64();
        assert!((ratio.ln() + 5.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn conjugate_symmetry() {
        let spec = toy_spectrum(&[(1.0, 2), (1.9, 3)]);
        let s = Cplx::with_val(PREC, 2.0, 0.7);
        let a = ruelle_product(&spec, &s);
        let b = ruelle_product(&spec, &s.conj());
        assert!(a.value.conj().sub(&b.value).abs() < tol_half(PREC));
        let a = selberg_product(&spec, &s, 5);
        let b = selberg_product(&spec, &s.conj(), 5);
        assert!(a.value.conj().sub(&b.value).abs() < tol_half(PREC));
    }

    #[test]
    fn entry_order_does_not_matter() {
        let spec = toy_spectrum(&[(1.0, 2), (1.4, 3), (2.0, 1)]);
        let mut shuffled = spec.clone();
        shuffled.entries.reverse();
        let s = Cplx::with_val(PREC, 1.8, 0.3);
        let a = ruelle_product(&spec, &s);
        let b = ruelle_product(&shuffled, &s);
        assert!(a.log_value.sub(&b.log_value).abs() < tol_half(PREC));
    }

    #[test]
    fn bound_infinite_left_of_one() {
        let spec = toy_spectrum(&[(1.0, 1)]);
        let ev = ruelle_product(&spec, &Cplx::with_val(PREC, 0.5, 0.0));
        assert!(ev.truncation_bound.is_infinite());
    }

    #[test]
    fn m_tail_telescoping_on_bolza() {
        let g = build_bolza_group(PREC).unwrap();
        let spec = enumerate_spectrum(&g, 6.0, PREC).unwrap();
        let s = Cplx::with_val(PREC, 2.0, 0.0);
        let z30 = selberg_product(&spec, &s, 30);
        let z31 = selberg_product(&spec, &s, 31);
        let diff = z30.log_value.sub(&z31.log_value).abs().to_f64();
        let systole = spec.systole().unwrap().to_f64();
        let cap = spec.total_multiplicity() as f64 * (-33.0 * systole).exp();
        assert!(diff <= cap, "diff {diff} cap {cap}");
    }

    #[test]
    fn truncation_consistency_across_cutoffs() {
        let g = build_bolza_group(PREC).unwrap();
        let s7 = enumerate_spectrum(&g, 7.0, PREC).unwrap();
        let s8 = enumerate_spectrum(&g, 8.0, PREC).unwrap();
        let s = Cplx::with_val(PREC, 2.0, 0.0);
        let a = ruelle_product(&s7, &s);
        let b = ruelle_product(&s8, &s);
        let diff = a.log_value.sub(&b.log_value).abs();
        assert!(diff <= a.truncation_bound, "diff {diff:?}");
    }

    #[test]
    fn csv_row_shape() {
        let spec = toy_spectrum(&[(1.0, 1)]);
        let ev = ruelle_product(&spec, &Cplx::with_val(PREC, 2.0, 0.0));
        let row = csv_row(&ev, 10);
        assert_eq!(row.split(',').count(), 8);
        assert!(row.contains("ruelle"));
    }
}
