//! High-precision complex scalars and 2x2 matrices on top of `rug::Float`.
//!
//! We only need a small slice of complex arithmetic (products, logs, exps,
//! phases), so a thin struct over two `Float`s is used instead of pulling in
//! a full complex type. All operations round to the precision of the operands.

use rug::Float;
use std::fmt;

/// Complex number with both components at the same binary precision.
#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn with_val(prec: u32, re: f64, im: f64) -> Self {
        Cplx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::with_val(prec, 0.0, 0.0)
    }

    pub fn one(prec: u32) -> Self {
        Self::with_val(prec, 1.0, 0.0)
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Cplx {
            im: Float::with_val(prec, 0),
            re,
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        Cplx {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let mut t = self.re.clone().square();
        t += self.im.clone().square();
        t
    }

    pub fn abs(&self) -> Float {
        // hypot avoids overflow/underflow of the naive square sum
        self.re.clone().hypot(&self.im)
    }

    /// Principal argument in (-pi, pi].
    pub fn arg(&self) -> Float {
        self.im.clone().atan2(&self.re)
    }

    pub fn add(&self, rhs: &Cplx) -> Cplx {
        Cplx {
            re: self.re.clone() + &rhs.re,
            im: self.im.clone() + &rhs.im,
        }
    }

    pub fn sub(&self, rhs: &Cplx) -> Cplx {
        Cplx {
            re: self.re.clone() - &rhs.re,
            im: self.im.clone() - &rhs.im,
        }
    }

    pub fn neg(&self) -> Cplx {
        Cplx {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn mul(&self, rhs: &Cplx) -> Cplx {
        let re = self.re.clone() * &rhs.re - self.im.clone() * &rhs.im;
        let im = self.re.clone() * &rhs.im + self.im.clone() * &rhs.re;
        Cplx { re, im }
    }

    pub fn mul_real(&self, rhs: &Float) -> Cplx {
        Cplx {
            re: self.re.clone() * rhs,
            im: self.im.clone() * rhs,
        }
    }

    pub fn div(&self, rhs: &Cplx) -> Cplx {
        let d = rhs.norm_sqr();
        let num = self.mul(&rhs.conj());
        Cplx {
            re: num.re / &d,
            im: num.im / &d,
        }
    }

    pub fn recip(&self) -> Cplx {
        let d = self.norm_sqr();
        Cplx {
            re: self.re.clone() / &d,
            im: -self.im.clone() / &d,
        }
    }

    pub fn exp(&self) -> Cplx {
        let r = self.re.clone().exp();
        Cplx {
            re: self.im.clone().cos() * &r,
            im: self.im.clone().sin() * &r,
        }
    }

    /// Principal branch: Im(ln z) in (-pi, pi].
    pub fn ln(&self) -> Cplx {
        Cplx {
            re: self.abs().ln(),
            im: self.arg(),
        }
    }

    pub fn powi(&self, mut n: u32) -> Cplx {
        let mut acc = Cplx::one(self.prec());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// 2x2 complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2 {
    pub a: Cplx,
    pub b: Cplx,
    pub c: Cplx,
    pub d: Cplx,
}

impl Mat2 {
    pub fn new(a: Cplx, b: Cplx, c: Cplx, d: Cplx) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(prec: u32) -> Self {
        Mat2 {
            a: Cplx::one(prec),
            b: Cplx::zero(prec),
            c: Cplx::zero(prec),
            d: Cplx::one(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a.mul(&rhs.a).add(&self.b.mul(&rhs.c)),
            b: self.a.mul(&rhs.b).add(&self.b.mul(&rhs.d)),
            c: self.c.mul(&rhs.a).add(&self.d.mul(&rhs.c)),
            d: self.c.mul(&rhs.b).add(&self.d.mul(&rhs.d)),
        }
    }

    pub fn det(&self) -> Cplx {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn trace(&self) -> Cplx {
        self.a.add(&self.d)
    }

    /// Inverse of a unit-determinant matrix (the adjugate).
    pub fn inverse_unit_det(&self) -> Mat2 {
        Mat2 {
            a: self.d.clone(),
            b: self.b.neg(),
            c: self.c.neg(),
            d: self.a.clone(),
        }
    }

    /// Largest entry modulus; cheap norm used in residual checks.
    pub fn max_norm(&self) -> Float {
        let mut m = self.a.abs();
        for e in [&self.b, &self.c, &self.d] {
            let v = e.abs();
            if v > m {
                m = v;
            }
        }
        m
    }

    /// Max-norm distance to another matrix.
    pub fn max_dist(&self, rhs: &Mat2) -> Float {
        let mut m = self.a.sub(&rhs.a).abs();
        for (x, y) in [(&self.b, &rhs.b), (&self.c, &rhs.c), (&self.d, &rhs.d)] {
            let v = x.sub(y).abs();
            if v > m {
                m = v;
            }
        }
        m
    }

    /// Same matrix rounded to another working precision.
    pub fn to_prec(&self, prec: u32) -> Mat2 {
        let cv = |z: &Cplx| Cplx {
            re: Float::with_val(prec, &z.re),
            im: Float::with_val(prec, &z.im),
        };
        Mat2 {
            a: cv(&self.a),
            b: cv(&self.b),
            c: cv(&self.c),
            d: cv(&self.d),
        }
    }

    /// Entries rounded to f64 pairs (re, im), row-major.
    pub fn to_f64(&self) -> [(f64, f64); 4] {
        [
            self.a.to_f64(),
            self.b.to_f64(),
            self.c.to_f64(),
            self.d.to_f64(),
        ]
    }
}

/// 2^(-prec/2): the default "working slack" tolerance used across modules.
pub fn tol_half(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32)))
}

/// 2^(-prec/4): the coarser clustering/contour tolerance.
pub fn tol_quarter(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -((prec / 4) as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_field_ops() {
        let z = Cplx::with_val(128, 3.0, 4.0);
        assert_eq!(z.abs().to_f64(), 5.0);
        let w = z.mul(&z.recip());
        assert!((w.re.to_f64() - 1.0).abs() < 1e-30);
        assert!(w.im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_ln_round_trip() {
        let z = Cplx::with_val(128, 0.5, -1.25);
        let back = z.ln().exp();
        assert!(back.sub(&z).abs().to_f64() < 1e-35);
    }

    #[test]
    fn principal_branch() {
        let z = Cplx::with_val(128, -1.0, 0.0);
        // arg(-1) = +pi on the principal branch
        assert!((z.arg().to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn matrix_inverse() {
        let prec = 128;
        let m = Mat2::new(
            Cplx::with_val(prec, 2.0, 0.0),
            Cplx::with_val(prec, 3.0, 0.0),
            Cplx::with_val(prec, 1.0, 0.0),
            Cplx::with_val(prec, 2.0, 0.0),
        );
        assert_eq!(m.det().re.to_f64(), 1.0);
        let p = m.mul(&m.inverse_unit_det());
        assert!(p.max_dist(&Mat2::identity(prec)).to_f64() < 1e-35);
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let z = Cplx::with_val(128, 0.3, 0.7);
        let mut acc = Cplx::one(128);
        for _ in 0..7 {
            acc = acc.mul(&z);
        }
        assert!(z.powi(7).sub(&acc).abs().to_f64() < 1e-35);
    }
}
