//! Binary fixed-point arithmetic on `BigInt` with `PREC` fractional bits.
//!
//! Just enough for oracles: exact conversion from `f64`, the four operations,
//! `exp`, `pi`, `sqrt` and a complex Maclaurin series for `erfc`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const PREC: u64 = 700;

#[derive(Debug, Clone, PartialEq)]
pub struct Fx(pub BigInt);

impl Fx {
    pub fn one() -> Self {
        Fx(BigInt::one() << PREC)
    }

    pub fn zero() -> Self {
        Fx(BigInt::zero())
    }

    pub fn from_int(i: i64) -> Self {
        Fx(BigInt::from(i) << PREC)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(mant) * sign;
        let shift = PREC as i64 + e;
        Fx(if shift >= 0 { m << shift as u64 } else { m >> (-shift) as u64 })
    }

    pub fn to_f64(&self) -> f64 {
        let m = &self.0;
        if m.is_zero() {
            return 0.0;
        }
        let neg = m.is_negative();
        let a = m.abs();
        let n = a.bits() as i64;
        let (top, e) = if n > 64 { (&a >> (n - 64) as u64, n - 64) } else { (a.clone(), 0) };
        let v = top.to_u64().unwrap() as f64 * 2f64.powi((e - PREC as i64) as i32);
        if neg {
            -v
        } else {
            v
        }
    }

    pub fn add(&self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> PREC)
    }

    pub fn div(&self, o: &Fx) -> Fx {
        Fx((&self.0 << PREC) / &o.0)
    }

    pub fn div_int(&self, i: i64) -> Fx {
        Fx(&self.0 / BigInt::from(i))
    }

    pub fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    pub fn sqrt(&self) -> Fx {
        Fx((&self.0 << PREC).sqrt())
    }

    pub fn exp(&self) -> Fx {
        // Halve until tiny, Taylor, then square back up.
        let mut k = 0u32;
        let mut x = self.clone();
        let limit = BigInt::one() << (PREC - 12);
        while x.0.abs() > limit {
            x = Fx(&x.0 >> 1u32);
            k += 1;
        }
        let mut sum = Fx::one();
        let mut term = Fx::one();
        for n in 1..200 {
            term = term.mul(&x).div_int(n);
            if term.0.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        for _ in 0..k {
            sum = sum.mul(&sum);
        }
        sum
    }

    pub fn pi() -> Fx {
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239), with guard bits.
        let guard = 32u64;
        let atan_inv = |x: i64| -> BigInt {
            let one = BigInt::one() << (PREC + guard);
            let x2 = BigInt::from(x * x);
            let mut power = one / BigInt::from(x);
            let mut sum = power.clone();
            let mut k = 1i64;
            loop {
                power /= &x2;
                if power.is_zero() {
                    break;
                }
                let t = &power / BigInt::from(2 * k + 1);
                if k % 2 == 1 {
                    sum -= t;
                } else {
                    sum += t;
                }
                k += 1;
            }
            sum
        };
        let v = atan_inv(5) * 16 - atan_inv(239) * 4;
        Fx(v >> guard)
    }
}

#[derive(Debug, Clone)]
pub struct Cx {
    pub re: Fx,
    pub im: Fx,
}

impl Cx {
    pub fn from_c64(z: Complex64) -> Self {
        Cx { re: Fx::from_f64(z.re), im: Fx::from_f64(z.im) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn mul(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale_div(&self, i: i64) -> Cx {
        Cx { re: self.re.div_int(i), im: self.im.div_int(i) }
    }

    pub fn is_negligible(&self) -> bool {
        let tiny = BigInt::one() << 8u32;
        self.re.0.abs() < tiny && self.im.0.abs() < tiny
    }
}

/// `erfc(z) = 1 - (2/sqrt(pi)) sum_n (-1)^n z^{2n+1} / (n! (2n+1))`, summed in fixed point.
pub fn erfc_oracle(z: Complex64, two_over_sqrt_pi: &Fx) -> Complex64 {
    let zc = Cx::from_c64(z);
    let z2 = zc.mul(&zc);
    let minus_z2 = Cx { re: z2.re.neg(), im: z2.im.neg() };
    let mut p = zc.clone();
    let mut sum = zc;
    let r2 = z.norm_sqr();
    let mut n = 0i64;
    loop {
        n += 1;
        p = p.mul(&minus_z2).scale_div(n);
        let term = p.scale_div(2 * n + 1);
        sum = Cx { re: sum.re.add(&term.re), im: sum.im.add(&term.im) };
        if n as f64 > r2 + 10.0 && term.is_negligible() {
            break;
        }
    }
    let erf = Cx { re: sum.re.mul(two_over_sqrt_pi), im: sum.im.mul(two_over_sqrt_pi) };
    Cx { re: Fx::one().sub(&erf.re), im: erf.im.neg() }.to_c64()
}

pub fn two_over_sqrt_pi() -> Fx {
    Fx::from_int(2).div(&Fx::pi().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((Fx::pi().to_f64() - std::f64::consts::PI).abs() < 1e-16);
        assert!((Fx::from_f64(1.0).exp().to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((Fx::from_f64(-30.0).exp().to_f64() / (-30f64).exp() - 1.0).abs() < 1e-14);
    }
}
