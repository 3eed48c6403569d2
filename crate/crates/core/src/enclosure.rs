//! Certified rational enclosures of logarithms, powers and roots.
//!
//! Every routine returns bounds that are provably on the correct side of the
//! true real value. Only exact integer arithmetic with directed rounding is
//! used, so a check like `x <= upper` is a genuine inequality.

use dashu::base::{BitTest, PowerOfTwo, SquareRoot, UnsignedAbs};
use dashu::integer::{IBig, UBig};
use serde::Serialize;

use crate::rational::ExactRational;

/// Default working precision, in bits.
pub const DEFAULT_BITS: u32 = 64;

/// Largest precision the logarithm enclosure will honour.
pub const MAX_BITS: u32 = 100;

/// A closed interval `[lo, hi]` known to contain some real number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enclosure {
    pub lo: ExactRational,
    pub hi: ExactRational,
}

impl Enclosure {
    pub fn exact(v: ExactRational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> ExactRational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    /// Product with a rational scalar, any sign.
    pub fn scale(&self, c: &ExactRational) -> Enclosure {
        let (a, b) = (&self.lo * c, &self.hi * c);
        if a <= b {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }
}

fn bit_len(n: &UBig) -> usize {
    n.bit_len()
}

fn dyadic(m: impl Into<IBig>, e: i64) -> ExactRational {
    ExactRational::from_integer(m.into()) * ExactRational::pow2(e)
}

/// Enclosure of `log2(n)` for a positive integer, of width about `2^(1-bits)`
/// (with `bits` capped at [`MAX_BITS`]).
fn log2_ubig(n: &UBig, bits: u32) -> (ExactRational, ExactRational) {
    assert!(*n > UBig::ZERO, "log of zero");
    if n.is_power_of_two() {
        let e = ExactRational::from((bit_len(n) - 1) as u64);
        return (e.clone(), e);
    }
    // n^(2^k) is bracketed by mantissa/exponent pairs truncated downward and
    // upward after every squaring.
    // exponents grow like 2^k, so precision is capped to keep them in i128
    let k = bits.min(MAX_BITS) as usize + 1;
    let keep = k + 64;
    let (mut ml, mut el) = (n.clone(), 0i128);
    let (mut mu, mut eu) = (n.clone(), 0i128);
    for _ in 0..k {
        ml = &ml * &ml;
        el *= 2;
        let bl = bit_len(&ml);
        if bl > keep {
            let s = bl - keep;
            ml >>= s;
            el += s as i128;
        }
        mu = &mu * &mu;
        eu *= 2;
        let bu = bit_len(&mu);
        if bu > keep {
            let s = bu - keep;
            let low_bits_nonzero = mu.trailing_zeros().is_some_and(|t| t < s);
            mu >>= s;
            if low_bits_nonzero {
                mu += UBig::ONE;
            }
            eu += s as i128;
        }
    }
    let scale = ExactRational::pow2(-(k as i64));
    let lo = ExactRational::from(IBig::from((bit_len(&ml) - 1) as i128 + el)) * &scale;
    let hi = ExactRational::from(IBig::from(bit_len(&mu) as i128 + eu)) * &scale;
    (lo, hi)
}

/// Enclosure of `log2(x)` for a positive rational.
pub fn log2_enclosure(x: &ExactRational, bits: u32) -> Enclosure {
    assert!(x.is_positive(), "log of a non-positive number");
    let num = x.numer().unsigned_abs();
    let (nl, nh) = log2_ubig(&num, bits);
    let (dl, dh) = log2_ubig(x.denom(), bits);
    Enclosure { lo: nl - dh, hi: nh - dl }
}

fn ceil_sqrt(v: &UBig) -> UBig {
    let s = v.sqrt();
    if &s * &s < *v {
        s + UBig::ONE
    } else {
        s
    }
}

/// Bound on `2^f` for `f = k / 2^bits`, `0 <= k < 2^bits`, in fixed point
/// with `frac` fractional bits. `up` selects the rounding direction.
fn pow2_fraction_fixed(k: &UBig, bits: u32, frac: usize, up: bool) -> UBig {
    let one = UBig::ONE << frac;
    let mut root = UBig::from(2u8) << frac; // 2^(2^0)
    let mut acc = one.clone();
    for i in 1..=bits as usize {
        let radicand = &root << frac;
        root = if up { ceil_sqrt(&radicand) } else { radicand.sqrt() };
        if k.bit(bits as usize - i) {
            let prod = &acc * &root;
            let q = &prod >> frac;
            acc = if up && (&q << frac) != prod { q + UBig::ONE } else { q };
        }
    }
    acc
}

fn pow2_bound(e: &ExactRational, bits: u32, up: bool) -> ExactRational {
    let fl = e.floor();
    let fr = e - ExactRational::from(fl.clone());
    let scaled = fr * ExactRational::pow2(bits as i64);
    let k = if up { scaled.ceil() } else { scaled.floor() };
    let whole = i64::try_from(fl).expect("exponent out of range");
    let k = k.unsigned_abs();
    let limit = UBig::ONE << bits as usize;
    if k == limit {
        // fraction rounded up to one
        return ExactRational::pow2(whole + 1);
    }
    let frac = bits as usize + 32;
    let fixed = pow2_fraction_fixed(&k, bits, frac, up);
    dyadic(IBig::from(fixed), whole - frac as i64)
}

/// Rational upper bound on `2^e`.
pub fn pow2_upper(e: &ExactRational, bits: u32) -> ExactRational {
    pow2_bound(e, bits, true)
}

/// Rational lower bound on `2^e`.
pub fn pow2_lower(e: &ExactRational, bits: u32) -> ExactRational {
    pow2_bound(e, bits, false)
}

/// Enclosure of `base^exp` for a positive base and an exponent known only
/// through an enclosure.
pub fn pow_enclosure(base: &ExactRational, exp: &Enclosure, bits: u32) -> Enclosure {
    let l = log2_enclosure(base, bits);
    let corners = [&l.lo * &exp.lo, &l.lo * &exp.hi, &l.hi * &exp.lo, &l.hi * &exp.hi];
    let lo = corners.iter().min().unwrap();
    let hi = corners.iter().max().unwrap();
    Enclosure { lo: pow2_lower(lo, bits), hi: pow2_upper(hi, bits) }
}

/// Enclosure of `v^(1/m)` for positive `v`; exact when numerator and
/// denominator are perfect `m`-th powers.
pub fn root_enclosure(v: &ExactRational, m: u32, bits: u32) -> Enclosure {
    assert!(v.is_positive() && m >= 1);
    let num = v.numer().unsigned_abs();
    let den = v.denom().clone();
    let rn = num.nth_root(m as usize);
    let rd = den.nth_root(m as usize);
    if rn.pow(m as usize) == num && rd.pow(m as usize) == den {
        return Enclosure::exact(ExactRational::new(IBig::from(rn), IBig::from(rd)));
    }
    let shift = m as usize * bits as usize;
    let sn = (&num << shift).nth_root(m as usize);
    let sd = (&den << shift).nth_root(m as usize);
    let lo = ExactRational::new(IBig::from(sn.clone()), IBig::from(&sd + UBig::ONE));
    let hi = ExactRational::new(IBig::from(sn + UBig::ONE), IBig::from(sd));
    Enclosure { lo, hi }
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn log2_of_three_is_tight() {
        let e = log2_enclosure(&q(3, 1), 40);
        let truth = 3f64.log2();
        assert!(e.lo.to_f64() <= truth && truth <= e.hi.to_f64());
        assert!(e.width() < ExactRational::pow2(-35));
    }

    #[test]
    fn log2_exact_for_powers_of_two() {
        let e = log2_enclosure(&q(1, 8), 20);
        assert!(e.is_exact());
        assert_eq!(e.lo, q(-3, 1));
    }

    #[test]
    fn pow2_brackets_sqrt2() {
        let up = pow2_upper(&q(1, 2), 40);
        let lo = pow2_lower(&q(1, 2), 40);
        assert!(&lo * &lo <= q(2, 1));
        assert!(&up * &up > q(2, 1));
        assert!(up.to_f64() - 2f64.sqrt() < 1e-9);
    }

    #[test]
    fn pow2_integer_exponents_exact() {
        assert_eq!(pow2_upper(&q(5, 1), 30), q(32, 1));
        assert_eq!(pow2_lower(&q(-2, 1), 30), q(1, 4));
    }

    #[test]
    fn pow_of_six_to_log2_of_two() {
        // (2·3)^1 with the exponent log2(2) = 1 exactly
        let e = pow_enclosure(&q(6, 1), &Enclosure::exact(q(1, 1)), 40);
        assert!(e.contains(&q(6, 1)));
    }

    #[test]
    fn roots() {
        assert_eq!(root_enclosure(&q(9, 4), 2, 30), Enclosure::exact(q(3, 2)));
        let e = root_enclosure(&q(2, 1), 2, 30);
        assert!(!e.is_exact());
        assert!(&e.lo * &e.lo <= q(2, 1) && &e.hi * &e.hi >= q(2, 1));
    }

    #[test]
    fn ceil_log2_small() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }
}
