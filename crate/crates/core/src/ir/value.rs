//! Fixed-width bit-vector values with SMT-LIB QF_BV semantics.
//!
//! Values up to 64 bits live in a machine word; wider values fall back to
//! `BigUint`. Every operation keeps the value reduced modulo `2^width`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(u64),
    Big(BigUint),
}

/// A bit string of fixed positive width, readable both as an unsigned
/// integer and as a two's-complement signed integer.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BvValue {
    width: u32,
    repr: Repr,
}

fn small_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn big_modulus(width: u32) -> BigUint {
    BigUint::one() << width as usize
}

fn big_mask(width: u32) -> BigUint {
    big_modulus(width) - BigUint::one()
}

impl BvValue {
    /// Builds a value from the low `width` bits of `value`.
    pub fn new(width: u32, value: u64) -> Self {
        assert!(width >= 1, "bit-vector width must be positive");
        if width <= 64 {
            BvValue {
                width,
                repr: Repr::Small(value & small_mask(width)),
            }
        } else {
            BvValue {
                width,
                repr: Repr::Big(BigUint::from(value)),
            }
        }
    }

    pub fn from_biguint(width: u32, value: &BigUint) -> Self {
        assert!(width >= 1, "bit-vector width must be positive");
        if width <= 64 {
            let masked = value & BigUint::from(small_mask(width));
            BvValue {
                width,
                repr: Repr::Small(masked.to_u64().unwrap_or(0)),
            }
        } else {
            BvValue {
                width,
                repr: Repr::Big(value & big_mask(width)),
            }
        }
    }

    /// Reduces a signed integer modulo `2^width`.
    pub fn from_bigint(width: u32, value: &BigInt) -> Self {
        let modulus = BigInt::from(big_modulus(width));
        let mut r = value % &modulus;
        if r.sign() == Sign::Minus {
            r += &modulus;
        }
        Self::from_biguint(
            width,
            &r.to_biguint().expect("non-negative after reduction"),
        )
    }

    pub fn from_i64(width: u32, value: i64) -> Self {
        Self::from_bigint(width, &BigInt::from(value))
    }

    pub fn zero(width: u32) -> Self {
        Self::new(width, 0)
    }

    pub fn one(width: u32) -> Self {
        Self::new(width, 1)
    }

    /// The all-ones value, i.e. `-1` in two's complement.
    pub fn ones(width: u32) -> Self {
        if width <= 64 {
            Self::new(width, u64::MAX)
        } else {
            BvValue {
                width,
                repr: Repr::Big(big_mask(width)),
            }
        }
    }

    /// Builds a value from bits given least significant first.
    pub fn from_bits_lsb(bits: &[bool]) -> Self {
        let width = bits.len() as u32;
        let mut v = BigUint::zero();
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set_bit(i as u64, true);
            }
        }
        Self::from_biguint(width, &v)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.repr {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(v) => v.clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.repr {
            Repr::Small(v) => Some(*v),
            Repr::Big(v) => v.to_u64(),
        }
    }

    /// Two's-complement reading of the bits.
    pub fn to_bigint(&self) -> BigInt {
        let u = BigInt::from(self.to_biguint());
        if self.msb() {
            u - BigInt::from(big_modulus(self.width))
        } else {
            u
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_bigint().to_i64()
    }

    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.width);
        match &self.repr {
            Repr::Small(v) => (v >> i) & 1 == 1,
            Repr::Big(v) => v.bit(i as u64),
        }
    }

    pub fn msb(&self) -> bool {
        self.bit(self.width - 1)
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Small(v) => *v == 0,
            Repr::Big(v) => v.is_zero(),
        }
    }

    /// Index of the most significant set bit, `None` for zero.
    pub fn highest_set_bit(&self) -> Option<u32> {
        match &self.repr {
            Repr::Small(0) => None,
            Repr::Small(v) => Some(63 - v.leading_zeros()),
            Repr::Big(v) => (v.bits() as u32).checked_sub(1),
        }
    }

    /// Bits least significant first.
    pub fn bits_lsb(&self) -> Vec<bool> {
        (0..self.width).map(|i| self.bit(i)).collect()
    }

    fn same_width(&self, other: &Self) {
        assert_eq!(self.width, other.width, "bit-vector width mismatch");
    }

    fn binop(
        &self,
        other: &Self,
        small: impl Fn(u64, u64) -> u64,
        big: impl Fn(&BigUint, &BigUint) -> BigUint,
    ) -> Self {
        self.same_width(other);
        match (&self.repr, &other.repr) {
            (Repr::Small(a), Repr::Small(b)) => Self::new(self.width, small(*a, *b)),
            _ => Self::from_biguint(self.width, &big(&self.to_biguint(), &other.to_biguint())),
        }
    }

    pub fn bvnot(&self) -> Self {
        match &self.repr {
            Repr::Small(v) => Self::new(self.width, !v),
            Repr::Big(v) => Self::from_biguint(self.width, &(big_mask(self.width) ^ v)),
        }
    }

    pub fn bvneg(&self) -> Self {
        match &self.repr {
            Repr::Small(v) => Self::new(self.width, v.wrapping_neg()),
            Repr::Big(v) => {
                if v.is_zero() {
                    self.clone()
                } else {
                    Self::from_biguint(self.width, &(big_modulus(self.width) - v))
                }
            }
        }
    }

    pub fn bvand(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a & b, |a, b| a & b)
    }

    pub fn bvor(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a | b, |a, b| a | b)
    }

    pub fn bvxor(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a ^ b, |a, b| a ^ b)
    }

    pub fn bvadd(&self, o: &Self) -> Self {
        self.binop(o, u64::wrapping_add, |a, b| a + b)
    }

    pub fn bvsub(&self, o: &Self) -> Self {
        self.bvadd(&o.bvneg())
    }

    pub fn bvmul(&self, o: &Self) -> Self {
        self.binop(o, u64::wrapping_mul, |a, b| a * b)
    }

    /// Unsigned division; division by zero yields all ones.
    pub fn bvudiv(&self, o: &Self) -> Self {
        self.same_width(o);
        if o.is_zero() {
            return Self::ones(self.width);
        }
        self.binop(o, |a, b| a / b, |a, b| a / b)
    }

    /// Unsigned remainder; remainder by zero yields the dividend.
    pub fn bvurem(&self, o: &Self) -> Self {
        self.same_width(o);
        if o.is_zero() {
            return self.clone();
        }
        self.binop(o, |a, b| a % b, |a, b| a % b)
    }

    /// Signed division truncating toward zero, reduced to `bvudiv` on
    /// magnitudes exactly as SMT-LIB defines it.
    pub fn bvsdiv(&self, o: &Self) -> Self {
        match (self.msb(), o.msb()) {
            (false, false) => self.bvudiv(o),
            (true, false) => self.bvneg().bvudiv(o).bvneg(),
            (false, true) => self.bvudiv(&o.bvneg()).bvneg(),
            (true, true) => self.bvneg().bvudiv(&o.bvneg()),
        }
    }

    /// Signed remainder; the result takes the sign of the dividend.
    pub fn bvsrem(&self, o: &Self) -> Self {
        match (self.msb(), o.msb()) {
            (false, false) => self.bvurem(o),
            (true, false) => self.bvneg().bvurem(o).bvneg(),
            (false, true) => self.bvurem(&o.bvneg()),
            (true, true) => self.bvneg().bvurem(&o.bvneg()).bvneg(),
        }
    }

    /// Signed modulo; the result takes the sign of the divisor.
    pub fn bvsmod(&self, o: &Self) -> Self {
        let abs_s = if self.msb() {
            self.bvneg()
        } else {
            self.clone()
        };
        let abs_t = if o.msb() { o.bvneg() } else { o.clone() };
        let u = abs_s.bvurem(&abs_t);
        if u.is_zero() {
            return u;
        }
        match (self.msb(), o.msb()) {
            (false, false) => u,
            (true, false) => u.bvneg().bvadd(o),
            (false, true) => u.bvadd(o),
            (true, true) => u.bvneg(),
        }
    }

    /// Shift amount as a `u32`, saturating at the width.
    fn shift_amount(&self) -> u32 {
        match self.to_u64() {
            Some(v) if v < self.width as u64 => v as u32,
            _ => self.width,
        }
    }

    pub fn bvshl(&self, o: &Self) -> Self {
        self.same_width(o);
        let s = o.shift_amount();
        if s >= self.width {
            return Self::zero(self.width);
        }
        match &self.repr {
            Repr::Small(v) => Self::new(self.width, v << s),
            Repr::Big(v) => Self::from_biguint(self.width, &(v << s as usize)),
        }
    }

    pub fn bvlshr(&self, o: &Self) -> Self {
        self.same_width(o);
        let s = o.shift_amount();
        if s >= self.width {
            return Self::zero(self.width);
        }
        match &self.repr {
            Repr::Small(v) => Self::new(self.width, v >> s),
            Repr::Big(v) => Self::from_biguint(self.width, &(v >> s as usize)),
        }
    }

    pub fn bvashr(&self, o: &Self) -> Self {
        if !self.msb() {
            return self.bvlshr(o);
        }
        self.bvnot().bvlshr(o).bvnot()
    }

    pub fn bvult(&self, o: &Self) -> bool {
        self.ucmp(o) == Ordering::Less
    }

    pub fn bvule(&self, o: &Self) -> bool {
        self.ucmp(o) != Ordering::Greater
    }

    pub fn bvslt(&self, o: &Self) -> bool {
        self.scmp(o) == Ordering::Less
    }

    pub fn bvsle(&self, o: &Self) -> bool {
        self.scmp(o) != Ordering::Greater
    }

    pub fn ucmp(&self, o: &Self) -> Ordering {
        self.same_width(o);
        match (&self.repr, &o.repr) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_biguint().cmp(&o.to_biguint()),
        }
    }

    pub fn scmp(&self, o: &Self) -> Ordering {
        self.same_width(o);
        match (self.msb(), o.msb()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.ucmp(o),
        }
    }

    /// `self` supplies the high bits.
    pub fn concat(&self, low: &Self) -> Self {
        let width = self.width + low.width;
        if width <= 64 {
            let (Repr::Small(h), Repr::Small(l)) = (&self.repr, &low.repr) else {
                unreachable!()
            };
            return Self::new(width, (h << low.width) | l);
        }
        Self::from_biguint(
            width,
            &((self.to_biguint() << low.width as usize) | low.to_biguint()),
        )
    }

    pub fn extract(&self, hi: u32, lo: u32) -> Self {
        assert!(hi >= lo && hi < self.width, "extract out of range");
        let width = hi - lo + 1;
        match &self.repr {
            Repr::Small(v) => Self::new(width, v >> lo),
            Repr::Big(v) => Self::from_biguint(width, &(v >> lo as usize)),
        }
    }

    pub fn zero_extend(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self::from_biguint(self.width + k, &self.to_biguint())
    }

    pub fn sign_extend(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self::from_bigint(self.width + k, &self.to_bigint())
    }

    /// Canonical SMT-LIB literal: hexadecimal when the width is a multiple
    /// of four, binary otherwise.
    pub fn to_smtlib(&self) -> String {
        let digits = self.to_biguint();
        if self.width.is_multiple_of(4) {
            let s = digits.to_str_radix(16);
            format!("#x{}{}", "0".repeat(self.width as usize / 4 - s.len()), s)
        } else {
            let s = digits.to_str_radix(2);
            format!("#b{}{}", "0".repeat(self.width as usize - s.len()), s)
        }
    }
}

impl fmt::Display for BvValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_smtlib())
    }
}

impl fmt::Debug for BvValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.to_biguint(), self.width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_forms() {
        assert_eq!(BvValue::new(4, 10).to_smtlib(), "#xa");
        assert_eq!(BvValue::new(8, 10).to_smtlib(), "#x0a");
        assert_eq!(BvValue::new(3, 5).to_smtlib(), "#b101");
        assert_eq!(BvValue::new(5, 1).to_smtlib(), "#b00001");
    }

    #[test]
    fn signed_reading() {
        assert_eq!(BvValue::new(4, 0b1001).to_i64(), Some(-7));
        assert_eq!(BvValue::from_i64(4, -1), BvValue::ones(4));
        assert_eq!(BvValue::from_i64(4, -8).to_u64(), Some(8));
    }

    #[test]
    fn division_conventions() {
        let x = BvValue::from_i64(4, -7);
        let two = BvValue::new(4, 2);
        assert_eq!(x.bvsdiv(&two), BvValue::from_i64(4, -3));
        assert_eq!(x.bvsrem(&two), BvValue::from_i64(4, -1));
        assert_eq!(
            BvValue::new(4, 5).bvudiv(&BvValue::zero(4)),
            BvValue::ones(4)
        );
        assert_eq!(
            BvValue::new(4, 5).bvurem(&BvValue::zero(4)),
            BvValue::new(4, 5)
        );
        // sdiv by zero: -1 for non-negative dividends, 1 for negative ones
        assert_eq!(
            BvValue::new(4, 5).bvsdiv(&BvValue::zero(4)),
            BvValue::ones(4)
        );
        assert_eq!(x.bvsdiv(&BvValue::zero(4)), BvValue::one(4));
        assert_eq!(x.bvsmod(&two), BvValue::one(4));
    }

    #[test]
    fn wide_values_agree_with_small_path() {
        let a = BvValue::new(70, 0xdead_beef);
        let b = BvValue::new(70, 0x1234);
        assert_eq!(
            a.bvmul(&b).to_biguint(),
            BigUint::from(0xdead_beefu64) * 0x1234u64
        );
        assert_eq!(a.bvneg().bvadd(&a), BvValue::zero(70));
        assert_eq!(BvValue::ones(70).highest_set_bit(), Some(69));
        assert_eq!(a.extract(31, 0).to_u64(), Some(0xdead_beef));
        assert!(BvValue::from_i64(70, -3).bvslt(&BvValue::from_i64(70, 2)));
        assert_eq!(
            BvValue::from_i64(70, -3).bvashr(&BvValue::new(70, 100)),
            BvValue::ones(70)
        );
    }

    #[test]
    fn extensions_and_concat() {
        let v = BvValue::new(4, 0b1010);
        assert_eq!(v.sign_extend(4).to_u64(), Some(0b1111_1010));
        assert_eq!(v.zero_extend(4).to_u64(), Some(0b0000_1010));
        assert_eq!(v.concat(&BvValue::new(2, 1)).to_u64(), Some(0b101001));
        assert_eq!(v.sign_extend(62).to_bigint(), BigInt::from(-6));
    }
}
