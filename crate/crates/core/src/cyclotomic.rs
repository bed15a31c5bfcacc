//! Exact arithmetic in `Z[e]`, `e = exp(2 pi i / p)`, for odd primes `p`.
//!
//! An element is a vector of `p` integer counts, value `sum_j counts[j] e^j`,
//! reduced with `1 + e + ... + e^{p-1} = 0` so that the last count is zero.
//! That canonical form makes equality a plain vector comparison.
//!
//! The coefficient type is generic: `i64` is the working type, `i128` and
//! `BigInt` are drop-in when larger magnitudes are needed.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer types usable as `CycInt` counts.
pub trait Coeff:
    Clone
    + fmt::Debug
    + fmt::Display
    + Ord
    + std::hash::Hash
    + Num
    + Signed
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl Coeff for i64 {}
impl Coeff for i128 {}
impl Coeff for BigInt {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycError {
    #[error("operands live in different rings: p = {0} and p = {1}")]
    MixedP(u32, u32),
    #[error("integer overflow in cyclotomic arithmetic")]
    Overflow,
    #[error("count vector has length {got}, expected {p}")]
    BadLength { p: u32, got: usize },
    #[error("value matches more than one admissible shape")]
    AmbiguousMatch,
    #[error("shape with zeta {zeta} and magnitude exponent {exponent} is not an element of Z[e_{p}]")]
    InadmissibleShape { zeta: Zeta, exponent: u32, p: u32 },
}

/// Element of `Z[e_p]` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CycInt<T: Coeff = i64> {
    p: u32,
    counts: Vec<T>,
}

impl<T: Coeff> fmt::Debug for CycInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycInt<{}>{:?}", self.p, self.counts)
    }
}

impl<T: Coeff> fmt::Display for CycInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}e")?,
                _ => write!(f, "{c}e^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<T: Coeff> CycInt<T> {
    pub fn zero(p: u32) -> Self {
        CycInt { p, counts: vec![T::zero(); p as usize] }
    }

    pub fn one(p: u32) -> Self {
        Self::from_int(p, T::one())
    }

    pub fn from_int(p: u32, m: T) -> Self {
        let mut z = Self::zero(p);
        z.counts[0] = m;
        z
    }

    /// `e^j`.
    pub fn root_of_unity(p: u32, j: u64) -> Self {
        let mut counts = vec![T::zero(); p as usize];
        counts[(j % p as u64) as usize] = T::one();
        Self::from_counts(p, counts).expect("length p")
    }

    /// Canonicalizes an exponent-count vector `N(j)`, `value = sum N(j) e^j`.
    pub fn from_counts(p: u32, mut counts: Vec<T>) -> Result<Self, CycError> {
        if counts.len() != p as usize {
            return Err(CycError::BadLength { p, got: counts.len() });
        }
        let last = counts[p as usize - 1].clone();
        if !last.is_zero() {
            for c in counts.iter_mut() {
                *c = c.checked_sub(&last).ok_or(CycError::Overflow)?;
            }
        }
        Ok(CycInt { p, counts })
    }

    pub fn from_i64_counts(p: u32, counts: &[i64]) -> Result<Self, CycError> {
        let counts = counts.iter().map(|&c| T::from_i64(c).ok_or(CycError::Overflow)).collect::<Result<_, _>>()?;
        Self::from_counts(p, counts)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Canonical counts; the last entry is always zero.
    pub fn counts(&self) -> &[T] {
        &self.counts
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(Zero::is_zero)
    }

    /// `Some(m)` when the value is the rational integer `m`.
    pub fn as_rational_integer(&self) -> Option<&T> {
        self.counts[1..].iter().all(Zero::is_zero).then(|| &self.counts[0])
    }

    fn same_ring(&self, other: &Self) -> Result<(), CycError> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(CycError::MixedP(self.p, other.p))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CycError> {
        self.same_ring(other)?;
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_add(b).ok_or(CycError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(CycInt { p: self.p, counts })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CycError> {
        self.same_ring(other)?;
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_sub(b).ok_or(CycError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(CycInt { p: self.p, counts })
    }

    /// Cyclic convolution of the count vectors, then canonicalization.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, CycError> {
        self.same_ring(other)?;
        let p = self.p as usize;
        let mut out = vec![T::zero(); p];
        for (i, a) in self.counts.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.counts.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a.checked_mul(b).ok_or(CycError::Overflow)?;
                let slot = &mut out[(i + j) % p];
                *slot = slot.checked_add(&prod).ok_or(CycError::Overflow)?;
            }
        }
        Self::from_counts(self.p, out)
    }

    pub fn checked_scale(&self, m: &T) -> Result<Self, CycError> {
        let counts =
            self.counts.iter().map(|c| c.checked_mul(m).ok_or(CycError::Overflow)).collect::<Result<_, _>>()?;
        Ok(CycInt { p: self.p, counts })
    }

    /// Multiplication by `e^j`.
    pub fn rotate(&self, j: u64) -> Self {
        let p = self.p as usize;
        let j = (j % p as u64) as usize;
        let mut counts = vec![T::zero(); p];
        for (i, c) in self.counts.iter().enumerate() {
            counts[(i + j) % p] = c.clone();
        }
        Self::from_counts(self.p, counts).expect("length p")
    }

    /// Complex conjugation, `e^j -> e^{-j}`.
    pub fn conj(&self) -> Self {
        let p = self.p as usize;
        let mut counts = vec![T::zero(); p];
        for (i, c) in self.counts.iter().enumerate() {
            counts[(p - i) % p] = c.clone();
        }
        Self::from_counts(self.p, counts).expect("length p")
    }

    /// `|z|^2 = z * conj(z)`.
    pub fn norm_sq(&self) -> Result<Self, CycError> {
        self.checked_mul(&self.conj())
    }

    /// Converts the counts to another coefficient type.
    pub fn convert<U: Coeff>(&self) -> Result<CycInt<U>, CycError> {
        let counts = self
            .counts
            .iter()
            .map(|c| c.to_i128().and_then(U::from_i128).ok_or(CycError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(CycInt { p: self.p, counts })
    }
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<T: Coeff> $tr<&CycInt<T>> for &CycInt<T> {
            type Output = CycInt<T>;
            fn $method(self, rhs: &CycInt<T>) -> CycInt<T> {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl<T: Coeff> $tr for CycInt<T> {
            type Output = CycInt<T>;
            fn $method(self, rhs: CycInt<T>) -> CycInt<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl<T: Coeff> Neg for &CycInt<T> {
    type Output = CycInt<T>;
    fn neg(self) -> CycInt<T> {
        CycInt { p: self.p, counts: self.counts.iter().map(|c| -c.clone()).collect() }
    }
}

impl<T: Coeff> Neg for CycInt<T> {
    type Output = CycInt<T>;
    fn neg(self) -> CycInt<T> {
        -&self
    }
}

/// Quadratic character of `F_p` via Euler's criterion: `+1`, `-1`, or `0` for `c = 0`.
pub fn eta(p: u32, c: i64) -> i8 {
    let c = c.rem_euclid(p as i64) as u64;
    if c == 0 {
        return 0;
    }
    match crate::gfpn::pow_mod(c, (p as u64 - 1) / 2, p as u64) {
        1 => 1,
        _ => -1,
    }
}

/// Gauss sum `g = sum_j eta(j) e^j`; `g^2 = (-1)^{(p-1)/2} p`.
pub fn gauss_sum<T: Coeff>(p: u32) -> CycInt<T> {
    let counts = (0..p)
        .map(|j| match eta(p, j as i64) {
            1 => T::one(),
            -1 => -T::one(),
            _ => T::zero(),
        })
        .collect();
    CycInt::from_counts(p, counts).expect("length p")
}

/// A unit `+1`, `-1`, `+i`, or `-i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zeta {
    One,
    MinusOne,
    I,
    MinusI,
}

impl Zeta {
    pub fn as_str(self) -> &'static str {
        match self {
            Zeta::One => "1",
            Zeta::MinusOne => "-1",
            Zeta::I => "i",
            Zeta::MinusI => "-i",
        }
    }

    pub fn parse(s: &str) -> Option<Zeta> {
        match s {
            "1" | "+1" => Some(Zeta::One),
            "-1" => Some(Zeta::MinusOne),
            "i" | "+i" => Some(Zeta::I),
            "-i" => Some(Zeta::MinusI),
            _ => None,
        }
    }

    /// `+1` or `-1`: the real sign once the `i` is set aside.
    pub fn sign(self) -> i8 {
        match self {
            Zeta::One | Zeta::I => 1,
            Zeta::MinusOne | Zeta::MinusI => -1,
        }
    }

    pub fn is_imaginary(self) -> bool {
        matches!(self, Zeta::I | Zeta::MinusI)
    }

    pub fn from_parts(sign: i8, imaginary: bool) -> Zeta {
        match (sign >= 0, imaginary) {
            (true, false) => Zeta::One,
            (false, false) => Zeta::MinusOne,
            (true, true) => Zeta::I,
            (false, true) => Zeta::MinusI,
        }
    }

    pub fn negate(self) -> Zeta {
        Zeta::from_parts(-self.sign(), self.is_imaginary())
    }
}

impl fmt::Display for Zeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Zeta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Zeta {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Zeta::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad zeta {s:?}")))
    }
}

/// The exact shape `zeta * p^{e/2} * e_p^j` of a Walsh coefficient, where
/// `e = log_p_magnitude_x2` is the exponent of `|w|^2 = p^e`.
///
/// For odd `e` the half power is carried by the Gauss sum: `g = sqrt(p)` when
/// `p = 1 mod 4` and `g = i sqrt(p)` when `p = 3 mod 4`, so `zeta` is imaginary
/// exactly when `e` is odd and `p = 3 mod 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValueShape {
    pub zeta: Zeta,
    pub j: u32,
    pub log_p_magnitude_x2: u32,
}

/// Whether `zeta` is the unit forced by `p` and the magnitude exponent.
pub fn zeta_admissible(p: u32, exponent: u32, zeta: Zeta) -> bool {
    let needs_i = exponent % 2 == 1 && p % 4 == 3;
    zeta.is_imaginary() == needs_i
}

impl ValueShape {
    pub fn new(p: u32, zeta: Zeta, j: u32, log_p_magnitude_x2: u32) -> Result<Self, CycError> {
        if !zeta_admissible(p, log_p_magnitude_x2, zeta) {
            return Err(CycError::InadmissibleShape { zeta, exponent: log_p_magnitude_x2, p });
        }
        Ok(ValueShape { zeta, j: j % p, log_p_magnitude_x2 })
    }

    /// Integer power `k` in `p^k * g^{uses}`.
    pub fn integer_power(&self) -> u32 {
        self.log_p_magnitude_x2 / 2
    }

    pub fn uses_gauss_sum(&self) -> bool {
        self.log_p_magnitude_x2 % 2 == 1
    }

    pub fn to_cyc_int<T: Coeff>(&self, p: u32) -> Result<CycInt<T>, CycError> {
        let pk = num_traits::checked_pow(T::from_u32(p).ok_or(CycError::Overflow)?, self.integer_power() as usize)
            .ok_or(CycError::Overflow)?;
        let signed = if self.zeta.sign() < 0 { -pk } else { pk };
        let base =
            if self.uses_gauss_sum() { gauss_sum::<T>(p).checked_scale(&signed)? } else { CycInt::from_int(p, signed) };
        Ok(base.rotate(self.j as u64))
    }
}

/// Precomputed table of the `2p` admissible values of a given magnitude.
pub struct ShapeMatcher<T: Coeff = i64> {
    candidates: Vec<(ValueShape, CycInt<T>)>,
}

impl<T: Coeff> ShapeMatcher<T> {
    pub fn new(p: u32, log_p_magnitude_x2: u32) -> Result<Self, CycError> {
        let imaginary = log_p_magnitude_x2 % 2 == 1 && p % 4 == 3;
        let mut candidates = Vec::with_capacity(2 * p as usize);
        for sign in [1i8, -1] {
            for j in 0..p {
                let shape = ValueShape::new(p, Zeta::from_parts(sign, imaginary), j, log_p_magnitude_x2)?;
                candidates.push((shape, shape.to_cyc_int(p)?));
            }
        }
        Ok(ShapeMatcher { candidates })
    }

    /// The unique shape equal to `w`, if any.
    pub fn matches(&self, w: &CycInt<T>) -> Result<Option<ValueShape>, CycError> {
        let mut hits = self.candidates.iter().filter(|(_, v)| v == w);
        match (hits.next(), hits.next()) {
            (None, _) => Ok(None),
            (Some((s, _)), None) => Ok(Some(*s)),
            (Some(_), Some(_)) => Err(CycError::AmbiguousMatch),
        }
    }
}

/// Matches `w` against `zeta * p^{e/2} * e^j` for all admissible `zeta, j`.
pub fn match_shape<T: Coeff>(w: &CycInt<T>, log_p_magnitude_x2: u32) -> Result<Option<ValueShape>, CycError> {
    ShapeMatcher::new(w.p(), log_p_magnitude_x2)?.matches(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = CycInt<i64>;

    #[test]
    fn basic_identities() {
        for p in [3u32, 5, 7] {
            let e = C::root_of_unity(p, 1);
            let em = C::root_of_unity(p, (p - 1) as u64);
            assert_eq!(&e * &em, C::one(p));
            assert_eq!(e.conj(), em);
            let all = C::from_counts(p, vec![1; p as usize]).unwrap();
            assert!(all.is_zero());
            assert!(C::zero(p).norm_sq().unwrap().is_zero());
            for j in 0..p as u64 {
                let z = C::root_of_unity(p, j).checked_scale(&-7).unwrap();
                assert_eq!(z.norm_sq().unwrap(), C::from_int(p, 49));
            }
        }
    }

    #[test]
    fn mixed_rings_are_rejected() {
        let a = C::one(3);
        let b = C::one(5);
        assert_eq!(a.checked_add(&b), Err(CycError::MixedP(3, 5)));
        assert_eq!(a.checked_mul(&b), Err(CycError::MixedP(3, 5)));
    }

    #[test]
    fn overflow_is_reported() {
        let big = C::from_int(3, i64::MAX / 2 + 1);
        assert_eq!(big.checked_add(&big), Err(CycError::Overflow));
        assert_eq!(big.checked_mul(&big), Err(CycError::Overflow));
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(7, 1), 1);
        assert_eq!(eta(3, 2), -1);
        assert_eq!(eta(5, 4), 1);
        assert_eq!(eta(5, 0), 0);
        for p in [3u32, 5, 7, 11, 13] {
            let squares: std::collections::BTreeSet<u32> = (1..p).map(|x| x * x % p).collect();
            for c in 1..p {
                assert_eq!(eta(p, c as i64) == 1, squares.contains(&c));
            }
        }
    }

    #[test]
    fn gauss_sum_identities() {
        let g3 = gauss_sum::<i64>(3);
        assert_eq!(g3, C::from_i64_counts(3, &[0, 1, -1]).unwrap());
        assert_eq!(&g3 * &g3, C::from_int(3, -3));
        let g5 = gauss_sum::<i64>(5);
        assert_eq!(&g5 * &g5, C::from_int(5, 5));
        for p in [3u32, 5, 7, 11, 13] {
            let g = gauss_sum::<i64>(p);
            let sign = if p % 4 == 1 { 1 } else { -1 };
            assert_eq!(&g * &g, C::from_int(p, sign * p as i64));
            assert_eq!(g.norm_sq().unwrap(), C::from_int(p, p as i64));
            assert_eq!(g.conj(), g.checked_scale(&(eta(p, -1) as i64)).unwrap());
        }
    }

    #[test]
    fn shape_examples() {
        let w = C::root_of_unity(3, 1).checked_scale(&9).unwrap();
        let s = match_shape(&w, 4).unwrap().unwrap();
        assert_eq!((s.zeta, s.j), (Zeta::One, 1));
        let w = gauss_sum::<i64>(3).checked_scale(&9).unwrap();
        let s = match_shape(&w, 5).unwrap().unwrap();
        assert_eq!((s.zeta, s.j), (Zeta::I, 0));
        assert_eq!(match_shape(&C::zero(3), 4).unwrap(), None);
        assert!(ValueShape::new(3, Zeta::One, 0, 5).is_err());
        assert!(ValueShape::new(5, Zeta::I, 0, 5).is_err());
    }

    #[test]
    fn shapes_round_trip() {
        for p in [3u32, 5, 7] {
            for e in 0..=9u32 {
                let matcher = ShapeMatcher::<i64>::new(p, e).unwrap();
                for (shape, value) in &matcher.candidates {
                    assert_eq!(matcher.matches(value).unwrap(), Some(*shape));
                    assert_eq!(value.norm_sq().unwrap(), C::from_int(p, (p as i64).pow(e)));
                }
            }
        }
    }

    #[test]
    fn wide_types_agree() {
        let g = gauss_sum::<BigInt>(7);
        let sq = &g * &g;
        assert_eq!(sq, CycInt::from_int(7, BigInt::from(-7)));
        let narrow = gauss_sum::<i64>(7).convert::<i128>().unwrap();
        assert_eq!(narrow, gauss_sum::<i128>(7));
    }

    #[test]
    fn json_form() {
        let z = C::root_of_unity(3, 1);
        assert_eq!(serde_json::to_string(&z).unwrap(), r#"{"p":3,"counts":[0,1,0]}"#);
        let s = ValueShape::new(3, Zeta::MinusI, 2, 9).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"zeta":"-i","j":2,"log_p_magnitude_x2":9}"#);
    }

    fn cyc(p: u32) -> impl Strategy<Value = C> {
        proptest::collection::vec(-50i64..50, p as usize).prop_map(move |v| C::from_counts(p, v).unwrap())
    }

    proptest! {
        #[test]
        fn ring_laws(a in cyc(5), b in cyc(5), c in cyc(5)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            prop_assert_eq!(a.conj().conj(), a.clone());
        }

        #[test]
        fn norm_is_multiplicative(a in cyc(7), b in cyc(7)) {
            let lhs = (&a * &b).norm_sq().unwrap();
            let rhs = &a.norm_sq().unwrap() * &b.norm_sq().unwrap();
            prop_assert_eq!(lhs.clone(), rhs);
            prop_assert_eq!(lhs.conj(), lhs);
        }
    }
}
