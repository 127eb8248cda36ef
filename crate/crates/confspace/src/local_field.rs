//! Exact arithmetic in the field of p-adic numbers.
//!
//! Elements are stored as `unit * p^val` where the unit part is a signed
//! integer coprime to `p` in the balanced residue range modulo `p^prec`.
//! The balanced representative keeps integer and rational inputs exact
//! under negation and subtraction; the canonical digit expansion is
//! recovered on demand. Valuations are exact integers, so absolute values
//! live in the discrete group `{p^k : k in Z}` and every comparison of
//! sizes is an integer comparison. Nothing here ever rounds.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Default number of stored base-p digits of the unit part.
pub const DEFAULT_PRECISION: u32 = 32;

/// An element of Q_p to finite precision.
///
/// Zero is the unique element with a zero unit part; its valuation field is
/// meaningless and its absolute value is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicNumber {
    prime: u64,
    val: i64,
    /// Balanced residue mod `p^prec`: zero iff the number is zero,
    /// otherwise coprime to `p` with `|unit| < p^prec / 2`.
    unit: BigInt,
    prec: u32,
}

/// JSON form is the textual form `p:val:d0d1d2...`.
impl Serialize for PAdicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for PAdicNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PAdicNumber::from_text(&s).map_err(D::Error::custom)
    }
}

fn pow_big(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

/// p-adic valuation of a nonzero integer: largest `t` with `p^t | n`.
fn valuation_of(n: &BigUint, p: u64) -> (u32, BigUint) {
    let p_big = BigUint::from(p);
    let mut t = 0u32;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p_big);
        if r.is_zero() {
            t += 1;
            m = q;
        } else {
            return (t, m);
        }
    }
}

/// Balanced representative of `s` modulo `m`: the residue of smallest
/// absolute value.
fn balanced(s: BigInt, m: &BigUint) -> BigInt {
    let m_int = BigInt::from(m.clone());
    let mut r = s.mod_floor(&m_int);
    if &r * 2 > m_int {
        r -= BigInt::from(m.clone());
    }
    r
}

/// Inverse of `a` modulo `m` for `gcd(a, m) = 1`.
fn mod_inverse(a: &BigUint, m: &BigUint) -> BigUint {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let e = a.extended_gcd(&m_int);
    debug_assert!(e.gcd.is_one(), "unit part must be invertible");
    let x = e.x.mod_floor(&m_int);
    x.to_biguint()
        .expect("mod_floor of positive modulus is nonnegative")
}

impl PAdicNumber {
    /// The zero element of Q_p.
    pub fn zero(prime: u64) -> Self {
        Self::zero_with_precision(prime, DEFAULT_PRECISION)
    }

    pub fn zero_with_precision(prime: u64, prec: u32) -> Self {
        PAdicNumber {
            prime,
            val: 0,
            unit: BigInt::zero(),
            prec,
        }
    }

    /// Embed an integer into Q_p, extracting the p-part into the valuation.
    pub fn from_integer(prime: u64, n: i64) -> Self {
        Self::from_ratio(prime, n, 1)
    }

    /// Embed a rational `num/den` (den != 0, possibly divisible by p).
    ///
    /// The fraction is reduced first so equal rationals get identical
    /// representations; the unit part is the canonical expansion of the
    /// p-free part truncated to the working precision.
    pub fn from_ratio(prime: u64, num: i64, den: i64) -> Self {
        Self::from_ratio_with_precision(prime, num, den, DEFAULT_PRECISION)
    }

    pub fn from_ratio_with_precision(prime: u64, num: i64, den: i64, prec: u32) -> Self {
        assert!(den != 0, "denominator must be nonzero");
        assert!(prime >= 2 && prec >= 1);
        if num == 0 {
            return Self::zero_with_precision(prime, prec);
        }
        let negative = (num < 0) != (den < 0);
        let mut n = BigUint::from(num.unsigned_abs());
        let mut d = BigUint::from(den.unsigned_abs());
        let g = n.gcd(&d);
        n /= &g;
        d /= &g;
        let (vn, n_unit) = valuation_of(&n, prime);
        let (vd, d_unit) = valuation_of(&d, prime);
        let val = vn as i64 - vd as i64;
        let modulus = pow_big(prime, prec);
        let mut unit = BigInt::from((n_unit % &modulus) * mod_inverse(&d_unit, &modulus));
        if negative {
            unit = -unit;
        }
        PAdicNumber {
            prime,
            val,
            unit: balanced(unit, &modulus),
            prec,
        }
    }

    /// Build directly from a valuation and a canonical unit part (the
    /// value of the digit expansion, in `[1, p^prec)` and coprime to `p`).
    pub fn from_parts(prime: u64, val: i64, unit: BigUint, prec: u32) -> Result<Self> {
        if unit.is_zero() {
            return Ok(Self::zero_with_precision(prime, prec));
        }
        let modulus = pow_big(prime, prec);
        if (&unit % prime).is_zero() || unit >= modulus {
            return Err(Error::InvalidParameter(format!(
                "unit part must lie in [1, {prime}^{prec}) and be coprime to {prime}"
            )));
        }
        Ok(PAdicNumber {
            prime,
            val,
            unit: balanced(BigInt::from(unit), &modulus),
            prec,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Valuation exponent: `|x| = p^{-val}`. None for zero.
    pub fn val(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Canonical digits `d0 d1 ...` of the unit part, `d0 != 0` unless zero.
    pub fn digits(&self) -> Vec<u32> {
        let modulus = BigInt::from(pow_big(self.prime, self.prec));
        let mut u = self
            .unit
            .mod_floor(&modulus)
            .to_biguint()
            .expect("mod_floor of positive modulus is nonnegative");
        let mut out = Vec::with_capacity(self.prec as usize);
        let p = BigUint::from(self.prime);
        for _ in 0..self.prec {
            let (q, r) = u.div_rem(&p);
            let small: u64 = r.try_into().expect("digit fits in u64");
            out.push(small as u32);
            u = q;
        }
        out
    }

    /// The absolute value `p^{-val}` (0 for zero).
    pub fn abs(&self) -> f64 {
        match self.val() {
            None => 0.0,
            Some(v) => (self.prime as f64).powi(-v as i32),
        }
    }

    fn check_same_field(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    /// Reduce an exact signed integer `s * p^base_val` to canonical form at
    /// precision `prec`. `Err(PrecisionExhausted)` when `s != 0` but every
    /// digit inside the window cancelled.
    fn reduce(prime: u64, base_val: i64, s: BigInt, prec: u32) -> Result<Self> {
        if s.is_zero() {
            return Ok(Self::zero_with_precision(prime, prec));
        }
        let mag = s.magnitude().clone();
        let (t, unit_full) = valuation_of(&mag, prime);
        if t >= prec {
            return Err(Error::PrecisionExhausted);
        }
        let modulus = pow_big(prime, prec);
        let mut unit = BigInt::from(unit_full);
        if s.is_negative() {
            unit = -unit;
        }
        Ok(PAdicNumber {
            prime,
            val: base_val + t as i64,
            unit: balanced(unit, &modulus),
            prec,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let prec = self.prec.min(other.prec);
        let vmin = self.val.min(other.val);
        let a = (self.val - vmin) as u32;
        let b = (other.val - vmin) as u32;
        let s = &self.unit * BigInt::from(pow_big(self.prime, a))
            + &other.unit * BigInt::from(pow_big(self.prime, b));
        Self::reduce(self.prime, vmin, s, prec)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.neg());
        }
        if self == other {
            return Ok(Self::zero_with_precision(
                self.prime,
                self.prec.min(other.prec),
            ));
        }
        let prec = self.prec.min(other.prec);
        let vmin = self.val.min(other.val);
        let a = (self.val - vmin) as u32;
        let b = (other.val - vmin) as u32;
        let s = &self.unit * BigInt::from(pow_big(self.prime, a))
            - &other.unit * BigInt::from(pow_big(self.prime, b));
        Self::reduce(self.prime, vmin, s, prec)
    }

    /// Exact negation.
    pub fn neg(&self) -> Self {
        PAdicNumber {
            prime: self.prime,
            val: self.val,
            unit: -self.unit.clone(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_field(other)?;
        let prec = self.prec.min(other.prec);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero_with_precision(self.prime, prec));
        }
        let modulus = pow_big(self.prime, prec);
        let unit = balanced(&self.unit * &other.unit, &modulus);
        Ok(PAdicNumber {
            prime: self.prime,
            val: self.val + other.val,
            unit,
            prec,
        })
    }

    /// Distance `|x - y|` as an exact valuation exponent (None when equal).
    pub fn dist_val(&self, other: &Self) -> Result<Option<i64>> {
        Ok(self.sub(other)?.val())
    }

    /// Serialize as `p:val:d0d1d2...` (digits dot-separated for p >= 10;
    /// trailing zero digits trimmed). Zero prints as `p:zero`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return format!("{}:zero", self.prime);
        }
        let digits = self.digits();
        let last = digits.iter().rposition(|&d| d != 0).unwrap_or(0);
        let body: String = if self.prime < 10 {
            digits[..=last]
                .iter()
                .map(|d| char::from_digit(*d, 10).unwrap())
                .collect()
        } else {
            digits[..=last]
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        format!("{}:{}:{}", self.prime, self.val, body)
    }

    /// Parse the textual form produced by [`to_text`](Self::to_text).
    pub fn from_text(s: &str) -> Result<Self> {
        Self::from_text_with_precision(s, DEFAULT_PRECISION)
    }

    pub fn from_text_with_precision(s: &str, prec: u32) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |m: &str| Error::Parse(format!("{m} in p-adic literal {s:?}"));
        if parts.len() < 2 {
            return Err(bad("expected p:val:digits"));
        }
        let prime: u64 = parts[0].parse().map_err(|_| bad("bad prime"))?;
        if parts[1] == "zero" {
            return Ok(Self::zero_with_precision(prime, prec));
        }
        if parts.len() != 3 {
            return Err(bad("expected p:val:digits"));
        }
        let val: i64 = parts[1].parse().map_err(|_| bad("bad valuation"))?;
        let digit_list: Vec<u32> = if parts[2].contains('.') {
            parts[2]
                .split('.')
                .map(|d| d.parse().map_err(|_| bad("bad digit")))
                .collect::<Result<_>>()?
        } else {
            parts[2]
                .chars()
                .map(|c| c.to_digit(10).ok_or_else(|| bad("bad digit")))
                .collect::<Result<_>>()?
        };
        if digit_list.is_empty() || digit_list.len() > prec as usize {
            return Err(bad("digit count outside precision window"));
        }
        let mut unit = BigUint::zero();
        for &d in digit_list.iter().rev() {
            if d as u64 >= prime {
                return Err(bad("digit out of range"));
            }
            unit = unit * prime + d;
        }
        Self::from_parts(prime, val, unit, prec).map_err(|_| bad("non-canonical digits"))
    }
}

impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Canonical total order: zero first, then valuation descending (larger
/// valuation = smaller absolute value first), then digits lexicographically.
impl Ord for PAdicNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        other
            .val
            .cmp(&self.val)
            .then_with(|| self.digits().cmp(&other.digits()))
    }
}

impl PartialOrd for PAdicNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A ball in Q_p^k with radius `p^log_radius`.
///
/// Radii are stored as integer exponents: the valuation group is discrete
/// and float radii would break clopen-ness. A closed ball of radius
/// `p^j` equals the open ball of radius `p^{j+1}`, so `closed = false`
/// is normalized away on construction (`B(L,0,1^-) = pi_L B(L,0,1)`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicBall {
    center: Vec<PAdicNumber>,
    log_radius: i64,
}

impl PAdicBall {
    pub fn new(center: Vec<PAdicNumber>, log_radius: i64) -> Self {
        assert!(!center.is_empty(), "ball needs at least one coordinate");
        let p = center[0].prime();
        assert!(
            center.iter().all(|c| c.prime() == p),
            "mixed primes in center"
        );
        PAdicBall { center, log_radius }
    }

    /// Open ball of radius `p^log_radius`, normalized to its closed form.
    pub fn new_open(center: Vec<PAdicNumber>, log_radius: i64) -> Self {
        Self::new(center, log_radius - 1)
    }

    /// Checked construction from a float radius, which must be an exact
    /// power of the prime.
    pub fn with_radius(center: Vec<PAdicNumber>, radius: f64) -> Result<Self> {
        let p = center[0].prime();
        if !(radius > 0.0) {
            return Err(Error::RadiusNotInValuationGroup(radius, p));
        }
        let j = (radius.ln() / (p as f64).ln()).round() as i64;
        if (p as f64).powi(j as i32) != radius {
            return Err(Error::RadiusNotInValuationGroup(radius, p));
        }
        Ok(Self::new(center, j))
    }

    pub fn prime(&self) -> u64 {
        self.center[0].prime()
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[PAdicNumber] {
        &self.center
    }

    pub fn log_radius(&self) -> i64 {
        self.log_radius
    }

    pub fn radius(&self) -> f64 {
        (self.prime() as f64).powi(self.log_radius as i32)
    }

    /// Membership under the max-of-coordinates ultrametric.
    pub fn contains(&self, x: &[PAdicNumber]) -> Result<bool> {
        if x.len() != self.center.len() {
            return Err(Error::LengthMismatch(x.len(), self.center.len()));
        }
        for (xi, ci) in x.iter().zip(&self.center) {
            if let Some(v) = xi.dist_val(ci)? {
                // |xi - ci| = p^{-v} <= p^{log_radius}  <=>  -v <= log_radius
                if -v > self.log_radius {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Two balls of an ultrametric either nest or are disjoint.
    pub fn intersects(&self, other: &Self) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch(self.dim(), other.dim()));
        }
        // They intersect iff the centers are within the larger radius.
        let r = self.log_radius.max(other.log_radius);
        for (a, b) in self.center.iter().zip(&other.center) {
            if let Some(v) = a.dist_val(b)? {
                if -v > r {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn contains_ball(&self, other: &Self) -> Result<bool> {
        Ok(self.log_radius >= other.log_radius && self.contains(&other.center)?)
    }

    /// Haar volume with the unit ball normalized to mass one per coordinate:
    /// `(p^log_radius)^k`.
    pub fn haar_volume(&self) -> f64 {
        (self.prime() as f64).powi((self.log_radius * self.dim() as i64) as i32)
    }

    /// The `p^k` child balls of radius `p^{log_radius-1}` partitioning a
    /// one-dimensional parent ball (k = 1 only).
    pub fn children(&self) -> Result<Vec<PAdicBall>> {
        if self.dim() != 1 {
            return Err(Error::InvalidParameter(
                "children() expects a 1-d ball".into(),
            ));
        }
        let p = self.prime();
        let c = &self.center[0];
        let mut out = Vec::with_capacity(p as usize);
        for d in 0..p {
            // child centers c + d * p^{-log_radius + ... }: offsets d * p^{j}
            // with p^{j} = radius, scaled down one level
            let offset = if d == 0 {
                PAdicNumber::zero_with_precision(p, c.precision())
            } else {
                let unit = BigUint::from(d);
                PAdicNumber::from_parts(p, -self.log_radius, unit, c.precision())?
            };
            let center = c.add(&offset)?;
            out.push(PAdicBall::new(vec![center], self.log_radius - 1));
        }
        Ok(out)
    }
}

/// Absolute value `p^{-val}`; module-level alias used throughout.
pub fn padic_abs(x: &PAdicNumber) -> f64 {
    x.abs()
}
