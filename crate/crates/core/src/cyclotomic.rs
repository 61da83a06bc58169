//! Exact arithmetic in Q(zeta_D), power basis modulo the D-th cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, Rat};
use crate::error::{Error, Result};

/// Cached data for one level: Phi_D and the reduced powers zeta^j, 0 <= j < D.
#[derive(Debug)]
pub struct CycField {
    pub level: u64,
    pub degree: usize,
    pub phi: Vec<BigInt>,
    powers: Vec<Vec<BigInt>>,
}

fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den monic
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![BigInt::zero(); r.len() - dn];
    for i in (0..q.len()).rev() {
        let c = r[i + dn].clone();
        if c.is_zero() {
            continue;
        }
        for (j, d) in den.iter().enumerate() {
            r[i + j] -= &c * d;
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(|c| c.is_zero()));
    q
}

fn cyclotomic_poly(d: u64, cache: &mut HashMap<u64, Vec<BigInt>>) -> Vec<BigInt> {
    if let Some(p) = cache.get(&d) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); d as usize + 1];
    num[0] = -BigInt::one();
    num[d as usize] = BigInt::one();
    for e in 1..d {
        if d.is_multiple_of(e) {
            let f = cyclotomic_poly(e, cache);
            num = int_poly_div_exact(&num, &f);
        }
    }
    cache.insert(d, num.clone());
    num
}

fn field_cache() -> &'static Mutex<HashMap<u64, Arc<CycField>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CycField>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn poly_cache() -> &'static Mutex<HashMap<u64, Vec<BigInt>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The cyclotomic field of the given level; computed once and shared.
pub fn field(level: u64) -> Arc<CycField> {
    assert!(level >= 1, "level must be positive");
    if let Some(f) = field_cache().lock().unwrap().get(&level) {
        return f.clone();
    }
    let phi = {
        let mut pc = poly_cache().lock().unwrap();
        cyclotomic_poly(level, &mut pc)
    };
    let degree = phi.len() - 1;
    let mut powers = Vec::with_capacity(level as usize);
    let mut cur = vec![BigInt::zero(); degree];
    cur[0] = BigInt::one();
    for _ in 0..level {
        powers.push(cur.clone());
        // multiply by x and reduce with the monic Phi
        let top = cur[degree - 1].clone();
        let mut next = vec![BigInt::zero(); degree];
        for i in (1..degree).rev() {
            next[i] = cur[i - 1].clone();
        }
        if !top.is_zero() {
            for i in 0..degree {
                next[i] -= &top * &phi[i];
            }
        }
        cur = next;
    }
    let f = Arc::new(CycField { level, degree, phi, powers });
    field_cache().lock().unwrap().insert(level, f.clone());
    f
}

pub fn cyclotomic_polynomial(level: u64) -> Vec<BigInt> {
    field(level).phi.clone()
}

impl CycField {
    /// Power-basis coordinates of zeta^e.
    pub fn power(&self, e: i64) -> &[BigInt] {
        &self.powers[e.rem_euclid(self.level as i64) as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycNumber {
    level: u64,
    coords: Vec<Rat>,
}

impl CycNumber {
    pub fn zero(level: u64) -> Self {
        let d = field(level).degree;
        CycNumber { level, coords: vec![Rat::zero(); d] }
    }

    pub fn from_rat(level: u64, r: Rat) -> Self {
        let mut z = Self::zero(level);
        z.coords[0] = r;
        z
    }

    pub fn one(level: u64) -> Self {
        Self::from_rat(level, Rat::one())
    }

    pub fn from_int(level: u64, n: i64) -> Self {
        Self::from_rat(level, arith::rint(n))
    }

    /// zeta_D^e.
    pub fn root_of_unity(level: u64, e: i64) -> Self {
        let f = field(level);
        let coords = f.power(e).iter().map(|c| Rat::from_integer(c.clone())).collect();
        CycNumber { level, coords }
    }

    /// Builds from power-basis coordinates; longer inputs are reduced modulo Phi_D.
    pub fn from_coords(level: u64, coords: Vec<Rat>) -> Self {
        let f = field(level);
        if coords.len() == f.degree {
            return CycNumber { level, coords };
        }
        let mut out = vec![Rat::zero(); f.degree];
        for (j, c) in coords.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, pc) in out.iter_mut().zip(f.power(j as i64)) {
                if !pc.is_zero() {
                    *o += &c * pc;
                }
            }
        }
        CycNumber { level, coords: out }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    /// The value as a rational, if it lies in Q.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        CycNumber { level: self.level, coords: self.coords.iter().map(|c| c * r).collect() }
    }

    /// Adds `r * zeta^e` in place.
    pub fn add_root_multiple(&mut self, r: &Rat, e: i64) {
        let f = field(self.level);
        for (o, pc) in self.coords.iter_mut().zip(f.power(e)) {
            if !pc.is_zero() {
                *o += r * pc;
            }
        }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = CycNumber::one(self.level);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Inverse via the extended Euclidean algorithm in Q[x] against Phi_D.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let f = field(self.level);
        let phi: Vec<Rat> = f.phi.iter().map(|c| Rat::from_integer(c.clone())).collect();
        let a = trim(self.coords.clone());
        // invariant: s_i * a == r_i (mod phi)
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1) = (vec![], vec![Rat::one()]);
        while r1.len() > 1 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r1.is_empty() {
            return Err(Error::DivisionByZero);
        }
        let c = r1[0].recip();
        let coords = s1.into_iter().map(|x| x * &c).collect();
        Ok(CycNumber::from_coords(self.level, coords).normalized())
    }

    fn normalized(self) -> Self {
        let d = field(self.level).degree;
        if self.coords.len() == d {
            self
        } else {
            CycNumber::from_coords(self.level, self.coords)
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self * &other.inv()?)
    }

    /// Image under Q(zeta_D) -> Q(zeta_D'), zeta_D -> zeta_D'^(D'/D).
    pub fn embed(&self, new_level: u64) -> Result<Self> {
        if !new_level.is_multiple_of(self.level) {
            return Err(Error::Domain(format!("cannot embed level {} into level {}", self.level, new_level)));
        }
        if new_level == self.level {
            return Ok(self.clone());
        }
        let step = (new_level / self.level) as i64;
        let mut out = CycNumber::zero(new_level);
        for (i, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                out.add_root_multiple(c, i as i64 * step);
            }
        }
        Ok(out)
    }

    /// The automorphism zeta -> zeta^d, gcd(d, D) = 1.
    pub fn galois_sigma(&self, d: i64) -> Result<Self> {
        if arith::gcd(d, self.level as i64) != 1 {
            return Err(Error::Domain(format!("sigma_{d} undefined at level {}", self.level)));
        }
        let mut out = CycNumber::zero(self.level);
        for (i, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                out.add_root_multiple(c, i as i64 * d);
            }
        }
        Ok(out)
    }

    /// Whether every power-basis coordinate lies in p^t Z.
    pub fn is_p_integral(&self, p: u64, t: i64) -> bool {
        let pt = BigInt::from(p).pow(t.unsigned_abs() as u32);
        self.coords.iter().all(|c| {
            let x = if t >= 0 { c / Rat::from_integer(pt.clone()) } else { c * Rat::from_integer(pt.clone()) };
            x.is_integer()
        })
    }

    /// Largest t with all coordinates in p^t Z_(p); `None` for zero.
    pub fn coordinate_valuation(&self, p: u64) -> Option<i64> {
        self.coords.iter().filter_map(|c| arith::vp_rat(c, p)).min()
    }

    /// Membership in p^t Z_(p)[zeta], i.e. after clearing prime-to-p denominators.
    pub fn is_p_integral_local(&self, p: u64, t: i64) -> bool {
        match self.coordinate_valuation(p) {
            None => true,
            Some(v) => v >= t,
        }
    }

    /// Least common multiple of the prime-to-p parts of the coordinate denominators.
    pub fn prime_to_p_denominator(&self, p: u64) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(&arith::prime_to_p(c.denom(), p)))
    }

    pub fn to_complex(&self) -> Complex64 {
        let step = std::f64::consts::TAU / self.level as f64;
        self.coords.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (i, c)| {
            if c.is_zero() {
                acc
            } else {
                acc + Complex64::from_polar(arith::rat_to_f64(c), step * i as f64)
            }
        })
    }
}

fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    trim(out)
}

fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].recip();
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = &r[r.len() - 1] * &lead;
        for (j, y) in b.iter().enumerate() {
            r[shift + j] -= &c * y;
        }
        q[shift] = c;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

impl Add for &CycNumber {
    type Output = CycNumber;
    fn add(self, o: &CycNumber) -> CycNumber {
        assert_eq!(self.level, o.level, "level mismatch");
        CycNumber { level: self.level, coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CycNumber {
    type Output = CycNumber;
    fn sub(self, o: &CycNumber) -> CycNumber {
        assert_eq!(self.level, o.level, "level mismatch");
        CycNumber { level: self.level, coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect() }
    }
}

impl AddAssign<&CycNumber> for CycNumber {
    fn add_assign(&mut self, o: &CycNumber) {
        assert_eq!(self.level, o.level, "level mismatch");
        for (a, b) in self.coords.iter_mut().zip(&o.coords) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl SubAssign<&CycNumber> for CycNumber {
    fn sub_assign(&mut self, o: &CycNumber) {
        assert_eq!(self.level, o.level, "level mismatch");
        for (a, b) in self.coords.iter_mut().zip(&o.coords) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

impl Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        CycNumber { level: self.level, coords: self.coords.iter().map(|c| -c).collect() }
    }
}

impl Mul for &CycNumber {
    type Output = CycNumber;
    fn mul(self, o: &CycNumber) -> CycNumber {
        assert_eq!(self.level, o.level, "level mismatch");
        let f = field(self.level);
        let d = f.degree;
        let mut prod = vec![Rat::zero(); 2 * d - 1];
        let mut any = false;
        for (i, x) in self.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coords.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                    any = true;
                }
            }
        }
        if !any {
            return CycNumber::zero(self.level);
        }
        let mut out: Vec<Rat> = prod[..d].to_vec();
        for (j, c) in prod.iter().enumerate().skip(d) {
            if c.is_zero() {
                continue;
            }
            for (o, pc) in out.iter_mut().zip(f.power(j as i64)) {
                if !pc.is_zero() {
                    *o += c * pc;
                }
            }
        }
        CycNumber { level: self.level, coords: out }
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let cs = arith::rat_to_string(&a);
            let cs = if a.is_integer() { cs } else { format!("({cs})") };
            match i {
                0 => write!(f, "{cs}")?,
                _ => {
                    let z = if i == 1 { format!("z{}", self.level) } else { format!("z{}^{}", self.level, i) };
                    if a.is_one() {
                        write!(f, "{z}")?
                    } else {
                        write!(f, "{cs}*{z}")?
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rint};

    #[test]
    fn small_cyclotomic_polynomials() {
        let ints = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(12), ints(&[1, 0, -1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(15).len(), 9);
    }

    #[test]
    fn zeta_cube_sums() {
        let z = CycNumber::root_of_unity(3, 1);
        let s = &(&CycNumber::one(3) + &z) + &z.pow(2).unwrap();
        assert!(s.is_zero());
        let z5 = CycNumber::root_of_unity(5, 1);
        assert!(z5.pow(5).unwrap().is_one());
        assert_eq!(CycNumber::root_of_unity(5, -1), z5.pow(4).unwrap());
    }

    #[test]
    fn inverse_of_one_minus_zeta() {
        let z = CycNumber::root_of_unity(7, 2);
        let x = &CycNumber::one(7) - &z;
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
        assert!(CycNumber::zero(7).inv().is_err());
        // (1 - zeta_p) has norm p, so its inverse is not integral
        assert!(!y.is_p_integral(7, 0));
    }

    #[test]
    fn embed_then_sigma() {
        let z3 = CycNumber::root_of_unity(3, 1);
        let e = z3.embed(15).unwrap();
        assert_eq!(e, CycNumber::root_of_unity(15, 5));
        assert!(z3.embed(10).is_err());
        assert_eq!(z3.galois_sigma(2).unwrap(), CycNumber::root_of_unity(3, 2));
        assert!(z3.galois_sigma(3).is_err());
    }

    #[test]
    fn integrality() {
        let x = CycNumber::from_rat(5, rint(25));
        assert!(x.is_p_integral(5, 2));
        assert!(!x.is_p_integral(5, 3));
        let y = CycNumber::from_rat(5, rat(1, 2));
        assert!(!y.is_p_integral(5, 0));
        assert!(y.is_p_integral_local(5, 0));
        assert_eq!(CycNumber::from_rat(5, rat(10, 3)).coordinate_valuation(5), Some(1));
    }

    #[test]
    fn complex_value() {
        let z = CycNumber::root_of_unity(4, 1).to_complex();
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn level_mismatch_is_an_error() {
        let a = CycNumber::one(3);
        let b = CycNumber::one(5);
        assert!(matches!(a.checked_add(&b), Err(Error::LevelMismatch(3, 5))));
    }

    #[test]
    fn display() {
        let x = &CycNumber::from_rat(5, rat(-1, 2)) + &CycNumber::root_of_unity(5, 2);
        assert_eq!(x.to_string(), "-(1/2) + z5^2");
        assert_eq!(CycNumber::zero(3).to_string(), "0");
    }
}
