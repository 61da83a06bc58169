//! Small integer and rational helpers shared by the other modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Least non-negative residue.
pub fn modp(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

pub fn euler_phi(mut n: u64) -> usize {
    let mut r = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r as usize
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exponent of `p` in the nonzero integer `n`.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a rational, `None` for zero.
pub fn vp_rat(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(vp_int(x.numer(), p) - vp_int(x.denom(), p))
    }
}

pub fn vp_u64(n: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut n = n;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Splits `n = p^v * m` with `m` prime to `p`; returns `(p^v, m)`.
pub fn split_p_part(n: u64, p: u64) -> (u64, u64) {
    let mut pp = 1;
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
        pp *= p;
    }
    (pp, m)
}

/// Prime-to-p part of a positive integer.
pub fn prime_to_p(n: &BigInt, p: u64) -> BigInt {
    let pb = BigInt::from(p);
    let mut n = n.abs();
    while (&n % &pb).is_zero() {
        n /= &pb;
    }
    n
}

pub fn pow_u(b: u64, e: u32) -> u64 {
    b.checked_pow(e).expect("integer overflow in power")
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * BigInt::from(i))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Generalized binomial coefficient `m choose l` for any integer `m`.
pub fn binomial_signed(m: i64, l: u64) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..l {
        num *= BigInt::from(m - i as i64);
    }
    num / factorial(l)
}

/// Bernoulli numbers B_0..=B_n with B_1 = -1/2.
pub fn bernoulli_numbers(n: usize) -> Vec<Rat> {
    let mut b = vec![Rat::zero(); n + 1];
    b[0] = Rat::one();
    for m in 1..=n {
        let mut s = Rat::zero();
        for (k, bk) in b.iter().enumerate().take(m) {
            s += Rat::from_integer(binomial(m as u64 + 1, k as u64)) * bk;
        }
        b[m] = -s / rint(m as i64 + 1);
    }
    b
}

/// Bernoulli polynomial B_k(x).
pub fn bernoulli_poly(k: usize, x: &Rat) -> Rat {
    let b = bernoulli_numbers(k);
    let mut s = Rat::zero();
    let mut xp = Rat::one();
    // sum_j C(k,j) B_{k-j} x^j
    for j in 0..=k {
        s += Rat::from_integer(binomial(k as u64, j as u64)) * &b[k - j] * &xp;
        xp *= x;
    }
    s
}

/// Periodic Bernoulli function with the convention that B~_1 vanishes at integers.
pub fn periodic_bernoulli(k: usize, x: &Rat) -> Rat {
    let fx = x - x.floor();
    if k == 1 && fx.is_zero() {
        return Rat::zero();
    }
    bernoulli_poly(k, &fx)
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

pub fn rat_pow(x: &Rat, e: i64) -> Rat {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Modular inverse of `a` modulo `m` (assumes coprime).
pub fn inv_mod(a: i64, m: i64) -> i64 {
    let g = a.rem_euclid(m).extended_gcd(&m);
    assert!(g.gcd == 1, "{a} not invertible mod {m}");
    g.x.rem_euclid(m)
}

pub fn rat_to_string(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_small() {
        let b = bernoulli_numbers(6);
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert!(b[3].is_zero() && b[5].is_zero());
    }

    #[test]
    fn bernoulli_multiplication_theorem() {
        // sum_i B_k((x+i)/D) = D^{1-k} B_k(x)
        for k in 1..6usize {
            for d in 2..5i64 {
                let x = rat(2, 7);
                let lhs: Rat = (0..d).map(|i| bernoulli_poly(k, &((&x + rint(i)) / rint(d)))).sum();
                assert_eq!(lhs, rat_pow(&rint(d), 1 - k as i64) * bernoulli_poly(k, &x));
            }
        }
    }

    #[test]
    fn periodic_b1_at_integers() {
        assert!(periodic_bernoulli(1, &rint(3)).is_zero());
        assert_eq!(periodic_bernoulli(1, &rat(7, 5)), rat(2, 5) - rat(1, 2));
    }

    #[test]
    fn phi_and_splits() {
        assert_eq!(euler_phi(75), 40);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(split_p_part(75, 5), (25, 3));
        assert_eq!(vp_rat(&rat(50, 3), 5), Some(2));
        assert_eq!(binomial_signed(-2, 3), BigInt::from(-4));
        assert_eq!(inv_mod(7, 25), 18);
    }
}
