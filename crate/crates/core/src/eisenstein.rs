//! Theta, its logarithmic x2-derivatives, the weight-k series F and E, and Siegel units.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Rat};
use crate::cyclotomic::CycNumber;
use crate::error::{domain, Result};
use crate::product::{theta_factored, FactoredSeries};
use crate::qseries::QExpansion;

/// The torsion point (a/L, b/L) of (Q/Z)^2, stored with 0 <= a, b < L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorsionIndex {
    pub level: u64,
    pub a: i64,
    pub b: i64,
}

impl TorsionIndex {
    pub fn new(level: u64, a: i64, b: i64) -> Self {
        assert!(level >= 1);
        let l = level as i64;
        TorsionIndex { level, a: a.rem_euclid(l), b: b.rem_euclid(l) }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn scale(&self, c: i64) -> Self {
        TorsionIndex::new(self.level, self.a * c, self.b * c)
    }
}

/// The p-part action of u: the residue x mod L with x = u a mod p^v and x = a mod L',
/// where L = p^v L' and gcd(L', p) = 1.
pub fn u_act(u: i64, p: u64, level: u64, a: i64) -> i64 {
    let (pv, lp) = arith::split_p_part(level, p);
    let (pv, lp) = (pv as i64, lp as i64);
    let target_p = (u * a).rem_euclid(pv);
    let target_l = a.rem_euclid(lp);
    // CRT
    let inv = if lp == 1 { 0 } else { arith::inv_mod(pv.rem_euclid(lp), lp) };
    let k = ((target_l - target_p).rem_euclid(lp) * inv).rem_euclid(lp.max(1));
    (target_p + pv * k).rem_euclid(level as i64)
}

pub fn u_act_index(u: i64, p: u64, idx: &TorsionIndex) -> TorsionIndex {
    TorsionIndex::new(idx.level, u_act(u, p, idx.level, idx.a), u_act(u, p, idx.level, idx.b))
}

fn theta_for(s: u64, l: u64, a: i64, b: i64, prec: &Rat) -> Result<FactoredSeries> {
    // leading exponent first, then regenerate with enough factors
    let probe = theta_factored(s, l, a, b, &Rat::zero())?;
    let bound = (prec - &probe.q_exp).max(prec.clone()).max(Rat::zero());
    theta_factored(s, l, a, b, &bound)
}

/// theta(q^s, q^{a/L} zeta_L^b) at the literal lift (a, b); coefficients in level 2L.
pub fn theta_at_lift(s: u64, l: u64, a: i64, b: i64, prec: &Rat) -> Result<QExpansion> {
    let f = theta_for(s, l, a, b, prec)?;
    f.to_series(prec, 2 * l)?.with_exp_denom(arith::lcm(12 * s, 2 * l))
}

pub fn theta_spec(s: u64, idx: &TorsionIndex, prec: &Rat) -> Result<QExpansion> {
    theta_at_lift(s, idx.level, idx.a, idx.b, prec)
}

/// D2 log theta at the literal lift. Shifting a by sL changes it by -1.
pub fn d2log_at_lift(s: u64, l: u64, a: i64, b: i64, prec: &Rat) -> Result<QExpansion> {
    e_series_at_lift(1, s, l, a, b, prec)
}

pub fn d2log_theta_spec(s: u64, idx: &TorsionIndex, prec: &Rat) -> Result<QExpansion> {
    d2log_at_lift(s, idx.level, idx.a, idx.b, prec)
}

/// D2^{k-1} of D2 log theta at the literal lift; coefficients in level L.
pub fn e_series_at_lift(k: u32, s: u64, l: u64, a: i64, b: i64, prec: &Rat) -> Result<QExpansion> {
    if k == 0 {
        return domain("weight must be at least 1");
    }
    let f = theta_factored(s, l, a, b, prec)?;
    f.d2_log_derivative(k - 1, prec)?.with_exp_denom(l * s)
}

pub fn e_series_spec(k: u32, s: u64, idx: &TorsionIndex, prec: &Rat) -> Result<QExpansion> {
    e_series_at_lift(k, s, idx.level, idx.a, idx.b, prec)
}

/// Closed form of the Eisenstein-summed series F^(k)_{a/L, b/L}:
/// -B~_k(a/L)/k + sum_{m, mu = a/L} mu^{k-1} zeta^{mb} q^{m mu}
///   + (-1)^k sum_{m, mu = -a/L} mu^{k-1} zeta^{-mb} q^{m mu}.
///
/// At (0,0) and k = 2 the flag `hecke_e2` selects the non-holomorphic-corrected constant.
pub fn eisenstein_f(k: u32, idx: &TorsionIndex, prec: &Rat, hecke_e2: bool) -> Result<QExpansion> {
    if k == 0 {
        return domain("weight must be at least 1");
    }
    if k == 2 && idx.is_zero() && !hecke_e2 {
        return domain("F^(2) at (0,0) needs the hecke_e2 flag");
    }
    let l = idx.level;
    let li = l as i64;
    let mut out = QExpansion::zero(l, l, prec.clone());
    let ar = arith::rat(idx.a, li);
    let c0 = -arith::periodic_bernoulli(k as usize, &ar) / arith::rint(k as i64);
    out.add_term(0, &CycNumber::from_rat(l, c0));
    let sign = if k.is_multiple_of(2) { Rat::one() } else { -Rat::one() };
    for (start, bsign, w) in [(idx.a, 1i64, Rat::one()), ((li - idx.a) % li, -1, sign)] {
        // mu = (start + L j)/L > 0
        let mut j0 = if start == 0 { 1 } else { 0 };
        loop {
            let mu_num = start + li * j0;
            if arith::rat(mu_num, li) >= *prec {
                break;
            }
            let mu = arith::rat(mu_num, li);
            let mupow = arith::rat_pow(&mu, k as i64 - 1);
            let mut m = 1i64;
            while arith::rat(m * mu_num, li) < *prec {
                out.add_root_term(m * mu_num, &(&w * &mupow), bsign * m * idx.b);
                m += 1;
            }
            j0 += 1;
        }
    }
    Ok(out)
}

/// u^2 F_{a,b} - u^{2-k} F_{<u>a,<u>b}.
pub fn eisenstein_f_u(k: u32, u: i64, p: u64, idx: &TorsionIndex, prec: &Rat) -> Result<QExpansion> {
    check_u(u, p)?;
    let f1 = eisenstein_f(k, idx, prec, false)?;
    let f2 = eisenstein_f(k, &u_act_index(u, p, idx), prec, false)?;
    let ur = arith::rint(u);
    f1.scale_rat(&(&ur * &ur)).sub(&f2.scale_rat(&arith::rat_pow(&ur, 2 - k as i64)))
}

fn check_u(u: i64, p: u64) -> Result<()> {
    if u.rem_euclid(p as i64) == 0 {
        return domain(format!("u = {u} must be a unit at p = {p}"));
    }
    Ok(())
}

/// Siegel unit g_c = theta^{c^2}(z) / theta(c z) as a factored product; lift-independent.
/// Factors are generated up to q-exponent `bound`, which is the relative precision of the
/// expansion.
pub fn siegel_c_factored(c: i64, idx: &TorsionIndex, bound: &Rat) -> Result<FactoredSeries> {
    siegel_c_factored_at_lift(c, idx.level, idx.a, idx.b, bound)
}

pub fn siegel_c_factored_at_lift(c: i64, l: u64, a: i64, b: i64, bound: &Rat) -> Result<FactoredSeries> {
    if arith::gcd(c, 6) != 1 {
        return domain("c must be prime to 6");
    }
    if (a * c).rem_euclid(l as i64) == 0 && (b * c).rem_euclid(l as i64) == 0 {
        return domain("c annihilates the torsion point");
    }
    let t = theta_factored(1, l, a, b, bound)?;
    let tc = theta_factored(1, l, c * a, c * b, bound)?.scale_degrees(c);
    Ok(t.pow(c * c).mul(&tc.inv()))
}

/// Expansion of a unit to O(q^{E + rel}), E its leading exponent.
pub fn unit_series(f: &FactoredSeries, rel: &Rat, level: u64) -> Result<QExpansion> {
    f.to_series(&(&f.q_exp + rel), level)
}

/// g_c to relative precision `rel`; coefficients in level L.
pub fn siegel_unit_c(c: i64, idx: &TorsionIndex, rel: &Rat) -> Result<QExpansion> {
    siegel_unit_c_at_lift(c, idx.level, idx.a, idx.b, rel)
}

pub fn siegel_unit_c_at_lift(c: i64, l: u64, a: i64, b: i64, rel: &Rat) -> Result<QExpansion> {
    let f = siegel_c_factored_at_lift(c, l, a, b, rel)?;
    unit_series(&f, rel, l)?.with_exp_denom(l)
}

/// D2 log g_c, read from the factor tags.
pub fn siegel_c_d2log(c: i64, idx: &TorsionIndex, prec: &Rat) -> Result<QExpansion> {
    siegel_c_factored(c, idx, prec)?.d2_log_derivative(0, prec)?.with_exp_denom(idx.level)
}

/// Klein form normalization q^{B_2(a)/2} (1 - x) prod(...) at the canonical lift,
/// up to a root of unity.
fn klein_factored(idx: &TorsionIndex, bound: &Rat) -> Result<FactoredSeries> {
    let t = theta_factored(1, idx.level, idx.a, idx.b, bound)?;
    let ar = arith::rat(idx.a, idx.level as i64);
    let mut g = t.drop_constant();
    g.q_exp += &ar * &ar / arith::rint(2);
    Ok(g)
}

/// g_{u,t} = g_t^{u^2} / g_{<u>t}, normalized up to a root of unity.
pub fn siegel_u_factored(u: i64, p: u64, idx: &TorsionIndex, bound: &Rat) -> Result<FactoredSeries> {
    check_u(u, p)?;
    if idx.is_zero() {
        return domain("Siegel unit at the origin");
    }
    let t2 = u_act_index(u, p, idx);
    Ok(klein_factored(idx, bound)?.pow(u * u).mul(&klein_factored(&t2, bound)?.inv()))
}

pub fn siegel_unit_u(u: i64, p: u64, idx: &TorsionIndex, rel: &Rat) -> Result<QExpansion> {
    unit_series(&siegel_u_factored(u, p, idx, rel)?, rel, idx.level)
}

/// q d/dq log g_{u,t}.
pub fn dlog_siegel_u(u: i64, p: u64, idx: &TorsionIndex, prec: &Rat) -> Result<QExpansion> {
    siegel_u_factored(u, p, idx, prec)?.dlog_q(prec)
}

/// Exact rational Bernoulli constant -B~_k(a)/k used by F.
pub fn f_constant_term(k: u32, idx: &TorsionIndex) -> Rat {
    -arith::periodic_bernoulli(k as usize, &arith::rat(idx.a, idx.level as i64)) / arith::rint(k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rint};

    #[test]
    fn theta_leading_term_half_period() {
        let t = theta_spec(1, &TorsionIndex::new(2, 1, 0), &rint(2)).unwrap();
        let (e, c) = t.terms().next().unwrap();
        assert_eq!(e, rat(1, 12) - rat(1, 4));
        assert_eq!(c.as_rational(), Some(rint(-1)));
    }

    #[test]
    fn theta_is_odd() {
        // theta(-z) = -theta(z); -tau/2 is the lift -1 of the half period
        let p = rint(3);
        let t = theta_at_lift(1, 2, 1, 0, &p).unwrap();
        let tm = theta_at_lift(1, 2, -1, 0, &p).unwrap();
        assert!(t.add(&tm).unwrap().is_zero());
    }

    #[test]
    fn theta_lattice_point_rejected() {
        assert!(theta_spec(1, &TorsionIndex::new(3, 0, 0), &rint(1)).is_err());
    }

    #[test]
    fn d2log_constants() {
        let g = d2log_theta_spec(1, &TorsionIndex::new(5, 2, 1), &rint(2)).unwrap();
        assert_eq!(g.constant_term().as_rational(), Some(rat(-1, 2)));
        let g0 = d2log_theta_spec(1, &TorsionIndex::new(3, 0, 1), &rint(2)).unwrap();
        let z = CycNumber::root_of_unity(3, 1);
        // 1/2 (x+1)/(x-1) at x = zeta_3
        let half = (&z + &CycNumber::one(3)).checked_div(&(&z - &CycNumber::one(3))).unwrap().scale(&rat(1, 2));
        assert_eq!(g0.constant_term(), half);
    }

    #[test]
    fn d2log_quasi_periodicity() {
        let p = rint(3);
        for a in 1..5 {
            let g = d2log_at_lift(1, 5, a, 2, &p).unwrap();
            let g1 = d2log_at_lift(1, 5, a + 5, 2, &p).unwrap();
            let one = QExpansion::constant(CycNumber::one(5), p.clone());
            assert!(g1.add(&one).unwrap().eq_to_prec(&g));
        }
    }

    #[test]
    fn e2_constant_at_torsion_of_order_l() {
        let z = CycNumber::root_of_unity(4, 1);
        let e = e_series_spec(2, 1, &TorsionIndex::new(4, 0, 1), &rint(2)).unwrap();
        let zm1 = &z - &CycNumber::one(4);
        let expect = -&z.checked_div(&(&zm1 * &zm1)).unwrap();
        assert_eq!(e.constant_term(), expect);
    }

    #[test]
    fn f_examples() {
        let f3 = eisenstein_f(3, &TorsionIndex::new(1, 0, 0), &rint(5), false).unwrap();
        assert!(f3.is_zero());
        assert!(eisenstein_f(2, &TorsionIndex::new(1, 0, 0), &rint(3), false).is_err());
        let f2 = eisenstein_f(2, &TorsionIndex::new(1, 0, 0), &rint(5), true).unwrap();
        assert_eq!(f2.constant_term().as_rational(), Some(rat(-1, 12)));
        // 2 sigma_1(n)
        for (n, s) in [(1, 1), (2, 3), (3, 4), (4, 7)] {
            assert_eq!(f2.coeff(&rint(n)).as_rational(), Some(rint(2 * s)));
        }
        let f4 = eisenstein_f(4, &TorsionIndex::new(1, 0, 0), &rint(3), false).unwrap();
        assert_eq!(f4.constant_term().as_rational(), Some(rat(1, 120)));
        assert_eq!(f4.coeff(&rint(2)).as_rational(), Some(rint(18)));
    }

    #[test]
    fn f_u_constant_example() {
        let f = eisenstein_f_u(1, 7, 5, &TorsionIndex::new(5, 1, 0), &rint(1)).unwrap();
        assert_eq!(f.constant_term().as_rational(), Some(rint(14)));
    }

    #[test]
    fn u_act_crt() {
        // L = 75 = 25 * 3: x = 7a mod 25, x = a mod 3
        let x = u_act(7, 5, 75, 4);
        assert_eq!(x.rem_euclid(25), 28 % 25);
        assert_eq!(x.rem_euclid(3), 1);
        assert_eq!(u_act(7, 5, 3, 2), 2);
        assert_eq!(u_act(7, 5, 5, 1), 2);
    }

    #[test]
    fn siegel_c_lift_independent() {
        let p = rint(2);
        for (a, b) in [(0, 1), (1, 0), (2, 1)] {
            let base = siegel_unit_c_at_lift(5, 3, a, b, &p).unwrap();
            for (j, l) in [(1, 0), (0, 1), (-1, 2), (2, -1)] {
                let other = siegel_unit_c_at_lift(5, 3, a + 3 * j, b + 3 * l, &p).unwrap();
                assert_eq!(base, other);
            }
        }
    }

    #[test]
    fn siegel_c_rejects_killed_points() {
        assert!(siegel_unit_c(5, &TorsionIndex::new(5, 1, 2), &rint(1)).is_err());
        assert!(siegel_unit_c(3, &TorsionIndex::new(5, 1, 2), &rint(1)).is_err());
    }
}
