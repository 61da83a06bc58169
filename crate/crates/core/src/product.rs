//! Finite products `sign * e(rho) * q^E * prod (1 - C q^e)^m` with an x2-degree attached to
//! the monomial and to every factor, so that q d/dq and the x2-derivative of the
//! logarithm can be read off without expanding.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, Rat};
use crate::cyclotomic::CycNumber;
use crate::error::{domain, Result};
use crate::qseries::QExpansion;

/// `(1 - coeff * q^exp)^mult`, where the monomial `coeff * q^exp` has x2-degree `deg`.
#[derive(Clone, Debug)]
pub struct ProductFactor {
    pub coeff: CycNumber,
    pub exp: Rat,
    pub deg: i64,
    pub mult: i64,
}

#[derive(Clone, Debug)]
pub struct FactoredSeries {
    /// Level shared by all factor coefficients.
    pub level: u64,
    pub sign: i64,
    /// The constant root of unity e(rho).
    pub rho: Rat,
    pub q_exp: Rat,
    pub x2_deg: Rat,
    pub factors: Vec<ProductFactor>,
    /// Every omitted factor has q-exponent at least this.
    pub complete_below: Rat,
}

fn denom_u64(r: &Rat) -> u64 {
    r.denom().to_u64().expect("denominator overflow")
}

impl FactoredSeries {
    pub fn one(level: u64) -> Self {
        FactoredSeries {
            level,
            sign: 1,
            rho: Rat::zero(),
            q_exp: Rat::zero(),
            x2_deg: Rat::zero(),
            factors: vec![],
            complete_below: arith::rint(i64::MAX / 4),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.level, o.level, "level mismatch");
        let mut factors = self.factors.clone();
        factors.extend(o.factors.iter().cloned());
        FactoredSeries {
            level: self.level,
            sign: self.sign * o.sign,
            rho: &self.rho + &o.rho,
            q_exp: &self.q_exp + &o.q_exp,
            x2_deg: &self.x2_deg + &o.x2_deg,
            factors,
            complete_below: self.complete_below.clone().min(o.complete_below.clone()),
        }
    }

    pub fn pow(&self, m: i64) -> Self {
        let mr = arith::rint(m);
        FactoredSeries {
            level: self.level,
            sign: if m % 2 == 0 { 1 } else { self.sign },
            rho: &self.rho * &mr,
            q_exp: &self.q_exp * &mr,
            x2_deg: &self.x2_deg * &mr,
            factors: self.factors.iter().map(|f| ProductFactor { mult: f.mult * m, ..f.clone() }).collect(),
            complete_below: self.complete_below.clone(),
        }
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    /// Re-tags x2-degrees after the substitution x2 -> x2^c.
    pub fn scale_degrees(&self, c: i64) -> Self {
        let mut out = self.clone();
        out.x2_deg *= arith::rint(c);
        for f in &mut out.factors {
            f.deg *= c;
        }
        out
    }

    /// Forgets the constant `sign * e(rho)`.
    pub fn drop_constant(&self) -> Self {
        FactoredSeries { sign: 1, rho: Rat::zero(), ..self.clone() }
    }

    /// The constant `sign * e(rho)` as an element of Q(zeta_level).
    pub fn constant(&self, level: u64) -> Result<CycNumber> {
        let mut sign = self.sign;
        let mut rho = &self.rho - self.rho.floor();
        if !level.is_multiple_of(denom_u64(&rho)) {
            rho = &rho + arith::rat(1, 2);
            rho = &rho - rho.floor();
            sign = -sign;
        }
        let d = denom_u64(&rho);
        if !level.is_multiple_of(d) {
            return domain(format!("constant root of unity of order {d} not in level {level}"));
        }
        let e = (rho.numer() * (level / d)).to_i64().unwrap();
        Ok(CycNumber::root_of_unity(level, e).scale(&arith::rint(sign)))
    }

    /// Common denominator of every exponent that can occur.
    pub fn exp_denom(&self) -> u64 {
        self.factors.iter().fold(denom_u64(&self.q_exp), |d, f| d.lcm(&denom_u64(&f.exp)))
    }

    fn check_prec(&self, rel_prec: &Rat) -> Result<()> {
        if *rel_prec > self.complete_below {
            return domain("requested precision exceeds the factors that were generated");
        }
        Ok(())
    }

    /// Exact expansion to absolute precision `prec` with coefficients in level `level`.
    pub fn to_series(&self, prec: &Rat, level: u64) -> Result<QExpansion> {
        let rel = prec - &self.q_exp;
        self.check_prec(&rel)?;
        let d = self.exp_denom();
        let mut c0 = self.constant(level)?;
        let mut acc = QExpansion::constant(CycNumber::one(level), rel.clone()).with_exp_denom(d)?;
        for f in &self.factors {
            let c = f.coeff.embed(level)?;
            if f.exp.is_zero() {
                let base = &CycNumber::one(level) - &c;
                c0 = &c0 * &base.pow(f.mult)?;
                continue;
            }
            if f.exp >= rel {
                continue;
            }
            let mut s = QExpansion::zero(d, level, rel.clone());
            let n = (&f.exp * arith::rint(d as i64)).to_integer().to_i64().unwrap();
            let mut l = 0u64;
            let mut cl = CycNumber::one(level);
            let neg_c = -&c;
            while arith::rat(n * l as i64, d as i64) < rel {
                let b = arith::binomial_signed(f.mult, l);
                if !b.is_zero() {
                    s.add_term(n * l as i64, &cl.scale(&Rat::from_integer(b)));
                } else if f.mult >= 0 {
                    break;
                }
                cl = &cl * &neg_c;
                l += 1;
            }
            acc = acc.mul(&s)?;
        }
        acc.scale(&c0)?.shift(&self.q_exp)
    }

    /// `q d/dq log`, exact to precision `prec`.
    pub fn dlog_q(&self, prec: &Rat) -> Result<QExpansion> {
        self.check_prec(prec)?;
        let d = self.exp_denom();
        let mut out = QExpansion::zero(d, self.level, prec.clone());
        out.add_term(0, &CycNumber::from_rat(self.level, self.q_exp.clone()));
        for f in &self.factors {
            if f.exp.is_zero() {
                continue;
            }
            let w = -(&f.exp * arith::rint(f.mult));
            add_geometric(&mut out, &f.coeff, &f.exp, |_| w.clone());
        }
        Ok(out)
    }

    /// `D2^j` applied to `D2 log`, where D2 = x2 d/dx2, exact to precision `prec`.
    pub fn d2_log_derivative(&self, j: u32, prec: &Rat) -> Result<QExpansion> {
        self.check_prec(prec)?;
        let d = self.exp_denom();
        let mut out = QExpansion::zero(d, self.level, prec.clone());
        if j == 0 {
            out.add_term(0, &CycNumber::from_rat(self.level, self.x2_deg.clone()));
        }
        for f in &self.factors {
            if f.deg == 0 {
                continue;
            }
            // D2 log (1 - X)^m = -m deg X/(1 - X)
            let w = arith::rint(-f.mult * f.deg);
            if f.exp.is_zero() {
                let h = geometric_closed_form(j, &f.coeff)?;
                let dj = arith::rint(f.deg).pow(j as i32);
                out.add_term(0, &h.scale(&(&w * dj)));
            } else {
                let deg = f.deg;
                add_geometric(&mut out, &f.coeff, &f.exp, |l| &w * arith::rint(deg * l as i64).pow(j as i32));
            }
        }
        Ok(out)
    }

    /// Formal logarithm of the non-constant factors: `sum_f -m sum_l C^l q^{l e}/l`.
    pub fn log_tail(&self, prec: &Rat) -> Result<QExpansion> {
        self.check_prec(prec)?;
        let d = self.exp_denom();
        let mut out = QExpansion::zero(d, self.level, prec.clone());
        for f in &self.factors {
            if f.exp.is_zero() {
                return domain("logarithm of a non-unit constant factor");
            }
            let m = arith::rint(-f.mult);
            add_geometric(&mut out, &f.coeff, &f.exp, |l| &m / arith::rint(l as i64));
        }
        Ok(out)
    }
}

/// Adds `sum_{l >= 1} w(l) C^l q^{l e}` below the precision of `out`.
fn add_geometric(out: &mut QExpansion, c: &CycNumber, e: &Rat, w: impl Fn(u64) -> Rat) {
    let d = out.exp_denom() as i64;
    let n = (e * arith::rint(d)).to_integer().to_i64().unwrap();
    let mut cl = c.clone();
    let mut l = 1u64;
    while arith::rat(n * l as i64, d) < *out.prec() {
        let wl = w(l);
        if !wl.is_zero() {
            out.add_term(n * l as i64, &cl.scale(&wl));
        }
        cl = &cl * c;
        l += 1;
    }
}

/// `(X d/dX)^j [X/(1-X)]` evaluated at X = c, for a constant c != 1.
pub fn geometric_closed_form(j: u32, c: &CycNumber) -> Result<CycNumber> {
    // numerator polynomial N over (1-X)^{r}, starting from X/(1-X)
    let mut num: Vec<Rat> = vec![Rat::zero(), Rat::one()];
    let mut r: i64 = 1;
    for _ in 0..j {
        // X d/dX [N (1-X)^{-r}] = [X N' (1-X) + r X N] (1-X)^{-r-1}
        let mut next = vec![Rat::zero(); num.len() + 1];
        for (i, a) in num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ia = a * arith::rint(i as i64);
            next[i] += &ia;
            next[i + 1] -= &ia;
            next[i + 1] += a * arith::rint(r);
        }
        num = next;
        r += 1;
    }
    let level = c.level();
    let mut val = CycNumber::zero(level);
    let mut xp = CycNumber::one(level);
    for a in &num {
        if !a.is_zero() {
            val += &xp.scale(a);
        }
        xp = &xp * c;
    }
    let den = (&CycNumber::one(level) - c).pow(r)?;
    val.checked_div(&den)
}

/// theta(x1, x2) with x1 = q^s and x2 = q^{a/L} zeta_L^b for an arbitrary integer lift (a, b),
/// using x2^{1/2} = q^{a/(2L)} zeta_{2L}^b. Factors are generated up to q-exponent `max_exp`.
pub fn theta_factored(s: u64, l: u64, a: i64, b: i64, max_exp: &Rat) -> Result<FactoredSeries> {
    if s == 0 || l == 0 {
        return domain("s and L must be positive");
    }
    let period = (s * l) as i64;
    let a0 = a.rem_euclid(period);
    let j = a.div_euclid(period);
    if a0 == 0 && b.rem_euclid(l as i64) == 0 {
        return domain("theta vanishes at lattice points");
    }
    let li = l as i64;
    let level = l;
    let zb = CycNumber::root_of_unity(level, b);
    let zbinv = CycNumber::root_of_unity(level, -b);
    let sr = arith::rint(s as i64);
    let x_exp = arith::rat(a0, li);
    let mut factors = vec![ProductFactor { coeff: zb.clone(), exp: x_exp.clone(), deg: 1, mult: 1 }];
    let mut n = 1i64;
    loop {
        let base = &sr * arith::rint(n);
        let e1 = &base + &x_exp;
        let e2 = &base - &x_exp;
        if e2 >= *max_exp {
            break;
        }
        if e1 < *max_exp {
            factors.push(ProductFactor { coeff: zb.clone(), exp: e1, deg: 1, mult: 1 });
        }
        factors.push(ProductFactor { coeff: zbinv.clone(), exp: e2, deg: -1, mult: 1 });
        n += 1;
    }
    // canonical theta = -x^{-1/2} (1 - x) prod ..., then
    // theta(x1, x1^j x) = (-1)^j x1^{-j^2/2} x^{-j} theta(x1, x)
    let jr = arith::rint(j);
    let sign = if j.rem_euclid(2) == 0 { -1 } else { 1 };
    let rho = -arith::rat(b, 2 * li) - &jr * arith::rat(b, li);
    let q_exp = &sr * arith::rat(1, 12) - arith::rat(a0, 2 * li) - &sr * &jr * &jr / arith::rint(2) - &jr * &x_exp;
    let x2_deg = arith::rat(-1, 2) - &jr;
    Ok(FactoredSeries { level, sign, rho, q_exp, x2_deg, factors, complete_below: max_exp.clone() })
}

/// Exponent bound for factor generation so that a series with leading monomial q^E is
/// exact up to `prec`.
pub fn factor_bound(prec: &Rat, q_exp: &Rat) -> Rat {
    let r = prec - q_exp;
    if r.is_negative() {
        Rat::zero()
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rint};

    #[test]
    fn closed_form_matches_series_derivative() {
        // (X d/dX) X/(1-X) = X/(1-X)^2
        let c = CycNumber::root_of_unity(5, 2);
        let h = geometric_closed_form(1, &c).unwrap();
        let one_minus = &CycNumber::one(5) - &c;
        let expect = c.checked_div(&(&one_minus * &one_minus)).unwrap();
        assert_eq!(h, expect);
        // j = 2: X(1+X)/(1-X)^3
        let h2 = geometric_closed_form(2, &c).unwrap();
        let e2 = (&c * &(&CycNumber::one(5) + &c)).checked_div(&one_minus.pow(3).unwrap()).unwrap();
        assert_eq!(h2, e2);
    }

    #[test]
    fn theta_quasi_period_in_a() {
        let p = rint(3);
        let t0 = theta_factored(1, 3, 1, 2, &rint(6)).unwrap();
        let t1 = theta_factored(1, 3, 4, 2, &rint(6)).unwrap();
        // theta(q x) = -q^{-1/2} x^{-1} theta(x), x = q^{1/3} zeta_3^2
        let s0 = t0.to_series(&p, 6).unwrap();
        let s1 = t1.to_series(&p, 6).unwrap();
        let factor = QExpansion::monomial(
            CycNumber::root_of_unity(6, -4).scale(&rint(-1)),
            &(rat(-1, 2) - rat(1, 3)),
            6,
            rint(100),
        )
        .unwrap();
        assert!(s1.eq_to_prec(&s0.mul(&factor).unwrap()));
    }

    #[test]
    fn pow_and_inverse_cancel() {
        let t = theta_factored(1, 5, 2, 1, &rint(4)).unwrap();
        let u = t.pow(3).mul(&t.pow(-3));
        let s = u.to_series(&rint(2), 10).unwrap();
        assert!(s.eq_to_prec(&QExpansion::constant(CycNumber::one(10), rint(2))));
    }
}
