//! The tower Q(zeta_{Mp^n})((q^{1/Mp^n})) over Q(zeta_M)((q^{1/M})) in the basis
//! zeta_{Mp^n}^i q_{Mp^n}^j, the normalized trace R_M, and logarithms of theta at torsion
//! points of the tower.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::json;

use crate::arith::{self, Rat};
use crate::cyclotomic::CycNumber;
use crate::error::{domain, Result};
use crate::product;
use crate::qseries::QExpansion;
use crate::report::CheckReport;

/// Element of level M p^n, stored as a map (i, j) -> c meaning c * zeta_{Mp^n}^i q_{Mp^n}^j
/// with 0 <= i < p^n and c in Q(zeta_M). Truncated at q^prec.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerElement {
    m: u64,
    p: u64,
    n: u32,
    prec: Rat,
    data: BTreeMap<(u64, i64), CycNumber>,
}

fn check_base(m: u64, p: u64) -> Result<()> {
    if !arith::is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    let need = if p == 2 { 2 } else { 1 };
    if arith::vp_u64(m, p) < need {
        return domain(format!("v_p(M) must be at least v_p(2p) (M = {m}, p = {p})"));
    }
    Ok(())
}

impl TowerElement {
    pub fn zero(m: u64, p: u64, n: u32, prec: Rat) -> Result<Self> {
        check_base(m, p)?;
        Ok(TowerElement { m, p, n, prec, data: BTreeMap::new() })
    }

    pub fn top_level(&self) -> u64 {
        self.m * arith::pow_u(self.p, self.n)
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn prec(&self) -> &Rat {
        &self.prec
    }

    pub fn coeff(&self, i: u64, j: i64) -> CycNumber {
        self.data.get(&(i, j)).cloned().unwrap_or_else(|| CycNumber::zero(self.m))
    }

    pub fn num_terms(&self) -> usize {
        self.data.len()
    }

    /// Splits a series over Q(zeta_{Mp^n}) into the tower basis. Since p | M,
    /// zeta_{Mp^n}^c = zeta_{Mp^n}^{c mod p^n} zeta_M^{floor(c / p^n)} and the power basis of
    /// level M p^n is the product of the two bases.
    pub fn from_series(m: u64, p: u64, n: u32, x: &QExpansion) -> Result<Self> {
        let mut out = TowerElement::zero(m, p, n, x.prec().clone())?;
        let top = out.top_level();
        let pn = arith::pow_u(p, n);
        let x = x.embed(top)?.with_exp_denom(top)?;
        for (&j, c) in x.raw_terms() {
            for (idx, r) in c.coords().iter().enumerate() {
                if r.is_zero() {
                    continue;
                }
                let (i, hi) = (idx as u64 % pn, (idx as u64 / pn) as i64);
                let entry = out.data.entry((i, j)).or_insert_with(|| CycNumber::zero(m));
                entry.add_root_multiple(r, hi);
            }
        }
        out.data.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Level-M series viewed at depth n.
    pub fn inclusion(x: &QExpansion, m: u64, p: u64, n: u32) -> Result<Self> {
        if x.level() != m && !m.is_multiple_of(x.level()) {
            return domain("series is not defined over Q(zeta_M)");
        }
        TowerElement::from_series(m, p, n, x)
    }

    pub fn to_series(&self) -> Result<QExpansion> {
        let top = self.top_level();
        let mut out = QExpansion::zero(top, top, self.prec.clone());
        for (&(i, j), c) in &self.data {
            let c = c.embed(top)?.checked_mul(&CycNumber::root_of_unity(top, i as i64))?;
            out.add_term(j, &c);
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.m, self.p, self.n) != (o.m, o.p, o.n) {
            return domain("tower elements at different depths");
        }
        let mut out = self.clone();
        out.prec = self.prec.clone().min(o.prec.clone());
        for (k, c) in &o.data {
            let e = out.data.entry(*k).or_insert_with(|| CycNumber::zero(self.m));
            *e = &*e + c;
        }
        let top = self.top_level() as i64;
        let prec = out.prec.clone();
        out.data.retain(|&(_, j), c| !c.is_zero() && arith::rat(j, top) < prec);
        Ok(out)
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        let mut out = self.clone();
        out.data = self.data.iter().map(|(k, c)| (*k, c.scale(r))).filter(|(_, c)| !c.is_zero()).collect();
        out
    }

    /// R_M: keeps zeta_{Mp^n}^i q_{Mp^n}^j with p^n | i and p^n | j, relabelled as
    /// q_M^{j / p^n}. The result has depth 0.
    pub fn trace_rm(&self) -> TowerElement {
        let pn = arith::pow_u(self.p, self.n) as i64;
        let data = self
            .data
            .iter()
            .filter(|(&(i, j), _)| i == 0 && j % pn == 0)
            .map(|(&(_, j), c)| ((0, j / pn), c.clone()))
            .collect();
        TowerElement { m: self.m, p: self.p, n: 0, prec: self.prec.clone(), data }
    }

    /// Coefficient automorphism zeta_{Mp^n} -> zeta_{Mp^n}^d.
    pub fn galois_sigma(&self, d: i64) -> Result<Self> {
        TowerElement::from_series(self.m, self.p, self.n, &self.to_series()?.galois_sigma(d)?)
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_empty()
    }
}

/// u_q-coefficient * log q + t-coefficient * t + tail, with log zeta_L^c = (c/L) t,
/// log q = u_q and log(-1) taken to be 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LogElement {
    pub uq_coeff: Rat,
    pub t_coeff: Rat,
    pub tail: TowerElement,
}

impl LogElement {
    pub fn trace_rm(&self) -> LogElement {
        LogElement { uq_coeff: self.uq_coeff.clone(), t_coeff: self.t_coeff.clone(), tail: self.tail.trace_rm() }
    }

    pub fn scale_rat(&self, r: &Rat) -> LogElement {
        LogElement { uq_coeff: &self.uq_coeff * r, t_coeff: &self.t_coeff * r, tail: self.tail.scale_rat(r) }
    }
}

/// log theta(q^s, q_L^a zeta_L^b) for 1 <= a < sL, as an element of depth n over M where
/// L divides M p^n. The leading factor is written -x^{-1/2}(1 - x).
#[allow(clippy::too_many_arguments)]
pub fn log_theta(s: u64, l: u64, a: i64, b: i64, m: u64, p: u64, n: u32, prec: &Rat) -> Result<LogElement> {
    if a < 1 || a as u64 >= s * l {
        return domain("log theta needs 1 <= a < sL");
    }
    let top = m * arith::pow_u(p, n);
    if !top.is_multiple_of(l) {
        return domain("L must divide M p^n");
    }
    let f = product::theta_factored(s, l, a, b, prec)?;
    let tail = f.log_tail(prec)?;
    Ok(LogElement {
        uq_coeff: f.q_exp.clone(),
        t_coeff: f.rho.clone(),
        tail: TowerElement::from_series(m, p, n, &tail)?,
    })
}

/// R_M log theta(q, q_{Mp^n}^a zeta_{Mp^n}^b) = p^{-n} log theta(q^{p^n}, q_M^a zeta_M^b).
pub fn rm_logtheta_check(m: u64, p: u64, n: u32, a: i64, b: i64, prec: &Rat) -> CheckReport {
    let params = json!({ "M": m, "p": p, "n": n, "a": a, "b": b, "prec": arith::rat_to_string(prec) });
    let pi = p as i64;
    if a.rem_euclid(pi) == 0 && b.rem_euclid(pi) == 0 {
        return CheckReport::skipped("rm_logtheta", params, "(a, b) lies in p Z^2");
    }
    let run = || -> Result<(LogElement, LogElement)> {
        check_base(m, p)?;
        let pn = arith::pow_u(p, n);
        let lhs = log_theta(1, m * pn, a, b, m, p, n, prec)?.trace_rm();
        let rhs = log_theta(pn, m, a, b, m, p, 0, prec)?.scale_rat(&arith::rat(1, pn as i64));
        Ok((lhs, rhs))
    };
    match run() {
        Ok((lhs, rhs)) => {
            let uq = lhs.uq_coeff == rhs.uq_coeff;
            let t = lhs.t_coeff == rhs.t_coeff;
            let tail_diff = lhs.tail.add(&rhs.tail.scale_rat(&arith::rint(-1)));
            let tail = matches!(&tail_diff, Ok(d) if d.is_zero());
            let mut r = CheckReport::new("rm_logtheta", params, uq && t && tail).with_detail(json!({
                "uqCoeff": [arith::rat_to_string(&lhs.uq_coeff), arith::rat_to_string(&rhs.uq_coeff)],
                "tCoeff": [arith::rat_to_string(&lhs.t_coeff), arith::rat_to_string(&rhs.t_coeff)],
                "tailTerms": lhs.tail.num_terms(),
            }));
            if !tail {
                r.first_failure = Some(match tail_diff {
                    Ok(d) => json!({ "tailDifferenceTerms": d.num_terms() }),
                    Err(e) => json!({ "error": e.to_string() }),
                });
            }
            r
        }
        Err(e) => CheckReport::skipped("rm_logtheta", params, &e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rint;

    fn mono(level: u64, c: i64, e: Rat, prec: i64) -> QExpansion {
        QExpansion::monomial(CycNumber::root_of_unity(level, c), &e, level, rint(prec)).unwrap()
    }

    #[test]
    fn trace_examples() {
        // q_{Mp}^p -> q_M, zeta_{Mp} q_{Mp}^p -> 0
        let x = TowerElement::from_series(5, 5, 1, &mono(25, 0, arith::rat(5, 25), 2)).unwrap();
        let r = x.trace_rm().to_series().unwrap();
        assert_eq!(r, mono(5, 0, arith::rat(1, 5), 2).with_exp_denom(5).unwrap());
        let y = TowerElement::from_series(5, 5, 1, &mono(25, 1, arith::rat(5, 25), 2)).unwrap();
        assert!(y.trace_rm().is_zero());
    }

    #[test]
    fn basis_roundtrip() {
        let x = mono(25, 17, arith::rat(3, 25), 2).add(&mono(25, 23, arith::rat(1, 5), 2)).unwrap();
        let t = TowerElement::from_series(5, 5, 1, &x).unwrap();
        assert_eq!(t.to_series().unwrap(), x.with_exp_denom(25).unwrap());
    }

    #[test]
    fn trace_of_inclusion_is_identity() {
        let x = mono(5, 2, arith::rat(2, 5), 2).add(&mono(5, 1, rint(1), 2)).unwrap();
        let t = TowerElement::inclusion(&x, 5, 5, 2).unwrap();
        let back = t.trace_rm().to_series().unwrap();
        assert_eq!(back, x.with_exp_denom(5).unwrap());
    }

    #[test]
    fn trace_commutes_with_galois() {
        let x = mono(25, 5, arith::rat(1, 5), 2).add(&mono(25, 3, arith::rat(2, 5), 2)).unwrap();
        let t = TowerElement::from_series(5, 5, 1, &x).unwrap();
        for d in [2, 3, 7, 24] {
            let lhs = t.galois_sigma(d).unwrap().trace_rm();
            let rhs = t.trace_rm().galois_sigma(d).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn lemma_small_cases() {
        for (a, b) in [(1, 2), (2, 1), (1, 0)] {
            let r = rm_logtheta_check(5, 5, 1, a, b, &rint(2));
            assert_eq!(r.status, crate::report::Status::Pass, "{:?}", r);
        }
        assert_eq!(rm_logtheta_check(5, 5, 1, 5, 5, &rint(2)).status, crate::report::Status::Skipped);
    }

    #[test]
    fn rejects_bad_base() {
        assert!(TowerElement::zero(3, 5, 1, rint(1)).is_err());
        assert!(TowerElement::zero(2, 2, 1, rint(1)).is_err());
    }
}
