//! The partial sums Lambda_n = sum_{a = alpha (M), 1 <= a <= Mp^n} a^{k-1} E_{u,1}(q^{p^n}, q_M^a zeta_M^beta)
//! and their p-adic convergence to M^{k-1} F^(k)_u, together with the first-order term
//! delta1 = (a t / M) D2 log(r_u theta) and its res_k extraction.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::arith::{self, Rat};
use crate::eisenstein::{self, TorsionIndex};
use crate::error::{domain, Result};
use crate::qseries::QExpansion;
use crate::report::CheckReport;
use crate::tadic::TadicElement;

/// Parameters of one reciprocity run.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReciprocityParams {
    pub k: u32,
    pub u: i64,
    pub p: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub alpha: i64,
    pub beta: i64,
    #[serde(serialize_with = "ser_rat")]
    pub prec: Rat,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&arith::rat_to_string(r))
}

impl ReciprocityParams {
    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        if !arith::is_prime(p) {
            return domain(format!("{p} is not prime"));
        }
        let need = if p == 2 { 2 } else { 1 };
        if arith::vp_u64(self.m, p) < need {
            return domain("v_p(M) must be at least v_p(2p)");
        }
        if arith::gcd(self.u, 6 * p as i64) != 1 {
            return domain("u must be prime to 6p");
        }
        if self.k < 2 {
            return domain("weight must be at least 2");
        }
        let mi = self.m as i64;
        if !(1..=mi).contains(&self.alpha) || !(1..=mi).contains(&self.beta) {
            return domain("need 1 <= alpha, beta <= M");
        }
        let pi = p as i64;
        if self.alpha % pi == 0 && self.beta % pi == 0 {
            return domain("(alpha, beta) lies in p Z^2");
        }
        Ok(())
    }
}

/// The integer lift of the <u>-twist of a at level N: u a on the p-part, a on the rest.
fn twisted_lift(u: i64, p: u64, level: u64, a: i64) -> i64 {
    let (pv, rest) = arith::split_p_part(level, p);
    // idempotent e = 1 mod p^v, 0 mod the prime-to-p part
    let e = if rest == 1 {
        1
    } else {
        let (pv, rest) = (pv as i64, rest as i64);
        (rest * arith::inv_mod(rest.rem_euclid(pv), pv)).rem_euclid(pv * rest)
    };
    a + (u - 1) * a * e
}

/// D2 log(r_u theta)(q^{p^n}, q_M^a zeta_M^b) = u^2 G(a, b) - u G(a*, <u>b) at the literal
/// lift a*, where G = D2 log theta and G(a + Mp^n) = G(a) - 1.
pub fn d2log_ru_theta(u: i64, p: u64, m: u64, n: u32, a: i64, b: i64, prec: &Rat) -> Result<QExpansion> {
    let s = arith::pow_u(p, n);
    let big_n = (m * s) as i64;
    let ur = arith::rint(u);
    let g1 = eisenstein::d2log_at_lift(s, m, a, b, prec)?;
    let a_star = twisted_lift(u, p, m * s, a);
    let a_r = {
        let r = a_star.rem_euclid(big_n);
        if r == 0 {
            big_n
        } else {
            r
        }
    };
    let b_u = eisenstein::u_act(u, p, m, b);
    let g2 = eisenstein::d2log_at_lift(s, m, a_r, b_u, prec)?;
    // G(a*) = G(a_r) - (a* - a_r)/N
    let shift = arith::rat(a_star - a_r, big_n);
    let g2 = g2.sub(&QExpansion::constant(crate::cyclotomic::CycNumber::from_rat(m, shift), prec.clone()))?;
    g1.scale_rat(&(&ur * &ur)).sub(&g2.scale_rat(&ur))
}

/// E_{u,1} = u^2 E_1(x1, x2) - u E_1(x1, x2^<u>), with E_1 = -D2 log theta.
pub fn e_u1(u: i64, p: u64, m: u64, n: u32, a: i64, b: i64, prec: &Rat) -> Result<QExpansion> {
    Ok(d2log_ru_theta(u, p, m, n, a, b, prec)?.neg())
}

fn lifts(alpha: i64, m: u64, n: u32, p: u64) -> Vec<i64> {
    let top = (m * arith::pow_u(p, n)) as i64;
    (alpha..=top).step_by(m as usize).collect()
}

/// Lambda_n.
pub fn reciprocity_partial_sum(params: &ReciprocityParams, n: u32) -> Result<QExpansion> {
    params.validate()?;
    let ReciprocityParams { k, u, p, m, alpha, beta, ref prec } = *params;
    let terms: Vec<Result<QExpansion>> = lifts(alpha, m, n, p)
        .par_iter()
        .map(|&a| {
            let w = arith::rat_pow(&arith::rint(a), k as i64 - 1);
            Ok(e_u1(u, p, m, n, a, beta, prec)?.scale_rat(&w))
        })
        .collect();
    let mut acc = QExpansion::zero(m, m, prec.clone());
    for t in terms {
        acc = acc.add(&t?)?;
    }
    Ok(acc)
}

/// M^{k-1} F^(k)_u at (alpha/M, beta/M), or the untwisted F when `untwisted` (a harness
/// probe that must fail).
pub fn reciprocity_target(params: &ReciprocityParams, untwisted: bool) -> Result<QExpansion> {
    params.validate()?;
    let idx = TorsionIndex::new(params.m, params.alpha, params.beta);
    let f = if untwisted {
        eisenstein::eisenstein_f(params.k, &idx, &params.prec, false)?
    } else {
        eisenstein::eisenstein_f_u(params.k, params.u, params.p, &idx, &params.prec)?
    };
    Ok(f.scale_rat(&arith::rat_pow(&arith::rint(params.m as i64), params.k as i64 - 1)))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CauchyRow {
    pub n: u32,
    /// Valuation of Lambda_{n+1} - Lambda_n; `None` when the difference vanishes.
    pub observed_s: Option<i64>,
    pub required_s: i64,
}

/// Cauchy table for 1 <= n < nMax with s(n) >= n - slack required, and
/// Lambda_{nMax} = target mod p^{tTarget}. Valuations are taken in Z_(p)[zeta_M]; the
/// prime-to-p denominators cleared are recorded.
pub fn exp_star_verify(
    params: &ReciprocityParams,
    n_max: u32,
    t_target: i64,
    slack: i64,
    untwisted: bool,
) -> CheckReport {
    let mut pj = serde_json::to_value(params).expect("params");
    pj["nMax"] = json!(n_max);
    pj["tTarget"] = json!(t_target);
    pj["slack"] = json!(slack);
    if untwisted {
        pj["probe"] = json!("untwisted target");
    }
    let run = || -> Result<(Vec<CauchyRow>, Option<i64>, BigInt)> {
        use num_integer::Integer;
        let lambdas: Vec<QExpansion> =
            (1..=n_max).map(|n| reciprocity_partial_sum(params, n)).collect::<Result<_>>()?;
        let mut clear = BigInt::one();
        let mut rows = Vec::new();
        for n in 1..n_max {
            let d = lambdas[n as usize].sub(&lambdas[n as usize - 1])?;
            clear = clear.lcm(&d.prime_to_p_denominator(params.p));
            rows.push(CauchyRow { n, observed_s: d.coordinate_valuation(params.p), required_s: n as i64 - slack });
        }
        let defect = lambdas[n_max as usize - 1].sub(&reciprocity_target(params, untwisted)?)?;
        clear = clear.lcm(&defect.prime_to_p_denominator(params.p));
        Ok((rows, defect.coordinate_valuation(params.p), clear))
    };
    match run() {
        Ok((rows, final_v, clear)) => {
            let cauchy_ok = rows.iter().all(|r| r.observed_s.is_none_or(|s| s >= r.required_s));
            let final_ok = final_v.is_none_or(|v| v >= t_target);
            CheckReport::new("exp_star", pj, cauchy_ok && final_ok).with_detail(json!({
                "cauchyTable": rows,
                "finalDefectValuation": final_v,
                "clearingConstant": clear.to_string(),
            }))
        }
        Err(e) => CheckReport::skipped("exp_star", pj, &e.to_string()),
    }
}

/// delta1_{a,b} = (a t / M) D2 log(r_u theta)(q^{p^n}, q_M^a zeta_M^b), in t-degree 1.
#[allow(clippy::too_many_arguments)]
pub fn delta1(u: i64, p: u64, m: u64, n: u32, a: i64, b: i64, prec: &Rat, t_trunc: usize) -> Result<TadicElement> {
    let f = d2log_ru_theta(u, p, m, n, a, b, prec)?.scale_rat(&arith::rat(a, m as i64));
    Ok(TadicElement::from_series(t_trunc, &f, 1))
}

/// Sym^{k-2} valued t-adic element, slot i for e1^{k-2-i} e2^i.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTadic {
    pub slots: Vec<TadicElement>,
}

/// Result of res_k: the e1^{k-2} t coefficient, plus every (slot, t-degree) carrying mass
/// outside it.
#[derive(Clone, Debug)]
pub struct ResK {
    pub value: QExpansion,
    pub off_slot: Vec<(usize, usize)>,
}

pub fn res_k_extract(x: &SymTadic) -> Result<ResK> {
    let first = x.slots.first().ok_or_else(|| crate::error::Error::Domain("empty Sym vector".into()))?;
    if first.t_trunc() < 2 {
        return domain("res_k needs t-truncation at least 2");
    }
    let mut off = Vec::new();
    for (i, slot) in x.slots.iter().enumerate() {
        for s in slot.support() {
            if (i, s) != (0, 1) {
                off.push((i, s));
            }
        }
    }
    Ok(ResK { value: first.coeffs[1].clone(), off_slot: off })
}

/// p^{-n} sum over 1 <= a, b <= Mp^n, (a, b) = (alpha, beta) mod M, of
/// (a e1 + b e2)^{k-2} delta1_{a,b}.
pub fn weighted_delta1_sum(params: &ReciprocityParams, n: u32, t_trunc: usize) -> Result<SymTadic> {
    params.validate()?;
    let ReciprocityParams { k, u, p, m, alpha, beta, ref prec } = *params;
    let bs = lifts(beta, m, n, p);
    let pn = arith::pow_u(p, n) as i64;
    let deg = k as u64 - 2;
    let per_a: Vec<Result<(i64, TadicElement)>> =
        lifts(alpha, m, n, p).par_iter().map(|&a| Ok((a, delta1(u, p, m, n, a, beta, prec, t_trunc)?))).collect();
    let zero = TadicElement::zero(t_trunc, m, m, prec);
    let mut slots = vec![zero; deg as usize + 1];
    for r in per_a {
        // delta1 depends on b only through b mod M, so the b-sum acts on the weights
        let (a, d) = r?;
        for (i, slot) in slots.iter_mut().enumerate() {
            let mut w = Rat::zero();
            for &b in &bs {
                w += Rat::from_integer(
                    arith::binomial(deg, i as u64)
                        * BigInt::from(a).pow((deg - i as u64) as u32)
                        * BigInt::from(b).pow(i as u32),
                );
            }
            if !w.is_zero() {
                *slot = slot.add(&d.scale_rat(&(w / arith::rint(pn))))?;
            }
        }
    }
    Ok(SymTadic { slots })
}

/// -M res_k(weighted delta1 sum) = Lambda_n, exactly.
pub fn delta1_cross_check(params: &ReciprocityParams, n: u32) -> CheckReport {
    let mut pj = serde_json::to_value(params).expect("params");
    pj["n"] = json!(n);
    let run = || -> Result<(QExpansion, ResK)> {
        let r = res_k_extract(&weighted_delta1_sum(params, n, 3)?)?;
        Ok((reciprocity_partial_sum(params, n)?, r))
    };
    match run() {
        Ok((rhs, ResK { value, off_slot: off })) => {
            let lhs = value.scale_rat(&-arith::rint(params.m as i64));
            CheckReport::from_series("delta1_res_k", pj, &lhs, &rhs).with_detail(json!({
                "offSlotMass": off.iter().map(|(i, s)| json!({ "slot": i, "tDegree": s })).collect::<Vec<_>>(),
            }))
        }
        Err(e) => CheckReport::skipped("delta1_res_k", pj, &e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rint;

    fn params(k: u32, u: i64, alpha: i64, beta: i64) -> ReciprocityParams {
        ReciprocityParams { k, u, p: 5, m: 5, alpha, beta, prec: rint(1) }
    }

    #[test]
    fn u_one_is_zero() {
        let l = reciprocity_partial_sum(&params(2, 1, 1, 2), 1).unwrap();
        assert!(l.is_zero());
        assert!(delta1(1, 5, 5, 1, 1, 2, &rint(1), 3).unwrap().is_zero());
    }

    #[test]
    fn lambda_zero_is_single_term() {
        let p = params(3, 7, 2, 1);
        let l0 = reciprocity_partial_sum(&p, 0).unwrap();
        let direct = e_u1(7, 5, 5, 0, 2, 1, &rint(1)).unwrap().scale_rat(&rint(4));
        assert!(l0.eq_to_prec(&direct));
    }

    #[test]
    fn twisted_lift_is_literal_for_prime_power_level() {
        assert_eq!(twisted_lift(7, 5, 25, 3), 21);
        // level 15 at p = 5: 7*4 mod 5 and 4 mod 3
        let x = twisted_lift(7, 5, 15, 4);
        assert_eq!(x.rem_euclid(5), 28 % 5);
        assert_eq!(x.rem_euclid(3), 1);
    }

    #[test]
    fn delta1_concentrated_in_t1() {
        let d = delta1(7, 5, 5, 1, 1, 2, &rint(1), 4).unwrap();
        assert_eq!(d.support(), vec![1]);
    }

    #[test]
    fn res_k_flags_other_slots() {
        let f = QExpansion::constant(crate::cyclotomic::CycNumber::one(5), rint(1));
        let x = SymTadic { slots: vec![TadicElement::zero(3, 5, 5, &rint(1)), TadicElement::from_series(3, &f, 1)] };
        let r = res_k_extract(&x).unwrap();
        assert!(r.value.is_zero());
        assert_eq!(r.off_slot, vec![(1, 1)]);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(params(2, 5, 1, 2).validate().is_err());
        assert!(params(2, 7, 5, 5).validate().is_err());
        assert!(ReciprocityParams { m: 3, ..params(2, 7, 1, 2) }.validate().is_err());
    }
}
