//! Truncated power series sum_{s<T} f_s(q) t^s over Q(zeta_M), the derivations d1, d2 of the
//! group P_m = {(1 u; 0 e^v)} and its action, with the p-adic exponentials evaluated
//! exactly to a chosen p-adic precision.

use num_traits::{One, Zero};
use serde_json::json;

use crate::arith::{self, Rat};
use crate::cyclotomic::CycNumber;
use crate::error::{domain, Result};
use crate::qseries::QExpansion;
use crate::report::CheckReport;

#[derive(Clone, Debug, PartialEq)]
pub struct TadicElement {
    pub coeffs: Vec<QExpansion>,
}

impl TadicElement {
    pub fn zero(t_trunc: usize, exp_denom: u64, level: u64, prec: &Rat) -> Self {
        TadicElement { coeffs: vec![QExpansion::zero(exp_denom, level, prec.clone()); t_trunc] }
    }

    /// c q^e t^s.
    pub fn monomial(t_trunc: usize, c: CycNumber, e: &Rat, s: usize, exp_denom: u64, prec: &Rat) -> Result<Self> {
        let mut out = TadicElement::zero(t_trunc, exp_denom, c.level(), prec);
        if s < t_trunc {
            out.coeffs[s] = QExpansion::monomial(c, e, exp_denom, prec.clone())?;
        }
        Ok(out)
    }

    /// f t^s.
    pub fn from_series(t_trunc: usize, f: &QExpansion, s: usize) -> Self {
        let mut out = TadicElement::zero(t_trunc, f.exp_denom(), f.level(), f.prec());
        if s < t_trunc {
            out.coeffs[s] = f.clone();
        }
        out
    }

    pub fn t_trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(TadicElement { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_>>()? })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(TadicElement { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect::<Result<_>>()? })
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        TadicElement { coeffs: self.coeffs.iter().map(|c| c.scale_rat(r)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Slots s with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&s| !self.coeffs[s].is_zero()).collect()
    }

    pub fn coordinate_valuation(&self, p: u64) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.coordinate_valuation(p)).min()
    }

    /// Applies `f(e, s)` to every term c q^e t^s, collecting the produced (scalar, t-shift).
    fn map_terms(&self, f: impl Fn(&Rat, usize) -> Vec<(Rat, usize)>) -> Self {
        let t = self.t_trunc();
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = c.scale_rat(&Rat::zero());
        }
        for (s, fs) in self.coeffs.iter().enumerate() {
            for (e, c) in fs.terms() {
                for (r, ds) in f(&e, s) {
                    if s + ds < t && !r.is_zero() {
                        let add = QExpansion::monomial(c.scale(&r), &e, fs.exp_denom(), fs.prec().clone())
                            .expect("exponent on lattice");
                        out.coeffs[s + ds] = out.coeffs[s + ds].add(&add).expect("same lattice");
                    }
                }
            }
        }
        out
    }
}

/// d1(q^e t^s) = p^m e q^e t^{s+1}; with e = r/M this is (p^m r / M) q_M^r t^{s+1}.
pub fn derive_d1(x: &TadicElement, p: u64, m: u32) -> TadicElement {
    let pm = arith::rint(arith::pow_u(p, m) as i64);
    x.map_terms(|e, _| vec![(&pm * e, 1)])
}

/// d2(q^e t^s) = p^m s q^e t^s.
pub fn derive_d2(x: &TadicElement, p: u64, m: u32) -> TadicElement {
    let pm = arith::rint(arith::pow_u(p, m) as i64);
    x.map_terms(|_, s| vec![(&pm * arith::rint(s as i64), 0)])
}

/// PASS iff d1 d2 - d2 d1 = -p^m d1 on x, exactly.
pub fn commutator_check(x: &TadicElement, p: u64, m: u32) -> bool {
    let lhs = derive_d1(&derive_d2(x, p, m), p, m).sub(&derive_d2(&derive_d1(x, p, m), p, m));
    let rhs = derive_d1(x, p, m).scale_rat(&-arith::rint(arith::pow_u(p, m) as i64));
    matches!(lhs.and_then(|l| l.sub(&rhs)), Ok(d) if d.is_zero())
}

/// Element (1 u; 0 e^v) of P_m.
#[derive(Clone, Debug, PartialEq)]
pub struct PmElement {
    pub u: Rat,
    pub v: Rat,
}

impl PmElement {
    pub fn new(u: Rat, v: Rat, p: u64, m: u32) -> Result<Self> {
        for x in [&u, &v] {
            if let Some(val) = arith::vp_rat(x, p) {
                if val < m as i64 {
                    return domain(format!("P_m entries need valuation at least m = {m}"));
                }
            }
        }
        if p == 2 && m < 2 {
            return domain("p = 2 needs m >= 2 for e^v to converge");
        }
        Ok(PmElement { u, v })
    }

    pub fn identity() -> Self {
        PmElement { u: Rat::zero(), v: Rat::zero() }
    }

    /// (u1, v1)(u2, v2) = (e^{v2} u1 + u2, v1 + v2), e^{v2} to p-adic precision `prec`.
    pub fn compose(&self, o: &Self, p: u64, prec: i64) -> Self {
        PmElement { u: padic_exp(&o.v, p, prec) * &self.u + &o.u, v: &self.v + &o.v }
    }
}

/// exp(v) = sum v^j / j! summed until every further term has valuation >= `prec`.
/// Requires v_p(v) > 1/(p-1).
pub fn padic_exp(v: &Rat, p: u64, prec: i64) -> Rat {
    if v.is_zero() {
        return Rat::one();
    }
    let val = arith::vp_rat(v, p).expect("nonzero") as f64;
    let slope = val - 1.0 / (p as f64 - 1.0);
    assert!(slope > 0.0, "p-adic exponential diverges");
    let mut sum = Rat::one();
    let mut term = Rat::one();
    let mut j = 1i64;
    // v_p(v^j / j!) >= j * slope - ... ; stop once the lower bound j*val - (j-1)/(p-1) passes prec
    while (j as f64) * val - ((j - 1) as f64) / (p as f64 - 1.0) < prec as f64 {
        term = term * v / arith::rint(j);
        sum += &term;
        j += 1;
    }
    sum
}

/// exp(u/p^m d1) o exp(v/p^m d2): q^e t^s -> e^{vs} q^e exp(u e t) t^s, with e^{vs} taken
/// to p-adic precision `padic_prec` plus a margin for the t-expansion denominators.
pub fn pm_act(g: &PmElement, x: &TadicElement, p: u64, padic_prec: i64) -> TadicElement {
    let t = x.t_trunc();
    let margin = 2 * t as i64 + 4;
    let ev = padic_exp(&g.v, p, padic_prec + margin);
    let evs: Vec<Rat> = (0..t as i64).map(|s| arith::rat_pow(&ev, s)).collect();
    x.map_terms(|e, s| {
        let ue = &g.u * e;
        let mut out = Vec::with_capacity(t);
        let mut c = evs[s].clone();
        for j in 0..t.saturating_sub(s) {
            if j > 0 {
                c = c * &ue / arith::rint(j as i64);
            }
            out.push((c.clone(), j));
        }
        out
    })
}

/// The sample elements on which P_m relations are tested: a few monomials and a sum.
pub fn sample_elements(level: u64, t_trunc: usize, prec: &Rat) -> Result<Vec<TadicElement>> {
    let l = level as i64;
    let mono = |c: i64, r: i64, s: usize| {
        TadicElement::monomial(t_trunc, CycNumber::root_of_unity(level, c), &arith::rat(r, l), s, level, prec)
    };
    let xs = vec![mono(0, 1, 0)?, mono(0, 0, 1)?, mono(1, 2, 1)?, mono(2, 3, 2)?, mono(0, l, 0)?];
    let sum = xs.iter().skip(1).try_fold(xs[0].clone(), |acc, x| acc.add(x))?;
    let mut all = xs;
    all.push(sum);
    Ok(all)
}

/// The generator grid {(+-p^m, 0), (0, +-p^m), (p^m, p^m)}.
pub fn generator_grid(p: u64, m: u32) -> Vec<PmElement> {
    let pm = arith::rint(arith::pow_u(p, m) as i64);
    let z = Rat::zero();
    vec![
        PmElement { u: pm.clone(), v: z.clone() },
        PmElement { u: -pm.clone(), v: z.clone() },
        PmElement { u: z.clone(), v: pm.clone() },
        PmElement { u: z, v: -pm.clone() },
        PmElement { u: pm.clone(), v: pm },
    ]
}

fn agrees(a: &TadicElement, b: &TadicElement, p: u64, padic_prec: i64) -> bool {
    match a.sub(b) {
        Ok(d) => d.coordinate_valuation(p).is_none_or(|v| v >= padic_prec),
        Err(_) => false,
    }
}

/// Acting by g1 and then by g2 equals acting by g1 g2, mod (t^T, p^padicPrec). The action
/// composes on the right: pm_act(g2, pm_act(g1, x)) = pm_act(g1 g2, x). The detail also
/// records whether the left-composition form holds.
pub fn group_law_check(
    g1: &PmElement,
    g2: &PmElement,
    xs: &[TadicElement],
    p: u64,
    m: u32,
    padic_prec: i64,
) -> CheckReport {
    let params = json!({
        "g1": [arith::rat_to_string(&g1.u), arith::rat_to_string(&g1.v)],
        "g2": [arith::rat_to_string(&g2.u), arith::rat_to_string(&g2.v)],
        "p": p, "m": m, "padicPrec": padic_prec,
        "tTrunc": xs.first().map_or(0, |x| x.t_trunc()),
    });
    let g12 = g1.compose(g2, p, padic_prec + 8);
    let mut right = true;
    let mut left = true;
    let mut first_bad = None;
    for (i, x) in xs.iter().enumerate() {
        let composed = pm_act(&g12, x, p, padic_prec);
        let r = pm_act(g2, &pm_act(g1, x, p, padic_prec), p, padic_prec);
        let l = pm_act(g1, &pm_act(g2, x, p, padic_prec), p, padic_prec);
        if !agrees(&r, &composed, p, padic_prec) {
            right = false;
            first_bad.get_or_insert(i);
        }
        left &= agrees(&l, &composed, p, padic_prec);
    }
    let mut rep = CheckReport::new("group_law", params, right).with_detail(json!({ "leftFormHolds": left }));
    if let Some(i) = first_bad {
        rep.first_failure = Some(json!({ "sample": i }));
    }
    rep
}

/// First-order Taylor coefficient in u of u -> pm_act((u, 0), x) - x, read off exactly by
/// Lagrange interpolation at u = p^m, 2p^m, ..., T p^m (the map is a polynomial of degree
/// < T in u modulo t^T, and involves no p-adic truncation when v = 0).
pub fn cocycle_first_order_u(x: &TadicElement, p: u64, m: u32) -> Result<TadicElement> {
    let t = x.t_trunc();
    let pm = arith::pow_u(p, m) as i64;
    let nodes: Vec<Rat> = (1..=t as i64).map(|j| arith::rint(j * pm)).collect();
    let values: Vec<TadicElement> = nodes
        .iter()
        .map(|u| pm_act(&PmElement { u: u.clone(), v: Rat::zero() }, x, p, 0).sub(x))
        .collect::<Result<_>>()?;
    // c(0) = 0, so interpolate on the nodes {0} u {u_i}
    let mut out = TadicElement::zero(t, x.coeffs[0].exp_denom(), x.coeffs[0].level(), x.coeffs[0].prec());
    for (j, vj) in values.iter().enumerate() {
        let uj = &nodes[j];
        // l_j(u) = (u / u_j) prod_{i != j} (u - u_i)/(u_j - u_i); its u-coefficient is
        // (1/u_j) prod_{i != j} (-u_i)/(u_j - u_i)
        let mut coef = Rat::one() / uj;
        for (i, ui) in nodes.iter().enumerate() {
            if i != j {
                coef = coef * (-ui) / (uj - ui);
            }
        }
        out = out.add(&vj.scale_rat(&coef))?;
    }
    Ok(out)
}

/// The first-order u-coefficient of the cocycle equals d1 / p^m.
pub fn cocycle_check(x: &TadicElement, p: u64, m: u32) -> bool {
    let pm = arith::rint(arith::pow_u(p, m) as i64);
    let expected = derive_d1(x, p, m).scale_rat(&(Rat::one() / pm));
    matches!(cocycle_first_order_u(x, p, m).and_then(|c| c.sub(&expected)), Ok(d) if d.is_zero())
}

/// In the v-direction: (pm_act((0, v), x) - x)/v = d2 x / p^m mod p^{v_p(v) - v_p(2)}.
pub fn cocycle_check_v(x: &TadicElement, p: u64, m: u32, v: &Rat, padic_prec: i64) -> bool {
    let pm = arith::rint(arith::pow_u(p, m) as i64);
    let g = PmElement { u: Rat::zero(), v: v.clone() };
    let lhs = pm_act(&g, x, p, padic_prec).sub(x).map(|d| d.scale_rat(&(Rat::one() / v)));
    let rhs = derive_d2(x, p, m).scale_rat(&(Rat::one() / pm));
    let need = arith::vp_rat(v, p).unwrap_or(0) - arith::vp_u64(2, p) as i64;
    matches!(lhs.and_then(|l| l.sub(&rhs)), Ok(d) if d.coordinate_valuation(p).is_none_or(|val| val >= need))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rint};

    fn qm(level: u64, t: usize) -> TadicElement {
        TadicElement::monomial(t, CycNumber::one(level), &rat(1, level as i64), 0, level, &rint(2)).unwrap()
    }

    #[test]
    fn derivation_examples() {
        // d1(q_M) = (p^m / M) q_M t, d2(t) = p^m t
        let x = qm(5, 3);
        let d = derive_d1(&x, 5, 1);
        assert_eq!(d.support(), vec![1]);
        assert_eq!(d.coeffs[1].coeff(&rat(1, 5)).as_rational(), Some(rint(1)));
        let t = TadicElement::monomial(3, CycNumber::one(5), &rint(0), 1, 5, &rint(2)).unwrap();
        assert_eq!(derive_d2(&t, 5, 1), t.scale_rat(&rint(5)));
        assert!(derive_d1(&t, 5, 1).is_zero());
    }

    #[test]
    fn commutator_on_samples() {
        for x in sample_elements(5, 4, &rint(2)).unwrap() {
            for m in 1..3 {
                assert!(commutator_check(&x, 5, m));
            }
        }
    }

    #[test]
    fn identity_acts_trivially() {
        for x in sample_elements(5, 4, &rint(2)).unwrap() {
            assert_eq!(pm_act(&PmElement::identity(), &x, 5, 6), x);
        }
    }

    #[test]
    fn padic_exp_matches_log_identity() {
        // exp(a) exp(b) = exp(a + b) mod p^prec
        let (a, b) = (rint(5), rint(10));
        let lhs = padic_exp(&a, 5, 8) * padic_exp(&b, 5, 8);
        let rhs = padic_exp(&(&a + &b), 5, 8);
        assert!(arith::vp_rat(&(lhs - rhs), 5).unwrap() >= 8);
    }

    #[test]
    fn group_law_on_grid() {
        let xs = sample_elements(5, 4, &rint(2)).unwrap();
        for g1 in generator_grid(5, 1) {
            for g2 in generator_grid(5, 1) {
                let r = group_law_check(&g1, &g2, &xs, 5, 1, 4);
                assert!(r.passed(), "{:?}", r);
            }
        }
    }

    #[test]
    fn left_form_fails_for_noncommuting_pair() {
        let xs = sample_elements(5, 4, &rint(2)).unwrap();
        let g = generator_grid(5, 1);
        let r = group_law_check(&g[0], &g[2], &xs, 5, 1, 4);
        assert_eq!(r.detail.unwrap()["leftFormHolds"], false);
    }

    #[test]
    fn cocycle_first_order() {
        for x in sample_elements(5, 4, &rint(2)).unwrap() {
            assert!(cocycle_check(&x, 5, 1));
            assert!(cocycle_check_v(&x, 5, 1, &rint(25), 6));
        }
    }

    #[test]
    fn rejects_small_valuation() {
        assert!(PmElement::new(rint(1), rint(0), 5, 1).is_err());
        assert!(PmElement::new(rint(5), rint(25), 5, 1).is_ok());
    }
}
