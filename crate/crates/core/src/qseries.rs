//! Truncated Puiseux series in q with exponents in (1/D)Z and coefficients in Q(zeta_L).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::arith::{self, Rat};
use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};

/// `sum_{n} c_n q^{n/D} + O(q^prec)`, terms with exponent >= prec are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    exp_denom: u64,
    level: u64,
    prec: Rat,
    terms: BTreeMap<i64, CycNumber>,
}

fn ceil_div_rat(x: &Rat, d: u64) -> i64 {
    // smallest n with n/d >= x
    (x * arith::rint(d as i64)).ceil().to_integer().to_i64().expect("exponent overflow")
}

impl QExpansion {
    pub fn zero(exp_denom: u64, level: u64, prec: Rat) -> Self {
        assert!(exp_denom >= 1);
        QExpansion { exp_denom, level, prec, terms: BTreeMap::new() }
    }

    /// `c q^e + O(q^prec)`; `e` must lie in (1/D)Z.
    pub fn monomial(c: CycNumber, e: &Rat, exp_denom: u64, prec: Rat) -> Result<Self> {
        let mut x = Self::zero(exp_denom, c.level(), prec);
        let n = x.index_of(e)?;
        x.add_term(n, &c);
        Ok(x)
    }

    pub fn constant(c: CycNumber, prec: Rat) -> Self {
        Self::monomial(c, &Rat::zero(), 1, prec).unwrap()
    }

    pub fn exp_denom(&self) -> u64 {
        self.exp_denom
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn prec(&self) -> &Rat {
        &self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn exponent(&self, n: i64) -> Rat {
        arith::rat(n, self.exp_denom as i64)
    }

    fn index_of(&self, e: &Rat) -> Result<i64> {
        let n = e * arith::rint(self.exp_denom as i64);
        if !n.is_integer() {
            return Err(Error::Domain(format!("exponent {} not in (1/{})Z", arith::rat_to_string(e), self.exp_denom)));
        }
        Ok(n.to_integer().to_i64().expect("exponent overflow"))
    }

    /// Iterates `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rat, &CycNumber)> + '_ {
        self.terms.iter().map(move |(&n, c)| (self.exponent(n), c))
    }

    pub fn raw_terms(&self) -> &BTreeMap<i64, CycNumber> {
        &self.terms
    }

    pub fn coeff(&self, e: &Rat) -> CycNumber {
        match self.index_of(e) {
            Ok(n) => self.terms.get(&n).cloned().unwrap_or_else(|| CycNumber::zero(self.level)),
            Err(_) => CycNumber::zero(self.level),
        }
    }

    pub fn constant_term(&self) -> CycNumber {
        self.coeff(&Rat::zero())
    }

    /// Smallest exponent with a nonzero coefficient, or the precision for a zero series.
    pub fn ord(&self) -> Rat {
        match self.terms.keys().next() {
            Some(&n) => self.exponent(n),
            None => self.prec.clone(),
        }
    }

    /// Adds `c q^{n/D}`, dropping it if beyond the precision.
    pub fn add_term(&mut self, n: i64, c: &CycNumber) {
        assert_eq!(c.level(), self.level, "level mismatch");
        if self.exponent(n) >= self.prec || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&n) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&n);
                }
            }
            None => {
                self.terms.insert(n, c.clone());
            }
        }
    }

    /// Adds `r zeta^j q^{n/D}`.
    pub fn add_root_term(&mut self, n: i64, r: &Rat, j: i64) {
        if self.exponent(n) >= self.prec || r.is_zero() {
            return;
        }
        let level = self.level;
        let v = self.terms.entry(n).or_insert_with(|| CycNumber::zero(level));
        v.add_root_multiple(r, j);
        if v.is_zero() {
            self.terms.remove(&n);
        }
    }

    pub fn add_term_at(&mut self, e: &Rat, c: &CycNumber) -> Result<()> {
        let n = self.index_of(e)?;
        self.add_term(n, c);
        Ok(())
    }

    /// Re-expresses the series on the lattice (1/D')Z; fails unless every exponent lies in it.
    pub fn with_exp_denom(&self, d: u64) -> Result<Self> {
        let (d0, d1) = (self.exp_denom as i64, d as i64);
        let mut terms = BTreeMap::new();
        for (&n, c) in &self.terms {
            if (n * d1) % d0 != 0 {
                return Err(Error::LatticeMismatch(self.exp_denom, d));
            }
            terms.insert(n * d1 / d0, c.clone());
        }
        Ok(QExpansion { exp_denom: d, level: self.level, prec: self.prec.clone(), terms })
    }

    /// Coarsest lattice containing every exponent.
    pub fn reduce_exp_denom(&self) -> Self {
        let g = self.terms.keys().fold(self.exp_denom as i64, |g, &n| arith::gcd(g, n)).unsigned_abs().max(1);
        QExpansion {
            exp_denom: self.exp_denom / g,
            level: self.level,
            prec: self.prec.clone(),
            terms: self.terms.iter().map(|(&n, c)| (n / g as i64, c.clone())).collect(),
        }
    }

    fn common(&self, o: &Self) -> Result<(Self, Self)> {
        if self.level != o.level {
            return Err(Error::LevelMismatch(self.level, o.level));
        }
        let d = arith::lcm(self.exp_denom, o.exp_denom);
        Ok((self.with_exp_denom(d)?, o.with_exp_denom(d)?))
    }

    pub fn truncate(&self, prec: &Rat) -> Self {
        let p = prec.min(&self.prec).clone();
        let mut out = QExpansion::zero(self.exp_denom, self.level, p);
        for (&n, c) in &self.terms {
            out.add_term(n, c);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.common(o)?;
        let prec = a.prec.clone().min(b.prec.clone());
        let mut out = a.truncate(&prec);
        for (&n, c) in &b.terms {
            out.add_term(n, c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        QExpansion {
            exp_denom: self.exp_denom,
            level: self.level,
            prec: self.prec.clone(),
            terms: self.terms.iter().map(|(&n, c)| (n, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CycNumber) -> Result<Self> {
        if c.level() != self.level {
            return Err(Error::LevelMismatch(self.level, c.level()));
        }
        let mut out = QExpansion::zero(self.exp_denom, self.level, self.prec.clone());
        for (&n, v) in &self.terms {
            out.add_term(n, &(v * c));
        }
        Ok(out)
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        let mut out = QExpansion::zero(self.exp_denom, self.level, self.prec.clone());
        for (&n, v) in &self.terms {
            out.add_term(n, &v.scale(r));
        }
        out
    }

    /// Multiplication by q^e; the precision shifts with it.
    pub fn shift(&self, e: &Rat) -> Result<Self> {
        let k = self.index_of(e)?;
        Ok(QExpansion {
            exp_denom: self.exp_denom,
            level: self.level,
            prec: &self.prec + e,
            terms: self.terms.iter().map(|(&n, c)| (n + k, c.clone())).collect(),
        })
    }

    /// Product with precision min(P_x + ord y, P_y + ord x).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.common(o)?;
        let prec = (&a.prec + b.ord()).min(&b.prec + a.ord());
        let mut out = QExpansion::zero(a.exp_denom, a.level, prec);
        let limit = ceil_div_rat(&out.prec, out.exp_denom);
        for (&n, x) in &a.terms {
            for (&m, y) in &b.terms {
                if n + m >= limit {
                    break;
                }
                out.add_term(n + m, &(x * y));
            }
        }
        Ok(out)
    }

    /// Positive power by repeated multiplication.
    pub fn pow(&self, e: u64) -> Result<Self> {
        assert!(e >= 1);
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplicative inverse; requires an invertible leading coefficient.
    pub fn invert(&self) -> Result<Self> {
        let (&n0, c0) = self.terms.iter().next().ok_or(Error::NotInvertible)?;
        let c0inv = c0.inv().map_err(|_| Error::NotInvertible)?;
        let e0 = self.exponent(n0);
        let rel_prec = &self.prec - &e0;
        // y = x / (c0 q^e0) = 1 + h, h of positive order
        let d = self.exp_denom;
        let limit = ceil_div_rat(&rel_prec, d);
        let y: Vec<(i64, CycNumber)> = self.terms.iter().skip(1).map(|(&n, c)| (n - n0, c * &c0inv)).collect();
        // z = 1/y computed term by term: z_m = -sum_{k>0} y_k z_{m-k}
        let mut z: BTreeMap<i64, CycNumber> = BTreeMap::new();
        z.insert(0, CycNumber::one(self.level));
        for m in 1..limit {
            let mut acc = CycNumber::zero(self.level);
            for (k, yk) in &y {
                if *k > m {
                    break;
                }
                if let Some(zz) = z.get(&(m - k)) {
                    acc -= &(yk * zz);
                }
            }
            if !acc.is_zero() {
                z.insert(m, acc);
            }
        }
        let mut out = QExpansion::zero(d, self.level, &rel_prec - &e0);
        for (m, c) in z {
            out.add_term(m - n0, &(&c * &c0inv));
        }
        Ok(out)
    }

    /// `log(1 - c q^e) = -sum_{j>=1} c^j q^{je}/j` for e > 0.
    pub fn formal_log1m(c: &CycNumber, e: &Rat, exp_denom: u64, prec: Rat) -> Result<Self> {
        if *e <= Rat::zero() {
            return Err(Error::Domain("formal_log1m needs a positive exponent".into()));
        }
        let mut out = QExpansion::zero(exp_denom, c.level(), prec);
        let n = out.index_of(e)?;
        let mut cj = c.clone();
        let mut j = 1i64;
        while out.exponent(n * j) < out.prec {
            out.add_term(n * j, &cj.scale(&-arith::rat(1, j)));
            cj = &cj * c;
            j += 1;
        }
        Ok(out)
    }

    /// Substitution q -> q^s.
    pub fn substitute_power(&self, s: u64) -> Self {
        QExpansion {
            exp_denom: self.exp_denom,
            level: self.level,
            prec: &self.prec * arith::rint(s as i64),
            terms: self.terms.iter().map(|(&n, c)| (n * s as i64, c.clone())).collect(),
        }
    }

    /// Action of tau -> tau + 1: q^{n/D} -> zeta_D^n q^{n/D}. Needs D | level.
    pub fn twist_t(&self) -> Result<Self> {
        if !self.level.is_multiple_of(self.exp_denom) {
            return Err(Error::Domain(format!(
                "twist needs the exponent denominator {} to divide the level {}",
                self.exp_denom, self.level
            )));
        }
        let step = (self.level / self.exp_denom) as i64;
        let mut out = QExpansion::zero(self.exp_denom, self.level, self.prec.clone());
        for (&n, c) in &self.terms {
            out.add_term(n, &(c * &CycNumber::root_of_unity(self.level, n * step)));
        }
        Ok(out)
    }

    pub fn galois_sigma(&self, d: i64) -> Result<Self> {
        let mut out = QExpansion::zero(self.exp_denom, self.level, self.prec.clone());
        for (&n, c) in &self.terms {
            out.add_term(n, &c.galois_sigma(d)?);
        }
        Ok(out)
    }

    pub fn embed(&self, level: u64) -> Result<Self> {
        let mut out = QExpansion::zero(self.exp_denom, level, self.prec.clone());
        for (&n, c) in &self.terms {
            out.add_term(n, &c.embed(level)?);
        }
        Ok(out)
    }

    /// `q d/dq`.
    pub fn q_derivative(&self) -> Self {
        let mut out = QExpansion::zero(self.exp_denom, self.level, self.prec.clone());
        for (&n, c) in &self.terms {
            out.add_term(n, &c.scale(&self.exponent(n)));
        }
        out
    }

    /// Membership in p^t K_M^{++}: every coefficient a of q^e satisfies
    /// a in p^{t-e} Z_(p)[zeta] (tested on power-basis coordinates).
    pub fn is_km_integral(&self, m: u64, p: u64, t: i64) -> bool {
        let _ = m;
        self.terms().all(|(e, c)| match c.coordinate_valuation(p) {
            None => true,
            Some(v) => arith::rint(v) >= arith::rint(t) - e,
        })
    }

    /// Equality of all terms below the smaller of the two precisions.
    pub fn eq_to_prec(&self, o: &Self) -> bool {
        match self.sub(o) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }

    /// Minimal coordinate valuation over all coefficients, `None` if the series vanishes.
    pub fn coordinate_valuation(&self, p: u64) -> Option<i64> {
        self.terms.values().filter_map(|c| c.coordinate_valuation(p)).min()
    }

    pub fn prime_to_p_denominator(&self, p: u64) -> BigInt {
        use num_integer::Integer;
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(&c.prime_to_p_denominator(p)))
    }

    /// Numerical value at tau (upper half plane), ignoring the O-term.
    pub fn evaluate(&self, tau: Complex64) -> Complex64 {
        let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
        self.terms().fold(Complex64::zero(), |acc, (e, c)| {
            acc + c.to_complex() * (two_pi_i * tau * arith::rat_to_f64(&e)).exp()
        })
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(e, c)| {
                let mut row = vec![json!(e.numer().to_i64().unwrap()), json!(e.denom().to_i64().unwrap())];
                row.extend(c.coords().iter().map(|r| json!(arith::rat_to_string(r))));
                Value::Array(row)
            })
            .collect();
        json!({
            "expDenom": self.exp_denom,
            "coeffLevel": self.level,
            "prec": arith::rat_to_string(&self.prec),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let d = v["expDenom"].as_u64().ok_or_else(|| bad("expDenom"))?;
        let level = v["coeffLevel"].as_u64().ok_or_else(|| bad("coeffLevel"))?;
        let prec = v["prec"].as_str().and_then(arith::parse_rat).ok_or_else(|| bad("prec"))?;
        if d == 0 || level == 0 {
            return Err(bad("zero lattice or level"));
        }
        let mut out = QExpansion::zero(d, level, prec);
        for row in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let row = row.as_array().ok_or_else(|| bad("term row"))?;
            if row.len() < 2 {
                return Err(bad("term row"));
            }
            let num = row[0].as_i64().ok_or_else(|| bad("numerator"))?;
            let den = row[1].as_i64().ok_or_else(|| bad("denominator"))?;
            if den == 0 {
                return Err(bad("denominator"));
            }
            let coords = row[2..]
                .iter()
                .map(|c| c.as_str().and_then(arith::parse_rat).ok_or_else(|| bad("coordinate")))
                .collect::<Result<Vec<_>>>()?;
            if coords.len() != crate::cyclotomic::field(level).degree {
                return Err(bad("coordinate count"));
            }
            let c = CycNumber::from_coords(level, coords);
            out.add_term_at(&arith::rat(num, den), &c)?;
        }
        Ok(out)
    }

    /// Terms only, without the O-term.
    pub fn display_terms(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(e, c)| {
                let cs = c.to_string();
                let cs = if c.coords().iter().filter(|x| !x.is_zero()).count() > 1 { format!("({cs})") } else { cs };
                if e.is_zero() {
                    cs
                } else if e.is_one() {
                    format!("{cs}*q")
                } else {
                    format!("{cs}*q^{}", fmt_exp(&e))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

fn fmt_exp(e: &Rat) -> String {
    if e.is_integer() {
        arith::rat_to_string(e)
    } else {
        format!("({})", arith::rat_to_string(e))
    }
}

impl fmt::Display for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(q^{})", self.display_terms(), fmt_exp(&self.prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rint};

    fn one_minus(c: CycNumber, e: Rat, d: u64, prec: Rat) -> QExpansion {
        let lvl = c.level();
        let mut x = QExpansion::constant(CycNumber::one(lvl), prec.clone()).with_exp_denom(d).unwrap();
        x.add_term_at(&e, &-&c).unwrap();
        x
    }

    #[test]
    fn invert_geometric() {
        let z = CycNumber::root_of_unity(3, 1);
        let x = one_minus(z.clone(), rat(1, 3), 3, rint(1));
        let y = x.invert().unwrap();
        assert_eq!(y.num_terms(), 3);
        assert_eq!(y.coeff(&rat(2, 3)), z.pow(2).unwrap());
        assert_eq!(y.prec(), &rint(1));
        let prod = x.mul(&y).unwrap();
        assert!(prod.eq_to_prec(&QExpansion::constant(CycNumber::one(3), rint(1))));
    }

    #[test]
    fn invert_with_negative_leading_exponent() {
        let mut x = QExpansion::zero(2, 1, rint(2));
        x.add_term_at(&rat(1, 2), &CycNumber::from_int(1, 2)).unwrap();
        x.add_term_at(&rint(1), &CycNumber::one(1)).unwrap();
        let y = x.invert().unwrap();
        assert_eq!(y.ord(), rat(-1, 2));
        assert_eq!(y.prec(), &rint(1));
        let p = x.mul(&y).unwrap();
        assert_eq!(p.prec(), &rat(3, 2));
        assert!(p.eq_to_prec(&QExpansion::constant(CycNumber::one(1), rint(5))));
    }

    #[test]
    fn multiplication_precision_rule() {
        let mut x = QExpansion::zero(1, 1, rint(5));
        x.add_term(2, &CycNumber::one(1));
        let mut y = QExpansion::zero(1, 1, rint(3));
        y.add_term(1, &CycNumber::one(1));
        // min(5 + 1, 3 + 2)
        assert_eq!(x.mul(&y).unwrap().prec(), &rint(5));
    }

    #[test]
    fn log_relation() {
        let c = CycNumber::root_of_unity(5, 2);
        let e = rat(1, 5);
        let p = rint(3);
        let a = QExpansion::formal_log1m(&c, &e, 5, p.clone()).unwrap();
        let b = QExpansion::formal_log1m(&-&c, &e, 5, p.clone()).unwrap();
        let cc = QExpansion::formal_log1m(&(&c * &c), &(&e * rint(2)), 5, p).unwrap();
        assert!(a.add(&b).unwrap().eq_to_prec(&cc));
    }

    #[test]
    fn twist_and_substitute() {
        let mut x = QExpansion::zero(3, 3, rint(2));
        x.add_term(1, &CycNumber::one(3));
        let t = x.twist_t().unwrap();
        assert_eq!(t.coeff(&rat(1, 3)), CycNumber::root_of_unity(3, 1));
        let mut bad = QExpansion::zero(4, 3, rint(2));
        bad.add_term(1, &CycNumber::one(3));
        assert!(bad.twist_t().is_err());
        let s = x.substitute_power(3);
        assert_eq!(s.coeff(&rint(1)), CycNumber::one(3));
        assert_eq!(s.prec(), &rint(6));
    }

    #[test]
    fn km_integrality_examples() {
        let p = 5;
        let mut x = QExpansion::zero(1, 1, rint(3));
        x.add_term(1, &CycNumber::from_rat(1, rat(1, 5)));
        assert!(x.is_km_integral(1, p, 0));
        let mut y = QExpansion::zero(1, 1, rint(3));
        y.add_term(0, &CycNumber::from_rat(1, rat(1, 5)));
        assert!(!y.is_km_integral(1, p, 0));
        let mut z = QExpansion::zero(5, 5, rint(3));
        z.add_term(0, &CycNumber::from_int(5, 5));
        z.add_term(1, &CycNumber::one(5));
        assert!(!z.is_km_integral(5, p, 1));
    }

    #[test]
    fn json_round_trip() {
        let mut x = QExpansion::zero(6, 3, rat(7, 2));
        x.add_term(-1, &CycNumber::root_of_unity(3, 1).scale(&rat(-2, 7)));
        x.add_term(4, &CycNumber::from_int(3, 11));
        let v = x.to_json();
        assert_eq!(QExpansion::from_json(&v).unwrap(), x);
        assert!(QExpansion::from_json(&json!({"expDenom": 0})).is_err());
    }

    #[test]
    fn level_mismatch() {
        let a = QExpansion::zero(1, 3, rint(1));
        let b = QExpansion::zero(1, 5, rint(1));
        assert!(matches!(a.add(&b), Err(Error::LevelMismatch(3, 5))));
    }
}
