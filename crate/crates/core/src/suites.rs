//! Verification suites: each expands a configuration into a grid of checks, runs them on the
//! rayon pool and assembles the reports in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Rat};
use crate::distribution::{self, CosetBox};
use crate::eisenstein::TorsionIndex;
use crate::error::{domain, Result};
use crate::moments;
use crate::reciprocity::{self, ReciprocityParams};
use crate::report::{CheckReport, SuiteReport};
use crate::tadic;
use crate::tower;

pub const SUITES: [&str; 7] = ["dist", "borel", "siegel", "measure", "rm", "grouplaw", "reciprocity"];

/// Parameters shared by all suites; each suite reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuiteConfig {
    pub p: u64,
    /// q-adic precision, a rational such as "2" or "5/2".
    pub q_prec: String,
    pub padic_prec: i64,
    pub t_trunc: usize,
    pub weights: Vec<u32>,
    pub levels: Vec<u64>,
    pub refinements: Vec<u64>,
    pub c_values: Vec<i64>,
    /// m of P_m.
    pub m: u32,
    /// Base level M of the tower (rm, reciprocity).
    #[serde(rename = "M")]
    pub big_m: u64,
    /// Tame level N of the measure suite.
    #[serde(rename = "N")]
    pub n_level: u64,
    pub u: i64,
    pub pairs: Vec<(i64, i64)>,
    pub depths: Vec<u32>,
    pub n_max: u32,
    pub t_target: i64,
    pub cauchy_slack: i64,
}

impl SuiteConfig {
    /// The grid used by the acceptance run of each suite.
    pub fn defaults(suite: &str) -> Result<Self> {
        let base = SuiteConfig {
            p: 5,
            q_prec: "2".into(),
            padic_prec: 4,
            t_trunc: 4,
            weights: vec![],
            levels: vec![],
            refinements: vec![2, 3],
            c_values: vec![5, 7],
            m: 1,
            big_m: 5,
            n_level: 3,
            u: 7,
            pairs: vec![],
            depths: vec![],
            n_max: 3,
            t_target: 2,
            cauchy_slack: 1,
        };
        Ok(match suite {
            "dist" => SuiteConfig { q_prec: "3".into(), weights: vec![1, 3, 4], levels: vec![1, 2, 5], ..base },
            "borel" => SuiteConfig { weights: vec![1, 2, 3, 4], levels: vec![5], ..base },
            "siegel" => SuiteConfig { levels: vec![2, 3, 5], ..base },
            "measure" => SuiteConfig {
                q_prec: "1".into(),
                weights: vec![2, 3, 4],
                pairs: vec![(1, 2), (2, 1), (0, 1)],
                depths: vec![0, 1],
                ..base
            },
            "rm" => SuiteConfig { pairs: vec![(1, 2), (2, 1), (1, 0)], depths: vec![1, 2], ..base },
            "grouplaw" => SuiteConfig { ..base },
            "reciprocity" => SuiteConfig { weights: vec![2, 3, 4], pairs: vec![(1, 2), (2, 1)], ..base },
            other => return domain(format!("unknown suite {other}")),
        })
    }

    pub fn prec(&self) -> Result<Rat> {
        match arith::parse_rat(&self.q_prec) {
            Some(r) if r > Rat::from_integer(0.into()) => Ok(r),
            _ => domain(format!("qPrec must be a positive rational, got {:?}", self.q_prec)),
        }
    }

    pub fn validate(&self, suite: &str) -> Result<()> {
        self.prec()?;
        if !arith::is_prime(self.p) {
            return domain(format!("p = {} is not prime", self.p));
        }
        if self.levels.contains(&0) || self.refinements.contains(&0) {
            return domain("levels and refinements must be positive");
        }
        let p = self.p;
        let tower_base_ok = arith::vp_u64(self.big_m, p) >= if p == 2 { 2 } else { 1 };
        let u_ok = arith::gcd(self.u, 6 * p as i64) == 1;
        match suite {
            "grouplaw" if self.m == 0 || self.t_trunc == 0 || (p == 2 && self.m < 2) => {
                domain("grouplaw needs m >= 1 (m >= 2 for p = 2) and tTrunc >= 1")
            }
            "rm" | "grouplaw" if !tower_base_ok => domain("v_p(M) must be at least v_p(2p)"),
            "reciprocity" if !tower_base_ok || !u_ok => domain("reciprocity needs v_p(M) >= v_p(2p) and u prime to 6p"),
            "reciprocity" if self.n_max < 1 || self.weights.iter().any(|&k| k < 2) => {
                domain("reciprocity needs nMax >= 1 and weights >= 2")
            }
            "measure" if self.n_level.is_multiple_of(p) || self.u.rem_euclid(p as i64) == 0 => {
                domain("measure needs N and u prime to p")
            }
            "measure" if self.weights.iter().any(|&k| k < 2) => domain("measure needs weights >= 2"),
            _ => Ok(()),
        }
    }
}

fn identity(suite: &str) -> &'static str {
    match suite {
        "dist" => "r^{k-2} F^(k)_{a/r,b/r} = sum over the D^2 sub-boxes (a+ir, b+jr) of (rD)^{k-2} F^(k) at level rD",
        "borel" => "F^(k)_{a,b}(tau+1) = F^(k)_{a,a+b}(tau); sigma_d F^(k)_{a,b} = F^(k)_{a,db}; same for g_c",
        "siegel" => {
            "g_c is independent of the lift; g_c(t)^{d^2} g_d(ct) = g_d(t)^{c^2} g_c(dt); \
prod_{i,j<D} g_c(a+ir, b+jr) = (-1)^{(c-1)(D-1)/2} g_c(a,b); D2 log g_c = c^2 E_1(t) - c E_1(ct)"
        }
        "measure" => {
            "(k-2)! (S_{n+1} - S_n) in p^n Z_(p)[zeta], S_n = sum (a e1 + b e2)^{k-2} dlog g_u(a/Np^n, b/Np^n)"
        }
        "rm" => "R_M log theta(q, q_{Mp^n}^a zeta_{Mp^n}^b) = p^{-n} log theta(q^{p^n}, q_M^a zeta_M^b)",
        "grouplaw" => {
            "[d1, d2] = -p^m d1; (u1,v1)(u2,v2) = (e^{v2} u1 + u2, v1 + v2) acting on the right; \
first-order cocycle terms are d1/p^m and d2/p^m"
        }
        "reciprocity" => {
            "sum_{a=alpha (M), a<=Mp^n} a^{k-1} E_{u,1}(q^{p^n}, q_M^a zeta_M^beta) -> M^{k-1} F^(k)_u; \
-M res_k(p^{-n} sum (a e1 + b e2)^{k-2} delta1_{a,b}) = Lambda_n"
        }
        _ => "",
    }
}

type Job = Box<dyn Fn() -> Vec<CheckReport> + Send + Sync>;

fn run_jobs(jobs: Vec<Job>) -> Vec<CheckReport> {
    jobs.par_iter().map(|j| j()).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn all_indices(l: u64) -> Vec<(i64, i64)> {
    let li = l as i64;
    (0..li).flat_map(|a| (0..li).map(move |b| (a, b))).collect()
}

fn units_mod(l: u64) -> Vec<i64> {
    (1..l.max(2) as i64).filter(|&d| arith::gcd(d, l as i64) == 1).collect()
}

fn dist_jobs(cfg: &SuiteConfig, prec: &Rat) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &k in &cfg.weights {
        for &r in &cfg.levels {
            for (a, b) in all_indices(r) {
                for &d in &cfg.refinements {
                    let prec = prec.clone();
                    jobs.push(Box::new(move || {
                        vec![distribution::distribution_check(k, &CosetBox::new(r, a, b), d, &prec)]
                    }));
                }
            }
        }
    }
    jobs
}

fn borel_jobs(cfg: &SuiteConfig, prec: &Rat) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &l in &cfg.levels {
        for (a, b) in all_indices(l) {
            let idx = TorsionIndex::new(l, a, b);
            for &k in &cfg.weights {
                let prec = prec.clone();
                jobs.push(Box::new(move || {
                    let mut v = vec![distribution::borel_twist_check(k, &idx, &prec)];
                    for d in units_mod(l) {
                        v.push(distribution::borel_galois_check(k, &idx, d, &prec));
                    }
                    v
                }));
            }
            for &c in &cfg.c_values {
                let prec = prec.clone();
                jobs.push(Box::new(move || {
                    units_mod(l).into_iter().flat_map(|d| distribution::borel_siegel_check(c, &idx, d, &prec)).collect()
                }));
            }
        }
    }
    jobs
}

fn siegel_jobs(cfg: &SuiteConfig, prec: &Rat) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    let cs = cfg.c_values.clone();
    for &l in &cfg.levels {
        for (a, b) in all_indices(l).into_iter().filter(|&ab| ab != (0, 0)) {
            let idx = TorsionIndex::new(l, a, b);
            for (ci, &c) in cs.iter().enumerate() {
                let prec = prec.clone();
                let others: Vec<i64> = cs[ci + 1..].to_vec();
                let refinements = cfg.refinements.clone();
                jobs.push(Box::new(move || {
                    let mut v = vec![
                        distribution::siegel_lift_check(c, &idx, &[(1, 0), (0, 1), (-1, 2)], &prec),
                        distribution::siegel_dlog_link_check(c, &idx, &prec),
                    ];
                    for &d in &others {
                        v.push(distribution::siegel_composition_check(c, d, &idx, &prec));
                    }
                    for &d in &refinements {
                        v.push(distribution::siegel_refinement_check(c, &CosetBox::new(l, a, b), d, &prec));
                    }
                    v
                }));
            }
        }
    }
    jobs
}

fn measure_jobs(cfg: &SuiteConfig, prec: &Rat) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &k in &cfg.weights {
        for &(alpha, beta) in &cfg.pairs {
            for &n in &cfg.depths {
                let (prec, u, p, nl) = (prec.clone(), cfg.u, cfg.p, cfg.n_level);
                jobs.push(Box::new(move || {
                    vec![moments::measure_coherence(k, u, p, nl, alpha, beta, n, n as i64, &prec)]
                }));
            }
        }
    }
    jobs
}

fn rm_jobs(cfg: &SuiteConfig, prec: &Rat) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &n in &cfg.depths {
        for &(a, b) in &cfg.pairs {
            let (prec, m, p) = (prec.clone(), cfg.big_m, cfg.p);
            jobs.push(Box::new(move || vec![tower::rm_logtheta_check(m, p, n, a, b, &prec)]));
        }
    }
    jobs
}

fn grouplaw_reports(cfg: &SuiteConfig, prec: &Rat) -> Result<Vec<CheckReport>> {
    use serde_json::json;
    let (p, m, t) = (cfg.p, cfg.m, cfg.t_trunc);
    let xs = tadic::sample_elements(cfg.big_m, t, prec)?;
    let mut out = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let params = json!({ "sample": i, "p": p, "m": m, "tTrunc": t });
        out.push(CheckReport::new("commutator", params.clone(), tadic::commutator_check(x, p, m)));
        out.push(CheckReport::new("cocycle_u", params.clone(), tadic::cocycle_check(x, p, m)));
        let v = arith::rint(arith::pow_u(p, m + 1) as i64);
        out.push(CheckReport::new("cocycle_v", params, tadic::cocycle_check_v(x, p, m, &v, cfg.padic_prec)));
    }
    let grid = tadic::generator_grid(p, m);
    let pairs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|i| (0..grid.len()).map(move |j| (i, j))).collect();
    let padic = cfg.padic_prec;
    out.extend(
        pairs
            .par_iter()
            .map(|&(i, j)| tadic::group_law_check(&grid[i], &grid[j], &xs, p, m, padic))
            .collect::<Vec<_>>(),
    );
    Ok(out)
}

fn reciprocity_jobs(cfg: &SuiteConfig, prec: &Rat) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &k in &cfg.weights {
        for &(alpha, beta) in &cfg.pairs {
            let params = ReciprocityParams { k, u: cfg.u, p: cfg.p, m: cfg.big_m, alpha, beta, prec: prec.clone() };
            let (n_max, t_target, slack) = (cfg.n_max, cfg.t_target, cfg.cauchy_slack);
            jobs.push(Box::new(move || {
                let mut v = vec![reciprocity::exp_star_verify(&params, n_max, t_target, slack, false)];
                for n in 1..=n_max {
                    v.push(reciprocity::delta1_cross_check(&params, n));
                }
                v
            }));
        }
    }
    jobs
}

/// Runs one suite. Errors only on an invalid configuration; check failures are reported.
pub fn run_suite(suite: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate(suite)?;
    let prec = cfg.prec()?;
    let checks = match suite {
        "dist" => run_jobs(dist_jobs(cfg, &prec)),
        "borel" => run_jobs(borel_jobs(cfg, &prec)),
        "siegel" => run_jobs(siegel_jobs(cfg, &prec)),
        "measure" => run_jobs(measure_jobs(cfg, &prec)),
        "rm" => run_jobs(rm_jobs(cfg, &prec)),
        "grouplaw" => grouplaw_reports(cfg, &prec)?,
        "reciprocity" => run_jobs(reciprocity_jobs(cfg, &prec)),
        other => return domain(format!("unknown suite {other}")),
    };
    let config = serde_json::to_value(cfg).expect("config serializes");
    Ok(SuiteReport::new(suite, identity(suite), config, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_exist_and_validate() {
        for s in SUITES {
            let c = SuiteConfig::defaults(s).unwrap();
            c.validate(s).unwrap();
            assert!(!identity(s).is_empty());
        }
        assert!(SuiteConfig::defaults("nope").is_err());
    }

    #[test]
    fn rejects_bad_prec() {
        let c = SuiteConfig { q_prec: "-1".into(), ..SuiteConfig::defaults("rm").unwrap() };
        assert!(c.validate("rm").is_err());
    }

    #[test]
    fn small_rm_run() {
        let c = SuiteConfig { depths: vec![1], pairs: vec![(1, 2)], ..SuiteConfig::defaults("rm").unwrap() };
        let r = run_suite("rm", &c).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks.len(), 1);
    }
}
