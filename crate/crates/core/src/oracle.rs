//! Floating-point lattice sums with Eisenstein summation (inner sum over n, outer over m),
//! used only as an independent numerical check of the exact expansions.

use num_complex::Complex64;

use crate::arith;

const EM_TERMS: usize = 5;

fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * x)
}

/// sum_{j >= j0} (c + L j)^{-k} by Euler-Maclaurin; for k = 1 the divergent log is dropped
/// (it cancels between the two half-lines).
fn tail(c: Complex64, l: f64, j0: f64, k: i32, bern: &[f64]) -> Complex64 {
    let x0 = c + l * j0;
    let integral = if k == 1 { -x0.ln() / l } else { x0.powi(1 - k) / (l * (k - 1) as f64) };
    let mut s = integral + x0.powi(-k) / 2.0;
    // derivatives f^{(r)}(j0) = (-k)(-k-1)...(-k-r+1) L^r x0^{-k-r}
    let mut fact = 1.0;
    let mut coef = 1.0;
    let mut r = 0;
    for i in 1..=EM_TERMS {
        let target = 2 * i - 1;
        while r < target {
            coef *= -(k + r as i32) as f64 * l;
            r += 1;
        }
        fact *= ((2 * i - 1) * (2 * i)) as f64;
        let deriv = x0.powi(-k - target as i32) * coef;
        s -= deriv * (bern[2 * i] / fact);
    }
    s
}

/// sum over n in Z of chi(n) (w + n)^{-k} with chi periodic mod `period`; the term n = 0 is
/// skipped when `skip_zero`.
fn inner_sum(
    w: Complex64,
    k: i32,
    chi: &dyn Fn(i64) -> Complex64,
    period: i64,
    cutoff: i64,
    skip_zero: bool,
    bern: &[f64],
) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for n in -cutoff..=cutoff {
        if skip_zero && n == 0 {
            continue;
        }
        s += chi(n) * (w + n as f64).powi(-k);
    }
    let l = period as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    for rho in 0..period {
        let j0 = ((cutoff - rho).div_euclid(period) + 1) as f64;
        // n = rho + L j > cutoff
        s += chi(rho) * tail(w + rho as f64, l, j0, k, bern);
        // n = -(rho + L j): (w - n)^{-k} = (-1)^k (n - w)^{-k}
        s += chi(-rho) * sign * tail(-w + rho as f64, l, j0, k, bern);
    }
    s
}

fn normalization(k: u32) -> Complex64 {
    let fact: f64 = (1..k).map(|i| i as f64).product();
    fact / Complex64::new(0.0, -std::f64::consts::TAU).powi(k as i32)
}

fn bernoulli_f64() -> Vec<f64> {
    arith::bernoulli_numbers(2 * EM_TERMS).iter().map(arith::rat_to_f64).collect()
}

/// (k-1)!/(-2 pi i)^k sum_m sum_n (m tau + n + z)^{-k}, |m| <= cutoff.
pub fn lattice_e(k: u32, tau: Complex64, z: Complex64, cutoff: i64) -> Complex64 {
    let bern = bernoulli_f64();
    let one = |_: i64| Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for m in -cutoff..=cutoff {
        s += inner_sum(tau * m as f64 + z, k as i32, &one, 1, cutoff, false, &bern);
    }
    normalization(k) * s
}

/// (k-1)!/(-2 pi i)^k sum'_{m,n} e(m b - n a)/(m tau + n)^k for (a, b) = (A/L, B/L).
///
/// |m| runs up to the largest multiple of L not above `cutoff`: for k = 1 and a = 0 the m-sum
/// only converges over whole periods of e(m b).
pub fn lattice_f(k: u32, tau: Complex64, l: u64, a: i64, b: i64, cutoff: i64) -> Complex64 {
    let bern = bernoulli_f64();
    let lf = l as f64;
    let chi = move |n: i64| e(-(n * a).rem_euclid(l as i64) as f64 / lf);
    let m_cut = cutoff - cutoff % l as i64;
    let mut s = Complex64::new(0.0, 0.0);
    for m in -m_cut..=m_cut {
        let phase = e((m * b).rem_euclid(l as i64) as f64 / lf);
        s += phase * inner_sum(tau * m as f64, k as i32, &chi, l as i64, cutoff, m == 0, &bern);
    }
    normalization(k) * s
}

/// The torsion point (a tau + b)/L.
pub fn torsion_point(tau: Complex64, l: u64, a: i64, b: i64) -> Complex64 {
    (tau * a as f64 + b as f64) / l as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e4_level_one_constant() {
        // F^(4) at tau = i: 1/120 + 240/120 sum sigma_3(n) q^n
        let tau = Complex64::new(0.0, 1.0);
        let q = (Complex64::new(0.0, std::f64::consts::TAU) * tau).exp();
        let exact = 1.0 / 120.0 + 2.0 * (q + 9.0 * q * q + 28.0 * q * q * q);
        let v = lattice_f(4, tau, 1, 0, 0, 60);
        assert!((v - exact).norm() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn symmetry_in_z() {
        let tau = Complex64::new(0.1, 0.9);
        let z = Complex64::new(0.2, 0.3);
        for k in 1..4 {
            let a = lattice_e(k, tau, z, 60);
            let b = lattice_e(k, tau, -z, 60);
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a - b * s).norm() < 1e-8);
        }
    }
}
