//! Trend test for sweep outputs.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KendallTau {
    pub n: usize,
    /// Concordant minus discordant pairs.
    pub s: i64,
    /// Tau-b, corrected for ties in either coordinate.
    pub tau: f64,
    pub z: f64,
    /// One-sided p-value for a decreasing trend, `P(Z ≤ z)`.
    pub p_decreasing: f64,
    /// One-sided p-value for an increasing trend.
    pub p_increasing: f64,
}

fn tie_groups(v: &[f64]) -> Vec<u64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&x| x == sorted[i]).count();
        if j > 1 {
            out.push(j as u64);
        }
        i += j;
    }
    out
}

/// Kendall's tau-b of `(x, y)` with the tie-corrected normal approximation
/// for `S`. Quadratic in the number of points.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Option<KendallTau> {
    assert_eq!(x.len(), y.len(), "paired samples");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[j] - x[i]).partial_cmp(&0.0)? as i64;
            let b = (y[j] - y[i]).partial_cmp(&0.0)? as i64;
            s += a * b;
        }
    }
    let pairs = |t: u64| (t * (t - 1) / 2) as f64;
    let var_term = |t: u64| (t * (t - 1) * (2 * t + 5)) as f64;
    let (tx, ty) = (tie_groups(x), tie_groups(y));
    let n0 = pairs(n as u64);
    let n1: f64 = tx.iter().map(|&t| pairs(t)).sum();
    let n2: f64 = ty.iter().map(|&t| pairs(t)).sum();
    let denom = ((n0 - n1) * (n0 - n2)).sqrt();
    if denom == 0.0 {
        return None;
    }
    let tau = s as f64 / denom;

    let nn = n as u64;
    let v0 = var_term(nn);
    let vx: f64 = tx.iter().map(|&t| var_term(t)).sum();
    let vy: f64 = ty.iter().map(|&t| var_term(t)).sum();
    let t1: f64 = tx.iter().map(|&t| (t * (t - 1)) as f64).sum::<f64>() * ty.iter().map(|&t| (t * (t - 1)) as f64).sum::<f64>()
        / (2.0 * (nn * (nn - 1)) as f64);
    let t2 = if nn > 2 {
        tx.iter().map(|&t| (t * (t - 1) * (t - 2)) as f64).sum::<f64>()
            * ty.iter().map(|&t| (t * (t - 1) * (t - 2)) as f64).sum::<f64>()
            / (9.0 * (nn * (nn - 1) * (nn - 2)) as f64)
    } else {
        0.0
    };
    let var = (v0 - vx - vy) / 18.0 + t1 + t2;
    let z = if var > 0.0 { s as f64 / var.sqrt() } else { 0.0 };
    let normal = Normal::standard();
    Some(KendallTau {
        n,
        s,
        tau,
        z,
        p_decreasing: normal.cdf(z),
        p_increasing: normal.sf(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_orders() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let up = kendall_tau(&x, &x).unwrap();
        assert_eq!(up.tau, 1.0);
        assert_eq!(up.s, 45);
        let down: Vec<f64> = x.iter().rev().copied().collect();
        let r = kendall_tau(&x, &down).unwrap();
        assert_eq!(r.tau, -1.0);
        // Var(S) = 10·9·25/18 = 125.
        assert!((r.z + 45.0 / 125f64.sqrt()).abs() < 1e-12);
        assert!(r.p_decreasing < 1e-4);
    }

    #[test]
    fn hand_computed_with_ties() {
        // Points (1,1),(1,2),(2,2),(3,1); sign products by index pair:
        // (0,1): dx 0 -> 0. (0,2): +,+ -> +1. (0,3): +,0 -> 0.
        // (1,2): +,0 -> 0. (1,3): +,- -> -1. (2,3): +,- -> -1.
        let r = kendall_tau(&[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.s, -1);
        // n0 = 6, n1 = 1, n2 = 2.
        assert!((r.tau - (-1.0 / 20f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn degenerate() {
        assert!(kendall_tau(&[1.0], &[2.0]).is_none());
        assert!(kendall_tau(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }
}
