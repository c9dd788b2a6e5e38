//! Reference computations written independently of the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Random scheduling rows for `B`, `N`: each row a uniform point on the
/// simplex with the last coordinate dropped.
pub fn random_rows(b: usize, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..=b + n)
        .map(|p| {
            let len = p.min(b) + 2;
            let e: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e[..len - 1].iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Dense transition matrix built straight from the chain description.
pub fn transition_matrix(rows: &[Vec<f64>], b: usize, n: usize, nu_d: f64, zeta: Option<&[f64]>) -> Vec<Vec<f64>> {
    let m = b + n;
    let nu_s = 1.0 - nu_d;
    let mut q = vec![vec![0.0; m + 1]; m + 1];
    for p in 0..=m {
        let sent: f64 = rows[p].iter().sum();
        let fail = 1.0 - sent + nu_d * sent;
        for (t, a) in rows[p].iter().enumerate() {
            q[p][t] += nu_s * a;
        }
        match zeta {
            Some(z) if p == b => {
                for (i, share) in z.iter().enumerate() {
                    let n_a = i + 1;
                    q[p][b + 1 + (n - n_a)] += share * fail;
                }
            }
            _ => q[p][(p + 1).min(m)] += fail,
        }
    }
    q
}

/// Stationary distribution by power iteration on the lazy chain.
pub fn stationary(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += pi[i] * (0.5 * q[i][j] + if i == j { 0.5 } else { 0.0 });
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    pi
}

/// Fading threshold `kappa[p][q] = -ln(sum_{i <= q} a[p][i])`.
pub fn thresholds(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let mut c = 0.0;
            r.iter()
                .map(|a| {
                    c += a;
                    if c >= 1.0 {
                        0.0
                    } else {
                        -c.ln()
                    }
                })
                .collect()
        })
        .collect()
}

/// Packets scheduled in state `p` at fading `f`.
pub fn packets(kappa: &[Vec<f64>], p: usize, b: usize, f: f64) -> usize {
    for (q, k) in kappa[p].iter().enumerate() {
        if f > *k {
            return p.min(b) - q + 1;
        }
    }
    0
}

/// Path-loss gain by inversion: `(d2 + (1 - u)(1 - d2))^(-alpha/2)`.
pub fn pathloss_sample(delta: f64, alpha: f64, rng: &mut impl Rng) -> f64 {
    let d2 = delta * delta;
    let u: f64 = rng.random();
    (d2 + (1.0 - u) * (1.0 - d2)).powf(-alpha / 2.0)
}

/// Draws VU gains by rejection: state from `pi`, fading from Exp(1),
/// accepted with probability `L / L_max`, then one gain per sample.
pub fn vu_gains(
    rows: &[Vec<f64>],
    pi: &[f64],
    b: usize,
    delta: f64,
    alpha: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let kappa = thresholds(rows);
    let lmax = (b + 1) as f64;
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut p = pi.len() - 1;
        for (i, w) in pi.iter().enumerate() {
            acc += w;
            if u < acc {
                p = i;
                break;
            }
        }
        let f = -(1.0 - rng.random::<f64>()).ln();
        let l = packets(&kappa, p, b, f) as f64;
        if rng.random::<f64>() * lmax < l {
            out.push(f * pathloss_sample(delta, alpha, rng));
        }
    }
    out
}

/// `ln2 * mean(2^(C u_i) / x_(i))` over the sorted sample.
pub fn mc_energy(gains: &mut [f64], c: f64) -> f64 {
    gains.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = gains.len() as f64;
    let s: f64 = gains
        .iter()
        .enumerate()
        .map(|(i, x)| (c * (i as f64 + 0.5) / n).exp2() / x)
        .sum();
    std::f64::consts::LN_2 * s / n
}

/// Solves `A x = y` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut y: Vec<f64>) -> Vec<f64> {
    let n = y.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        y.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            y[r] -= f * y[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (y[r] - s) / a[r][r];
    }
    x
}

/// SIC energies from the interference equations: with users sorted by
/// decreasing gain, user `i` sees `Z0 + beta2 * sum_all E + sum_{j > i} h_j E_j`
/// and needs `h_i E_i = rho_i * (that)`.
pub fn sic_energies(gains: &[f64], rates: &[f64], beta2: f64, z0: f64) -> Vec<f64> {
    let k = gains.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).unwrap());
    let rho: Vec<f64> = rates.iter().map(|r| r.exp2() - 1.0).collect();
    let mut a = vec![vec![0.0; k]; k];
    let mut y = vec![0.0; k];
    for (i, &u) in order.iter().enumerate() {
        for (j, &v) in order.iter().enumerate() {
            let mut c = -rho[u] * beta2;
            if j == i {
                c += gains[u];
            }
            if j > i {
                c -= rho[u] * gains[v];
            }
            a[i][j] = c;
        }
        y[i] = rho[u] * z0;
    }
    let x = gauss_solve(a, y);
    let mut out = vec![0.0; k];
    for (i, &u) in order.iter().enumerate() {
        out[u] = x[i];
    }
    out
}
