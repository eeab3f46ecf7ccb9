//! Reference implementations used as test oracles. They share no code with
//! the library: covariances come from closed-form two-mode-squeezed entries
//! and full-size matrix products, wires from a breadth-first search over
//! all phasematched pairs.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::DMatrix;

/// Mode labels `(n, 'z' | 'y')` in engine order: `n` ascending, z before y.
pub fn labels(n_min: i64, n_max: i64) -> Vec<(i64, char)> {
    (n_min..=n_max).flat_map(|n| [(n, 'z'), (n, 'y')]).collect()
}

/// Covariance of the comb after the beam splitter, built without the
/// library: closed-form EPR entries, then one `2M × 2M` beam-splitter
/// matrix applied as `B σ Bᵀ`.
pub fn comb_covariance(p_z: i64, p_y: i64, r_z: f64, r_y: f64, n_min: i64, n_max: i64) -> DMatrix<f64> {
    let labels = labels(n_min, n_max);
    let m = labels.len();
    let idx: BTreeMap<(i64, char), usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut cov = DMatrix::identity(2 * m, 2 * m) * 0.5;
    for (p, r, pol) in [(p_z, r_z, 'z'), (p_y, r_y, 'y')] {
        let (c, s) = (0.5 * (2.0 * r).cosh(), 0.5 * (2.0 * r).sinh());
        for a in n_min..=n_max {
            let b = p - a;
            if b >= a || b < n_min || b > n_max {
                continue;
            }
            let (i, j) = (idx[&(a, pol)], idx[&(b, pol)]);
            cov[(i, i)] = c;
            cov[(j, j)] = c;
            cov[(i, j)] = s;
            cov[(j, i)] = s;
            cov[(m + i, m + i)] = c;
            cov[(m + j, m + j)] = c;
            cov[(m + i, m + j)] = -s;
            cov[(m + j, m + i)] = -s;
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut bs = DMatrix::zeros(2 * m, 2 * m);
    for n in n_min..=n_max {
        let (z, y) = (idx[&(n, 'z')], idx[&(n, 'y')]);
        for off in [0, m] {
            bs[(off + z, off + z)] = h;
            bs[(off + z, off + y)] = h;
            bs[(off + y, off + z)] = h;
            bs[(off + y, off + y)] = -h;
        }
    }
    &bs * cov * bs.transpose()
}

/// Same state after the quarter-turn phase shift on every frequency of the
/// given parity (`Q → -P`, `P → Q` in the Heisenberg picture).
pub fn shifted(cov: &DMatrix<f64>, n_min: i64, n_max: i64, odd: bool) -> DMatrix<f64> {
    let labels = labels(n_min, n_max);
    let m = labels.len();
    let mut s = DMatrix::identity(2 * m, 2 * m);
    for (i, (n, _)) in labels.iter().enumerate() {
        if (n.rem_euclid(2) == 1) == odd {
            s[(i, i)] = 0.0;
            s[(m + i, m + i)] = 0.0;
            s[(i, m + i)] = -1.0;
            s[(m + i, i)] = 1.0;
        }
    }
    &s * cov * s.transpose()
}

/// `(label, Q coefficient, P coefficient)`.
pub type Coeffs = Vec<((i64, char), f64, f64)>;

pub fn variance(cov: &DMatrix<f64>, n_min: i64, n_max: i64, coeffs: &Coeffs) -> f64 {
    let labels = labels(n_min, n_max);
    let m = labels.len();
    let mut v = nalgebra::DVector::zeros(2 * m);
    for (label, q, p) in coeffs {
        let i = labels.iter().position(|l| l == label).expect("label in range");
        v[i] += q;
        v[m + i] += p;
    }
    (v.transpose() * cov * &v)[(0, 0)]
}

pub fn shot_noise(coeffs: &Coeffs) -> f64 {
    0.5 * coeffs.iter().map(|(_, q, p)| q * q + p * p).sum::<f64>()
}

/// Frequency sets of the connected components of the pump-pair graph.
pub fn wire_components(p_z: i64, p_y: i64, n_min: i64, n_max: i64) -> Vec<BTreeSet<i64>> {
    let mut adj: BTreeMap<i64, Vec<i64>> = (n_min..=n_max).map(|n| (n, Vec::new())).collect();
    for a in n_min..=n_max {
        for b in n_min..=n_max {
            if a != b && (a + b == p_z || a + b == p_y) {
                adj.get_mut(&a).unwrap().push(b);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut comps = Vec::new();
    for &start in adj.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(n) = queue.pop_front() {
            comp.insert(n);
            for &k in &adj[&n] {
                if seen.insert(k) {
                    queue.push_back(k);
                }
            }
        }
        comps.push(comp);
    }
    comps
}
