//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stablefield::lattice::{Basis, GroupSpec};

/// Exact coset key for `t + K` computed from a rational left inverse of the
/// kernel basis: `t ~ t'` iff `t - t'` lies in `span V` and has integral
/// coordinates. No enumeration involved.
pub struct CosetOracle {
    d: usize,
    q: usize,
    /// `V^+ = p / den` with `p` integral.
    p: Vec<Vec<i128>>,
    den: i128,
    v: Vec<Vec<i128>>,
}

impl CosetOracle {
    pub fn new(v: &Basis) -> Self {
        let d = v.dim;
        let q = v.len();
        if q == 0 {
            return CosetOracle { d, q, p: vec![], den: 1, v: vec![] };
        }
        let pinv = v.to_int_matrix().to_rational().left_inverse().expect("independent kernel basis");
        let mut den = num_bigint::BigInt::from(1);
        for i in 0..q {
            for j in 0..d {
                den = den.lcm(pinv[(i, j)].denom());
            }
        }
        let p = (0..q)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let x = &pinv[(i, j)] * num_rational::BigRational::from_integer(den.clone());
                        assert!(x.is_integer());
                        x.to_integer().to_i128().unwrap()
                    })
                    .collect()
            })
            .collect();
        let v = v.columns.iter().map(|c| c.iter().map(|&x| x as i128).collect()).collect();
        CosetOracle { d, q, p, den: den.to_i128().unwrap(), v }
    }

    pub fn key(&self, t: &[i64]) -> Vec<i128> {
        let t: Vec<i128> = t.iter().map(|&x| x as i128).collect();
        if self.q == 0 {
            return t;
        }
        let coeffs: Vec<i128> = self.p.iter().map(|r| r.iter().zip(&t).map(|(a, b)| a * b).sum()).collect();
        // den * t - V * (P t): zero iff t in span V
        let mut key: Vec<i128> = (0..self.d)
            .map(|i| self.den * t[i] - (0..self.q).map(|j| self.v[j][i] * coeffs[j]).sum::<i128>())
            .collect();
        key.extend(coeffs.iter().map(|c| c.mod_floor(&self.den)));
        key
    }
}

pub struct BoxScan {
    /// canonical representative -> (N(u), m(u, n))
    pub cosets: HashMap<Vec<i64>, (i64, u64)>,
}

/// Scans every point of `[-n, n]^d` and groups them by coset.
pub fn box_scan(oracle: &CosetOracle, d: usize, n: i64) -> BoxScan {
    let mut classes: HashMap<Vec<i128>, (Vec<i64>, i64, u64)> = HashMap::new();
    let mut t = vec![-n; d];
    loop {
        let key = oracle.key(&t);
        let norm = t.iter().map(|x| x.abs()).max().unwrap_or(0);
        let entry = classes.entry(key).or_insert_with(|| (t.clone(), norm, 0));
        entry.2 += 1;
        if norm < entry.1 || (norm == entry.1 && t < entry.0) {
            entry.0 = t.clone();
            entry.1 = norm;
        }
        let mut i = 0;
        loop {
            if i == d {
                let cosets = classes.into_values().map(|(rep, norm, m)| (rep, (norm, m))).collect();
                return BoxScan { cosets };
            }
            if t[i] < n {
                t[i] += 1;
                break;
            }
            t[i] = -n;
            i += 1;
        }
    }
}

/// Random kernel lattice with `d <= max_d` and rank at most `d - 1`.
pub fn random_group_spec(rng: &mut ChaCha8Rng, max_d: usize) -> GroupSpec {
    let d = rng.gen_range(1..=max_d);
    let gens = rng.gen_range(0..d);
    let kernel_gens = (0..gens).map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect()).collect();
    GroupSpec::new(d, kernel_gens)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn is_zero_vec(v: &[i128]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn abs_max(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
