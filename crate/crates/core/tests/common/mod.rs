//! Reference computations that share no code with the walk engine.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Position distribution after `steps` steps, by summing the amplitude of
/// every coin history. A history fixes the coin index after each coin
/// toss; its amplitude is the product of coin entries and defect phases
/// along the path. Paths ending on the same `(x, coin)` interfere.
pub fn path_sum_distribution(
    steps: usize,
    theta_deg: f64,
    defect: Option<(i64, f64)>,
    initial_site: i64,
    initial_coin: [Complex64; 2],
) -> BTreeMap<i64, f64> {
    let two_theta = 2.0 * theta_deg.to_radians();
    let (c, s) = (two_theta.cos(), two_theta.sin());
    // entry[out][in]
    let coin = [[c, s], [s, -c]];
    let phase = defect.map(|(n, phi)| (n, Complex64::from_polar(1.0, phi.to_radians())));

    let mut endpoints: BTreeMap<(i64, usize), Complex64> = BTreeMap::new();
    for start in 0..2 {
        if initial_coin[start] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for history in 0u64..(1u64 << steps) {
            let mut amp = initial_coin[start];
            let mut x = initial_site;
            let mut prev = start;
            for k in 0..steps {
                let next = ((history >> k) & 1) as usize;
                amp *= coin[next][prev];
                if let Some((n, f)) = phase {
                    if x == n {
                        amp *= f;
                    }
                }
                x += if next == 0 { -1 } else { 1 };
                prev = next;
            }
            *endpoints
                .entry((x, prev))
                .or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
    }
    let mut dist = BTreeMap::new();
    for ((x, _), a) in endpoints {
        *dist.entry(x).or_insert(0.0) += a.norm_sqr();
    }
    dist
}
