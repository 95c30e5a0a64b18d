//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

pub mod graphs;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use trs_core::feasibility::{FeasibleMatch, Itinerary, Variant};
use trs_core::optimize::{MatchingInstance, Objective};

pub fn edge(rider: u64, driver: u64, t_vhrs: i64) -> FeasibleMatch {
    FeasibleMatch {
        rider,
        driver,
        variant: Variant::FirstMile,
        transfer_node: None,
        handoff_road: 0,
        itinerary: Itinerary::default(),
        depart_time: 0,
        handoff_time: 0,
        arrive_time: 0,
        driver_arrive: 0,
        t_drive: 0,
        t_shared: 0,
        t_transit: 0,
        t_walk: 0,
        t_wait: 0,
        n_transfers: 0,
        t_vhrs,
        transit_cost: 0.0,
        total_cost: 0.0,
    }
}

/// Random instance with parallel edges and some negative savings.
pub fn random_instance(rng: &mut impl Rng, max_edges: usize, objective: Objective) -> MatchingInstance {
    let m = rng.gen_range(0..=max_edges);
    let riders = rng.gen_range(1..=(m / 2 + 2)) as u64;
    let drivers = rng.gen_range(1..=(m / 2 + 2)) as u64;
    let edges = (0..m).map(|_| edge(rng.gen_range(0..riders), 1000 + rng.gen_range(0..drivers), rng.gen_range(-300..3000))).collect();
    MatchingInstance::new(edges, objective)
}

/// Best objective over all valid selections, by depth-first enumeration.
pub fn exhaustive_optimum(inst: &MatchingInstance) -> i64 {
    fn go(inst: &MatchingInstance, k: usize, riders: &mut Vec<u64>, drivers: &mut Vec<u64>) -> i64 {
        if k == inst.edges.len() {
            return 0;
        }
        let skip = go(inst, k + 1, riders, drivers);
        let e = &inst.edges[k];
        if riders.contains(&e.rider) || drivers.contains(&e.driver) {
            return skip;
        }
        riders.push(e.rider);
        drivers.push(e.driver);
        let take = inst.weight(k) + go(inst, k + 1, riders, drivers);
        riders.pop();
        drivers.pop();
        skip.max(take)
    }
    go(inst, 0, &mut Vec::new(), &mut Vec::new())
}

/// Exact optimum of `max c.x, A x <= b, x >= 0` with `b >= 0`, by the
/// tableau simplex method with Bland's rule over rationals.
pub fn rational_lp_max(c: &[i64], rows: &[Vec<i64>], b: &[i64]) -> BigRational {
    let n = c.len();
    let m = rows.len();
    let q = |v: i64| BigRational::from_integer(v.into());
    // Tableau: m constraint rows of n + m + 1 columns, then the objective row.
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut r: Vec<BigRational> = rows[i].iter().map(|&a| q(a)).collect();
            r.extend((0..m).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r.push(q(b[i]));
            r
        })
        .collect();
    let mut obj: Vec<BigRational> = c.iter().map(|&v| -q(v)).collect();
    obj.extend((0..=m).map(|_| BigRational::zero()));
    let mut basis: Vec<usize> = (n..n + m).collect();
    while let Some(col) = (0..n + m).find(|&j| obj[j].is_negative()) {
        let mut pivot: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][col].is_positive() {
                let ratio = &t[i][n + m] / &t[i][col];
                let better = match &pivot {
                    None => true,
                    Some((pi, pr)) => ratio < *pr || (ratio == *pr && basis[i] < basis[*pi]),
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let (pr, _) = pivot.expect("bounded program");
        let p = t[pr][col].clone();
        for v in t[pr].iter_mut() {
            *v /= &p;
        }
        let prow = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pr && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        let f = obj[col].clone();
        for (v, pv) in obj.iter_mut().zip(&prow) {
            *v -= &f * pv;
        }
        basis[pr] = col;
    }
    obj[n + m].clone()
}

/// Optimum of the continuous relaxation of an instance.
pub fn relaxation_optimum(inst: &MatchingInstance) -> BigRational {
    let m = inst.edges.len();
    let c: Vec<i64> = (0..m).map(|k| inst.weight(k)).collect();
    let mut rows = Vec::new();
    for index in [&inst.rider_index, &inst.driver_index] {
        for ks in index.values() {
            let mut r = vec![0; m];
            for &k in ks {
                r[k] = 1;
            }
            rows.push(r);
        }
    }
    for k in 0..m {
        let mut r = vec![0; m];
        r[k] = 1;
        rows.push(r);
    }
    let b = vec![1; rows.len()];
    rational_lp_max(&c, &rows, &b)
}
