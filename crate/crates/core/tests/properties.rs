mod common;

use lrd::io::{format_dense, format_entries, parse_dense, parse_entries};
use lrd::linalg::{project_omega, project_t, project_t_perp, schatten_r_sq};
use lrd::rstar::{prox_half_r_sq, prox_rstar, prox_topr_sq_vec, rstar_maximizer, rstar_norm, rstar_vec};
use lrd::instances::sample_uniform;
use lrd::{DenseMatrix, Rng, TangentSpace};
use proptest::prelude::*;

use common::{l2_dist, rstar_vec_oracle, vec_prox_oracle};

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..5.0f64, 1..9).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    })
}

fn gamma() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.1, 0.3, 1.0, 3.0, 10.0])
}

/// `(n1, n2, r, seed)` with `1 ≤ r ≤ min(n1, n2)`.
fn shape() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1..7usize, 1..7usize, any::<u64>()).prop_flat_map(|(n1, n2, seed)| (Just(n1), Just(n2), 1..=n1.min(n2), Just(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vec_prox_is_descending_nonnegative_and_matches_oracle(s in spectrum(), g in gamma(), pick in any::<prop::sample::Index>()) {
        let r = 1 + pick.index(s.len());
        let y = prox_topr_sq_vec(&s, r, g).unwrap().shrunk_spectrum;
        prop_assert!(y.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(y.iter().all(|&v| v >= 0.0));
        prop_assert!(l2_dist(&y, &vec_prox_oracle(&s, r, g)) <= 1e-8);
    }

    #[test]
    fn vec_prox_is_nonexpansive(a in spectrum(), g in gamma(), seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let mut b: Vec<f64> = a.iter().map(|v| (v + 0.5 * rng.gaussian()).abs()).collect();
        b.sort_by(|x, y| y.total_cmp(x));
        let r = 1 + rng.below(a.len() as u64) as usize;
        let pa = prox_topr_sq_vec(&a, r, g).unwrap().shrunk_spectrum;
        let pb = prox_topr_sq_vec(&b, r, g).unwrap().shrunk_spectrum;
        prop_assert!(l2_dist(&pa, &pb) <= l2_dist(&a, &b) + 1e-12);
    }

    #[test]
    fn rstar_vec_matches_oracle(s in spectrum(), pick in any::<prop::sample::Index>()) {
        let r = 1 + pick.index(s.len());
        let (value, _) = rstar_vec(&s, r).unwrap();
        prop_assert!((value - rstar_vec_oracle(&s, r)).abs() <= 1e-9 * value.max(1.0));
    }

    #[test]
    fn rstar_norm_decreases_in_r((n1, n2, _, seed) in shape()) {
        let m = DenseMatrix::gaussian(n1, n2, &mut Rng::new(seed));
        let values: Vec<f64> = (1..=n1.min(n2)).map(|r| rstar_norm(&m, r).unwrap()).collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        // r = min(n1, n2) gives the Frobenius case
        let last = *values.last().unwrap();
        prop_assert!((last - 0.5 * m.frobenius_norm().powi(2)).abs() <= 1e-10 * last.max(1.0));
    }

    #[test]
    fn fenchel_young((n1, n2, r, seed) in shape()) {
        let mut rng = Rng::new(seed);
        let m = DenseMatrix::gaussian(n1, n2, &mut rng);
        let x = DenseMatrix::gaussian(n1, n2, &mut rng);
        let value = rstar_norm(&m, r).unwrap();
        prop_assert!(m.dot(&x) <= value + 0.5 * schatten_r_sq(&x, r).unwrap() + 1e-10);
        let best = rstar_maximizer(&m, r).unwrap();
        let equality = value + 0.5 * schatten_r_sq(&best, r).unwrap() - m.dot(&best);
        prop_assert!(equality.abs() <= 1e-10 * value.max(1.0));
    }

    #[test]
    fn matrix_proxes_are_nonexpansive((n1, n2, r, seed) in shape(), g in gamma()) {
        let mut rng = Rng::new(seed);
        let a = DenseMatrix::gaussian(n1, n2, &mut rng);
        let b = DenseMatrix::gaussian(n1, n2, &mut rng);
        let d = (&a - &b).frobenius_norm();
        let pa = prox_half_r_sq(&a, r, g).unwrap();
        let pb = prox_half_r_sq(&b, r, g).unwrap();
        prop_assert!((&pa - &pb).frobenius_norm() <= d + 1e-10);
        let qa = prox_rstar(&a, r, g).unwrap();
        let qb = prox_rstar(&b, r, g).unwrap();
        prop_assert!((&qa - &qb).frobenius_norm() <= d + 1e-10);
    }

    #[test]
    fn projector_identities((n1, n2, r, seed) in shape()) {
        let mut rng = Rng::new(seed);
        let x = DenseMatrix::gaussian(n1, r, &mut rng).matmul(&DenseMatrix::gaussian(r, n2, &mut rng)).unwrap();
        let t = TangentSpace::at(&x, r).unwrap();
        let m = DenseMatrix::gaussian(n1, n2, &mut rng);
        let k = DenseMatrix::gaussian(n1, n2, &mut rng);
        let pt = project_t(&t, &m).unwrap();
        let ptp = project_t_perp(&t, &m).unwrap();
        prop_assert!((&(&pt + &ptp) - &m).frobenius_norm() <= 1e-10);
        prop_assert!((&project_t(&t, &pt).unwrap() - &pt).frobenius_norm() <= 1e-10);
        prop_assert!((project_t(&t, &k).unwrap().dot(&m) - k.dot(&pt)).abs() <= 1e-10);
        // X* itself lies in T
        prop_assert!((&project_t(&t, &x).unwrap() - &x).frobenius_norm() <= 1e-10 * x.frobenius_norm().max(1.0));

        let obs = sample_uniform(n1, n2, rng.below((n1 * n2 + 1) as u64) as usize, seed).unwrap();
        let on = project_omega(&obs, &m, false).unwrap();
        let off = project_omega(&obs, &m, true).unwrap();
        prop_assert_eq!(&(&on + &off), &m);
        prop_assert_eq!(&project_omega(&obs, &on, false).unwrap(), &on);
        prop_assert_eq!(obs.complement().complement(), obs.clone());
        prop_assert_eq!(obs.len() + obs.complement().len(), n1 * n2);
    }

    #[test]
    fn matrix_market_round_trip((n1, n2, _, seed) in shape()) {
        let mut rng = Rng::new(seed);
        let m = DenseMatrix::gaussian(n1, n2, &mut rng).scale(10f64.powi(rng.below(20) as i32 - 10));
        prop_assert_eq!(&parse_dense(&format_dense(&m)).unwrap(), &m);
        let obs = sample_uniform(n1, n2, rng.below((n1 * n2 + 1) as u64) as usize, seed).unwrap();
        let values = project_omega(&obs, &m, false).unwrap();
        let (back, support) = parse_entries(&format_entries(&values, &obs).unwrap()).unwrap();
        prop_assert_eq!(back, values);
        prop_assert_eq!(support, obs);
    }
}
