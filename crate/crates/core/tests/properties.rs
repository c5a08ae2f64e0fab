mod common;

use proptest::prelude::*;
use splineproj::knots::{format_knot_file, parse_knot_file};
use splineproj::linalg::SymmetricStorage;
use splineproj::{
    BSplineBasis, BSplineBasisF32, KnotVector, KnotVectorF32, Knots, MomentOptions,
    PeriodicBSplineBasis, Projector, SplineSpace, Spline,
};

use common::*;

fn clamped_case() -> impl Strategy<Value = (KnotVector, u64)> {
    (1usize..=5, 1usize..=40, 1u32..=3, any::<u64>()).prop_map(|(k, n, e, seed)| {
        let kv = random_clamped(&mut rng(seed), n, k, 10f64.powi(-(e as i32)));
        (kv, seed)
    })
}

fn periodic_case() -> impl Strategy<Value = (splineproj::PeriodicKnotVector, u64)> {
    (1usize..=5, 0usize..=40, 1u32..=3, any::<u64>()).prop_map(|(k, extra, e, seed)| {
        let pk = random_periodic(&mut rng(seed), k + extra, k, 10f64.powi(-(e as i32)));
        (pk, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clamped_basis_matches_recursion((kv, seed) in clamped_case()) {
        let basis = BSplineBasis::new(kv.clone());
        let mut r = rng(seed ^ 1);
        for _ in 0..50 {
            let x: f64 = rand::Rng::random(&mut r);
            for p in 0..basis.dim() {
                let lib = basis.eval_basis(p, x).unwrap();
                let refv = clamped_basis(&kv, p, x);
                prop_assert!((lib - refv).abs() < 1e-12, "p={} x={} {} vs {}", p, x, lib, refv);
            }
        }
    }

    #[test]
    fn periodic_basis_matches_translates((pk, seed) in periodic_case()) {
        let basis = PeriodicBSplineBasis::new(pk.clone());
        let mut r = rng(seed ^ 2);
        for _ in 0..50 {
            let x: f64 = rand::Rng::random(&mut r);
            for j in 0..basis.dim() {
                let lib = basis.eval_basis(j, x).unwrap();
                let refv = periodic_basis(&pk, j, x);
                prop_assert!((lib - refv).abs() < 1e-12, "j={} x={} {} vs {}", j, x, lib, refv);
            }
        }
    }

    #[test]
    fn gram_matches_reference((kv, _seed) in clamped_case()) {
        let basis = BSplineBasis::new(kv.clone());
        let g = splineproj::gram::assemble_gram::<f64, _>(&basis).to_dense();
        let r = gram(basis.dim(), &clamped_cells(&kv), |p, x| clamped_basis(&kv, p, x));
        for (i, row) in r.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert!((g.get(i, j) - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn periodic_projection_reproduces_splines((pk, seed) in periodic_case()) {
        let basis = PeriodicBSplineBasis::new(pk);
        let mut r = rng(seed ^ 3);
        let c: Vec<f64> = (0..basis.dim()).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect();
        let s = Spline::new(basis.clone(), c.clone()).unwrap();
        let f = |x: f64| s.eval(x).unwrap();
        let p = Projector::new(basis).unwrap().project(&f, &MomentOptions::with_cells(1)).unwrap();
        for (a, b) in c.iter().zip(p.spline.coeffs()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_is_best_approximation((kv, seed) in clamped_case()) {
        let basis = BSplineBasis::new(kv.clone());
        let cells = clamped_cells(&kv);
        let f = |x: f64| (7.0 * x).cos() + (x - 0.4).abs();
        let mut opts = MomentOptions::with_cells(8);
        opts.breakpoints.push(0.4);
        let pf = Projector::new(basis.clone()).unwrap().project(&f, &opts).unwrap().spline;
        let l2 = |s: &Spline<f64, BSplineBasis>| -> f64 {
            cells
                .iter()
                .filter(|c| c.1 > c.0)
                .map(|&(a, b)| {
                    let mut pts = vec![a, b];
                    if a < 0.4 && 0.4 < b {
                        pts.insert(1, 0.4);
                    }
                    pts.windows(2)
                        .map(|w| integrate(w[0], w[1], 10, 4, |x| (f(x) - s.eval(x).unwrap()).powi(2)))
                        .sum::<f64>()
                })
                .sum::<f64>()
                .sqrt()
        };
        let best = l2(&pf);
        let mut r = rng(seed ^ 5);
        for t in 0..100 {
            let scale = 10f64.powi(-(t % 6));
            let c: Vec<f64> = pf
                .coeffs()
                .iter()
                .map(|v| v + scale * rand::Rng::random_range(&mut r, -1.0..1.0))
                .collect();
            let s = Spline::new(basis.clone(), c).unwrap();
            prop_assert!(best <= l2(&s) + 1e-8);
        }
    }

    #[test]
    fn knot_file_roundtrip((kv, _seed) in clamped_case(), (pk, _s) in periodic_case()) {
        // the file keeps order and values; the index offset is not part of the format
        match parse_knot_file(&format_knot_file(&Knots::Clamped(kv.clone()))).unwrap() {
            Knots::Clamped(back) => {
                prop_assert_eq!(back.order(), kv.order());
                prop_assert_eq!(back.knots(), kv.knots());
            }
            other => prop_assert!(false, "mode changed: {:?}", other),
        }
        let knots = Knots::Periodic(pk);
        prop_assert_eq!(parse_knot_file(&format_knot_file(&knots)).unwrap(), knots);
    }

    #[test]
    fn single_precision_tracks_double((kv, seed) in clamped_case()) {
        let kv32 = KnotVectorF32::new(kv.knots().iter().map(|&t| t as f32).collect(), kv.order());
        // rounding to f32 can merge close knots
        prop_assume!(kv32.is_ok());
        let b32 = BSplineBasisF32::new(kv32.unwrap());
        let b64 = BSplineBasis::new(kv);
        let mut r = rng(seed ^ 4);
        let mut v32 = vec![0f32; b32.order()];
        let mut v64 = vec![0f64; b64.order()];
        for _ in 0..20 {
            let x: f64 = rand::Rng::random(&mut r);
            let (c, _) = b64.locate(x).unwrap();
            let (c32, _) = b32.locate(x as f32).unwrap();
            prop_assume!(c == c32);
            b32.eval_cell(c, x as f32, &mut v32);
            b64.eval_cell(c, x, &mut v64);
            prop_assert!((v32.iter().sum::<f32>() - 1.0).abs() < 1e-5);
            for (a, b) in v32.iter().zip(&v64) {
                prop_assert!((*a as f64 - b).abs() < 1e-3);
            }
        }
    }
}
