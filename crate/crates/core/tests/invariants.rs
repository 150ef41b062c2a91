use num_complex::Complex64;
use polygap::frames::{all_pairs, submatrix_sigma_min, validate_frame};
use polygap::polygons::{deficit, Polygon};
use polygap::{
    hopf_map, inverse_hopf_map, inverse_square_map, random_frame, square_map, ComplexFrame, Field, Frame, RealFrame,
};
use proptest::prelude::*;

fn real(n: usize, seed: u64) -> RealFrame {
    match random_frame(n, Field::Real, seed).unwrap() {
        Frame::Real(f) => f,
        Frame::Complex(_) => unreachable!(),
    }
}

fn complex(n: usize, seed: u64) -> ComplexFrame {
    match random_frame(n, Field::Complex, seed).unwrap() {
        Frame::Complex(f) => f,
        Frame::Real(_) => unreachable!(),
    }
}

fn gram<const D: usize>(edges: &[[f64; D]]) -> Vec<f64> {
    let mut g = Vec::new();
    for a in edges {
        for b in edges {
            g.push(a.iter().zip(b).map(|(x, y)| x * y).sum());
        }
    }
    g
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn flat<const D: usize>(p: &Polygon<D>) -> Vec<f64> {
    p.edges().iter().flatten().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_sigma_min_is_half_deficit(n in 3usize..13, seed in any::<u64>()) {
        let f = real(n, seed);
        let p = square_map(&f).unwrap();
        for c in all_pairs(&f) {
            let half = 0.5 * p.pair_deficit(c.i, c.j).unwrap();
            prop_assert!((c.sigma_min.powi(2) - half).abs() <= 1e-10);
        }
    }

    #[test]
    fn complex_sigma_min_is_half_deficit(n in 3usize..13, seed in any::<u64>()) {
        let f = complex(n, seed);
        let p = hopf_map(&f).unwrap();
        for c in all_pairs(&f) {
            let half = 0.5 * p.pair_deficit(c.i, c.j).unwrap();
            prop_assert!((c.sigma_min.powi(2) - half).abs() <= 1e-10);
        }
    }

    #[test]
    fn maps_close_with_perimeter_two(n in 2usize..13, seed in any::<u64>()) {
        let p = square_map(&real(n, seed)).unwrap();
        prop_assert!(p.closure_gap() <= 1e-12);
        prop_assert!((p.perimeter() - 2.0).abs() <= 1e-12);
        let q = hopf_map(&complex(n, seed)).unwrap();
        prop_assert!(q.closure_gap() <= 1e-12);
        prop_assert!((q.perimeter() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn real_round_trip_recovers_rows_up_to_sign(n in 3usize..13, seed in any::<u64>()) {
        let f = real(n, seed);
        let p = square_map(&f).unwrap();
        let g = inverse_square_map(&p, None).unwrap();
        prop_assert!(validate_frame(&g).valid);
        for (a, b) in f.rows().iter().zip(g.rows()) {
            let plus = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
            let minus = (a[0] + b[0]).abs().max((a[1] + b[1]).abs());
            prop_assert!(plus.min(minus) <= 1e-10);
        }
        prop_assert!(max_diff(&flat(&square_map(&g).unwrap()), &flat(&p)) <= 1e-10);
    }

    #[test]
    fn complex_round_trip_recovers_rows_up_to_phase(n in 3usize..13, seed in any::<u64>()) {
        let f = complex(n, seed);
        let p = hopf_map(&f).unwrap();
        let g = inverse_hopf_map(&p, None).unwrap();
        prop_assert!(validate_frame(&g).valid);
        for (a, b) in f.rows().iter().zip(g.rows()) {
            let inner = a[0].conj() * b[0] + a[1].conj() * b[1];
            let na = a[0].norm_sqr() + a[1].norm_sqr();
            prop_assert!((inner.norm() - na).abs() <= 1e-10);
        }
        prop_assert!(max_diff(&flat(&hopf_map(&g).unwrap()), &flat(&p)) <= 1e-10);
    }

    #[test]
    fn right_multiplication_preserves_sigma_and_edge_geometry(n in 3usize..10, seed in any::<u64>(), qseed in any::<u64>()) {
        let f = real(n, seed);
        let q = real(2, qseed);
        let qm = [q.rows()[0], q.rows()[1]];
        let g = f.transform(qm);
        for (a, b) in all_pairs(&f).iter().zip(all_pairs(&g)) {
            prop_assert!((a.sigma_min - b.sigma_min).abs() <= 1e-12);
        }
        let (pf, pg) = (square_map(&f).unwrap(), square_map(&g).unwrap());
        prop_assert!(max_diff(&gram(pf.edges()), &gram(pg.edges())) <= 1e-12);

        let c = complex(n, seed);
        let u = complex(2, qseed);
        let um = [u.rows()[0], u.rows()[1]];
        let d = c.transform(um);
        for (a, b) in all_pairs(&c).iter().zip(all_pairs(&d)) {
            prop_assert!((a.sigma_min - b.sigma_min).abs() <= 1e-12);
        }
        let (pc, pd) = (hopf_map(&c).unwrap(), hopf_map(&d).unwrap());
        prop_assert!(max_diff(&gram(pc.edges()), &gram(pd.edges())) <= 1e-12);
    }

    #[test]
    fn row_phases_and_signs_do_not_move_edges(n in 3usize..10, seed in any::<u64>(), angles in prop::collection::vec(0.0..std::f64::consts::TAU, 10)) {
        let c = complex(n, seed);
        let phases: Vec<Complex64> = angles[..n].iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let d = c.scale_rows(&phases);
        prop_assert!(max_diff(&flat(&hopf_map(&c).unwrap()), &flat(&hopf_map(&d).unwrap())) <= 1e-12);

        let f = real(n, seed);
        let flipped = RealFrame::from_rows(f.rows().iter().enumerate().map(|(k, r)| if k % 2 == 0 { [-r[0], -r[1]] } else { *r }).collect());
        prop_assert!(max_diff(&flat(&square_map(&f).unwrap()), &flat(&square_map(&flipped).unwrap())) <= 1e-15);
    }

    #[test]
    fn row_permutation_permutes_edges(n in 3usize..10, seed in any::<u64>(), shift in 1usize..9) {
        let perm: Vec<usize> = (0..n).map(|k| (k + shift) % n).collect();
        let f = real(n, seed);
        let p = square_map(&f).unwrap().permute(&perm);
        let q = square_map(&f.permute_rows(&perm)).unwrap();
        prop_assert!(max_diff(&flat(&p), &flat(&q)) <= 1e-15);
        let c = complex(n, seed);
        let p = hopf_map(&c).unwrap().permute(&perm);
        let q = hopf_map(&c.permute_rows(&perm)).unwrap();
        prop_assert!(max_diff(&flat(&p), &flat(&q)) <= 1e-15);
        let s1 = submatrix_sigma_min(&c, perm[0], perm[1]).unwrap().sigma_min;
        let s2 = submatrix_sigma_min(&c.permute_rows(&perm), 0, 1).unwrap().sigma_min;
        prop_assert!((s1 - s2).abs() <= 1e-15);
    }

    #[test]
    fn deficit_is_symmetric_nonnegative_and_homogeneous(a in prop::array::uniform3(-2.0..2.0f64), b in prop::array::uniform3(-2.0..2.0f64), s in 0.01..100.0f64) {
        let d = deficit(&a, &b);
        prop_assert!(d >= 0.0);
        prop_assert!((d - deficit(&b, &a)).abs() <= 1e-15);
        let (sa, sb) = (a.map(|x| x * s), b.map(|x| x * s));
        prop_assert!((deficit(&sa, &sb) - s * d).abs() <= 1e-12 * s.max(1.0));
        let bound = 2.0 * a.iter().map(|x| x * x).sum::<f64>().sqrt().min(b.iter().map(|x| x * x).sum::<f64>().sqrt());
        prop_assert!(d <= bound + 1e-12);
    }
}

#[test]
fn parallel_edges_have_zero_deficit() {
    assert!(deficit(&[0.3, 0.4], &[0.6, 0.8]) < 1e-16);
    let d = deficit(&[1.0, 0.0, 0.0], &[1.0, 1e-9, 0.0]);
    assert!(d > 0.0 && d < 1e-17);
}
