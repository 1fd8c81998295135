use std::sync::OnceLock;

use polyheat::closed_form::{
    interval_kernel, star_kernel, star_kernel_modes, theta_identity, two_star_kernel, LegPoint, TwoStarPair,
};
use polyheat::complex::library;
use polyheat::spectral::eigensolve;
use polyheat::stochastic::{return_probabilities, GroupModel};
use polyheat::{Complex, DiscreteOperator, SpectralDecomposition};
use proptest::prelude::*;

fn tripod() -> &'static (Complex, DiscreteOperator, SpectralDecomposition) {
    static CELL: OnceLock<(Complex, DiscreteOperator, SpectralDecomposition)> = OnceLock::new();
    CELL.get_or_init(|| {
        let x = library::star(3);
        let d = DiscreteOperator::build(&x, 0.05).unwrap();
        let s = eigensolve(&d, d.len()).unwrap();
        (x, d, s)
    })
}

fn leg_point() -> impl Strategy<Value = LegPoint> {
    (0usize..3, 0.0f64..=1.0).prop_map(|(leg, s)| LegPoint::new(leg, s))
}

proptest! {
    #[test]
    fn theta_sides_agree(x in -2.0f64..2.0, s in 0.01f64..3.0) {
        let (g, f) = theta_identity(x, s, 1e-15);
        prop_assert!((g - f).abs() <= 1e-11 * g.max(1.0));
    }

    #[test]
    fn star_images_match_modes(p in leg_point(), q in leg_point(), t in 0.02f64..2.0) {
        let a = star_kernel(3, p, q, t);
        let b = star_kernel_modes(3, p, q, t, 400);
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} {b}");
        prop_assert!((a - star_kernel(3, q, p, t)).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn interval_kernel_is_symmetric_and_positive(len in 0.5f64..4.0, u in 0.0f64..1.0, v in 0.0f64..1.0, t in 1e-3f64..5.0) {
        let (x, y) = (u * len, v * len);
        let k = interval_kernel(len, x, y, t);
        prop_assert!(k > 0.0);
        prop_assert!((k - interval_kernel(len, y, x, t)).abs() <= 1e-12 * k.max(1.0));
    }

    #[test]
    fn unit_two_star_is_an_interval(t in 0.01f64..1.0) {
        let a = two_star_kernel(1, 1, TwoStarPair::V1V2, t);
        prop_assert!((a - interval_kernel(3.0, 1.0, 2.0, t)).abs() < 1e-9);
    }

    #[test]
    fn discrete_kernel_semigroup(i in 0usize..61, j in 0usize..61, s in 0.005f64..0.5, r in 0.005f64..0.5) {
        let (_, d, sd) = tripod();
        let (i, j) = (i % d.len(), j % d.len());
        let conv: f64 = (0..d.len()).map(|z| sd.kernel(s, i, z) * sd.kernel(r, z, j) * d.mass[z]).sum();
        let direct = sd.kernel(s + r, i, j);
        prop_assert!((conv - direct).abs() <= 1e-9 * direct.max(1.0));
        prop_assert!((sd.kernel(s, i, j) - sd.kernel(s, j, i)).abs() <= 1e-12 * direct.max(1.0));
        prop_assert!(sd.kernel(s, i, j) >= -1e-12);
    }

    #[test]
    fn discrete_kernel_conserves_mass(i in 0usize..61, t in 1e-3f64..3.0) {
        let (_, d, sd) = tripod();
        let i = i % d.len();
        let total: f64 = sd.kernel_row(t, i).iter().zip(&d.mass).map(|(a, m)| a * m).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn points_round_trip(leg in 1usize..=3, s in 0.0f64..=1.0) {
        let (x, _, _) = tripod();
        let text = format!("e{leg}:{s}");
        let p = x.parse_point(&text).unwrap();
        prop_assert_eq!(x.parse_point(&x.format_point(p)).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn walk_probabilities(which in 0usize..4, steps in 2usize..24) {
        let g = [GroupModel::zd(1), GroupModel::zd(2), GroupModel::free(2), GroupModel::free(3)][which].clone();
        let p = return_probabilities(&g, steps).unwrap();
        let s = g.num_generators() as f64;
        for (n, &v) in p.iter().enumerate() {
            if n % 2 == 1 {
                prop_assert_eq!(v, 0.0);
            } else {
                prop_assert!(v >= s.powi(-(n as i32) / 2) * (1.0 - 1e-12));
                if n >= 2 {
                    prop_assert!(v <= p[n - 2]);
                }
            }
        }
    }

    #[test]
    fn group_words(which in 0usize..3, a in 0usize..200, b in 0usize..200) {
        let g = [GroupModel::zd(2), GroupModel::free(2), GroupModel::zd(3)][which].clone();
        let ball = g.ball(3);
        let (x, y) = (&ball[a % ball.len()], &ball[b % ball.len()]);
        prop_assert!(g.is_identity(&g.mul(x, &g.inverse(x))));
        prop_assert!(g.word_length(&g.mul(x, y)) <= g.word_length(x) + g.word_length(y));
        prop_assert_eq!(g.distance(x, y), g.distance(y, x));
    }
}
