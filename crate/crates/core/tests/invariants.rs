use koopspin::algebra::{
    frobenius_norm, from_pauli_coeffs, hermitian_features, to_pauli_coeffs, ComplexMatrix,
    PauliString, C64,
};
use koopspin::config::RunConfig;
use koopspin::koopman::{
    decay_rates_frequencies, fit_rrr, read_estimator, read_spectrum, rrr_objective,
    write_estimator, write_spectrum, KoopmanEstimator,
};
use koopspin::lindblad::{read_trajectory, write_trajectory, SpinChainParams, Trajectory};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    let dim = 1usize << n;
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        ComplexMatrix::from_fn(dim, |i, j| {
            let (re, im) = v[i * dim + j];
            C64::new(re, im)
        })
    })
}

fn hermitian_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix_strategy(n).prop_map(|a| {
        let ad = a.dagger();
        (&a + &ad).scale_real(0.5)
    })
}

fn data_strategy(dim: usize, n: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let vecs = || proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, dim), n);
    (vecs(), vecs())
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = m.clone().singular_values();
    let max = s.max();
    s.iter().filter(|&&x| x > 1e-10 * max.max(1e-300)).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(a in (1usize..=3).prop_flat_map(matrix_strategy)) {
        let c = to_pauli_coeffs(&a).unwrap();
        let sum: f64 = c.coeffs().iter().map(|z| z.norm_sqr()).sum();
        let f = frobenius_norm(&a);
        prop_assert!((sum - f * f).abs() <= 1e-12 * (1.0 + f * f));
    }

    #[test]
    fn pauli_round_trip(a in (1usize..=3).prop_flat_map(matrix_strategy)) {
        let back = from_pauli_coeffs(&to_pauli_coeffs(&a).unwrap());
        prop_assert!(back.max_abs_diff(&a) <= 1e-13);
    }

    #[test]
    fn hermitian_has_real_coefficients(a in (1usize..=3).prop_flat_map(hermitian_strategy)) {
        let c = to_pauli_coeffs(&a).unwrap();
        prop_assert!(c.max_imag() <= 1e-14);
        prop_assert!(hermitian_features(&a, 1e-12).is_ok());
    }

    #[test]
    fn pauli_strings_square_to_identity(idx in 0usize..64) {
        let p = PauliString::from_index(idx, 3).to_matrix();
        prop_assert!((&p * &p).max_abs_diff(&ComplexMatrix::identity(8)) == 0.0);
        prop_assert_eq!(p.hermiticity_error(), 0.0);
    }

    #[test]
    fn rrr_respects_rank_and_beats_zero(
        (xs, ys) in data_strategy(5, 12),
        rank in 1usize..=5,
        reg in 1e-6f64..1e-1,
    ) {
        let est = fit_rrr(&xs, &ys, rank, reg).unwrap();
        let t = est.to_matrix();
        prop_assert!(numerical_rank(&t) <= rank);
        let zero = DMatrix::zeros(5, 5);
        prop_assert!(rrr_objective(&t, &xs, &ys, reg) <= rrr_objective(&zero, &xs, &ys, reg) + 1e-12);
    }

    #[test]
    fn rrr_objective_monotone_in_rank((xs, ys) in data_strategy(4, 10), reg in 1e-6f64..1e-1) {
        let objs: Vec<f64> = (1..=4)
            .map(|r| rrr_objective(&fit_rrr(&xs, &ys, r, reg).unwrap().to_matrix(), &xs, &ys, reg))
            .collect();
        for w in objs.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn estimator_file_round_trip(
        vals in proptest::collection::vec(-1e3f64..1e3, 16),
        reg in 1e-9f64..1.0,
        dt in 1e-3f64..10.0,
    ) {
        let t = DMatrix::from_row_slice(4, 4, &vals);
        let est = KoopmanEstimator::from_matrix(&t, 3, reg, dt).unwrap();
        let mut buf = Vec::new();
        write_estimator(&mut buf, &est).unwrap();
        let back = read_estimator(buf.as_slice()).unwrap();
        prop_assert_eq!(back, est);
    }

    #[test]
    fn frequencies_stay_below_nyquist(
        zs in proptest::collection::vec((0.01f64..1.0, -std::f64::consts::PI..std::f64::consts::PI), 1..20),
        dt in 0.01f64..2.0,
    ) {
        let ev: Vec<C64> = zs.iter().map(|&(r, a)| C64::from_polar(r, a)).collect();
        let s = decay_rates_frequencies(&ev, dt).unwrap();
        for m in &s.modes {
            prop_assert!(m.frequency.abs() <= 1.0 / (2.0 * dt) + 1e-12);
            prop_assert!(m.decay_rate >= -1e-12);
        }
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &s).unwrap();
        let back = read_spectrum(buf.as_slice(), dt).unwrap();
        prop_assert_eq!(back.modes.len(), s.modes.len());
        for (a, b) in s.modes.iter().zip(&back.modes) {
            prop_assert!((a.abs - b.abs).abs() <= 1e-14 * a.abs);
            prop_assert!((a.frequency.abs() - b.frequency).abs() <= 1e-14 * a.frequency.abs() + 1e-300);
        }
    }

    #[test]
    fn trajectory_file_is_lossless(
        states in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 16), 3),
        gamma in 0.0f64..1.0,
    ) {
        let params = SpinChainParams { n: 2, gamma, steps: 3, ..SpinChainParams::default() };
        let traj = Trajectory {
            params,
            initial_label: "d,u".into(),
            times: vec![0.5, 1.0, 1.5],
            states,
        };
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj).unwrap();
        prop_assert_eq!(read_trajectory(buf.as_slice()).unwrap(), traj);
    }

    #[test]
    fn config_text_round_trip(
        rank in 1usize..=19,
        reg in 1e-9f64..1.0,
        gamma in 0.0f64..0.1,
        frac in 0.1f64..0.9,
    ) {
        let mut cfg = RunConfig::default();
        cfg.rank = rank;
        cfg.reg = reg;
        cfg.params.gamma = gamma;
        cfg.train_fraction = frac;
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
