use proptest::prelude::*;

use sparc::{
    asymptotic_se_modified, bits_to_message, derive_params, eta_step, hard_decision,
    message_to_beta, message_to_bits, threshold_iteration, DesignOperator, HadamardDesign, Message,
    PowerAllocation,
};

fn exp_params(l: usize, m: usize, frac: f64, snr: f64) -> sparc::SparcParams {
    derive_params(l, m, frac * sparc::params::capacity(snr), snr, snr).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_rows_are_scaled_distributions(
        l in 1usize..12,
        log_m in 1u32..6,
        tau2 in 0.01f64..50.0,
        scale in 0.0f64..1e3,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let params = exp_params(l, 1 << log_m, 0.6, 15.0);
        let alloc = PowerAllocation::exponential(&params, 2.0 * params.capacity).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..params.columns).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let out = eta_step(&s, &alloc, &params, tau2).unwrap();
        let n = params.block_len as f64;
        for sec in 0..l {
            let cap = (n * alloc.values()[sec]).sqrt();
            let vals = &out[params.section_range(sec)];
            prop_assert!(vals.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= cap * (1.0 + 1e-12)));
            prop_assert!((vals.iter().sum::<f64>() - cap).abs() <= 1e-9 * cap.max(1.0));
        }
    }

    #[test]
    fn message_bits_beta_round_trip(
        l in 1usize..20,
        log_m in 1u32..8,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let params = exp_params(l, 1 << log_m, 0.5, 7.0);
        let alloc = PowerAllocation::flat(&params);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sections: Vec<usize> = (0..l).map(|_| rng.random_range(0..params.section_size)).collect();
        let msg = Message::new(sections, &params).unwrap();
        let bits = message_to_bits(&msg, &params).unwrap();
        prop_assert_eq!(bits.len(), l * log_m as usize);
        prop_assert_eq!(&bits_to_message(&bits, &params).unwrap(), &msg);
        let beta = message_to_beta(&msg, &alloc, &params).unwrap();
        prop_assert!((beta.norm_sq() - params.block_len as f64 * params.power).abs() < 1e-6);
        let (_, decided) = hard_decision(beta.as_slice(), &alloc, &params).unwrap();
        prop_assert_eq!(decided, msg);
    }

    #[test]
    fn modified_se_structure(
        frac in 0.3f64..0.95,
        snr in 1.0f64..100.0,
        a in 0.0f64..1.5,
        f in 0.0f64..=1.0,
    ) {
        let params = exp_params(256, 64, frac, snr);
        let tr = asymptotic_se_modified(&params, a, f, 200).unwrap();
        prop_assert!(tr.check_structure().is_ok());
        if let Some(t) = tr.t_star {
            prop_assert_eq!(tr.x[t], 1.0);
            prop_assert_eq!(tr.tau2[t], params.sigma2);
        }
    }

    #[test]
    fn threshold_structure(
        frac in 0.3f64..0.95,
        a in 0.0f64..1.5,
        f in 0.0f64..=1.0,
    ) {
        let params = exp_params(128, 32, frac, 15.0);
        let alloc = PowerAllocation::modified(&params, a, f).unwrap();
        let tr = threshold_iteration(&params, &alloc, 200).unwrap();
        prop_assert!(tr.check_structure().is_ok());
    }

    #[test]
    fn hadamard_adjoint_identity(
        log_cols in 1u32..12,
        n_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let cols = 1usize << log_cols;
        let n = 1 + ((cols - 2) as f64 * n_frac) as usize;
        let design = HadamardDesign::new(n, cols, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 1);
        let u: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs: f64 = design.forward(&u).unwrap().iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = design.adjoint(&v).unwrap().iter().zip(&u).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }
}
