//! Property tests of the investment-layer solvers: method consistency,
//! strict positivity, attention monotonicity, and monotone Jacobi sweeps.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use common::{random_game, rng};
use gne_core::equilibrium::{
    brne_direct, brne_iterate, rational_ne, BrMethod, BrSolverConfig,
};
use gne_core::game::{CognitionProfile, InvestmentProfile};

fn random_profile(rng: &mut rand::rngs::StdRng, n: usize) -> CognitionProfile {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if j != i {
                m[(i, j)] = rng.gen_range(0.0..1.0);
            }
        }
    }
    CognitionProfile::from_matrix(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn all_three_methods_agree(seed in 0u64..10_000, n in 2usize..=9) {
        let mut rng = rng(seed);
        let game = random_game(&mut rng, n);
        let m = random_profile(&mut rng, n);
        let tol = 1e-10;
        let direct = brne_direct(&game, &m).unwrap();
        for method in [BrMethod::GaussSeidel, BrMethod::Jacobi] {
            let cfg = BrSolverConfig { method, tol, max_iters: 10_000, initial: None };
            let (u, trace) = brne_iterate(&game, &m, &cfg).unwrap();
            prop_assert!(trace.converged);
            prop_assert!(
                u.max_abs_diff(&direct) < 10.0 * tol,
                "{:?} differs from direct by {}", method, u.max_abs_diff(&direct)
            );
        }
    }

    #[test]
    fn solutions_are_strictly_positive(seed in 0u64..10_000, n in 2usize..=9) {
        let mut rng = rng(seed);
        let game = random_game(&mut rng, n);
        let m = random_profile(&mut rng, n);
        let u = brne_direct(&game, &m).unwrap();
        prop_assert!(u.0.iter().all(|v| *v > 0.0));
        let full = rational_ne(&game).unwrap();
        prop_assert!(full.0.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn raising_one_attention_weight_never_lowers_any_investment(
        seed in 0u64..10_000, n in 2usize..=8
    ) {
        let mut rng = rng(seed);
        let game = random_game(&mut rng, n);
        let m = random_profile(&mut rng, n);
        let base = brne_direct(&game, &m).unwrap();

        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        if j == i {
            j = (j + 1) % n;
        }
        let mut weights = m.weights().clone();
        weights[(i, j)] = (weights[(i, j)] + rng.gen_range(0.0..1.0)).min(1.0);
        let bumped = CognitionProfile::from_matrix(weights).unwrap();
        let raised = brne_direct(&game, &bumped).unwrap();
        for k in 0..n {
            prop_assert!(
                raised.0[k] >= base.0[k] - 1e-12,
                "component {} dropped from {} to {}", k, base.0[k], raised.0[k]
            );
        }
    }

    #[test]
    fn jacobi_from_zero_sweeps_upward(seed in 0u64..10_000, n in 2usize..=8) {
        let mut rng = rng(seed);
        let game = random_game(&mut rng, n);
        let m = random_profile(&mut rng, n);
        let cfg = BrSolverConfig {
            method: BrMethod::Jacobi,
            tol: 1e-10,
            max_iters: 10_000,
            initial: Some(InvestmentProfile::zeros(n)),
        };
        let (_, trace) = brne_iterate(&game, &m, &cfg).unwrap();
        for pair in trace.iterates.windows(2) {
            for k in 0..n {
                prop_assert!(pair[1].0[k] >= pair[0].0[k] - 1e-15);
            }
        }
    }
}
