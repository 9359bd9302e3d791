//! Shared generators and independent oracles for the integration tests.
//! Everything here is deliberately implementation-agnostic: brute-force
//! enumeration, finite differences, golden-section search, and power
//! iteration, so the library paths they check stay honest.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use gne_core::game::{InvestmentProfile, SecurityGame};
use gne_core::prox::ProxProblem;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random game passing validation, with a dominance margin: the
/// off-diagonal row sum stays below `margin * R_ii` (margin <= 0.6), so
/// iterative sweeps contract briskly.
pub fn random_game(rng: &mut StdRng, n: usize) -> SecurityGame {
    let mut influence = DMatrix::zeros(n, n);
    for i in 0..n {
        let diag: f64 = rng.gen_range(5.0..30.0);
        influence[(i, i)] = diag;
        let margin: f64 = rng.gen_range(0.1..0.6);
        let mut raw: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            let scale = margin * diag / total;
            raw.iter_mut().for_each(|v| *v *= scale);
        }
        let mut k = 0;
        for j in 0..n {
            if j != i {
                influence[(i, j)] = raw[k];
                k += 1;
            }
        }
    }
    let returns = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(0.5..50.0)));
    let budgets =
        DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(0.05..1.0) * (n - 1) as f64));
    let game = SecurityGame::new(influence, returns, budgets).unwrap();
    assert!(game.validate().is_ok(), "generator must produce valid games");
    game
}

pub fn random_investments(rng: &mut StdRng, n: usize) -> InvestmentProfile {
    InvestmentProfile(DVector::from_iterator(
        n,
        (0..n).map(|_| rng.gen_range(0.0..5.0)),
    ))
}

/// Like [`random_game`] but with off-diagonal entries bounded away from
/// zero, so the coupling vector of every cognition problem is
/// well-conditioned (ratio of extreme couplings below ~30). Proximal
/// iterations slow down as the square of that ratio, so the cognition
/// oracle tests stay on instances the method is meant for.
pub fn well_conditioned_game(rng: &mut StdRng, n: usize) -> SecurityGame {
    let mut influence = DMatrix::zeros(n, n);
    for i in 0..n {
        let diag: f64 = rng.gen_range(5.0..30.0);
        influence[(i, i)] = diag;
        let margin: f64 = rng.gen_range(0.2..0.6);
        let mut raw: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.25..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let scale = margin * diag / total;
        raw.iter_mut().for_each(|v| *v *= scale);
        let mut k = 0;
        for j in 0..n {
            if j != i {
                influence[(i, j)] = raw[k];
                k += 1;
            }
        }
    }
    let returns = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(0.5..50.0)));
    let budgets =
        DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(0.05..1.0) * (n - 1) as f64));
    let game = SecurityGame::new(influence, returns, budgets).unwrap();
    assert!(game.validate().is_ok(), "generator must produce valid games");
    game
}

pub fn random_attention_row(rng: &mut StdRng, n: usize, owner: usize, max: f64) -> DVector<f64> {
    DVector::from_iterator(
        n,
        (0..n).map(|j| if j == owner { 0.0 } else { rng.gen_range(0.0..max) }),
    )
}

/// Direct cost-difference definition of the risk of bounded perception:
/// best-respond to the perceived coupling, best-respond to the true one,
/// and subtract the real costs. Never touches the closed formula.
pub fn rbp_direct_oracle(
    game: &SecurityGame,
    i: usize,
    u: &InvestmentProfile,
    m_i: &DVector<f64>,
) -> f64 {
    let n = game.n_agents();
    let mut perceived = 0.0;
    let mut full = 0.0;
    for j in 0..n {
        if j != i {
            let coupling = game.cross_influence(i, j) * u.0[j];
            perceived += m_i[j] * coupling;
            full += coupling;
        }
    }
    let r = game.investment_return(i);
    let d = game.self_influence(i);
    let br_perceived = (perceived + r) / d;
    let br_full = (full + r) / d;
    let mut u_c = u.clone();
    u_c.0[i] = br_perceived;
    let mut u_f = u.clone();
    u_f.0[i] = br_full;
    game.true_cost(i, &u_c) - game.true_cost(i, &u_f)
}

/// Spectral norm by power iteration on `A^T A` (robust to sign-alternating
/// dominant eigenvalues of symmetric indefinite matrices).
pub fn power_iteration_norm(mat: &DMatrix<f64>) -> f64 {
    let n = mat.nrows();
    let mut x = DVector::from_iterator(n, (0..n).map(|k| 1.0 + (k as f64) * 0.137));
    x /= x.norm();
    let mut value = 0.0;
    for _ in 0..2_000 {
        let y = mat.transpose() * (mat * &x);
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        value = norm;
        x = y / norm;
    }
    value.sqrt()
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Central finite-difference gradient of the smooth objective part.
pub fn finite_difference_grad(p: &ProxProblem, m: &DVector<f64>, h: f64) -> DVector<f64> {
    let dim = m.len();
    DVector::from_iterator(
        dim,
        (0..dim).map(|k| {
            let mut plus = m.clone();
            plus[k] += h;
            let mut minus = m.clone();
            minus[k] -= h;
            (p.f1(&plus) - p.f1(&minus)) / (2.0 * h)
        }),
    )
}

/// Budget-constrained greedy fill: descending coupling strength, each
/// coordinate up to 1 until the budget runs out.
pub fn greedy_budget_vector(v: &DVector<f64>, beta: f64) -> DVector<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap());
    let mut m = DVector::zeros(v.len());
    let mut remaining = beta;
    for idx in order {
        if remaining <= 0.0 {
            break;
        }
        let take = remaining.min(1.0);
        m[idx] = take;
        remaining -= take;
    }
    m
}

/// Cyclic per-coordinate grid search (step 1/200) with golden-section
/// polish, iterated until a full cycle stops improving. Valid as a global
/// oracle for the convex (PSD) problems it is used on.
pub fn coordinate_grid_polish(p: &ProxProblem, start: DVector<f64>) -> (DVector<f64>, f64) {
    let dim = p.dim();
    let mut m = start;
    let mut best = p.objective(&m).value;
    for _cycle in 0..200 {
        let before = best;
        for k in 0..dim {
            let eval = |x: f64| {
                let mut probe = m.clone();
                probe[k] = x;
                p.objective(&probe).value
            };
            let mut arg = m[k];
            let mut val = best;
            for step in 0..=200 {
                let x = step as f64 / 200.0;
                let q = eval(x);
                if q < val {
                    val = q;
                    arg = x;
                }
            }
            let lo = (arg - 0.005).max(0.0);
            let hi = (arg + 0.005).min(1.0);
            let polished = golden_section(eval, lo, hi, 80);
            if eval(polished) < val {
                val = eval(polished);
                arg = polished;
            }
            m[k] = arg;
            best = val;
        }
        if before - best < 1e-14 {
            break;
        }
    }
    (m, best)
}

/// Random symmetric matrix with entries in `[-scale, scale]`.
pub fn random_symmetric(rng: &mut StdRng, dim: usize, scale: f64) -> DMatrix<f64> {
    let mut mat = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-scale..scale);
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    mat
}

/// Random PSD matrix `B B^T / dim`, entries of `B` in `[-scale, scale]`.
pub fn random_psd(rng: &mut StdRng, dim: usize, scale: f64) -> DMatrix<f64> {
    let b = DMatrix::from_iterator(
        dim,
        dim,
        (0..dim * dim).map(|_| rng.gen_range(-scale..scale)),
    );
    (&b * b.transpose()) / dim as f64
}
