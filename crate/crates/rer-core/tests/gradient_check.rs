//! Finite-difference verification of the analytic gradients. The numerical
//! side only ever calls the forward pass, so it stays independent of the
//! backpropagation code it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rer_core::nn::{backward_mse, MlpParams};

const H: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;
const ABS_FLOOR: f64 = 1e-7;

type ParamField = fn(&mut MlpParams) -> &mut Vec<f64>;

/// Batch MSE loss at the taken actions, via forward passes only.
fn loss_of(params: &MlpParams, obs: &[&[f64]], actions: &[usize], targets: &[f64]) -> f64 {
    let mut sum = 0.0;
    for ((x, &a), &t) in obs.iter().zip(actions).zip(targets) {
        let q = params.forward_one(x).unwrap()[a];
        sum += (q - t) * (q - t);
    }
    sum / obs.len() as f64
}

fn central_difference(
    params: &MlpParams,
    obs: &[&[f64]],
    actions: &[usize],
    targets: &[f64],
    field: ParamField,
    index: usize,
) -> f64 {
    let mut plus = params.clone();
    field(&mut plus)[index] += H;
    let mut minus = params.clone();
    field(&mut minus)[index] -= H;
    (loss_of(&plus, obs, actions, targets) - loss_of(&minus, obs, actions, targets)) / (2.0 * H)
}

fn assert_close(analytic: f64, numeric: f64, what: &str) {
    let diff = (analytic - numeric).abs();
    if diff < ABS_FLOOR {
        return;
    }
    let rel = diff / analytic.abs().max(numeric.abs());
    assert!(rel < REL_TOL, "{what}: analytic {analytic} vs numeric {numeric} (rel {rel})");
}

fn check_network(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs_dim = rng.random_range(1..=5);
    let hidden = rng.random_range(1..=5);
    let n_actions = rng.random_range(1..=5);
    let batch = rng.random_range(1..=6);

    let mut params = MlpParams::init(obs_dim, hidden, n_actions, &mut rng);
    // Nonzero biases so their gradients are exercised from a generic point.
    for b in params.b1.iter_mut().chain(params.b2.iter_mut()) {
        *b = rng.random_range(-0.3..0.3);
    }

    let xs: Vec<Vec<f64>> = (0..batch)
        .map(|_| (0..obs_dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let obs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
    let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..n_actions)).collect();
    let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();

    let (grads, loss) = backward_mse(&params, &obs, &actions, &targets).unwrap();
    assert!((loss - loss_of(&params, &obs, &actions, &targets)).abs() < 1e-12);

    let fields: [(ParamField, &Vec<f64>, &str); 4] = [
        (|p| &mut p.w1, &grads.w1, "w1"),
        (|p| &mut p.b1, &grads.b1, "b1"),
        (|p| &mut p.w2, &grads.w2, "w2"),
        (|p| &mut p.b2, &grads.b2, "b2"),
    ];
    for (param_field, analytic, name) in fields {
        for (index, &grad) in analytic.iter().enumerate() {
            let numeric = central_difference(&params, &obs, &actions, &targets, param_field, index);
            assert_close(grad, numeric, &format!("seed {seed} {name}[{index}]"));
        }
    }
}

#[test]
fn analytic_gradients_match_central_differences_on_random_networks() {
    for seed in 0..200 {
        check_network(seed);
    }
}
