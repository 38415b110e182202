mod common;

use common::{central_diff, gradcheck, matmul_oracle, max_rel_err};
use irs_jsce::autodiff::nn::{Activation, Mlp};
use irs_jsce::autodiff::{container, Adam, Optimizer, ParameterSet, Sgd, Tape, Tensor, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

macro_rules! check_primitive {
    ($name:ident, $shapes:expr, $positive:expr, $build:expr) => {
        #[test]
        fn $name() {
            for seed in 0..4 {
                let err = gradcheck(&$shapes, $positive, seed, &$build);
                assert!(err < 1e-4, "{}: relative error {err:e}", stringify!($name));
            }
        }
    };
}

check_primitive!(grad_add, [vec![3, 4], vec![3, 4]], false, |t, v| t.add(v[0], v[1]).unwrap());
check_primitive!(grad_add_row_broadcast, [vec![3, 4], vec![4]], false, |t, v| t.add(v[0], v[1]).unwrap());
check_primitive!(grad_sub_col_broadcast, [vec![3, 4], vec![3, 1]], false, |t, v| t.sub(v[0], v[1]).unwrap());
check_primitive!(grad_mul, [vec![2, 5], vec![2, 5]], false, |t, v| t.mul(v[0], v[1]).unwrap());
check_primitive!(grad_mul_scalar_broadcast, [vec![2, 5], vec![]], false, |t, v| t.mul(v[0], v[1]).unwrap());
check_primitive!(grad_div, [vec![3, 2], vec![3, 1]], true, |t, v| t.div(v[0], v[1]).unwrap());
check_primitive!(grad_matmul, [vec![3, 4], vec![4, 2]], false, |t, v| t.matmul(v[0], v[1]).unwrap());
check_primitive!(grad_affine, [vec![3, 4], vec![4, 2], vec![2]], false, |t, v| t.affine(v[0], v[1], v[2]).unwrap());
check_primitive!(grad_sum, [vec![3, 4]], false, |t, v| t.sum(v[0]));
check_primitive!(grad_mean, [vec![3, 4]], false, |t, v| t.mean(v[0]));
check_primitive!(grad_sum_last, [vec![3, 4]], false, |t, v| t.sum_last(v[0]));
check_primitive!(grad_mean_last, [vec![3, 4]], false, |t, v| t.mean_last(v[0]));
check_primitive!(grad_tanh, [vec![2, 6]], false, |t, v| t.tanh(v[0]));
check_primitive!(grad_relu, [vec![2, 6]], false, |t, v| t.relu(v[0]));
check_primitive!(grad_sigmoid, [vec![2, 6]], false, |t, v| t.sigmoid(v[0]));
check_primitive!(grad_sin, [vec![2, 6]], false, |t, v| t.sin(v[0]));
check_primitive!(grad_cos, [vec![2, 6]], false, |t, v| t.cos(v[0]));
check_primitive!(grad_square, [vec![2, 6]], false, |t, v| t.square(v[0]));
check_primitive!(grad_sqrt, [vec![2, 6]], true, |t, v| t.sqrt(v[0]));
check_primitive!(grad_softmax, [vec![3, 5]], false, |t, v| t.softmax(v[0]));
check_primitive!(grad_neg_scale_offset, [vec![2, 3]], false, |t, v| {
    let a = t.neg(v[0]);
    let b = t.scale(a, 1.7);
    t.offset(b, 0.3)
});
check_primitive!(grad_concat_slice, [vec![2, 3], vec![2, 2]], false, |t, v| {
    let c = t.concat(&[v[0], v[1]]).unwrap();
    let s = t.slice_last(c, 1, 3).unwrap();
    t.reshape(s, vec![3, 2]).unwrap()
});

#[test]
fn matmul_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut tape = Tape::new();
    let va = tape.constant([3, 4], a.clone()).unwrap();
    let vb = tape.constant([4, 2], b.clone()).unwrap();
    let c = tape.matmul(va, vb).unwrap();
    let oracle = matmul_oracle(&a, &b, 3, 4, 2);
    for (x, y) in tape.value(c).iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-12);
    }
}

fn two_layer(seed: u64) -> (Mlp, ParameterSet<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mlp = Mlp::new("mlp", &[3, 5, 2], Activation::Tanh, Activation::Identity);
    let mut params = ParameterSet::new();
    mlp.init(&mut params, &mut rng).unwrap();
    // Non-zero biases so every path is exercised.
    for (_, t) in params.iter_mut() {
        for v in t.values_mut() {
            *v += rng.random_range(-0.2..0.2);
        }
    }
    (mlp, params)
}

fn mlp_loss(mlp: &Mlp, params: &ParameterSet<f64>, tape: &mut Tape<f64>) -> (Var, irs_jsce::autodiff::Binding) {
    let binding = params.bind(tape);
    let x = tape
        .constant([4, 3], vec![0.1, -0.4, 0.9, 1.2, 0.3, -0.7, -1.1, 0.5, 0.2, 0.05, -0.3, 0.8])
        .unwrap();
    let y = mlp.forward(tape, &binding, x).unwrap();
    let target = tape.constant([4, 2], vec![0.5, -0.5, 1.0, 0.0, -1.0, 0.3, 0.2, 0.2]).unwrap();
    let d = tape.sub(y, target).unwrap();
    let sq = tape.square(d);
    (tape.mean(sq), binding)
}

#[test]
fn perceptron_gradients_match_finite_differences() {
    let (mlp, mut params) = two_layer(5);
    let mut tape = Tape::new();
    let (loss, binding) = mlp_loss(&mlp, &params, &mut tape);
    let grads = tape.backward(loss).unwrap();
    params.accumulate(&binding, &grads).unwrap();

    for name in params.names().to_vec() {
        let analytic = params.get(&name).unwrap().grad().unwrap().to_vec();
        let base = params.get(&name).unwrap().values().to_vec();
        let mut f = |x: &[f64]| {
            let mut p = params.clone();
            p.get_mut(&name).unwrap().values_mut().copy_from_slice(x);
            let mut tape = Tape::new();
            let (loss, _) = mlp_loss(&mlp, &p, &mut tape);
            tape.item(loss)
        };
        let numeric = central_diff(&mut f, &base, 1e-5);
        let err = max_rel_err(&analytic, &numeric, 1e-8);
        assert!(err < 1e-4, "{name}: {err:e}");
    }
}

#[test]
fn gradients_accumulate_until_cleared() {
    let (mlp, mut params) = two_layer(1);
    for _ in 0..2 {
        let mut tape = Tape::new();
        let (loss, binding) = mlp_loss(&mlp, &params, &mut tape);
        let g = tape.backward(loss).unwrap();
        params.accumulate(&binding, &g).unwrap();
    }
    let twice = params.get("mlp.l0.w").unwrap().grad().unwrap().to_vec();
    params.zero_grads();
    let mut tape = Tape::new();
    let (loss, binding) = mlp_loss(&mlp, &params, &mut tape);
    let g = tape.backward(loss).unwrap();
    params.accumulate(&binding, &g).unwrap();
    let once = params.get("mlp.l0.w").unwrap().grad().unwrap();
    for (a, b) in twice.iter().zip(once) {
        assert!((a - 2.0 * b).abs() < 1e-12);
    }
}

#[test]
fn tape_is_deterministic() {
    let run = || {
        let (mlp, mut params) = two_layer(9);
        let mut tape = Tape::new();
        let (loss, binding) = mlp_loss(&mlp, &params, &mut tape);
        let value = tape.item(loss);
        let g = tape.backward(loss).unwrap();
        params.accumulate(&binding, &g).unwrap();
        let grads: Vec<u64> = params
            .iter()
            .flat_map(|(_, t)| t.grad().unwrap().iter().map(|v| v.to_bits()).collect::<Vec<_>>())
            .collect();
        (value.to_bits(), grads)
    };
    assert_eq!(run(), run());
}

fn quadratic_step(params: &mut ParameterSet<f64>, opt: &mut dyn Optimizer<f64>) -> f64 {
    let mut tape = Tape::new();
    let b = params.bind(&mut tape);
    let x = b.var("x").unwrap();
    let loss = tape.square(x);
    let value = tape.item(loss);
    let g = tape.backward(loss).unwrap();
    params.accumulate(&b, &g).unwrap();
    opt.step(params).unwrap();
    value
}

fn scalar_param(x: f64) -> ParameterSet<f64> {
    let mut p = ParameterSet::new();
    p.insert("x", Tensor::scalar(x)).unwrap();
    p
}

#[test]
fn plain_gradient_step() {
    let mut p = scalar_param(1.0);
    quadratic_step(&mut p, &mut Sgd::new(0.1));
    assert!((p.get("x").unwrap().values()[0] - 0.8).abs() < 1e-15);
    assert!(p.get("x").unwrap().grad().is_none(), "step clears gradients");
}

#[test]
fn convex_quadratic_decreases_monotonically() {
    for opt in [&mut Sgd::new(0.05) as &mut dyn Optimizer<f64>, &mut Adam::new(0.05)] {
        let mut p = scalar_param(2.0);
        let mut last = f64::INFINITY;
        for _ in 0..30 {
            let f = quadratic_step(&mut p, opt);
            assert!(f < last);
            last = f;
        }
    }
}

#[test]
fn adam_matches_hand_trace() {
    // Moment recursion worked by hand for f(x) = x², x0 = 1, rate 0.1.
    let mut p = scalar_param(1.0);
    let mut adam = Adam::new(0.1);
    quadratic_step(&mut p, &mut adam);
    assert!((p.get("x").unwrap().values()[0] - 0.9000000005).abs() < 1e-14);
    quadratic_step(&mut p, &mut adam);
    assert!((p.get("x").unwrap().values()[0] - 0.8004122286917928).abs() < 1e-14);
}

#[test]
fn non_finite_gradient_names_parameter() {
    let mut p = scalar_param(1.0);
    p.get_mut("x").unwrap().accumulate_grad(&[f64::NAN]).unwrap();
    let err = Adam::new(0.1).step(&mut p).unwrap_err().to_string();
    assert!(err.contains("x.grad"), "{err}");
}

#[test]
fn frozen_parameters_receive_no_gradient() {
    let (mlp, mut params) = two_layer(2);
    params.freeze("mlp.l0.w").unwrap();
    let mut tape = Tape::new();
    let (loss, binding) = mlp_loss(&mlp, &params, &mut tape);
    let g = tape.backward(loss).unwrap();
    params.accumulate(&binding, &g).unwrap();
    assert!(params.get("mlp.l0.w").unwrap().grad().is_none());
    assert!(params.get("mlp.l1.w").unwrap().grad().is_some());
}

proptest! {
    #[test]
    fn softmax_rows_lie_on_simplex(v in proptest::collection::vec(-30.0f64..30.0, 12)) {
        let mut tape = Tape::new();
        let x = tape.constant([3, 4], v).unwrap();
        let s = tape.softmax(x);
        for row in tape.value(s).chunks(4) {
            prop_assert!(row.iter().all(|&p| p >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn container_round_trip_is_bit_exact(
        a in proptest::collection::vec(any::<f64>(), 6),
        b in proptest::collection::vec(any::<f32>(), 3),
    ) {
        let mut p = ParameterSet::<f64>::new();
        p.insert("a.w", Tensor::matrix(2, 3, a).unwrap()).unwrap();
        let back: ParameterSet<f64> = container::decode(&container::encode(&p)).unwrap();
        for (x, y) in p.iter().zip(back.iter()) {
            prop_assert_eq!(x.0, y.0);
            prop_assert_eq!(x.1.shape(), y.1.shape());
            let bx: Vec<u64> = x.1.values().iter().map(|v| v.to_bits()).collect();
            let by: Vec<u64> = y.1.values().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(bx, by);
        }
        let mut q = ParameterSet::<f32>::new();
        q.insert("b", Tensor::row(b)).unwrap();
        let back: ParameterSet<f32> = container::decode(&container::encode(&q)).unwrap();
        let bx: Vec<u32> = q.get("b").unwrap().values().iter().map(|v| v.to_bits()).collect();
        let by: Vec<u32> = back.get("b").unwrap().values().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(bx, by);
    }
}
