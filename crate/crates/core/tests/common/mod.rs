//! Test-only oracles shared by the integration suites.
#![allow(dead_code)]

use irs_jsce::autodiff::{Tape, Tensor, Var};
use irs_jsce::channel::{ChannelRealization, PairTable};
use irs_jsce::scheduler::LinkSet;
use irs_jsce::semantic::{Codec, CodecConfig, CodecVariant, ForwardInput, PhaseMode};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central finite difference of `f` at `x` for every coordinate.
pub fn central_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Largest relative error between two gradients, ignoring entries whose
/// absolute difference is below `floor`.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| {
            let diff = (a - n).abs();
            if diff <= floor {
                0.0
            } else {
                diff / a.abs().max(n.abs())
            }
        })
        .fold(0.0, f64::max)
}

/// Triple-loop `[m,k] x [k,n]` product.
pub fn matmul_oracle(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for p in 0..k {
                s += a[i * k + p] * b[p * n + j];
            }
            c[i * n + j] = s;
        }
    }
    c
}

pub type Build = dyn Fn(&mut Tape<f64>, &[Var]) -> Var;

/// Checks d(sum(w ⊙ op(inputs)))/d(inputs) against central differences.
pub fn gradcheck(shapes: &[Vec<usize>], positive: bool, seed: u64, build: &Build) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let v: f64 = rng.random_range(-1.5..1.5);
                if positive { v.abs() + 0.3 } else { v }
            })
            .collect()
    };
    let inputs: Vec<Vec<f64>> = shapes.iter().map(|s| sample(s.iter().product())).collect();
    // Output probe weights, fixed per check.
    let probe_len = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = shapes
            .iter()
            .zip(&inputs)
            .map(|(s, v)| tape.constant(s.clone(), v.clone()).unwrap())
            .collect();
        let y = build(&mut tape, &vars);
        tape.value(y).len()
    };
    let weights = sample(probe_len);

    let eval = |vals: &[Vec<f64>], grad: bool| -> (f64, Vec<Vec<f64>>) {
        let mut tape = Tape::new();
        let vars: Vec<Var> = shapes
            .iter()
            .zip(vals)
            .map(|(s, v)| {
                let t = Tensor::new(s.clone(), v.clone()).unwrap();
                tape.leaf(&if grad { t.with_grad() } else { t })
            })
            .collect();
        let y = build(&mut tape, &vars);
        let w = tape.constant(tape.shape(y).to_vec(), weights.clone()).unwrap();
        let p = tape.mul(y, w).unwrap();
        let loss = tape.sum(p);
        let value = tape.item(loss);
        if !grad {
            return (value, Vec::new());
        }
        let g = tape.backward(loss).unwrap();
        let grads = vars
            .iter()
            .zip(vals)
            .map(|(&v, x)| g.get(v).map(<[f64]>::to_vec).unwrap_or(vec![0.0; x.len()]))
            .collect();
        (value, grads)
    };

    let (_, analytic) = eval(&inputs, true);
    let mut worst: f64 = 0.0;
    for i in 0..inputs.len() {
        let mut f = |x: &[f64]| {
            let mut vals = inputs.clone();
            vals[i] = x.to_vec();
            eval(&vals, false).0
        };
        let numeric = central_diff(&mut f, &inputs[i], 1e-5);
        worst = worst.max(max_rel_err(&analytic[i], &numeric, 1e-8));
    }
    worst
}

pub fn tiny_config(irs: usize) -> CodecConfig {
    CodecConfig {
        image_side: 3,
        symbols: 8,
        hidden: 12,
        attention_hidden: 5,
        irs_elements: irs,
        variant: CodecVariant::Shared,
    }
}

pub fn random_channel(users: usize, n: usize, noise: f64, rng: &mut ChaCha8Rng) -> ChannelRealization<f64> {
    let irs: Vec<Vec<Complex<f64>>> = (0..users)
        .map(|_| (0..n).map(|_| Complex::from_polar(rng.random_range(0.5..1.2), rng.random_range(0.0..std::f64::consts::TAU))).collect())
        .collect();
    let mut direct = PairTable::filled(users, Complex::new(0.0, 0.0));
    for r in 0..users {
        for k in r + 1..users {
            let h = Complex::from_polar(rng.random_range(0.3..0.9), rng.random_range(0.0..std::f64::consts::TAU));
            direct.set(r, k, h);
            direct.set(k, r, h);
        }
    }
    ChannelRealization::from_parts(irs, direct, noise, 1.0).unwrap()
}

pub fn batch_images(links: usize, batch: usize, px: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..links).map(|_| (0..batch * px).map(|_| rng.random_range(0.0..1.0)).collect()).collect()
}

pub fn pipeline_loss(codec: &Codec<f64>, channel: &ChannelRealization<f64>, links: &LinkSet, xs: &[Vec<f64>]) -> f64 {
    let mut tape = Tape::new();
    let b = codec.params().bind(&mut tape);
    let out = codec
        .forward(
            &mut tape,
            &b,
            &ForwardInput {
                channel,
                links,
                batch: 2,
                images: xs,
                noise: None,
                phase_mode: PhaseMode::Continuous,
            },
        )
        .unwrap();
    tape.item(out.loss)
}

/// Analytic vs central-difference gradient for one named parameter.
pub fn pipeline_gradcheck(name: &str, seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let cfg = tiny_config(4);
    let codec = Codec::<f64>::new(cfg.clone(), &[], &mut r).unwrap();
    let channel = random_channel(4, 4, 0.0, &mut r);
    let links = LinkSet::new(4, &[(0, 1), (0, 2), (3, 2)]).unwrap();
    let xs = batch_images(3, 2, cfg.pixels(), &mut r);

    let mut tape = Tape::new();
    let b = codec.params().bind(&mut tape);
    let out = codec
        .forward(
            &mut tape,
            &b,
            &ForwardInput {
                channel: &channel,
                links: &links,
                batch: 2,
                images: &xs,
                noise: None,
                phase_mode: PhaseMode::Continuous,
            },
        )
        .unwrap();
    let grads = tape.backward(out.loss).unwrap();
    let analytic = grads.get(b.var(name).unwrap()).unwrap().to_vec();

    let x0 = codec.params().get(name).unwrap().values().to_vec();
    let mut probe = codec.clone();
    let numeric = central_diff(
        &mut |x: &[f64]| {
            probe.params_mut().get_mut(name).unwrap().values_mut().copy_from_slice(x);
            pipeline_loss(&probe, &channel, &links, &xs)
        },
        &x0,
        1e-5,
    );
    assert!(analytic.iter().any(|g| g.abs() > 1e-8), "{name}: vanishing gradient");
    max_rel_err(&analytic, &numeric, 1e-8)
}
