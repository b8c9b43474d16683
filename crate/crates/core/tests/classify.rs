mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crossface::classify::{
    linear_svm_dual, logreg_objective, projected_gradient, sample_weights, train, ClassWeight, ClassifierKind,
    HyperParams, ModelParams, Penalty, TrainedModel, SVM_TOLERANCE,
};
use crossface::Label;

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) + shift).collect())
        .collect()
}

fn labels_of(y: &[f64]) -> Vec<Label> {
    y.iter().map(|&v| if v > 0.0 { Label::Genuine } else { Label::Impostor }).collect()
}

fn linear(m: &TrainedModel) -> (Vec<f64>, f64) {
    match &m.params {
        ModelParams::Linear { w, b } => (w.clone(), *b),
        other => panic!("expected a linear model, got {other:?}"),
    }
}

fn six_point_problem(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gaussian_rows(&mut rng, 6, 6, 0.0);
    let y = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    (x, y)
}

#[test]
fn linear_svm_matches_exhaustive_qp() {
    for seed in 0..5 {
        let (x, y) = six_point_problem(seed);
        for c_exp in [-2, 0, 3] {
            let c = 2f64.powi(c_exp);
            let (alpha, f_star) = common::box_qp_bruteforce(&x, &y, &[c; 6]);
            let (w_star, b_star) = common::primal_from_dual(&x, &y, &alpha);

            let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
            let m = train(
                ClassifierKind::LinearSvm,
                &rows,
                &labels_of(&y),
                &HyperParams::linear(c_exp, ClassWeight::Equal),
                seed,
            )
            .unwrap();
            let (w, b) = linear(&m);
            for (a, e) in w.iter().zip(&w_star) {
                assert!((a - e).abs() < 1e-3, "seed {seed} C=2^{c_exp}: w {w:?} vs {w_star:?}");
            }
            assert!((b - b_star).abs() < 1e-3, "seed {seed} C=2^{c_exp}: b {b} vs {b_star}");

            let dot = |i: usize, j: usize| x[i].iter().zip(&x[j]).map(|(p, q)| p * q).sum::<f64>();
            let sol = linear_svm_dual(dot, &y, &[c; 6], seed);
            let (w2, b2) = common::primal_from_dual(&x, &y, &sol.alpha);
            let f = common::dual_objective(&w2, b2, sol.alpha.iter().sum());
            assert!((f - f_star).abs() < 1e-3, "objective {f} vs {f_star}");
        }
    }
}

#[test]
fn linear_svm_dual_satisfies_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut x = gaussian_rows(&mut rng, 40, 5, 0.7);
    x.extend(gaussian_rows(&mut rng, 40, 5, -0.7));
    let y: Vec<f64> = (0..80).map(|i| if i < 40 { 1.0 } else { -1.0 }).collect();
    let upper = vec![0.5; 80];
    let dot = |i: usize, j: usize| x[i].iter().zip(&x[j]).map(|(p, q)| p * q).sum::<f64>();
    let sol = linear_svm_dual(dot, &y, &upper, 3);
    assert!(sol.converged);
    assert!(sol.alpha.iter().zip(&upper).all(|(&a, &u)| (0.0..=u).contains(&a)));
    // recompute ∇ = Qα − 1 from scratch
    let grad: Vec<f64> = (0..80)
        .map(|i| (0..80).map(|j| y[i] * y[j] * (dot(i, j) + 1.0) * sol.alpha[j]).sum::<f64>() - 1.0)
        .collect();
    let pg = projected_gradient(&sol.alpha, &grad, &upper);
    assert!(pg.iter().all(|g| g.abs() <= 10.0 * SVM_TOLERANCE), "{pg:?}");
}

#[test]
fn flipping_labels_negates_the_linear_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = gaussian_rows(&mut rng, 15, 4, 1.0);
    x.extend(gaussian_rows(&mut rng, 25, 4, -0.5));
    let y: Vec<f64> = (0..40).map(|i| if i < 15 { 1.0 } else { -1.0 }).collect();
    let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
    let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
    let hp = HyperParams::linear(1, ClassWeight::Equal);
    let (w, b) = linear(&train(ClassifierKind::LinearSvm, &rows, &labels_of(&y), &hp, 9).unwrap());
    let (wf, bf) = linear(&train(ClassifierKind::LinearSvm, &rows, &labels_of(&flipped), &hp, 9).unwrap());
    for (a, c) in w.iter().zip(&wf) {
        assert!((a + c).abs() < 1e-9);
    }
    assert!((b + bf).abs() < 1e-9);
}

#[test]
fn separable_data_is_fit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut x = gaussian_rows(&mut rng, 30, 3, 0.0);
    x.iter_mut().take(15).for_each(|r| r[0] = r[0].abs() + 1.0);
    x.iter_mut().skip(15).for_each(|r| r[0] = -r[0].abs() - 1.0);
    let y: Vec<f64> = (0..30).map(|i| if i < 15 { 1.0 } else { -1.0 }).collect();
    let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
    for kind in ClassifierKind::TRAINABLE {
        let hp = match kind {
            ClassifierKind::LinearSvm => HyperParams::linear(5, ClassWeight::Equal),
            ClassifierKind::RbfSvm => HyperParams::rbf(5, -3, ClassWeight::Equal),
            _ => HyperParams::logreg(5, Penalty::L2),
        };
        let m = train(kind, &rows, &labels_of(&y), &hp, 1).unwrap();
        for (r, &t) in rows.iter().zip(&y) {
            assert!(m.score(r).unwrap() * t > 0.0, "{kind} misclassifies a training point");
        }
    }
}

#[test]
fn rbf_svm_solves_xor_and_linear_cannot() {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (cx, cy, t) in [(1.0, 1.0, 1.0), (-1.0, -1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0)] {
        for k in 0..5 {
            let j = 0.05 * k as f64;
            rows.push(vec![cx + j, cy - j]);
            y.push(t);
        }
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let rbf = train(ClassifierKind::RbfSvm, &refs, &labels_of(&y), &HyperParams::rbf(5, 0, ClassWeight::Equal), 2).unwrap();
    assert!(refs.iter().zip(&y).all(|(r, &t)| rbf.score(r).unwrap() * t > 0.0));
    let lin = train(ClassifierKind::LinearSvm, &refs, &labels_of(&y), &HyperParams::linear(5, ClassWeight::Equal), 2).unwrap();
    assert!(refs.iter().zip(&y).any(|(r, &t)| lin.score(r).unwrap() * t <= 0.0));
}

#[test]
fn balanced_weights_equalize_class_mass_and_favor_the_minority() {
    let labels: Vec<Label> = (0..100).map(|i| if i < 10 { Label::Genuine } else { Label::Impostor }).collect();
    let w = sample_weights(&labels, ClassWeight::Balanced);
    let pos: f64 = w[..10].iter().sum();
    let neg: f64 = w[10..].iter().sum();
    assert!((pos - 50.0).abs() < 1e-12 && (neg - 50.0).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut x = gaussian_rows(&mut rng, 10, 3, 0.4);
    x.extend(gaussian_rows(&mut rng, 90, 3, -0.4));
    let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
    let accepted = |cw| {
        let m = train(ClassifierKind::LinearSvm, &rows, &labels, &HyperParams::linear(0, cw), 1).unwrap();
        rows[..10].iter().filter(|r| m.score(r).unwrap() > 0.0).count()
    };
    assert!(accepted(ClassWeight::Balanced) > accepted(ClassWeight::Equal));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn logreg_gradient_matches_finite_differences(seed in any::<u64>(), l2 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian_rows(&mut rng, 12, 4, 0.0);
        let y: Vec<f64> = (0..12).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let weights: Vec<f64> = (0..12).map(|i| 0.5 + (i % 4) as f64 * 0.25).collect();
        let theta: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let c = 1.7;
        let (_, g) = logreg_objective(&rows, &y, &weights, c, l2, &theta);
        let h = 1e-5;
        for k in 0..theta.len() {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (logreg_objective(&rows, &y, &weights, c, l2, &up).0
                - logreg_objective(&rows, &y, &weights, c, l2, &down).0)
                / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * (1.0 + g[k].abs()), "k={} fd={} g={}", k, fd, g[k]);
        }
    }
}

#[test]
fn baselines_ignore_training_data() {
    let rows: Vec<&[f64]> = vec![&[1.0], &[2.0]];
    let labels = [Label::Genuine, Label::Impostor];
    let hp = HyperParams::linear(0, ClassWeight::Equal);
    let acc = train(ClassifierKind::AlwaysAccept, &rows, &labels, &hp, 0).unwrap();
    let rej = train(ClassifierKind::AlwaysReject, &rows, &labels, &hp, 0).unwrap();
    assert!(acc.score(&[5.0, 6.0]).unwrap() > 0.0);
    assert!(rej.score(&[5.0]).unwrap() < 0.0);
    let r1 = train(ClassifierKind::Random, &rows, &labels, &hp, 7).unwrap();
    let r2 = train(ClassifierKind::Random, &rows, &labels, &hp, 7).unwrap();
    assert_eq!(r1.score(&[0.3, 0.1]).unwrap(), r2.score(&[0.3, 0.1]).unwrap());
}
