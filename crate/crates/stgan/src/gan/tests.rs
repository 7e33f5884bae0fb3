use super::*;
use crate::tensor::finite_difference_check;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn tiny_cfg() -> GanConfig {
    GanConfig {
        noise_dim: 3,
        data_dim: 4,
        gen_layers: vec![6],
        disc_layers: vec![6],
        f_measure: FMeasure::Vanilla,
        minibatch: None,
        gp_lambda: 10.0,
        conditional: None,
        gen_updates: 2,
        disc_updates: 1,
        batch_size: 4,
        lr: 1e-3,
        rounds: 3,
        leaky_slope: 0.2,
        weight_clip: 0.01,
        clip_norm: 5.0,
        seed: 7,
    }
}

fn zero_store(store: &mut ParamStore) {
    for id in store.ids().collect::<Vec<_>>() {
        for v in store.value_mut(id) {
            *v = 0.0;
        }
    }
}

#[test]
fn zero_weight_generator_gives_zero_vectors() {
    let mut gan = Gan::new(tiny_cfg());
    zero_store(&mut gan.gen);
    let out = gan.sample_vectors(5, None, 1).unwrap();
    assert_eq!(out.len(), 5);
    for row in out {
        assert_eq!(row, vec![0.0; 4]);
    }
}

#[test]
fn generator_output_shape() {
    let gan = Gan::new(tiny_cfg());
    let g = Graph::new();
    let noise = g.constant(&[6, 3], vec![0.1; 18]).unwrap();
    let out = gan.generator_forward(&g, &noise, None, false).unwrap();
    assert_eq!(out.shape(), vec![6, 4]);
}

#[test]
fn conditional_widens_first_layer() {
    let mut cfg = tiny_cfg();
    cfg.conditional = Some(5);
    let gan = Gan::new(cfg);
    let w0 = gan.gen.id("gen.w0").unwrap();
    assert_eq!(gan.gen.shape(w0), &[6, 3 + 5]);
    // And the condition is mandatory.
    let g = Graph::new();
    let noise = g.constant(&[2, 3], vec![0.0; 6]).unwrap();
    assert!(matches!(
        gan.generator_forward(&g, &noise, None, false),
        Err(GanError::MissingCondition)
    ));
}

#[test]
fn zero_weight_discriminator_gives_zero_scores() {
    let mut gan = Gan::new(tiny_cfg());
    zero_store(&mut gan.disc);
    let g = Graph::new();
    let x = g.constant(&[3, 4], vec![0.5; 12]).unwrap();
    let s = gan.discriminator_forward(&g, &x, None, false).unwrap();
    assert_eq!(s.shape(), vec![3]);
    assert_eq!(s.data(), vec![0.0; 3]);
    // Raw score 0 means probability one half under the sigmoid link.
    assert!(close(s.sigmoid().data()[0], 0.5, 1e-15));
}

#[test]
fn discriminator_is_per_sample_without_minibatch() {
    let gan = Gan::new(tiny_cfg());
    let g = Graph::new();
    let rows = vec![vec![0.3, -0.2, 0.9, 0.1], vec![-1.0, 0.4, 0.0, 2.0], vec![0.0; 4]];
    let x = rows_tensor(&g, &rows).unwrap();
    let s = gan.discriminator_forward(&g, &x, None, false).unwrap().data();
    let permuted: Vec<Vec<f64>> = vec![rows[2].clone(), rows[0].clone(), rows[1].clone()];
    let xp = rows_tensor(&g, &permuted).unwrap();
    let sp = gan.discriminator_forward(&g, &xp, None, false).unwrap().data();
    assert!(close(sp[0], s[2], 1e-12));
    assert!(close(sp[1], s[0], 1e-12));
    assert!(close(sp[2], s[1], 1e-12));
}

#[test]
fn minibatch_feature_values() {
    let g = Graph::new();
    // kernels = 1, kernel_dim = 1, T = [1]: M equals f.
    let shape = MinibatchShape { kernels: 1, kernel_dim: 1 };
    let t = g.constant(&[1, 1], vec![1.0]).unwrap();

    // Two identical samples: feature = exp(0) = 1 for both.
    let f = g.constant(&[2, 1], vec![0.7, 0.7]).unwrap();
    let feats = minibatch_features(&f, &t, shape).unwrap();
    assert_eq!(feats.data(), vec![1.0, 1.0]);

    // Two samples at L1 distance d: feature = exp(-d) for both.
    let f = g.constant(&[2, 1], vec![0.0, 1.5]).unwrap();
    let feats = minibatch_features(&f, &t, shape).unwrap();
    assert!(close(feats.data()[0], (-1.5f64).exp(), 1e-12));
    assert!(close(feats.data()[1], (-1.5f64).exp(), 1e-12));

    // Three samples with distances 1 and 2 from the first:
    // feature_0 = e^-1 + e^-2 ≈ 0.5032.
    let f = g.constant(&[3, 1], vec![0.0, 1.0, 2.0]).unwrap();
    let feats = minibatch_features(&f, &t, shape).unwrap();
    assert!(close(feats.data()[0], (-1.0f64).exp() + (-2.0f64).exp(), 1e-12));
    assert!(close(feats.data()[0], 0.5032, 5e-4));
}

#[test]
fn minibatch_features_permutation_equivariant() {
    let g = Graph::new();
    let shape = MinibatchShape { kernels: 2, kernel_dim: 3 };
    let t = g.constant(&[4, 6], (0..24).map(|i| (i as f64) * 0.1 - 1.0).collect()).unwrap();
    let rows =
        vec![vec![0.1, 0.2, 0.3, 0.4], vec![-0.5, 0.0, 0.5, 1.0], vec![1.0, -1.0, 0.0, 0.2]];
    let f = rows_tensor(&g, &rows).unwrap();
    let feats = minibatch_features(&f, &t, shape).unwrap().data();
    let perm = vec![rows[1].clone(), rows[2].clone(), rows[0].clone()];
    let fp = rows_tensor(&g, &perm).unwrap();
    let feats_p = minibatch_features(&fp, &t, shape).unwrap().data();
    for k in 0..2 {
        assert!(close(feats_p[k], feats[2 + k], 1e-12));
        assert!(close(feats_p[2 + k], feats[4 + k], 1e-12));
        assert!(close(feats_p[4 + k], feats[k], 1e-12));
    }
}

#[test]
fn minibatch_rejects_singleton_batch() {
    let mut cfg = tiny_cfg();
    cfg.minibatch = Some(MinibatchShape::default());
    let gan = Gan::new(cfg);
    let g = Graph::new();
    let x = g.constant(&[1, 4], vec![0.0; 4]).unwrap();
    assert!(matches!(
        gan.discriminator_forward(&g, &x, None, false),
        Err(GanError::BatchTooSmall)
    ));
}

#[test]
fn vanilla_loss_at_symmetric_point() {
    let g = Graph::new();
    let s_real = g.constant(&[4], vec![0.0; 4]).unwrap();
    let s_fake = g.constant(&[4], vec![0.0; 4]).unwrap();
    let (d, _) = loss_vanilla(&s_real, &s_fake).unwrap();
    assert!(close(d.item(), 2.0 * 2.0f64.ln(), 1e-12));
}

#[test]
fn vanilla_loss_perfect_discriminator() {
    let g = Graph::new();
    let s_real = g.constant(&[2], vec![30.0, 30.0]).unwrap();
    let s_fake = g.constant(&[2], vec![-30.0, -30.0]).unwrap();
    let (d, _) = loss_vanilla(&s_real, &s_fake).unwrap();
    assert!(d.item() < 1e-9);
}

#[test]
fn vanilla_generator_gradient_pushes_scores_up() {
    let g = Graph::new();
    let s_fake = g.input(&[3], vec![0.2, -0.5, 1.0]).unwrap();
    let s_real = g.constant(&[3], vec![0.0; 3]).unwrap();
    let (_, g_loss) = loss_vanilla(&s_real, &s_fake).unwrap();
    g.backward(&g_loss).unwrap();
    for v in s_fake.grad().unwrap() {
        assert!(v < 0.0, "gradient {v} should push the score upward");
    }
    // And the analytic gradient matches central differences.
    let fd = |x: f64| -> f64 {
        let gg = Graph::new();
        let sf = gg.constant(&[1], vec![x]).unwrap();
        let sr = gg.constant(&[1], vec![0.0]).unwrap();
        loss_vanilla(&sr, &sf).unwrap().1.item()
    };
    let h = 1e-6;
    let numeric = (fd(0.2 + h) - fd(0.2 - h)) / (2.0 * h);
    let analytic = {
        let gg = Graph::new();
        let sf = gg.input(&[1], vec![0.2]).unwrap();
        let sr = gg.constant(&[1], vec![0.0]).unwrap();
        let (_, gl) = loss_vanilla(&sr, &sf).unwrap();
        gg.backward(&gl).unwrap();
        sf.grad().unwrap()[0]
    };
    assert!(close(analytic, numeric, 1e-6), "{analytic} vs {numeric}");
}

#[test]
fn lsgan_loss_values() {
    let g = Graph::new();
    let one = g.constant(&[1], vec![1.0]).unwrap();
    let zero = g.constant(&[1], vec![0.0]).unwrap();
    let (d, _) = loss_lsgan(&one, &zero).unwrap();
    assert!(close(d.item(), 0.0, 1e-15));
    let (_, gl) = loss_lsgan(&zero, &one).unwrap();
    assert!(close(gl.item(), 0.0, 1e-15));
    let (d, _) = loss_lsgan(&zero, &zero).unwrap();
    assert!(close(d.item(), 0.5, 1e-15));
}

#[test]
fn wgan_loss_values() {
    let g = Graph::new();
    let s_real = g.constant(&[2], vec![1.0, 3.0]).unwrap();
    let s_fake = g.constant(&[2], vec![0.0, 0.0]).unwrap();
    let (d, _) = loss_wgan(&s_real, &s_fake).unwrap();
    assert!(close(d.item(), -2.0, 1e-15));
    let (d_same, _) = loss_wgan(&s_real, &s_real).unwrap();
    assert!(close(d_same.item(), 0.0, 1e-15));
}

#[test]
fn wgan_training_clamps_critic_weights() {
    let mut cfg = tiny_cfg();
    cfg.f_measure = FMeasure::WGan;
    cfg.rounds = 2;
    let mut gan = Gan::new(cfg);
    let data: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64 * 0.1; 4]).collect();
    gan.train(TrainData { real: &data, conditions: None }, |_, _| {}).unwrap();
    for id in gan.disc.ids().collect::<Vec<_>>() {
        for v in gan.disc.value(id) {
            assert!(v.abs() <= 0.01 + 1e-12, "critic weight {v} escaped the clamp");
        }
    }
}

/// A critic computing a fixed linear map: no hidden layers, head weights set
/// by hand.
fn linear_critic(scale: f64) -> Gan {
    let mut cfg = tiny_cfg();
    cfg.data_dim = 1;
    cfg.disc_layers = vec![];
    cfg.f_measure = FMeasure::WGanGp;
    let mut gan = Gan::new(cfg);
    let w = gan.disc.id("disc.head_w").unwrap();
    gan.disc.value_mut(w)[0] = scale;
    let b = gan.disc.id("disc.head_b").unwrap();
    gan.disc.value_mut(b)[0] = 0.0;
    gan
}

#[test]
fn gradient_penalty_identity_critic_is_zero() {
    let gan = linear_critic(1.0);
    let g = Graph::new();
    let real = vec![vec![2.0], vec![-1.0]];
    let fake = vec![vec![0.5], vec![0.0]];
    let (penalty, mean_norm) =
        gradient_penalty(&gan, &g, &real, &fake, None, 10.0, &mut Rng::new(3)).unwrap();
    assert!(close(penalty.item(), 0.0, 1e-12));
    assert!(close(mean_norm, 1.0, 1e-12));
}

#[test]
fn gradient_penalty_scaled_critic() {
    // D(x) = 2x has gradient norm 2 everywhere: penalty = 10 * (2-1)^2 = 10.
    let gan = linear_critic(2.0);
    let g = Graph::new();
    let real = vec![vec![1.0]];
    let fake = vec![vec![0.0]];
    let (penalty, mean_norm) =
        gradient_penalty(&gan, &g, &real, &fake, None, 10.0, &mut Rng::new(3)).unwrap();
    assert!(close(penalty.item(), 10.0, 1e-12));
    assert!(close(mean_norm, 2.0, 1e-12));
}

#[test]
fn gradient_penalty_constant_critic_is_lambda() {
    let gan = linear_critic(0.0);
    let g = Graph::new();
    let real = vec![vec![1.0]];
    let fake = vec![vec![0.0]];
    let (penalty, _) =
        gradient_penalty(&gan, &g, &real, &fake, None, 7.5, &mut Rng::new(3)).unwrap();
    assert!(close(penalty.item(), 7.5, 1e-12));
}

#[test]
fn gradient_penalty_double_backward_matches_fd() {
    // d(penalty)/d(critic weights) through the emitted backward operations
    // against central finite differences.
    let mut cfg = tiny_cfg();
    cfg.data_dim = 3;
    cfg.disc_layers = vec![5];
    cfg.f_measure = FMeasure::WGanGp;
    let template = Gan::new(cfg.clone());
    let real = vec![vec![0.4, -0.2, 0.8], vec![1.0, 0.3, -0.5]];
    let fake = vec![vec![0.0, 0.1, 0.2], vec![-0.3, 0.2, 0.0]];
    let mut store = {
        let mut s = ParamStore::new();
        for id in template.disc.ids() {
            s.add(template.disc.name(id), template.disc.shape(id), template.disc.value(id).to_vec());
        }
        s
    };
    let mut rng = Rng::new(5);
    let report = finite_difference_check(
        &mut store,
        |g, s| {
            let mut probe = Gan::new(cfg.clone());
            for (dst, src) in probe.disc.ids().collect::<Vec<_>>().into_iter().zip(s.ids()) {
                probe.disc.set_value(dst, s.value(src).to_vec()).unwrap();
            }
            // A fixed interpolation seed keeps the loss a deterministic
            // function of the weights.
            let (penalty, _) =
                gradient_penalty(&probe, g, &real, &fake, None, 10.0, &mut Rng::new(11))
                    .map_err(|e| match e {
                        GanError::Tensor(t) => t,
                        other => panic!("unexpected error {other}"),
                    })?;
            Ok(penalty)
        },
        1e-5,
        usize::MAX,
        &mut rng,
    )
    .unwrap();
    assert!(report.max_rel_err < 1e-4, "{report:?}");
}

#[test]
fn schedule_runs_two_generator_updates_per_round() {
    let mut cfg = tiny_cfg();
    cfg.rounds = 5;
    let mut gan = Gan::new(cfg);
    let data: Vec<Vec<f64>> = (0..16).map(|i| vec![(i % 4) as f64; 4]).collect();
    let history = gan.train(TrainData { real: &data, conditions: None }, |_, _| {}).unwrap();
    assert_eq!(history.len(), 5);
    assert_eq!(gan.disc_updates_done, 5);
    assert_eq!(gan.gen_updates_done, 10);
}

#[test]
fn zero_rounds_changes_nothing() {
    let mut cfg = tiny_cfg();
    cfg.rounds = 0;
    let mut gan = Gan::new(cfg);
    let before: Vec<Vec<f64>> = gan.gen.ids().map(|id| gan.gen.value(id).to_vec()).collect();
    let data: Vec<Vec<f64>> = (0..16).map(|_| vec![0.0; 4]).collect();
    let history = gan.train(TrainData { real: &data, conditions: None }, |_, _| {}).unwrap();
    assert!(history.is_empty());
    for (id, b) in gan.gen.ids().collect::<Vec<_>>().into_iter().zip(before) {
        assert_eq!(gan.gen.value(id), &b[..]);
    }
}

#[test]
fn train_rejects_tiny_datasets() {
    let mut gan = Gan::new(tiny_cfg());
    let data: Vec<Vec<f64>> = (0..3).map(|_| vec![0.0; 4]).collect();
    assert!(matches!(
        gan.train(TrainData { real: &data, conditions: None }, |_, _| {}),
        Err(GanError::NotEnoughData(3))
    ));
}

#[test]
fn sampling_is_deterministic_and_empty_for_zero() {
    let gan = Gan::new(tiny_cfg());
    assert!(gan.sample_vectors(0, None, 5).unwrap().is_empty());
    let a = gan.sample_vectors(8, None, 5).unwrap();
    let b = gan.sample_vectors(8, None, 5).unwrap();
    assert_eq!(a, b);
    let decoded = sample_and_decode(&gan, 4, None, 9, |v| v[0]).unwrap();
    let decoded2 = sample_and_decode(&gan, 4, None, 9, |v| v[0]).unwrap();
    assert_eq!(decoded, decoded2);
}

#[test]
fn conditional_generator_responds_to_condition_only_through_input() {
    let mut cfg = tiny_cfg();
    cfg.conditional = Some(2);
    let gan = Gan::new(cfg);
    let g = Graph::new();
    let noise = g.constant(&[1, 3], vec![0.3, -0.1, 0.8]).unwrap();
    let c1 = g.constant(&[1, 2], vec![1.0, 0.0]).unwrap();
    let c2 = g.constant(&[1, 2], vec![0.0, 1.0]).unwrap();
    let out1 = gan.generator_forward(&g, &noise, Some(&c1), false).unwrap();
    let out1_again = gan.generator_forward(&g, &noise, Some(&c1), false).unwrap();
    let out2 = gan.generator_forward(&g, &noise, Some(&c2), false).unwrap();
    assert_eq!(out1.data(), out1_again.data());
    assert_ne!(out1.data(), out2.data());
}

#[test]
fn mode_coverage_counts() {
    let centers: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let a = i as f64 / 8.0 * std::f64::consts::TAU;
            vec![2.0 * a.cos(), 2.0 * a.sin()]
        })
        .collect();
    assert_eq!(mode_coverage(&centers, &centers, 0.5), 8);
    let collapsed = vec![centers[0].clone(); 20];
    assert_eq!(mode_coverage(&collapsed, &centers, 0.5), 1);
    // Hand-placed samples near 3 of the 8 centers.
    let near3: Vec<Vec<f64>> = vec![
        vec![centers[0][0] + 0.1, centers[0][1]],
        vec![centers[3][0], centers[3][1] - 0.2],
        vec![centers[6][0] + 0.3, centers[6][1] + 0.3],
    ];
    assert_eq!(mode_coverage(&near3, &centers, 0.5), 3);
}

#[test]
fn vanilla_training_moves_generator_toward_data() {
    // Smoke test: a few rounds run without error and losses stay finite.
    let mut cfg = tiny_cfg();
    cfg.rounds = 20;
    let mut gan = Gan::new(cfg);
    let mut rng = Rng::new(1);
    let data: Vec<Vec<f64>> = (0..64)
        .map(|_| (0..4).map(|_| 3.0 + 0.1 * rng.normal()).collect())
        .collect();
    let history = gan.train(TrainData { real: &data, conditions: None }, |_, _| {}).unwrap();
    assert!(history.iter().all(|r| r.d_loss.is_finite() && r.g_loss.is_finite()));
}
