//! Environment probes (ignored): establish what episode lengths are
//! achievable with hand-coded residual laws before tuning the trainer.

use husl_sim::learning::{EnvConfig, WalkerEnv};

fn episode_len(
    env: &mut WalkerEnv,
    progress: f64,
    mut policy: impl FnMut(usize, &ndarray::Array1<f64>) -> [f64; 3],
) -> (usize, f64) {
    let mut obs = env.reset(progress).unwrap();
    let mut ret = 0.0;
    for step in 1..=1000 {
        let r = env.step(policy(step - 1, &obs));
        ret += r.reward;
        if r.done {
            return (step, ret);
        }
        obs = r.obs;
    }
    (1000, ret)
}

/// obs[10..12] (capture point minus next planned step) along the zero-noise
/// bounded walking solution, one entry per control step of one stride,
/// indexed modulo the stride. The capture point has no contracting-mode
/// transient, so the first stride is the cleanest window (divergent-mode
/// error grows ~27x per stride). A second pass re-records the profile from
/// the closed loop stabilized by the first-pass profile.
fn orbit_profile(noise_cfg: &EnvConfig) -> Vec<[f64; 2]> {
    let cfg = EnvConfig { init_noise: 0.0, ..noise_cfg.clone() };
    let mut env = WalkerEnv::new(cfg, 0).unwrap();
    let mut profile = vec![[0.0, 0.0]; 100];

    // Pass 1: open loop, first stride.
    let mut obs = env.reset(0.0).unwrap();
    for step in 0..100 {
        profile[step] = [obs[10], obs[11]];
        let r = env.step([0.0; 3]);
        assert!(!r.done, "zero-noise rollout died at step {step}");
        obs = r.obs;
    }

    // Pass 2: steady state of the loop closed around the pass-1 profile.
    let mut obs = env.reset(0.0).unwrap();
    for step in 0..600 {
        if step >= 500 {
            profile[step % 100] = [obs[10], obs[11]];
        }
        let p = profile[step % 100];
        let r = env.step([1.2 * (obs[10] - p[0]) / 0.06, 1.2 * (obs[11] - p[1]) / 0.04, 0.0]);
        assert!(!r.done, "pass-2 rollout died at step {step}");
        obs = r.obs;
    }
    profile
}

fn probe(noise: f64) {
    let base = EnvConfig { init_noise: noise, ..Default::default() };
    let profile = orbit_profile(&base);

    // Zero-noise endurance of the zero policy (how precise is the start?).
    {
        let cfg = EnvConfig { init_noise: 0.0, ..base.clone() };
        let mut env = WalkerEnv::new(cfg, 0).unwrap();
        let (len, ret) = episode_len(&mut env, 0.0, |_, _| [0.0; 3]);
        println!("noise 0.0000 zero       progress 0.0: len {len:7} ret {ret:8.1}");
    }

    for (label, k) in [("zero", 0.0), ("orbit-0.8", 0.8), ("orbit-1.2", 1.2), ("orbit-1.6", 1.6)] {
        let mut env = WalkerEnv::new(base.clone(), 7).unwrap();
        for progress in [0.0, 0.5, 1.0] {
            let mut lens = Vec::new();
            let mut rets = Vec::new();
            for _ in 0..20 {
                let (len, ret) = episode_len(&mut env, progress, |step, obs| {
                    let p = profile[step % 100];
                    let ex = obs[10] - p[0];
                    let ey = obs[11] - p[1];
                    [k * ex / 0.06, k * ey / 0.04, 0.0]
                });
                lens.push(len);
                rets.push(ret);
            }
            let mean_len = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
            let mean_ret = rets.iter().sum::<f64>() / rets.len() as f64;
            println!(
                "noise {noise:0.4} {label:10} progress {progress:.1}: len {mean_len:7.1} (min {:4} max {:4})  ret {mean_ret:8.1}",
                lens.iter().min().unwrap(),
                lens.iter().max().unwrap()
            );
        }
    }
}

#[test]
#[ignore]
fn diag_hand_policies() {
    for noise in [0.004, 0.002] {
        probe(noise);
        println!();
    }
}

#[test]
#[ignore]
fn diag_trained_policy() {
    use husl_sim::learning::{load_checkpoint, PolicyParams};
    use rand::SeedableRng;
    let trained = load_checkpoint(std::path::Path::new("/tmp/ckpt.json")).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let fresh = PolicyParams::new(21, 3, &[64, 64], -0.7, &mut rng);
    let ft = trained.flatten();
    let ff = fresh.flatten();
    let dist: f64 = ft.iter().zip(&ff).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = ff.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("param movement: |trained - init| = {dist:.4} (init norm {norm:.4})");

    for use_trained in [false, true] {
        let label = if use_trained { "trained-mean" } else { "zero" };
        for progress in [0.0_f64, 1.0] {
            let mut env = WalkerEnv::new(EnvConfig::default(), 7).unwrap();
            let mut lens = Vec::new();
            for _ in 0..20 {
                let (len, _) = episode_len(&mut env, progress, |_, obs| {
                    if use_trained {
                        let m = trained.actor.forward(obs);
                        [m[0], m[1], m[2]]
                    } else {
                        [0.0; 3]
                    }
                });
                lens.push(len);
            }
            let mean_len = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
            println!(
                "{label:13} progress {progress:.1}: len {mean_len:7.1} (min {:4} max {:4})",
                lens.iter().min().unwrap(),
                lens.iter().max().unwrap()
            );
        }
    }
}
