// Dev probe: error distribution of the AE on a noisy line with outliers.
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use windcast::outlier::autoencoder_fit;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rows: Vec<Vec<f64>> = (0..500)
        .map(|_| {
            let t: f64 = rng.random();
            vec![t, (0.1 + 0.8 * t + noise.sample(&mut rng)).clamp(0.0, 1.0)]
        })
        .collect();
    let n_out = 25;
    for _ in 0..n_out {
        let t: f64 = rng.random();
        let off: f64 = rng.random_range(0.2..0.5);
        rows.push(vec![t, (0.1 + 0.8 * t + off).min(1.0)]);
    }
    for (epochs, lr) in [(500usize, 0.05f64), (2000, 0.5), (8000, 1.0), (20000, 2.0)] {
        let model = autoencoder_fit(&rows, 1, epochs, lr, 1).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| model.reconstruction_rmse(r)).collect();
        let mut inl = errs[..500].to_vec();
        inl.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let out_mean = errs[500..].iter().sum::<f64>() / n_out as f64;
        let inl_mean = inl.iter().sum::<f64>() / 500.0;
        let all_mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let above = errs[..500].iter().filter(|&&e| e > all_mean).count();
        let caught = errs[500..].iter().filter(|&&e| e > all_mean).count();
        println!(
            "epochs={epochs:6} lr={lr:4}: inlier p50={:.4} p90={:.4} mean={:.4} | outlier mean={:.4} | mean_all={:.4} -> false={}/500 recall={}/{}",
            inl[250], inl[450], inl_mean, out_mean, all_mean, above, caught, n_out
        );
    }
}
