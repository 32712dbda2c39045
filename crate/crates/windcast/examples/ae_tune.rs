// Dev probe: filter behavior across AE training regimes.
use windcast::outlier::{filter_outliers, FilterConfig};
use windcast::synth::{generate, OutlierKind, SynthConfig, TurbineSpec};

fn main() {
    for (epochs, lr) in [(500usize, 0.05f64), (1000, 0.2)] {
        let mut recalls = vec![];
        let mut falses = vec![];
        let mut max_cluster_frac: f64 = 0.0;
        let mut second_ratio = vec![];
        for seed in 0..12u64 {
            let sc = SynthConfig {
                n_records: 4000,
                outlier_rate: 0.05,
                outlier_kind: OutlierKind::Random,
                noise_std_frac: std::env::var("NOISE").map(|v| v.parse().unwrap()).unwrap_or(0.01),
                seed,
                ..SynthConfig::default()
            };
            let (series, labels) = generate(&TurbineSpec::default(), &sc).unwrap();
            let fc = FilterConfig { epochs, learning_rate: lr, seed: seed * 7 + 1, ..FilterConfig::default() };
            match filter_outliers(&series, &fc) {
                Err(e) => { println!("epochs={epochs} lr={lr} seed={seed}: ERROR {e}"); continue; }
                Ok((kept, report)) => {
                    let removed: std::collections::HashSet<usize> = report.removed_indices.iter().copied().collect();
                    let caught = labels.iter().filter(|i| removed.contains(i)).count();
                    let recall = caught as f64 / labels.len() as f64;
                    let fr = (removed.len() - caught) as f64 / (series.len() - labels.len()) as f64;
                    recalls.push(recall);
                    falses.push(fr);
                    for c in &report.clusters {
                        if !c.passed_through {
                            max_cluster_frac = max_cluster_frac.max(c.removed as f64 / c.size as f64);
                        }
                    }
                    if let Ok((_, second)) = filter_outliers(&kept, &fc) {
                        second_ratio.push(second.removed_count() as f64 / report.removed_count().max(1) as f64);
                    } else {
                        second_ratio.push(f64::NAN);
                    }
                }
            }
        }
        println!(
            "epochs={epochs:5} lr={lr:4}: recall={recalls:.3?} false={falses:.3?} max_cluster_frac={max_cluster_frac:.3} second/first={second_ratio:.3?}"
        );
    }
}
