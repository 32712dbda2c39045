// Dev probe: per-cluster error distributions on one synthetic run.
use std::collections::HashSet;
use windcast::outlier::{autoencoder_fit, kmeans_fit, FilterConfig};
use windcast::scada::FeatureRange;
use windcast::synth::{generate, OutlierKind, SynthConfig, TurbineSpec};

fn pct(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() { return f64::NAN; }
    sorted[(q * (sorted.len() - 1) as f64).round() as usize]
}

fn main() {
    let sc = SynthConfig {
        n_records: 4000,
        outlier_rate: 0.05,
        outlier_kind: OutlierKind::Random,
        seed: std::env::var("SEED").map(|v| v.parse().unwrap()).unwrap_or(0),
        ..SynthConfig::default()
    };
    let (series, labels) = generate(&TurbineSpec::default(), &sc).unwrap();
    let labelset: HashSet<usize> = labels.iter().copied().collect();
    let fc = FilterConfig::default();

    let speeds: Vec<f64> = series.records().iter().map(|r| r.wind_speed).collect();
    let powers: Vec<f64> = series.records().iter().map(|r| r.power).collect();
    let sr = FeatureRange::from_values("u", &speeds).unwrap();
    let pr = FeatureRange::from_values("p", &powers).unwrap();
    let points: Vec<[f64; 2]> = speeds.iter().zip(&powers)
        .map(|(&u, &p)| [sr.normalize_one(u), pr.normalize_one(p)]).collect();
    let clustering = kmeans_fit(&points, fc.k, fc.seed, 100).unwrap();

    for c in 0..fc.k {
        let rows_idx: Vec<usize> = (0..points.len()).filter(|&i| clustering.assignments[i] == c).collect();
        if rows_idx.len() < 10 { continue; }
        let mut lo = [f64::MAX; 2]; let mut hi = [f64::MIN; 2];
        for &i in &rows_idx { for d in 0..2 { lo[d] = lo[d].min(points[i][d]); hi[d] = hi[d].max(points[i][d]); } }
        let span = [hi[0]-lo[0], hi[1]-lo[1]];
        let to_local = |p: [f64;2]| -> Vec<f64> {
            (0..2).map(|d| if span[d] > 1e-12 { 0.35 + 0.3*(p[d]-lo[d])/span[d] } else { 0.5 }).collect()
        };
        let rows: Vec<Vec<f64>> = rows_idx.iter().map(|&i| to_local(points[i])).collect();
        let model = autoencoder_fit(&rows, 1, 2000, 0.5, 42).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| {
            let rec = model.reconstruct(r);
            let sq: f64 = (0..2).map(|d| { let e = (rec[d]-r[d])*span[d]/0.3; e*e }).sum::<f64>()/2.0;
            sq.sqrt()
        }).collect();
        let mut inl: Vec<f64> = rows_idx.iter().zip(&errs).filter(|(i, _)| !labelset.contains(i)).map(|(_, &e)| e).collect();
        let mut out: Vec<f64> = rows_idx.iter().zip(&errs).filter(|(i, _)| labelset.contains(i)).map(|(_, &e)| e).collect();
        inl.sort_by(|a,b| a.partial_cmp(b).unwrap());
        out.sort_by(|a,b| a.partial_cmp(b).unwrap());
        let mean_all = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        let above = inl.iter().filter(|&&e| e > mean_all).count();
        let caught = out.iter().filter(|&&e| e > mean_all).count();
        println!(
            "c{:2} n={:4} out={:3} | span=[{:.2},{:.2}] inl p50={:.4} p90={:.4} | out p50={:.4} | thr={:.4} -> false {:.2} recall {:.2}",
            c, rows_idx.len(), out.len(), span[0], span[1],
            pct(&inl, 0.5), pct(&inl, 0.9),
            if out.is_empty() { f64::NAN } else { pct(&out, 0.5) },
            mean_all,
            above as f64 / inl.len().max(1) as f64,
            if out.is_empty() { f64::NAN } else { caught as f64 / out.len() as f64 }
        );
    }
}
