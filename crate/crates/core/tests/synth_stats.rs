mod common;

use common::*;
use kdetrack::{generate, load_dataset, save_dataset, GeneratorConfig};

#[test]
fn mean_increments_are_uniform() {
    let mut steps = Vec::new();
    for seed in 0..1000 {
        let cfg = GeneratorConfig::with_seed(seed);
        let d = generate(&cfg).unwrap();
        let mut prev = cfg.mu0;
        for b in &d.batches {
            let mu = b.true_params().unwrap().mu();
            steps.push(mu - prev);
            prev = mu;
        }
    }
    let n = steps.len();
    let d = ks_statistic(steps, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
    assert!(d < ks_critical_1pct(n), "D = {d}, n = {n}");
}

#[test]
fn standardized_samples_are_standard_normal() {
    let mut z = Vec::new();
    for seed in 0..200 {
        let d = generate(&GeneratorConfig::with_seed(seed)).unwrap();
        for b in &d.batches {
            let p = b.true_params().unwrap();
            z.extend(b.values().iter().map(|x| (x - p.mu()) / p.sigma()));
        }
    }
    let n = z.len();
    let d = ks_statistic(z, standard_normal_cdf);
    assert!(d < ks_critical_1pct(n), "D = {d}, n = {n}");
}

#[test]
fn batch_sizes_cover_range() {
    let mut seen = [0usize; 21];
    for seed in 0..50 {
        for b in generate(&GeneratorConfig::with_seed(seed)).unwrap().batches {
            seen[b.len()] += 1;
        }
    }
    assert!(seen[..3].iter().all(|&c| c == 0));
    assert!(seen[3..].iter().all(|&c| c > 0));
}

#[test]
fn file_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let d = generate(&GeneratorConfig::with_seed(5)).unwrap();
    save_dataset(&d, &path).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(d, back);
    let bytes = std::fs::read(&path).unwrap();
    save_dataset(&back, &path).unwrap();
    assert_eq!(bytes, std::fs::read(&path).unwrap());
}

#[test]
fn malformed_line_reports_position_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let cfg = GeneratorConfig {
        num_batches: 3,
        ..GeneratorConfig::with_seed(1)
    };
    save_dataset(&generate(&cfg).unwrap(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    lines[2] = lines[2].replace("\"true_gamma\"", "\"gamma\"");
    std::fs::write(&path, lines.join("\n")).unwrap();
    let msg = load_dataset(&path).unwrap_err().to_string();
    assert!(msg.contains(":3:"), "{msg}");
    assert!(msg.contains("true_gamma"), "{msg}");
}
