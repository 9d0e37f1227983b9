//! Manual probe: distribution of the mixture's Bayes accuracy across center
//! draws. Run with --ignored --nocapture.

use edsvm_harness::simgen;

#[test]
#[ignore]
fn bayes_accuracy_across_center_draws() {
    let mut accs = Vec::new();
    for r in 0..20u64 {
        let spec = simgen::draw_centers(9000 + r);
        let acc = simgen::bayes_accuracy(&spec, 100_000, 40 + r).unwrap();
        accs.push(acc);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let min = accs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("bayes accuracy over 20 draws: mean {mean:.4}, min {min:.4}, max {max:.4}");
    println!("{accs:?}");
}

#[test]
#[ignore]
fn bayes_accuracy_population_mean() {
    let mut accs = Vec::new();
    for r in 0..100u64 {
        let spec = simgen::draw_centers(50_000 + r);
        accs.push(simgen::bayes_accuracy(&spec, 20_000, r).unwrap());
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let sd = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    let near: usize = accs.iter().filter(|&&a| (a - 0.85).abs() <= 0.02).count();
    println!("population: mean {mean:.4} sd {sd:.4}; draws within 0.85±0.02: {near}/100");
}
