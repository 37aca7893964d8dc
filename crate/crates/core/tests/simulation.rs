use bursty_pot::distribution::{ml_cdf, MlParams};
use bursty_pot::ks::{ks_one_sample, ks_two_sample};
use bursty_pot::series::{extract_at_order, ExtractOptions};
use bursty_pot::sim::{simulate_mrp, stable_rand, MagnitudeLaw, SimConfig};

#[test]
fn laplace_transform_of_stable_draws() {
    let beta = 0.8;
    let d = stable_rand(beta, 1_000_000, 11).unwrap();
    for s in [0.5f64, 1.0, 2.0] {
        let v: Vec<f64> = d.iter().map(|x| (-s * x).exp()).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let z = (mean - (-s.powf(beta)).exp()) / (var / n).sqrt();
        assert!(z.abs() < 3.0, "s={s}: z={z}");
    }
}

#[test]
fn sums_of_stable_draws_rescale_to_the_same_law() {
    let beta = 0.8;
    let m = 10_000;
    let d = stable_rand(beta, 100 * m, 5).unwrap();
    let scale = 100f64.powf(1.0 / beta);
    let sums: Vec<f64> = d.chunks(100).map(|c| c.iter().sum::<f64>() / scale).collect();
    let fresh = stable_rand(beta, m, 6).unwrap();
    let ks = ks_two_sample(&sums, &fresh).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn waiting_time_tail_slope() {
    let beta = 0.8;
    let series = simulate_mrp(&SimConfig::new(beta, 100_000, 9)).unwrap();
    let mut w = series.waiting_times();
    w.sort_by(|a, b| b.total_cmp(a));
    let n = w.len() as f64;
    // upper decade of exceedance probabilities: 1e-2 down to 1e-3
    let pts: Vec<(f64, f64)> = (100..=1000)
        .map(|i| (w[i - 1].ln(), (i as f64 / n).ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + beta).abs() < 0.1, "{slope}");
}

#[test]
fn gumbel_magnitudes_give_identical_durations() {
    let mut cfg = SimConfig::new(0.7, 5_000, 21);
    let a = simulate_mrp(&cfg).unwrap();
    cfg.magnitude_law = MagnitudeLaw::StandardGumbel;
    let b = simulate_mrp(&cfg).unwrap();
    for k in [10, 50, 200] {
        let da = extract_at_order(&a, k, ExtractOptions::default()).unwrap();
        let db = extract_at_order(&b, k, ExtractOptions::default()).unwrap();
        assert_eq!(da.durations, db.durations);
    }
}

#[test]
fn exceedance_durations_follow_the_limit_law() {
    let (beta, n, k) = (0.8, 10_000usize, 100usize);
    let law = MlParams::new(beta, (n as f64 / k as f64).powf(1.0 / beta)).unwrap();
    let passed = (0..50u64)
        .filter(|i| {
            let s = simulate_mrp(&SimConfig::new(beta, n, 100 + i)).unwrap();
            let ex = extract_at_order(&s, k, ExtractOptions::default()).unwrap();
            assert_eq!(ex.len(), k - 1);
            ks_one_sample(&ex.durations, |t| ml_cdf(t, &law, false).unwrap())
                .unwrap()
                .p_value
                > 0.01
        })
        .count();
    assert!(passed >= 45, "{passed}/50");
}
