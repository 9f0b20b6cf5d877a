use simply_wasm_demo::{device_curves, read_distributions, wer_curve};

#[test]
fn device_curves_cover_range() {
    let c = device_curves().unwrap();
    assert_eq!(c.temperature.len(), 101);
    assert!((c.tmr0[0] - 1.66).abs() < 1e-12 && (c.tmr0[100] - 1.34).abs() < 1e-12);
    assert!(c.delta.windows(2).all(|w| w[1] < w[0]));
    assert!(c.r_l.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn histograms_hold_every_trial() {
    let v = read_distributions(10e3, 0.35, 300.0, 500, 3).unwrap();
    assert_eq!(v.histograms.len(), 4);
    for h in &v.histograms {
        assert_eq!(h.counts.iter().sum::<u32>(), 500);
    }
    assert!(v.v_ref > v.bin_edges[0] && v.v_ref < *v.bin_edges.last().unwrap());
    assert!(v.rm_3sigma < v.rm_nom);
    assert!(read_distributions(10e3, 0.35, 300.0, 50, 3).is_err());
    assert!(read_distributions(10e3, 0.35, 400.0, 500, 3).is_err());
}

#[test]
fn wer_curve_is_monotone_with_target() {
    let c = wer_curve(10e3, 300.0).unwrap();
    assert!(c.wer.windows(2).all(|w| w[1] <= w[0]));
    let v = c.v_set_target.unwrap();
    assert!((v - 0.78).abs() < 0.01);
}
