use std::io::Cursor;
use std::sync::Arc;

use approx::assert_relative_eq;
use dcs_core::bounds::{
    dcs_sum_demand, mc_energy_feasibility, overmeasuring, p_cs_lower_bound, p_dcs_lower_bound, EnergyDemand,
};
use dcs_core::energy::{allocate_measurements, per_measurement_energy, BatteryState, HarvestModel, RadioModel};
use dcs_core::experiments::{sweep_k_real, sweep_panel_area, ExperimentConfig, Metric, Scheme};
use dcs_core::model::{ingest_sensor_log, Basis, FrameSet, LogField};
use dcs_core::Error;
use nalgebra::DVector;

/// Two motes sampling a slow sinusoid with a shared trend and a small offset.
fn mote_log(samples: usize) -> String {
    let mut log = String::new();
    for t in 0..samples {
        let base = 21.0 + (t as f64 * 0.05).sin();
        for (id, offset) in [(2, 0.0), (3, 0.3)] {
            log.push_str(&format!(
                "2004-02-28 01:{:02}:{:02}.5 {t} {id} {:.4} 38.2 45.1 2.68\n",
                t / 60 % 60,
                t % 60,
                base + offset
            ));
        }
    }
    // malformed lines are skipped, not fatal
    log.push_str("2004-02-28 01:00:00.5 9 2 bad 38.2 45.1 2.68\n");
    log.push_str("truncated line\n");
    log
}

fn log_frames(n: usize) -> FrameSet {
    let text = mote_log(4 * n + 3);
    let report = ingest_sensor_log(Cursor::new(text), &[2, 3], LogField::Temperature).unwrap();
    assert_eq!(report.skipped, 2);
    let series: Vec<_> = report.series.into_values().collect();
    FrameSet::from_series(&series, n).unwrap()
}

#[test]
fn log_to_error_sweep() {
    let frames = Arc::new(log_frames(32));
    assert_eq!(frames.len(), 4);
    assert_eq!(frames.sensor_ids, vec![2, 3]);

    let mut config = ExperimentConfig::frames(frames, 2, 5.0);
    config.trials = 6;
    let r = sweep_panel_area(&config, &[2.0, 200.0]).unwrap();
    let again = sweep_panel_area(&config, &[2.0, 200.0]).unwrap();
    assert_eq!(r, again);
    for s in [Scheme::Cs, Scheme::Dcs] {
        let curve = r.error_curve(s);
        assert!(curve.iter().all(|(_, e, se)| e.is_finite() && *se >= 0.0));
        // 200 cm² collects every sample, leaving only solver round-off
        assert!(curve[1].1 <= 1e-8, "{s:?} {curve:?}");
    }

    let mut csv = Vec::new();
    r.write_csv(&mut csv, Metric::MeanError).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("area_cm2,err_cs,se_cs,err_dcs,se_dcs,trials\n2,"));
}

#[test]
fn sensor_axis_is_limited_to_loaded_sensors() {
    let config = ExperimentConfig::frames(Arc::new(log_frames(16)), 2, 40.0);
    assert!(matches!(sweep_k_real(&config, &[1, 3]), Err(Error::Parameter(_))));
    let mut small = config.clone();
    small.trials = 2;
    let r = sweep_k_real(&small, &[1, 2]).unwrap();
    assert_eq!(r.points.len(), 2);
}

#[test]
fn closed_forms_match_sampling() {
    let (rho, tau) = (0.4, 1.0);
    for (s, n, mu) in [(10.0, 200.0, 60.0), (25.0, 400.0, 140.0)] {
        let demand = overmeasuring(s, n) * tau;
        let exact = p_cs_lower_bound(mu, rho, s, n, tau);
        let mc = mc_energy_feasibility(
            EnergyDemand::PerSensor {
                sensors: 2,
                per_sensor: demand,
            },
            mu,
            rho,
            200_000,
            3,
        )
        .unwrap();
        assert!((mc.probability - exact).abs() <= 4.0 * mc.std_error + 1e-12, "{exact} {mc:?}");

        let (sc, si) = (s * 0.7, s * 0.3);
        let exact = p_dcs_lower_bound(mu, rho, sc, si, n, tau);
        let mc = mc_energy_feasibility(
            EnergyDemand::Sum {
                sensors: 2,
                total: dcs_sum_demand(sc, si, n) * tau,
            },
            mu,
            rho,
            200_000,
            4,
        )
        .unwrap();
        assert!((mc.probability - exact).abs() <= 4.0 * mc.std_error + 1e-12, "{exact} {mc:?}");
    }
}

#[test]
fn slot_accounting_respects_the_budget() {
    let radio = RadioModel::default();
    let tau = per_measurement_energy(&radio).unwrap();
    assert_relative_eq!(tau, 62.64e-3 * 16.0 / 250e3, max_relative = 1e-12);

    let harvest = HarvestModel::panel(40.0, 5e-6, 15e-6, 2.0).unwrap();
    let mut battery = BatteryState::new(f64::INFINITY).unwrap();
    let mut spent = 0.0;
    for seed in 0..20 {
        let energy = dcs_core::energy::draw_harvest(&harvest, seed).unwrap();
        assert!(energy >= harvest.min_energy() && energy <= harvest.max_energy());
        let budget = battery.update_budget(energy, spent).unwrap();
        let m = allocate_measurements(budget, tau, 512);
        spent = m as f64 * tau;
        assert!(spent <= budget + 1e-15);
    }
}

#[test]
fn dct_round_trip() {
    let basis = Basis::dct(64);
    let f = DVector::from_fn(64, |i, _| (i as f64 * 0.3).cos() + 0.01 * i as f64);
    let back = basis.synthesize(&basis.analyze(&f).unwrap()).unwrap();
    assert_relative_eq!(back, f, epsilon = 1e-12);
}
