use super::*;

fn small(text: &str) -> Scenario {
    parse_config(&format!("n_realizations = 3\n{text}")).unwrap()
}

#[test]
fn grouping_ratio_tiles_on_square_array() {
    let expect = [
        (0.01, (10, 10)),
        (0.02, (5, 10)),
        (0.04, (5, 5)),
        (0.1, (2, 5)),
        (0.25, (2, 2)),
        (1.0, (1, 1)),
    ];
    for (ratio, tile) in expect {
        assert_eq!(tile_for_ratio(10, 10, ratio).unwrap(), tile, "ratio {ratio}");
    }
    assert!(tile_for_ratio(10, 10, 0.3).is_err());
    assert!(tile_for_ratio(5, 4, 1.0 / 3.0).is_err());
    assert!(tile_for_ratio(10, 10, 0.0).is_err());
}

#[test]
fn elements_sweep_grows_m_y() {
    let sc = small("sweep_axis = elements\nsweep_values = 10, 40");
    assert_eq!(sc.config_for(40.0).unwrap().m_y, 8);
    assert_eq!(sc.config_for(10.0).unwrap().m_x, 5);
    assert!(parse_config("sweep_axis = elements\nsweep_values = 12").is_err());
}

#[test]
fn invalid_grouping_is_rejected_up_front() {
    let e = parse_config("m_x = 10\nm_y = 10\nsweep_axis = grouping_ratio\nsweep_values = 1/3").unwrap_err();
    assert!(e.to_string().contains("sweep_values"), "{e}");
}

#[test]
fn run_is_sorted_and_deterministic() {
    let sc = small("sweep_axis = snr\nsweep_values = 10, 0");
    let a = run_scenario(&sc).unwrap();
    assert_eq!(a.len(), 2 * 3 * 5);
    assert_eq!(a[0].sweep_value, 0.0);
    assert_eq!(a[0].scheme, Scheme::Iterative);
    assert_eq!(a[4].scheme, Scheme::NoIrs);
    assert_eq!(a[5].realization_index, 1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| run_scenario(&sc)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.rate_bps_hz >= 0.0 && r.mse_empirical.is_none()));
}

#[test]
fn no_irs_ignores_the_surface() {
    let a = run_scenario(&small("schemes = no_irs\nsweep_axis = alpha\nsweep_values = 0.01, 0.2")).unwrap();
    let b = run_scenario(&small("schemes = no_irs\nsweep_axis = elements\nsweep_values = 10, 40")).unwrap();
    for r in 0..3 {
        let rates: Vec<f64> = a
            .iter()
            .chain(&b)
            .filter(|x| x.realization_index == r)
            .map(|x| x.rate_bps_hz)
            .collect();
        assert!(rates.windows(2).all(|w| w[0] == w[1]), "{rates:?}");
    }
}

#[test]
fn estimated_mode_reports_estimation_error() {
    let sc = small("csi_mode = estimated\nsweep_axis = coherence_time\nsweep_values = 300");
    let rows = run_scenario(&sc).unwrap();
    for r in &rows {
        match r.scheme {
            Scheme::NoIrs => assert!(r.mse_empirical.is_none()),
            _ => assert!(r.mse_empirical.unwrap() > 0.0),
        }
    }
    let e = parse_config("csi_mode = estimated\ncoherence_time = 20").unwrap_err();
    assert!(e.to_string().contains("coherence_time"), "{e}");
}

#[test]
fn run_rejects_trace_axis_and_trace_is_monotone() {
    let sc = small("sweep_axis = convergence_trace\nsweep_values = 0, 1, 10");
    assert!(run_scenario(&sc).is_err());
    let rows = run_trace(&sc).unwrap();
    assert!(rows.iter().any(|r| r.init == "random"));
    assert!(rows.iter().any(|r| r.init == "sa10"));
    for w in rows.windows(2) {
        if w[0].sweep_value == w[1].sweep_value && w[0].realization_index == w[1].realization_index {
            assert_eq!(w[1].iteration, w[0].iteration + 1);
            assert!(w[1].rate_bps_hz >= w[0].rate_bps_hz - 1e-9);
        }
    }
}

fn sample_row(i: usize) -> ResultRow {
    ResultRow {
        scenario_id: "s".into(),
        realization_index: i,
        seed: 7,
        sweep_value: 0.1 * i as f64,
        scheme: Scheme::CpmInit,
        csi_mode: CsiMode::Estimated,
        rate_bps_hz: std::f64::consts::PI / (i + 1) as f64,
        iterations: i,
        converged: i.is_multiple_of(2),
        channel_power: 1.0 / 3.0,
        mse_empirical: if i == 0 { None } else { Some(1.234_567_890_123_456e-5) },
    }
}

#[test]
fn csv_shape_and_round_trip() {
    let mut empty = Vec::new();
    write_csv(&[], &mut empty).unwrap();
    assert_eq!(String::from_utf8(empty).unwrap().lines().count(), 1);

    let rows = vec![sample_row(0), sample_row(1)];
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("scenario_id,realization_index,seed,sweep_value,scheme,csi_mode,rate_bps_hz"));

    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for (rec, row) in reader.records().zip(&rows) {
        let rec = rec.unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        assert!((f(3) - row.sweep_value).abs() <= 1e-12 * row.sweep_value.abs());
        assert!((f(6) - row.rate_bps_hz).abs() <= 1e-12 * row.rate_bps_hz);
        assert!((f(9) - row.channel_power).abs() <= 1e-12);
        assert_eq!(&rec[4], "cpm_init");
        assert_eq!(&rec[8], if row.converged { "true" } else { "false" });
        match row.mse_empirical {
            None => assert_eq!(&rec[10], ""),
            Some(m) => assert!((f(10) - m).abs() <= 1e-12 * m),
        }
    }
}

#[test]
fn emit_reports_path_on_failure() {
    let path = std::path::Path::new("/nonexistent-dir/out.csv");
    let e = emit_csv(&[], path).unwrap_err();
    assert!(e.to_string().contains("/nonexistent-dir/out.csv"), "{e}");
}
