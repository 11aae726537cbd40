use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::hadronize::{HadronizationSetup, MultiplicityHistogram};
use crate::lattice::{LadderGeometry, PhysicalParams};

fn fm(e: f64, px: f64, py: f64, pz: f64) -> FourMomentum {
    FourMomentum::new(e, px, py, pz)
}

fn event(id: u64, p_q: FourMomentum, p_qbar: FourMomentum) -> PartonEvent {
    PartonEvent {
        event_id: id,
        q: 1,
        qbar: -1,
        p_q,
        p_qbar,
    }
}

fn small_config(n_shots: usize) -> PipelineConfig {
    let params = PhysicalParams::default();
    let g = LadderGeometry::from_blockade_ratio(3, 2.173, 2.0, &params).unwrap();
    PipelineConfig {
        setup: HadronizationSetup::new(g, params),
        n_shots,
        seed: 17,
    }
}

#[test]
fn invariant_mass_examples() {
    assert_eq!(
        invariant_mass(&fm(5., 0., 0., 5.), &fm(5., 0., 0., -5.)).unwrap(),
        10.0
    );
    assert_relative_eq!(
        invariant_mass(&fm(5., 0., 0., 3.), &fm(4., 0., 0., -2.)).unwrap(),
        80f64.sqrt(),
        epsilon = 1e-12
    );
    assert!(invariant_mass(&fm(1., 0., 0., 2.), &fm(1., 0., 0., 0.)).is_err());
    assert!(invariant_mass(&fm(-1., 0., 0., 0.), &fm(1., 0., 0., 0.)).is_err());
}

#[test]
fn boost_examples() {
    let (a, b) = (fm(5., 0., 0., 5.), fm(5., 0., 0., -5.));
    assert_eq!(boost_to_rest_frame(&a, &b).unwrap(), (a, b));

    let (a, b) = (fm(5., 0., 0., 3.), fm(4., 0., 0., -2.));
    let (c, d) = boost_to_rest_frame(&a, &b).unwrap();
    let t = c + d;
    assert!(t.p_sqr().sqrt() < 1e-10);
    assert_relative_eq!(t.e, 80f64.sqrt(), epsilon = 1e-10);
    assert_relative_eq!(c.mass_sqr(), a.mass_sqr(), epsilon = 1e-10);
    assert_relative_eq!(d.mass_sqr(), b.mass_sqr(), epsilon = 1e-10);

    let (e, f) = boost_to_rest_frame(&c, &d).unwrap();
    for (x, y) in [(c, e), (d, f)] {
        let xs: [f64; 4] = x.into();
        let ys: [f64; 4] = y.into();
        for k in 0..4 {
            assert!((xs[k] - ys[k]).abs() < 1e-10);
        }
    }
    assert!(boost_to_rest_frame(&fm(1., 0., 0., 1.), &fm(2., 0., 0., 2.)).is_err());
}

#[test]
fn longitudinal_boost_keeps_invariant_mass() {
    let (a, b) = (fm(5., 1., 0.5, 3.), fm(4., -0.2, 0., -2.));
    let m = invariant_mass(&a, &b).unwrap();
    for bz in [-0.9, -0.3, 0.2, 0.75] {
        let beta = [0.0, 0.0, bz];
        let m2 = invariant_mass(&a.boost(beta), &b.boost(beta)).unwrap();
        assert!((m - m2).abs() < 1e-10);
    }
}

#[test]
fn parse_examples() {
    assert!(parse_events("".as_bytes()).unwrap().events.is_empty());

    let line = r#"{"event_id": 4, "q": 2, "qbar": -2, "p_q": [5,0,0,5], "p_qbar": [5,0,0,-5]}"#;
    let parsed = parse_events(line.as_bytes()).unwrap();
    assert_eq!(parsed.events.len(), 1);
    assert!(parsed.errors.is_empty());
    assert_eq!(parsed.events[0].event_id, 4);
    assert_eq!(parsed.events[0].e_cm().unwrap(), 10.0);

    let text = format!(
        "{line}\n\n{}\nnot json\n{}\n",
        r#"{"event_id": 5, "q": 1, "qbar": -1, "p_q": [1,0,0,3], "p_qbar": [5,0,0,-5]}"#,
        r#"{"event_id": 6, "q": 1, "qbar": -1, "p_q": [5,0,0,5]}"#,
    );
    let parsed = parse_events(text.as_bytes()).unwrap();
    assert_eq!(parsed.events.len(), 1);
    let lines: Vec<usize> = parsed
        .errors
        .iter()
        .map(|e| match e {
            crate::Error::MalformedEvent { line, .. } => *line,
            other => panic!("unexpected {other}"),
        })
        .collect();
    assert_eq!(lines, vec![3, 4, 5]);
    assert!(parsed.errors[0].to_string().contains("below |p|"));
}

#[test]
fn empty_pipeline() {
    let out = run_pipeline(&[], &small_config(4)).unwrap();
    assert!(out.records.is_empty());
    assert_eq!(out.histogram, MultiplicityHistogram::default());
    let mut csv = Vec::new();
    write_histogram_csv(&mut csv, &out.histogram).unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap(),
        "multiplicity,count,frequency\n"
    );
}

#[test]
fn single_event_reruns_identically() {
    let cfg = small_config(1);
    let evs = [event(0, fm(20., 0., 0., 20.), fm(20., 0., 0., -20.))];
    let render = || {
        let out = run_pipeline(&evs, &cfg).unwrap();
        let mut buf = Vec::new();
        write_records_jsonl(&mut buf, &out.records).unwrap();
        buf
    };
    let a = render();
    assert_eq!(a, render());
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 1);
}

#[test]
fn pipeline_isolates_bad_events_and_orders_output() {
    let cfg = small_config(50);
    let evs = [
        event(9, fm(30., 0., 0., 10.), fm(25., 0., 0., -12.)),
        event(2, fm(1., 0., 0., 3.), fm(1., 0., 0., 0.)),
        event(4, fm(40., 0., 0., 40.), fm(40., 0., 0., -40.)),
        event(4, fm(40., 0., 0., 40.), fm(40., 0., 0., -40.)),
    ];
    let out = run_pipeline(&evs, &cfg).unwrap();
    let ids: Vec<u64> = out.failures.iter().map(|f| f.event_id).collect();
    assert_eq!(ids, vec![2, 4]);
    assert_eq!(out.events.len(), 2);
    assert_eq!(out.records.len(), 100);
    let keys: Vec<(u64, u64)> = out
        .records
        .iter()
        .map(|r| (r.event_id, r.shot_id))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys[0], (4, 0));
    let freq: f64 = out.histogram.rows().iter().map(|r| r.2).sum();
    assert!((freq - 1.0).abs() < 1e-12);
    for r in &out.records {
        if r.multiplicity > 0 {
            let e: f64 = r.mesons.iter().map(|m| m.energy_gev).sum();
            assert!((e - r.e_cm).abs() <= 1e-12 * r.e_cm);
        }
    }
    let ev4 = out.events.iter().find(|s| s.event_id == 4).unwrap();
    assert_eq!(ev4.e_cm, 80.0);
}

#[test]
fn pipeline_rejects_invalid_config() {
    let mut cfg = small_config(0);
    assert!(run_pipeline(&[], &cfg).is_err());
    cfg.n_shots = 1;
    cfg.setup.calibration.energy_hi = cfg.setup.calibration.energy_lo;
    assert!(run_pipeline(&[], &cfg).is_err());
}

#[test]
fn pipeline_is_pool_independent() {
    let cfg = small_config(40);
    let evs: Vec<PartonEvent> = (0..6)
        .map(|i| {
            let e = 10.0 + 15.0 * i as f64;
            event(i, fm(e, 0., 0., e), fm(e, 0., 1., -e + 0.5))
        })
        .collect();
    let a = run_pipeline(&evs, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let b = pool.install(|| run_pipeline(&evs, &cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn reference_comparison() {
    let reference = read_reference_histogram("multiplicity,count\n0,1\n1,3\n".as_bytes()).unwrap();
    assert_eq!(reference.get(&1), Some(&0.75));
    let reference2 =
        read_reference_histogram("multiplicity,frequency\n1,0.75\n0,0.25\n".as_bytes()).unwrap();
    assert_eq!(reference, reference2);
    assert!(read_reference_histogram("multiplicity\n1\n".as_bytes()).is_err());

    let mut model = MultiplicityHistogram::default();
    model.add(1);
    model.add(2);
    let cmp = compare_histograms(&model, &reference);
    assert_eq!(
        cmp.rows,
        vec![(0, 0.0, 0.25), (1, 0.5, 0.75), (2, 0.5, 0.0)]
    );
    assert_relative_eq!(cmp.total_variation, 0.5);
    assert_relative_eq!(cmp.reference_mean, 0.75);
    assert_relative_eq!(cmp.model_mean, 1.5);
}

fn momentum() -> impl Strategy<Value = FourMomentum> {
    (0.0f64..5.0, -50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0).prop_map(|(m, px, py, pz)| {
        let e = (m * m + px * px + py * py + pz * pz).sqrt();
        fm(e, px, py, pz)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn boost_zeroes_momentum_and_keeps_masses(a in momentum(), b in momentum()) {
        let m = invariant_mass(&a, &b).unwrap();
        prop_assume!(m > 1e-3);
        let (c, d) = boost_to_rest_frame(&a, &b).unwrap();
        let t = c + d;
        let scale = 1.0f64.max(a.e + b.e);
        prop_assert!(t.p_sqr().sqrt() < 1e-10 * scale);
        prop_assert!((t.e - m).abs() < 1e-10 * scale);
        prop_assert!((invariant_mass(&c, &d).unwrap() - m).abs() < 1e-10 * scale);
    }
}
