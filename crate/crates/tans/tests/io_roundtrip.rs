use tans::harness::generate;
use tans::spec::{ExperimentSpec, Model};
use tans::trace_io::{read_trace, recon_rows, trace_rows, write_csv};
use tans_core::signals::{Ar1Params, BinaryHmmParams, MarkovAr1Params};

fn round_trip(model: Model, seed: u64) {
    let trace = generate(&model, 500, seed).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &trace_rows(&trace)).unwrap();
    let back = read_trace(buf.as_slice(), seed).unwrap();
    assert_eq!(back, trace);
}

#[test]
fn traces_survive_csv() {
    for seed in 0..5 {
        round_trip(Model::Ar1(Ar1Params::new(0.9).unwrap()), seed);
        round_trip(
            Model::MarkovAr1(MarkovAr1Params::symmetric(0.3, 0.95, 0.05).unwrap()),
            seed,
        );
        round_trip(Model::BinaryHmm(BinaryHmmParams::new(0.1, 0.01).unwrap()), seed);
    }
}

#[test]
fn ar1_traces_leave_hidden_state_blank() {
    let trace = generate(&Model::Ar1(Ar1Params::new(0.5).unwrap()), 3, 1).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &trace_rows(&trace)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(','), "{line}");
    }
}

#[test]
fn recon_rows_report_absolute_error() {
    let rows = recon_rows(&[1.0, -2.0], &[0.5, -1.0]);
    assert_eq!(rows[0].abs_err, 0.5);
    assert_eq!(rows[1].abs_err, 1.0);
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("t,truth,recon,abs_err\n0,1.0,0.5,0.5\n"));
}

#[test]
fn shipped_figure_specs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../figs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentSpec::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6, "expected fig4..fig9 specs, found {n}");
}

#[test]
fn spec_round_trips_through_toml() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../figs/fig6.toml")).unwrap();
    let spec = ExperimentSpec::from_toml(&text).unwrap();
    let again = ExperimentSpec::from_toml(&toml::to_string(&spec).unwrap()).unwrap();
    assert_eq!(
        serde_json::to_value(&spec).unwrap(),
        serde_json::to_value(&again).unwrap()
    );
}
