use tans::harness::run_experiment;
use tans::output::{write_output, Format};
use tans::spec::ExperimentSpec;

const SPEC: &str = r#"
[signal]
model = "markov_ar1"
alpha0 = 0.2
alpha1 = 0.95
p = 0.02
length = 4000
seed_count = 5

[cost]
rho = { min = 0.5, max = 30.0, count = 4 }
t_up = 30

[[series]]
sampler = { kind = "greedy_markov", m = 4 }
reconstruction = { kind = "glp", m = 4, acf = "conditional" }

[[series]]
sampler = { kind = "adp_markov", m = 4, beta = 0.5, gamma = 0.3, draws = 3, draw_seed = 9 }
reconstruction = { kind = "glp", m = 2, acf = "estimated", window = 400, max_lag = 40 }

[[series]]
sampler = { kind = "uniform", rates = [0.1, 0.25, 0.5] }
reconstruction = { kind = "nclc" }
exclude_sample_times = true

[analytic]
pe = [0.0, 0.1]
"#;

fn render(jobs: usize, format: Format) -> Vec<u8> {
    let spec = ExperimentSpec::from_toml(SPEC).unwrap();
    let out = run_experiment(&spec, Some(jobs)).unwrap();
    let mut buf = Vec::new();
    write_output(&mut buf, &out, format).unwrap();
    buf
}

#[test]
fn identical_bytes_across_runs_and_thread_counts() {
    let a = render(1, Format::Csv);
    assert_eq!(a, render(1, Format::Csv));
    assert_eq!(a, render(3, Format::Csv));
    assert_eq!(render(1, Format::Json), render(2, Format::Json));
}

#[test]
fn seed_changes_results() {
    let mut spec = ExperimentSpec::from_toml(SPEC).unwrap();
    let a = run_experiment(&spec, Some(1)).unwrap();
    spec.signal.override_seed(1000);
    let b = run_experiment(&spec, Some(1)).unwrap();
    assert_ne!(a.points[0].distortion, b.points[0].distortion);
}

#[test]
fn rho_sweep_trades_rate_for_distortion() {
    let spec = ExperimentSpec::from_toml(
        r#"
        [signal]
        model = "markov_ar1"
        alpha0 = 0.7
        alpha1 = 0.97
        p = 0.001
        length = 20000
        seed_count = 6
        [cost]
        rho = [0.5, 2.0, 8.0, 32.0]
        t_up = 50
        [sampler]
        kind = "greedy_markov"
        m = 5
        [reconstruction]
        kind = "glp"
        m = 5
        acf = "conditional"
    "#,
    )
    .unwrap();
    let out = run_experiment(&spec, None).unwrap();
    for w in out.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let slack_r = 3.0 * (a.stderr_rate.powi(2) + b.stderr_rate.powi(2)).sqrt();
        let slack_d = 3.0 * (a.stderr_distortion.powi(2) + b.stderr_distortion.powi(2)).sqrt();
        assert!(b.rate <= a.rate + slack_r, "rate rose from {} to {}", a.rate, b.rate);
        assert!(
            b.distortion + slack_d >= a.distortion,
            "distortion fell from {} to {}",
            a.distortion,
            b.distortion
        );
    }
}
