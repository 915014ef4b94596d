use crate::config::Resolved;
use crate::CliError;
use gslab::counting::{
    counts_csv, fringe_csv, fringe_scan, fringe_visibility, parity_expectation, PreparedProtocol, FRINGE_POINTS,
};
use gslab::graphs::{cluster6_state, ghz6_state, named_graph, Graph, NamedGraph};
use gslab::optics::fock::{higher_order_coincidences_for, off_ghz_weight};
use gslab::optics::{build_setup, four_photon_fusion, NoiseModel};
use gslab::qalgebra::MixedState;
use gslab::witness::{noise_threshold, parity, white_noise_value, LocalObservable, WitnessKind, WitnessPlan};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;

/// Summary printed to stdout plus files for the output directory.
pub struct Output {
    pub summary: Value,
    pub files: Vec<(String, String)>,
}

impl Output {
    fn new(summary: Value) -> Self {
        Self { summary, files: Vec::new() }
    }

    fn file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// Real and imaginary parts, row-major.
fn density_json(rho: &MixedState) -> Value {
    let m = rho.matrix();
    let rows = |imag: bool| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| if imag { m[(i, j)].im } else { m[(i, j)].re }).collect())
            .collect()
    };
    json!({"schema": 1, "dim": m.nrows(), "re": rows(false), "im": rows(true)})
}

pub fn build(r: &Resolved, with_density: bool) -> Result<Output, CliError> {
    let out = build_setup(&r.setup, &r.noise)?;
    let f_ghz = out.state.fidelity_with(&ghz6_state())?;
    let f_cluster = out.state.fidelity_with(&cluster6_state())?;
    let target = match r.preset {
        gslab::optics::Preset::Ghz6 => f_ghz,
        gslab::optics::Preset::Cluster6 => f_cluster,
    };
    let mut summary = json!({
        "schema": 1,
        "command": "build",
        "preset": r.preset,
        "setup": to_json(&r.setup),
        "noise": to_json(&r.noise),
        "success_probability": out.success_probability,
        "fidelity": target,
        "fidelity_ghz6": f_ghz,
        "fidelity_cluster6": f_cluster,
    });
    let mut output = Output::new(Value::Null);
    if r.noise.pair_amplitude > 0.0 {
        let dist = higher_order_coincidences_for(&r.setup, r.noise.pair_amplitude)?;
        summary["higher_order"] = json!({
            "lambda": r.noise.pair_amplitude,
            "off_ghz_weight": off_ghz_weight(&dist),
        });
        let mut csv = String::from("outcome_bits,probability\n");
        for (b, p) in dist.iter().enumerate() {
            let _ = writeln!(csv, "{b:06b},{p:.15e}");
        }
        output = output.file("hv_distribution.csv", csv);
    }
    if with_density {
        output = output.file("density_matrix.json", pretty(&density_json(&out.state)));
    }
    output.summary = summary.clone();
    Ok(output.file("build.json", pretty(&summary)))
}

/// Where the witness is evaluated.
pub enum StateSource {
    Setup,
    /// `p·target + (1 − p)·I/64` with the plan's own target.
    WhiteNoise(f64),
}

pub struct WitnessArgs {
    pub kind: WitnessKind,
    pub source: StateSource,
    pub events: u64,
    pub seed: u64,
    pub analytic: bool,
}

fn sanitize(label: &str) -> String {
    label.chars().filter(|c| c.is_ascii_alphanumeric() || *c == '-').collect()
}

fn has_z(locals: &[LocalObservable]) -> bool {
    locals.contains(&LocalObservable::Z)
}

pub fn witness(r: &Resolved, a: &WitnessArgs) -> Result<Output, CliError> {
    let plan = a.kind.plan();
    let rho = match a.source {
        StateSource::Setup => build_setup(&r.setup, &r.noise)?.state,
        StateSource::WhiteNoise(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("--white-noise {p} is outside [0, 1]")));
            }
            MixedState::white_noise_mixture(&plan.target_state().to_density(), p)
        }
    };
    let protocol = PreparedProtocol::new(&rho, &plan)?;
    if a.analytic {
        let report = protocol.analytic()?;
        let summary = json!({"schema": 1, "command": "witness", "mode": "analytic", "report": to_json(&report)});
        let mut csv = String::from("setting_label,outcome_bits,probability\n");
        for (t, dist) in plan.terms().iter().zip(protocol.distributions()) {
            for (b, p) in dist.iter().enumerate() {
                let _ = writeln!(csv, "{},{b:06b},{p:.15e}", t.setting.label());
            }
        }
        return Ok(Output::new(summary.clone())
            .file("report.json", pretty(&to_json(&report)))
            .file("probabilities.csv", csv));
    }

    let run = protocol.sample(a.events, a.seed)?;
    let summary = json!({
        "schema": 1,
        "command": "witness",
        "mode": "sampled",
        "events_per_setting": a.events,
        "seed": a.seed,
        "report": to_json(&run.report),
    });
    let mut output = Output::new(summary)
        .file("report.json", pretty(&to_json(&run.report)))
        .file("counts.csv", counts_csv(&run.records));

    // bar chart of full six-photon parities, one bar per setting
    let all: Vec<usize> = (1..=6).collect();
    let signs: Vec<i8> = (0..64).map(|b| parity(b, &all) as i8).collect();
    let mut bars = String::from("setting_label,parity_mean,parity_stderr\n");
    for rec in &run.records {
        let e = parity_expectation(rec, &signs)?;
        let _ = writeln!(bars, "{},{:.12},{:.12}", rec.setting.label(), e.mean, e.stderr);
    }
    output = output.file("plot_parities.csv", bars);

    // histograms with the exact expectation next to each count
    for ((t, rec), dist) in plan.terms().iter().zip(&run.records).zip(protocol.distributions()) {
        if !has_z(t.setting.locals()) {
            continue;
        }
        let mut h = String::from("outcome_bits,count,expected\n");
        for (b, (&c, &p)) in rec.counts.iter().zip(dist).enumerate() {
            let _ = writeln!(h, "{b:06b},{c},{:.12}", p * a.events as f64);
        }
        output = output.file(&format!("plot_histogram_{}.csv", sanitize(t.setting.label())), h);
    }
    Ok(output)
}

pub fn scan(kind: WitnessKind, grid: &[f64]) -> Result<Output, CliError> {
    if let Some(p) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Usage(format!("grid point {p} is outside [0, 1]")));
    }
    let plan: WitnessPlan = kind.plan();
    let target = plan.target_state().to_density();
    let threshold = noise_threshold(&plan, &target)?;
    let mut csv = String::from("p,value\n");
    let mut points = Vec::new();
    for &p in grid {
        let v = white_noise_value(&plan, &target, p)?;
        let _ = writeln!(csv, "{p:.12},{v:.12}");
        points.push(json!({"p": p, "value": v}));
    }
    let summary = json!({
        "schema": 1,
        "command": "scan",
        "witness": kind,
        "threshold": threshold,
        "points": points,
    });
    Ok(Output::new(summary.clone()).file("scan.json", pretty(&summary)).file("scan.csv", csv))
}

pub fn fringe(noise: &NoiseModel, overlap: f64, points: usize) -> Result<Output, CliError> {
    let rho = four_photon_fusion(noise, overlap)?.state;
    let f = fringe_scan(&rho, points)?;
    let summary = json!({
        "schema": 1,
        "command": "fringe",
        "overlap": overlap,
        "points": points,
        "visibility": fringe_visibility(&f),
    });
    Ok(Output::new(summary.clone()).file("fringe.json", pretty(&summary)).file("fringe.csv", fringe_csv(&f)))
}

pub const DEFAULT_FRINGE_POINTS: usize = FRINGE_POINTS;

pub fn graphs_list() -> Output {
    let list: Vec<Value> = NamedGraph::ALL
        .iter()
        .map(|&g| json!({"name": g.as_str(), "graph": to_json(&named_graph(g))}))
        .collect();
    Output::new(json!({"schema": 1, "command": "graphs", "graphs": list}))
}

pub fn graphs_export(name: &str) -> Result<Output, CliError> {
    let g: Graph = gslab::graphs::named_graph_by_str(name)?;
    let v = to_json(&g);
    Ok(Output::new(v.clone()).file(&format!("{name}.json"), pretty(&v)))
}
