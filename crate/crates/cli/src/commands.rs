use serde_json::{json, Map, Value};

use decay_core::amplitude::{
    amplitude_volterra_with, memory_kernel, survival, Engine, KernelForm, MemoryKernel, VolterraOptions,
};
use decay_core::asymptotics::{asymptotic_coefficients, lifetime, power_transition_time, time_scales, zeno_time};
use decay_core::params::{hydrogen_params, PhysicalConstants};
use decay_core::pole::{find_pole, perturbative_pole, PoleOrder};
use decay_core::selfenergy::{sigma2, Sheet};
use decay_core::vanhove::{sweep, Fitted};
use decay_core::Complex64;

use crate::config::{config_err, Format, ModelSource, RunConfig};
use crate::output::{document, emit, json_text, num, sci, Table};
use crate::CliError;

/// Quoted hydrogen values: (name, value).
const QUOTED: &[(&str, f64)] = &[
    ("lambda", 0.802e-4),
    ("cutoff", 8.498e18),
    ("omega0", 1.550e16),
    ("tau_Z", 3.593e-15),
    ("gamma", 6.268e8),
    ("tau_E", 1.595e-9),
    // 0.5 lambda^2 cutoff with the quoted lambda and cutoff
    ("delta_E", 0.5 * 0.802e-4 * 0.802e-4 * 8.498e18),
];

fn model_fields(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    let (name, extra) = match &cfg.source {
        ModelSource::Hydrogen => ("hydrogen", Value::Null),
        ModelSource::Generic { family, eta } => ("generic", json!({ "family": family, "eta": num(*eta) })),
        ModelSource::Table(p) => ("table", json!({ "path": p.display().to_string() })),
    };
    m.insert("model".into(), Value::from(name));
    if !extra.is_null() {
        m.insert("density".into(), extra);
    }
    m.insert("lambda".into(), num(cfg.params.lambda));
    m.insert("cutoff_rad_s".into(), num(cfg.params.cutoff));
    m.insert("omega0_rad_s".into(), num(cfg.params.omega0));
    m
}

/// Table as CSV, or wrapped in a JSON document under `rows`.
fn emit_table(cfg: &RunConfig, command: &str, table: &Table, mut fields: Map<String, Value>) -> Result<(), CliError> {
    let text = match cfg.format {
        Format::Csv => table.csv(),
        Format::Json => {
            fields.insert("rows".into(), table.json_rows());
            json_text(&document(command, fields))
        }
    };
    emit(cfg.out.as_deref(), &text)
}

/// Key/value record as two-column CSV or a flat JSON document.
fn emit_record(cfg: &RunConfig, command: &str, record: Vec<(&str, f64)>) -> Result<(), CliError> {
    let text = match cfg.format {
        Format::Csv => {
            let mut t = Table::new(&["key", "value"]);
            for (k, v) in &record {
                t.push(vec![k.to_string(), sci(*v)]);
            }
            t.csv()
        }
        Format::Json => {
            let mut fields = model_fields(cfg);
            for (k, v) in record {
                fields.insert(k.into(), num(v));
            }
            json_text(&document(command, fields))
        }
    };
    emit(cfg.out.as_deref(), &text)
}

pub fn constants(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let sd = &cfg.sd;
    let tau_z = zeno_time(p, sd)?;
    let tau_e = lifetime(p, sd)?;
    let w0 = p.omega0_internal();
    // level shift as lambda^2 P int d(w) / (w - w0)
    let shift = -p.lambda2() * sd.delta_at(w0)?.delta;
    let rows: [(&str, f64, &str, f64); 7] = [
        ("lambda", p.lambda, "", p.lambda),
        ("cutoff", p.cutoff, "rad/s", p.cutoff_internal()),
        ("omega0", p.omega0, "rad/s", w0),
        ("tau_Z", p.from_internal(tau_z), "s", tau_z),
        ("gamma", p.rate_si(1.0 / tau_e), "1/s", 1.0 / tau_e),
        ("tau_E", p.from_internal(tau_e), "s", tau_e),
        ("delta_E", p.energy_si(shift), "rad/s", shift),
    ];
    let quoted = matches!(cfg.source, ModelSource::Hydrogen) && *p == hydrogen_params(PhysicalConstants::CODATA);
    let mut table = Table::new(&["name", "value_si", "unit", "value_internal", "paper", "reldiff"]);
    for (name, si, unit, internal) in rows {
        let (paper, rel) = match QUOTED.iter().find(|q| quoted && q.0 == name) {
            Some(&(_, v)) => (sci(v), sci((si / v - 1.0).abs())),
            None => (String::new(), String::new()),
        };
        table.push(vec![name.into(), sci(si), unit.into(), sci(internal), paper, rel]);
    }
    emit_table(cfg, "constants", &table, model_fields(cfg))
}

pub struct EnergyRange {
    pub emin: f64,
    pub emax: f64,
    pub count: usize,
    pub imag: f64,
    pub sheet: Sheet,
}

pub fn selfenergy(cfg: &RunConfig, r: &EnergyRange) -> Result<(), CliError> {
    if r.count < 1 || (r.count > 1 && !(r.emax > r.emin)) {
        return Err(config_err("energy range needs emax > emin and ecount >= 1"));
    }
    let step = if r.count > 1 { (r.emax - r.emin) / (r.count - 1) as f64 } else { 0.0 };
    let mut table = Table::new(&["e_internal", "e_imag", "re_sigma", "im_sigma"]);
    for i in 0..r.count {
        let e = r.emin + step * i as f64;
        let v = sigma2(&cfg.sd, Complex64::new(e, r.imag), r.sheet)?.value;
        table.push(vec![sci(e), sci(r.imag), sci(v.re), sci(v.im)]);
    }
    let mut fields = model_fields(cfg);
    fields.insert("sheet".into(), Value::from(if r.sheet == Sheet::First { "first" } else { "second" }));
    emit_table(cfg, "selfenergy", &table, fields)
}

pub fn pole(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let d = find_pole(p, &cfg.sd)?;
    let e2 = perturbative_pole(p, &cfg.sd, PoleOrder::Second)?;
    let (z_mag, _) = d.residue_phase();
    emit_record(
        cfg,
        "pole",
        vec![
            ("re_e_pole", d.e_pole.re),
            ("im_e_pole", d.e_pole.im),
            ("delta_e", d.delta_e),
            ("delta_e_si", p.energy_si(d.delta_e)),
            ("gamma", d.gamma),
            ("gamma_si", p.rate_si(d.gamma)),
            ("gamma_second_order_si", p.rate_si(-2.0 * e2.im)),
            ("re_residue", d.residue.re),
            ("im_residue", d.residue.im),
            ("z_mag", z_mag),
            ("zeta", d.zeta),
            ("iterations", d.iterations as f64),
            ("tolerance", d.tolerance_achieved),
        ],
    )
}

pub fn survival_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.time_grid()?;
    let s = match (cfg.engine, cfg.step) {
        (Engine::Volterra, Some(step)) => {
            let opts = VolterraOptions {
                step: Some(step),
                ..VolterraOptions::default()
            };
            amplitude_volterra_with(&cfg.params, &memory_kernel(&cfg.params, &cfg.sd), &grid, opts)?
        }
        (_, Some(_)) => return Err(config_err("--step applies to the volterra engine")),
        (engine, None) => survival(&cfg.params, &cfg.sd, &grid, engine)?,
    };
    let mut table = Table::new(&["t_internal", "t_seconds", "re_A", "im_A", "P", "err"]);
    for (i, &t) in grid.points().iter().enumerate() {
        let a = s.amplitude[i];
        table.push(vec![
            sci(t),
            sci(cfg.params.from_internal(t)),
            sci(a.re),
            sci(a.im),
            sci(s.probability[i]),
            sci(s.err_estimate[i]),
        ]);
    }
    let mut fields = model_fields(cfg);
    fields.insert("engine".into(), Value::from(s.engine.name()));
    emit_table(cfg, "survival", &table, fields)
}

pub fn asymptotics(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let c = asymptotic_coefficients(p, &cfg.sd)?;
    let tr = power_transition_time(&c)?;
    let ts = time_scales(p, &cfg.sd)?;
    emit_record(
        cfg,
        "asymptotics",
        vec![
            ("eta", c.eta),
            ("z_mag", c.z_mag),
            ("zeta", c.zeta),
            ("c_mag", c.c_mag),
            ("c_arg", c.c_arg),
            ("delta_e", c.delta_e),
            ("gamma", c.gamma),
            ("e_a", c.e_a),
            ("tau_z", ts.tau_z.internal),
            ("tau_z_seconds", ts.tau_z.seconds),
            ("tau_e", ts.tau_e.internal),
            ("tau_e_seconds", ts.tau_e.seconds),
            ("tau_pow", ts.tau_pow.internal),
            ("tau_pow_seconds", ts.tau_pow.seconds),
            ("tau_pow_over_tau_e", tr.x),
            ("tau_pow_over_tau_e_printed", tr.x_printed),
            ("tau_pow_over_tau_e_leading", tr.x_leading),
            ("tau_z_tilde", ts.rescaled.tau_z),
            ("tau_e_tilde", ts.rescaled.tau_e),
            ("tau_pow_tilde", ts.rescaled.tau_pow),
        ],
    )
}

fn fitted(f: &Option<Fitted>) -> Value {
    match f {
        Some(f) => json!({ "value": num(f.value), "std_err": num(f.std_err) }),
        None => Value::Null,
    }
}

pub fn vanhove_sweep(cfg: &RunConfig, lambdas: &[f64], summary: Option<&std::path::Path>) -> Result<(), CliError> {
    let report = sweep(&cfg.params, &cfg.sd, lambdas)?;
    let mut table = Table::new(&["lambda", "tau_z_tilde", "tau_e_tilde", "tau_pow_tilde", "tau_pow_ratio", "deviation"]);
    for r in &report.rows {
        if let Some(e) = &r.error {
            eprintln!("lambda {}: {e}", r.lambda);
        }
        table.push(vec![
            sci(r.lambda),
            sci(r.tau_z_tilde),
            sci(r.tau_e_tilde),
            sci(r.tau_pow_tilde),
            sci(r.tau_pow_ratio),
            sci(r.deviation),
        ]);
    }
    let mut fields = model_fields(cfg);
    fields.remove("lambda");
    fields.insert("eta".into(), num(report.eta));
    fields.insert("tau_z_exponent".into(), fitted(&report.tau_z_exponent));
    fields.insert("tau_pow_coefficient".into(), fitted(&report.tau_pow_coefficient));
    fields.insert("deviation_order".into(), fitted(&report.deviation_order));
    fields.insert("oscillation_exponent".into(), fitted(&report.oscillation_exponent));
    let monotone = report.rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    fields.insert("deviation_monotone".into(), Value::from(monotone));
    if let Some(path) = summary {
        emit(Some(path), &json_text(&document("vanhove-sweep", fields.clone())))?;
    }
    emit_table(cfg, "vanhove-sweep", &table, fields)
}

pub fn kernel_compare(cfg: &RunConfig, markovian: bool) -> Result<(), CliError> {
    let p = &cfg.params;
    let grid = cfg.time_grid()?;
    let tau = lifetime(p, &cfg.sd)?;
    let (kernel, opts) = if markovian {
        let k = MemoryKernel::vanhove_constant(p, &cfg.sd)?;
        let opts = VolterraOptions {
            step: Some(cfg.step.unwrap_or(tau / 1e4)),
            discretize_markovian: true,
        };
        (k, opts)
    } else {
        let opts = VolterraOptions {
            step: cfg.step,
            ..VolterraOptions::default()
        };
        (memory_kernel(p, &cfg.sd), opts)
    };
    let s = amplitude_volterra_with(p, &kernel, &grid, opts)?;
    let mut table = Table::new(&["t_internal", "t_seconds", "P_kernel", "P_exponential", "diff"]);
    for (i, &t) in grid.points().iter().enumerate() {
        let e = (-t / tau).exp();
        let pk = s.probability[i];
        table.push(vec![sci(t), sci(p.from_internal(t)), sci(pk), sci(e), sci(pk - e)]);
    }
    let mut fields = model_fields(cfg);
    let form = match kernel.form {
        KernelForm::Markovian { .. } => "markovian",
        KernelForm::Dispersive => "dispersive",
    };
    fields.insert("kernel".into(), Value::from(form));
    emit_table(cfg, "kernel-compare", &table, fields)
}
