//! Command-line front end: reproducible experiment runs, CSV outputs and a
//! checksummed run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use a2line::{
    build_chain, cumulative_coupling, emission_curve, end_to_end_ratio, fit_power_law,
    interpolation_samples, map_circuit, normal_modes, sweep_delta, CircuitParams, CouplingKind,
    Error, LatticeConfig, Result, DEFAULT_FIT_WINDOW, PAPER_LAW_COEFFICIENT, PAPER_LAW_EXPONENT,
};

const OUTPUT_ENV: &str = "A2LINE_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "a2line",
    version,
    about = "Diamagnetic (A²) renormalization of a waveguide-coupled qubit's Ohmic spectral function"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $A2LINE_OUTPUT_DIR or ./out).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Comma-separated mode counts, e.g. 40,80,160,320.
    #[arg(long, global = true)]
    modes: Option<String>,
    /// Comma-separated diamagnetic weights, e.g. 0,0.05,0.1,0.2,0.5,1,2.
    #[arg(long, global = true)]
    deltas: Option<String>,
    /// Single diamagnetic weight (dispersion/spectral convenience).
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Coupling kind: cq (capacitive) or fq (inductive).
    #[arg(long, global = true)]
    coupling: Option<String>,
    /// Waveguide length in units of the qubit wavelength λ₀ (default 10).
    #[arg(long, global = true)]
    length: Option<f64>,
    /// Power-law fit window "lo,hi" (default 0.2,2.0).
    #[arg(long, global = true)]
    fit_window: Option<String>,
    /// Parameter preset: fig2, fig3 or fig4b.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    /// Decoupling law for emission curves: paper (6.77, 2.57) or self (own sweep).
    #[arg(long, global = true)]
    law: Option<LawChoice>,
    /// Qubit capacitance C_J in farads.
    #[arg(long, global = true)]
    cj: Option<f64>,
    /// Coupling capacitance C_c in farads.
    #[arg(long, global = true)]
    cc: Option<f64>,
    /// Line impedance Z₀ in ohms.
    #[arg(long, global = true)]
    z0: Option<f64>,
    /// Qubit angular frequency ω₀ in rad/s.
    #[arg(long, global = true)]
    omega0: Option<f64>,
    /// Transmon number-operator matrix element n̄.
    #[arg(long, global = true)]
    nbar: Option<f64>,
    /// Largest relative capacitance on the emission grid.
    #[arg(long, global = true)]
    c_max: Option<f64>,
    /// Number of points on the emission grid.
    #[arg(long, global = true)]
    c_points: Option<usize>,
    /// Height scale z₀: adds a height column z = z₀/c to the emission CSV.
    #[arg(long, global = true)]
    height_scale: Option<f64>,
    /// Seed recorded in the manifest for self-test reproducibility.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write a structured-text dump of each built model (debugging).
    #[arg(long, global = true)]
    dump_model: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Mode-frequency tables (M, n, nu_n) across the mode-count list.
    Dispersion,
    /// Spectral-function tables (delta, nu, J) at the finest mode count.
    Spectral,
    /// Full (delta, M) sweep, continuum extrapolation and decoupling-law fit.
    SweepDelta,
    /// Emission-ratio curves with and without the A² renormalization.
    Emission,
    /// First-principles vs closed-form emission ratios over a capacitance grid.
    EndToEnd,
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Spectral => "spectral",
            Command::SweepDelta => "sweep-delta",
            Command::Emission => "emission",
            Command::EndToEnd => "end-to-end",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "dispersion" => Ok(Command::Dispersion),
            "spectral" => Ok(Command::Spectral),
            "sweep-delta" => Ok(Command::SweepDelta),
            "emission" => Ok(Command::Emission),
            "end-to-end" => Ok(Command::EndToEnd),
            other => Err(Error::Config(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Preset {
    /// Δ = 0 characterization: M = 40,80,160,320, capacitive, L = 10λ₀.
    Fig2,
    /// Δ sweep 0..2 over the same mode counts.
    Fig3,
    /// Suspended transmon: C_J = 25 fF, Z₀ = 50 Ω, ω₀ = 2π·7.5 GHz.
    Fig4b,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum LawChoice {
    /// The quoted decoupling law (6.77, 2.57).
    Paper,
    /// This repository's own sweep-delta law fit.
    #[value(name = "self")]
    SelfFit,
}

impl LawChoice {
    fn label(&self) -> &'static str {
        match self {
            LawChoice::Paper => "paper",
            LawChoice::SelfFit => "self",
        }
    }
}

/// Fully resolved run configuration (defaults ← preset ← file ← flags).
#[derive(Debug, Clone)]
pub struct RunConfig {
    command: Command,
    output: PathBuf,
    modes: Vec<usize>,
    deltas: Vec<f64>,
    coupling: CouplingKind,
    /// Dimensionless length L̃ = 2π × (length in λ₀ units).
    length: f64,
    fit_window: (f64, f64),
    law: LawChoice,
    circuit: CircuitParams,
    c_max: f64,
    c_points: usize,
    height_scale: Option<f64>,
    seed: u64,
    dump_model: bool,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|tok| tok.trim())
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::Config(format!("bad {what} entry '{tok}'")))
        })
        .collect()
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<f64> = parse_list(s, "fit window")?;
    if parts.len() != 2 {
        return Err(Error::Config(format!("fit window '{s}' must be lo,hi")));
    }
    Ok((parts[0], parts[1]))
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl Cli {
    /// Resolve the layered configuration. Precedence: flags > file > preset >
    /// defaults.
    pub fn resolve(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let get = |key: &str| file.get(key).map(String::as_str);

        let command = match self.command {
            Some(c) => c,
            None => Command::parse(get("command").ok_or_else(|| {
                Error::Config("no command given (subcommand or command= in config file)".into())
            })?)?,
        };

        let preset = self.preset.or(match get("preset") {
            Some("fig2") => Some(Preset::Fig2),
            Some("fig3") => Some(Preset::Fig3),
            Some("fig4b") => Some(Preset::Fig4b),
            Some(other) => return Err(Error::Config(format!("unknown preset '{other}'"))),
            None => None,
        });

        let mut modes: Vec<usize> = vec![40, 80, 160, 320];
        // Commands that fit the decoupling law need the full Δ grid by default.
        let mut deltas: Vec<f64> = match command {
            Command::SweepDelta | Command::Emission | Command::EndToEnd => {
                vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0]
            }
            Command::Dispersion | Command::Spectral => vec![0.0],
        };
        if preset == Some(Preset::Fig3) {
            deltas = vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
        }
        if preset == Some(Preset::Fig2) {
            deltas = vec![0.0];
        }
        let mut coupling = CouplingKind::Capacitive;
        let mut length_lambda = 10.0;
        let mut window = DEFAULT_FIT_WINDOW;
        let mut law = LawChoice::SelfFit;
        if preset == Some(Preset::Fig4b) {
            law = LawChoice::Paper;
        }
        let mut circuit = CircuitParams::suspended_transmon_reference();
        let mut c_max = 10.0;
        let mut c_points = 400;
        let mut seed = 0u64;

        // File layer.
        if let Some(v) = get("modes") {
            modes = parse_list(v, "modes")?;
        }
        if let Some(v) = get("deltas") {
            deltas = parse_list(v, "deltas")?;
        }
        if let Some(v) = get("delta") {
            deltas = vec![v
                .parse()
                .map_err(|_| Error::Config(format!("bad delta '{v}'")))?];
        }
        if let Some(v) = get("coupling") {
            coupling = v.parse()?;
        }
        if let Some(v) = get("length") {
            length_lambda = v
                .parse()
                .map_err(|_| Error::Config(format!("bad length '{v}'")))?;
        }
        if let Some(v) = get("fit_window") {
            window = parse_window(v)?;
        }
        if let Some(v) = get("law") {
            law = match v {
                "paper" => LawChoice::Paper,
                "self" | "self-fit" => LawChoice::SelfFit,
                other => return Err(Error::Config(format!("unknown law '{other}'"))),
            };
        }
        let parse_field = |key: &str, target: &mut f64| -> Result<()> {
            if let Some(v) = get(key) {
                *target = v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad {key} '{v}'")))?;
            }
            Ok(())
        };
        parse_field("cj", &mut circuit.qubit_capacitance)?;
        parse_field("cc", &mut circuit.coupling_capacitance)?;
        parse_field("z0", &mut circuit.line_impedance)?;
        parse_field("omega0", &mut circuit.qubit_frequency)?;
        parse_field("nbar", &mut circuit.matrix_element)?;
        parse_field("c_max", &mut c_max)?;
        if let Some(v) = get("c_points") {
            c_points = v
                .parse()
                .map_err(|_| Error::Config(format!("bad c_points '{v}'")))?;
        }
        if let Some(v) = get("seed") {
            seed = v
                .parse()
                .map_err(|_| Error::Config(format!("bad seed '{v}'")))?;
        }
        let mut height_scale = match get("height_scale") {
            Some(v) => Some(
                v.parse()
                    .map_err(|_| Error::Config(format!("bad height_scale '{v}'")))?,
            ),
            None => None,
        };

        // Flag layer.
        if let Some(v) = &self.modes {
            modes = parse_list(v, "modes")?;
        }
        if let Some(v) = &self.deltas {
            deltas = parse_list(v, "deltas")?;
        }
        if let Some(v) = self.delta {
            deltas = vec![v];
        }
        if let Some(v) = &self.coupling {
            coupling = v.parse()?;
        }
        if let Some(v) = self.length {
            length_lambda = v;
        }
        if let Some(v) = &self.fit_window {
            window = parse_window(v)?;
        }
        if let Some(v) = self.law {
            law = v;
        }
        if let Some(v) = self.cj {
            circuit.qubit_capacitance = v;
        }
        if let Some(v) = self.cc {
            circuit.coupling_capacitance = v;
        }
        if let Some(v) = self.z0 {
            circuit.line_impedance = v;
        }
        if let Some(v) = self.omega0 {
            circuit.qubit_frequency = v;
        }
        if let Some(v) = self.nbar {
            circuit.matrix_element = v;
        }
        if let Some(v) = self.c_max {
            c_max = v;
        }
        if let Some(v) = self.c_points {
            c_points = v;
        }
        if let Some(v) = self.height_scale {
            height_scale = Some(v);
        }
        if let Some(v) = self.seed {
            seed = v;
        }

        let output = self
            .output
            .or_else(|| get("output").map(PathBuf::from))
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));

        if modes.is_empty() {
            return Err(Error::Config("mode list is empty".into()));
        }
        if deltas.is_empty() {
            return Err(Error::Config("delta list is empty".into()));
        }
        if !(length_lambda.is_finite() && length_lambda > 0.0) {
            return Err(Error::Config(format!("bad length {length_lambda}")));
        }
        if c_points < 2 || !(c_max.is_finite() && c_max > 0.0) {
            return Err(Error::Config("bad emission grid".into()));
        }

        Ok(RunConfig {
            command,
            output,
            modes,
            deltas,
            coupling,
            length: 2.0 * std::f64::consts::PI * length_lambda,
            fit_window: window,
            law,
            circuit,
            c_max,
            c_points,
            height_scale,
            seed,
            dump_model: self.dump_model,
        })
    }
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct RunWriter {
    dir: PathBuf,
    /// (file name, sha256) for the manifest.
    files: Vec<(String, String)>,
    notes: Vec<String>,
}

impl RunWriter {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            notes: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(body.as_bytes());
        self.files.push((name.to_string(), format!("{:x}", hasher.finalize())));
        Ok(())
    }

    fn note(&mut self, line: String) {
        self.notes.push(line);
    }

    fn finish(self, config: &RunConfig) -> Result<()> {
        let mut manifest = String::new();
        manifest.push_str("# a2line run manifest\n");
        manifest.push_str(&format!("version=a2line {}\n", env!("CARGO_PKG_VERSION")));
        manifest.push_str(&format!("created_utc={}\n", chrono::Utc::now().to_rfc3339()));
        manifest.push_str(&format!("command={}\n", config.command.label()));
        manifest.push_str(&format!(
            "modes={}\n",
            config
                .modes
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        manifest.push_str(&format!(
            "deltas={}\n",
            config
                .deltas
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        manifest.push_str(&format!("coupling={}\n", config.coupling.label()));
        manifest.push_str(&format!("length={}\n", config.length));
        manifest.push_str(&format!(
            "fit_window={},{}\n",
            config.fit_window.0, config.fit_window.1
        ));
        manifest.push_str(&format!("law={}\n", config.law.label()));
        manifest.push_str(&format!("cj={}\n", config.circuit.qubit_capacitance));
        manifest.push_str(&format!("cc={}\n", config.circuit.coupling_capacitance));
        manifest.push_str(&format!("z0={}\n", config.circuit.line_impedance));
        manifest.push_str(&format!("omega0={}\n", config.circuit.qubit_frequency));
        manifest.push_str(&format!("nbar={}\n", config.circuit.matrix_element));
        manifest.push_str(&format!("seed={}\n", config.seed));
        for note in &self.notes {
            manifest.push_str(note);
            manifest.push('\n');
        }
        for (name, digest) in &self.files {
            manifest.push_str(&format!("file={name} sha256={digest}\n"));
        }
        let path = self.dir.join("manifest.txt");
        fs::write(&path, manifest)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

fn lattice_config(config: &RunConfig, sites: usize, delta: f64) -> LatticeConfig {
    LatticeConfig {
        sites,
        length: config.length,
        coupling: config.coupling,
        delta,
        dipole: 1.0,
    }
}

fn warn_if_coarse(config: &RunConfig) {
    if let Some(&m) = config.modes.iter().max() {
        let cfg = lattice_config(config, m, 0.0);
        if cfg.cutoff_is_coarse() {
            eprintln!(
                "warning: cutoff ν_c = {:.3} < 10 at M = {m}; discretization is coarse",
                cfg.cutoff()
            );
        }
    }
}

fn run_dispersion(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let delta = config.deltas[0];
    let mut csv = String::from("M,n,nu_n\n");
    for &m in &config.modes {
        let lattice = lattice_config(config, m, delta);
        let model = build_chain(&lattice)?;
        if config.dump_model {
            writer.write(&format!("model-M{m}.txt"), &model.dump())?;
        }
        let modes = normal_modes(&model)?;
        writer.write(&format!("modes-M{m}.csv"), &modes.to_csv())?;
        for (n, nu) in modes.frequencies.iter().enumerate() {
            csv.push_str(&format!("{m},{},{}\n", n + 1, csv_float(*nu)));
        }
    }
    writer.write("dispersion.csv", &csv)?;
    Ok(())
}

fn run_spectral(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let m = *config.modes.iter().max().unwrap();
    let mut csv = String::from("delta,nu,J\n");
    for &delta in &config.deltas {
        let lattice = lattice_config(config, m, delta);
        let model = build_chain(&lattice)?;
        if config.dump_model {
            writer.write(&format!("model-M{m}-delta{delta}.txt"), &model.dump())?;
        }
        let modes = normal_modes(&model)?;
        let samples = interpolation_samples(&cumulative_coupling(&modes, 1.0)?);
        let fit = fit_power_law(&samples, config.fit_window)?;
        writer.note(format!(
            "fit delta={delta} prefactor={} exponent={} residual={}",
            fit.prefactor, fit.exponent, fit.residual
        ));
        for nu in &samples.nu_grid {
            let j = fit.prefactor * nu.powf(fit.exponent);
            csv.push_str(&format!("{delta},{},{}\n", csv_float(*nu), csv_float(j)));
        }
    }
    writer.write("spectral.csv", &csv)?;
    Ok(())
}

fn run_sweep(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let sweep = sweep_delta(
        &config.deltas,
        config.coupling,
        &config.modes,
        config.length,
        config.fit_window,
    )?;
    let mut csv = String::from("delta,M,alpha,alpha_extrapolated\n");
    for entry in &sweep.entries {
        let extrapolated = sweep
            .extrapolated
            .iter()
            .find(|(d, _)| *d == entry.delta)
            .map(|(_, a)| *a)
            .unwrap_or(f64::NAN);
        csv.push_str(&format!(
            "{},{},{},{}\n",
            entry.delta,
            entry.sites,
            csv_float(entry.alpha),
            csv_float(extrapolated)
        ));
    }
    writer.write("alpha.csv", &csv)?;
    let law = format!(
        "coefficient={}\nexponent={}\nresidual={}\n",
        csv_float(sweep.law.coefficient),
        csv_float(sweep.law.exponent),
        csv_float(sweep.law.residual)
    );
    writer.write("law.txt", &law)?;
    writer.note(format!(
        "law coefficient={} exponent={} residual={}",
        sweep.law.coefficient, sweep.law.exponent, sweep.law.residual
    ));
    Ok(())
}

fn resolve_law(config: &RunConfig, writer: &mut RunWriter) -> Result<(f64, f64)> {
    match config.law {
        LawChoice::Paper => Ok((PAPER_LAW_COEFFICIENT, PAPER_LAW_EXPONENT)),
        LawChoice::SelfFit => {
            let sweep = sweep_delta(
                &config.deltas,
                config.coupling,
                &config.modes,
                config.length,
                config.fit_window,
            )?;
            writer.note(format!(
                "self law coefficient={} exponent={}",
                sweep.law.coefficient, sweep.law.exponent
            ));
            Ok((sweep.law.coefficient, sweep.law.exponent))
        }
    }
}

fn c_grid(config: &RunConfig) -> Vec<f64> {
    let n = config.c_points;
    (1..=n).map(|i| config.c_max * i as f64 / n as f64).collect()
}

fn run_emission(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let law = resolve_law(config, writer)?;
    let grid = c_grid(config);
    let curve = emission_curve(&config.circuit, &grid, law)?;
    // Optional height axis z = z₀/c for a qubit suspended at height z.
    let mut csv = match config.height_scale {
        Some(_) => String::from("c,ratio_with_A2,ratio_without_A2,height\n"),
        None => String::from("c,ratio_with_A2,ratio_without_A2\n"),
    };
    for i in 0..grid.len() {
        csv.push_str(&format!(
            "{},{},{}",
            csv_float(curve.c_grid[i]),
            csv_float(curve.with_a2[i]),
            csv_float(curve.without_a2[i])
        ));
        if let Some(z0) = config.height_scale {
            csv.push_str(&format!(",{}", csv_float(z0 / curve.c_grid[i])));
        }
        csv.push('\n');
    }
    writer.write("emission.csv", &csv)?;

    let unit = config.circuit.with_relative_capacitance(1.0);
    let delta_at_unit = map_circuit(&unit, law.0)?.delta;
    let c_star = a2line::find_emission_maximum(curve.kappa, law.1, grid[0], config.c_max);
    let summary = format!(
        "kappa={}\ndelta_at_c1={}\nc_star={}\nlaw_coefficient={}\nlaw_exponent={}\n",
        csv_float(curve.kappa),
        csv_float(delta_at_unit),
        csv_float(c_star),
        csv_float(law.0),
        csv_float(law.1)
    );
    writer.write("summary.txt", &summary)?;
    Ok(())
}

fn run_end_to_end(config: &RunConfig, writer: &mut RunWriter) -> Result<()> {
    let sweep = sweep_delta(
        &config.deltas,
        config.coupling,
        &config.modes,
        config.length,
        config.fit_window,
    )?;
    writer.note(format!(
        "self law coefficient={} exponent={}",
        sweep.law.coefficient, sweep.law.exponent
    ));
    let unit = config.circuit.with_relative_capacitance(1.0);
    let kappa = map_circuit(&unit, sweep.law.coefficient)?.kappa;
    let mut warned = false;
    let mut csv = String::from("c,first_principles,closed_form\n");
    for c in c_grid(config) {
        let at_c = config.circuit.with_relative_capacitance(c);
        let e2e = end_to_end_ratio(&at_c, &unit, &sweep)?;
        if e2e.extrapolated && !warned {
            eprintln!("warning: Δ(c) beyond the sweep's fitted range at c = {c}; law extrapolated");
            writer.note(format!("extrapolation_warning_at_c={c}"));
            warned = true;
        }
        let closed = a2line::emission_ratio(c, kappa, sweep.law.exponent);
        csv.push_str(&format!(
            "{},{},{}\n",
            csv_float(c),
            csv_float(e2e.value),
            csv_float(closed)
        ));
    }
    writer.write("endtoend.csv", &csv)?;
    Ok(())
}

/// Execute a resolved run. Returns the process exit code.
pub fn run(config: RunConfig) -> Result<()> {
    warn_if_coarse(&config);
    let mut writer = RunWriter::new(&config.output)?;
    match config.command {
        Command::Dispersion => run_dispersion(&config, &mut writer)?,
        Command::Spectral => run_spectral(&config, &mut writer)?,
        Command::SweepDelta => run_sweep(&config, &mut writer)?,
        Command::Emission => run_emission(&config, &mut writer)?,
        Command::EndToEnd => run_end_to_end(&config, &mut writer)?,
    }
    writer.finish(&config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_layering_and_flag_override() {
        let dir = std::env::temp_dir().join("a2line-cli-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(
            &path,
            "# comment\ncommand=sweep-delta\nmodes=40,80\ndeltas=0,0.5\ncoupling=fq\nseed=7\n",
        )
        .unwrap();
        let cli = Cli::parse_from([
            "a2line",
            "--config",
            path.to_str().unwrap(),
            "--modes",
            "40,80,160",
            "--output",
            dir.to_str().unwrap(),
        ]);
        let config = cli.resolve().unwrap();
        assert_eq!(config.command, Command::SweepDelta);
        assert_eq!(config.modes, vec![40, 80, 160]); // flag wins
        assert_eq!(config.deltas, vec![0.0, 0.5]); // file wins over default
        assert_eq!(config.coupling, CouplingKind::Inductive);
        assert_eq!(config.seed, 7);
    }

    #[test]
    fn missing_command_is_an_error() {
        let cli = Cli::parse_from(["a2line"]);
        assert!(cli.resolve().is_err());
    }

    #[test]
    fn fig4b_preset_selects_paper_law_and_reference_circuit() {
        let cli = Cli::parse_from(["a2line", "emission", "--preset", "fig4b"]);
        let config = cli.resolve().unwrap();
        assert_eq!(config.law, LawChoice::Paper);
        assert_eq!(config.circuit.qubit_capacitance, 25e-15);
        assert_eq!(config.circuit.line_impedance, 50.0);
    }

    #[test]
    fn bad_config_lines_are_rejected() {
        let dir = std::env::temp_dir().join("a2line-cli-test-bad");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.cfg");
        fs::write(&path, "command sweep-delta\n").unwrap();
        let cli = Cli::parse_from(["a2line", "--config", path.to_str().unwrap()]);
        assert!(cli.resolve().is_err());
    }

    #[test]
    fn csv_floats_are_full_precision() {
        let x = std::f64::consts::PI / 17.0;
        let s = csv_float(x);
        assert_eq!(s.parse::<f64>().unwrap(), x, "{s} must round-trip");
    }
}
