use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use gdicke::ed::{build_hamiltonian, converge_cutoff, default_cutoff, ground_state, observables, FiniteModel};
use gdicke::gaussian::analyze;
use gdicke::model::{boundary_distances, classify_phase, order_parameters, ModelParams};
use gdicke::solver::{minimize, SolverOptions};
use gdicke::sweep::config::load_spec;
use gdicke::sweep::{
    critical_series, fit_exponent, locate_critical, run_sweep, Axis, AxisName, Cell, Format, Quantity, SeriesQuantity,
    Side, SweepSpec, Table, DEFAULT_FIT_WINDOW,
};

#[derive(Parser)]
#[command(
    name = "gdicke",
    version,
    about = "Phase diagram, fluctuations and exact diagonalization of a two-ensemble Dicke model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Global mean-field minimum at one parameter point.
    Minimize(PointArgs),
    /// Analytic phase and signed distances to the three boundaries.
    Phase(PointArgs),
    /// Normal-mode energies, variances and entropies of the Gaussian ground state.
    Spectrum(PointArgs),
    /// Evaluate quantities on a 1D or 2D parameter grid.
    Sweep(SweepArgs),
    /// Locate the phase boundary inside a bracket.
    Locate(LocateArgs),
    /// Log-log power-law fit near a critical point.
    FitExponent(FitArgs),
    /// Exact diagonalization at finite J.
    Ed(EdArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Spin frequency Ω.
    #[arg(long = "Omega", default_value_t = 1.0, allow_negative_numbers = true)]
    spin_freq: f64,
    /// Boson frequency ω.
    #[arg(long = "omega", default_value_t = 1.0, allow_negative_numbers = true)]
    boson_freq: f64,
    /// Spin-spin coupling χ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    chi: f64,
    /// Spin-boson coupling λ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long, default_value = "csv")]
    format: String,
}

impl Common {
    fn params(&self) -> gdicke::Result<ModelParams> {
        ModelParams::new(self.spin_freq, self.boson_freq, self.chi, self.lambda)
    }

    fn emit(&self, table: &Table) -> anyhow::Result<()> {
        let format: Format = self.format.parse()?;
        match &self.out {
            Some(path) => {
                let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                let mut w = BufWriter::new(f);
                table.write(format, &mut w)?;
                w.flush()?;
            }
            None => table.write(format, io::stdout().lock())?,
        }
        Ok(())
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// TOML sweep description; overrides every other sweep flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in grid: phase-diagram or fluctuation-cut.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// First axis as name:start:stop:count, e.g. chi:-2:2:401.
    #[arg(long, allow_hyphen_values = true)]
    axis1: Option<String>,
    /// Optional second axis, same form.
    #[arg(long, allow_hyphen_values = true)]
    axis2: Option<String>,
    /// Comma-separated quantities.
    #[arg(long, value_delimiter = ',')]
    quantities: Vec<String>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct LocateArgs {
    #[command(flatten)]
    common: Common,
    /// Axis to search along: chi, lambda or Omega.
    #[arg(long, default_value = "chi")]
    axis: String,
    #[arg(long, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    hi: f64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    /// CSV with a header row; the first two columns are distance and value.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Axis for a generated series.
    #[arg(long, default_value = "chi")]
    axis: String,
    /// Critical value to sample around.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "input")]
    critical: Option<f64>,
    /// below or above the critical value.
    #[arg(long, default_value = "above")]
    side: String,
    /// gap, dx2_1..dx2_3, dp2_1..dp2_3 or S1..S3.
    #[arg(long, default_value = "gap")]
    quantity: String,
    /// Points in a generated series.
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_FIT_WINDOW.0)]
    window_min: f64,
    #[arg(long, default_value_t = DEFAULT_FIT_WINDOW.1)]
    window_max: f64,
}

#[derive(Args)]
struct EdArgs {
    #[command(flatten)]
    common: Common,
    /// Spin length J, a positive multiple of 1/2.
    #[arg(long, default_value_t = 1.0)]
    spin: f64,
    /// Fock cutoff; defaults to 40 for λ ≤ 0.6 and 80 above.
    #[arg(long, conflicts_with = "auto_cutoff")]
    ncut: Option<usize>,
    /// Choose the cutoff by the convergence ladder.
    #[arg(long)]
    auto_cutoff: bool,
    #[arg(long, default_value_t = 1e-8)]
    cutoff_tol: f64,
    /// Write the sparse Hamiltonian in Matrix Market coordinate format.
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn cmd_minimize(a: &PointArgs) -> anyhow::Result<()> {
    let params = a.common.params()?;
    let s = minimize(&params, &SolverOptions::default())?;
    let o = order_parameters(&s.config);
    a.common.emit(&Table::single(vec![
        ("theta1", s.config.theta1.into()),
        ("theta2", s.config.theta2.into()),
        ("alpha", s.config.alpha.into()),
        ("energy", s.energy.into()),
        ("gradient_norm", s.gradient_norm.into()),
        ("phase", s.branch.phase.roman().into()),
        ("degenerate", s.degenerate_partner.is_some().into()),
        ("jx1", o.jx1.into()),
        ("jx2", o.jx2.into()),
        ("b", o.b.into()),
        ("nb", o.nb.into()),
    ]))
}

fn cmd_phase(a: &PointArgs) -> anyhow::Result<()> {
    let params = a.common.params()?;
    let label = classify_phase(&params);
    let d = boundary_distances(&params);
    a.common.emit(&Table::single(vec![
        ("phase", label.phase.roman().into()),
        ("name", label.phase.description().into()),
        ("chi_minus_normal_superradiant", d.normal_superradiant.into()),
        ("chi_minus_paramagnetic_antiferro", d.paramagnetic_antiferro.into()),
        ("chi_minus_first_order", d.first_order.into()),
    ]))
}

fn cmd_spectrum(a: &PointArgs) -> anyhow::Result<()> {
    let params = a.common.params()?;
    let p = analyze(&params, &SolverOptions::default())?;
    let s = p.fluctuations.entropies()?;
    let (dl, f, q) = (p.spectrum.deltas, p.fluctuations, p.coefficients);
    a.common.emit(&Table::single(vec![
        ("phase", p.solution.branch.phase.roman().into()),
        ("energy", p.solution.energy.into()),
        ("eps1", q.eps1.into()),
        ("eps2", q.eps2.into()),
        ("eps3", q.eps3.into()),
        ("tau12", q.tau12.into()),
        ("tau13", q.tau13.into()),
        ("tau23", q.tau23.into()),
        ("delta1", dl[0].into()),
        ("delta2", dl[1].into()),
        ("delta3", dl[2].into()),
        ("dx2_1", f.dx2[0].into()),
        ("dx2_2", f.dx2[1].into()),
        ("dx2_3", f.dx2[2].into()),
        ("dp2_1", f.dp2[0].into()),
        ("dp2_2", f.dp2[1].into()),
        ("dp2_3", f.dp2[2].into()),
        ("S1", s[0].into()),
        ("S2", s[1].into()),
        ("S3", s[2].into()),
        ("energy_correction", p.spectrum.ground_energy_correction.into()),
    ]))
}

fn sweep_spec(a: &SweepArgs) -> anyhow::Result<SweepSpec> {
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        return Ok(load_spec(&text)?);
    }
    let mut spec = match a.preset.as_deref() {
        Some("phase-diagram") => SweepSpec::phase_diagram(),
        Some("fluctuation-cut") => SweepSpec::fluctuation_cut(),
        Some(other) => bail!(gdicke::Error::InvalidSpec(format!(
            "unknown preset {other:?} (expected phase-diagram or fluctuation-cut)"
        ))),
        None => {
            let Some(axis1) = &a.axis1 else {
                bail!(gdicke::Error::InvalidSpec("one of --config, --preset or --axis1 is required".into()));
            };
            let axis1: Axis = axis1.parse()?;
            let quantities = a.quantities.iter().map(|q| q.parse::<Quantity>()).collect::<gdicke::Result<Vec<_>>>()?;
            let mut spec = SweepSpec::new(a.common.params()?, axis1, quantities);
            if let Some(axis2) = &a.axis2 {
                spec = spec.with_axis2(axis2.parse()?);
            }
            spec
        }
    };
    spec.threads = a.threads;
    Ok(spec)
}

fn cmd_sweep(a: &SweepArgs) -> anyhow::Result<()> {
    let spec = sweep_spec(a)?;
    let out = run_sweep(&spec)?;
    a.common.emit(&out.to_table())
}

fn cmd_locate(a: &LocateArgs) -> anyhow::Result<()> {
    let axis: AxisName = a.axis.parse()?;
    let c = locate_critical(&a.common.params()?, axis, a.lo, a.hi)?;
    let opt = |x: Option<f64>| x.map_or(Cell::Empty, Cell::Num);
    a.common.emit(&Table::single(vec![
        ("axis", axis.as_str().into()),
        ("value", c.value.into()),
        ("width", c.width.into()),
        ("lower_phase", c.lower_phase.roman().into()),
        ("upper_phase", c.upper_phase.roman().into()),
        ("order", c.order.to_string().as_str().into()),
        ("gap_minimum_at", opt(c.gap_minimum_at)),
        ("gap_minimum", opt(c.gap_minimum)),
    ]))
}

fn read_series(path: &PathBuf) -> anyhow::Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> anyhow::Result<f64> {
            let s = rec.get(k).with_context(|| format!("row {} has fewer than two columns", i + 1))?;
            s.trim().parse().with_context(|| format!("row {}: {s:?} is not a number", i + 1))
        };
        out.push((field(0)?, field(1)?));
    }
    Ok(out)
}

fn cmd_fit(a: &FitArgs) -> anyhow::Result<()> {
    let window = (a.window_min, a.window_max);
    let series = match &a.input {
        Some(path) => read_series(path)?,
        None => {
            let axis: AxisName = a.axis.parse()?;
            let side: Side = a.side.parse()?;
            let quantity: SeriesQuantity = a.quantity.parse()?;
            let critical = a.critical.expect("required by clap");
            critical_series(&a.common.params()?, axis, critical, side, window, a.count, quantity)?
        }
    };
    let f = fit_exponent(&series, window)?;
    a.common.emit(&Table::single(vec![
        ("slope", f.slope.into()),
        ("intercept", f.intercept.into()),
        ("stderr", f.stderr.into()),
        ("points", f.points.into()),
    ]))
}

fn cmd_ed(a: &EdArgs) -> anyhow::Result<()> {
    let params = a.common.params()?;
    let two_j = 2.0 * a.spin;
    if !(two_j >= 1.0 && two_j.fract() == 0.0) {
        bail!(gdicke::Error::InvalidParams(format!("J must be a positive multiple of 1/2, got {}", a.spin)));
    }
    let probe = FiniteModel::new(params, two_j as usize, 1)?;
    let n_cut = match (a.ncut, a.auto_cutoff) {
        (Some(n), _) => n,
        (None, true) => converge_cutoff(&probe, a.cutoff_tol)?,
        (None, false) => default_cutoff(&params),
    };
    let model = FiniteModel::new(params, two_j as usize, n_cut)?;
    if let Some(path) = &a.dump {
        let h = build_hamiltonian(&model)?;
        let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(f);
        h.write_matrix_market(&mut w)?;
        w.flush()?;
    }
    let g = ground_state(&model)?;
    let o = observables(&model, &g.state);
    let n = two_j;
    let mf = minimize(&params, &SolverOptions::default())?;
    let parity =
        if g.degenerate || (o.parity.abs() - 1.0).abs() > 1e-6 { Cell::Empty } else { o.parity.round().into() };
    a.common.emit(&Table::single(vec![
        ("two_j", (two_j as usize).into()),
        ("n_cut", n_cut.into()),
        ("dim", model.dim().into()),
        ("e0", g.e0.into()),
        ("e1", g.e1.into()),
        ("gap", g.gap.into()),
        ("e0_per_n", (g.e0 / n).into()),
        ("mean_field_energy", mf.energy.into()),
        ("degenerate", g.degenerate.into()),
        ("residual", g.residual.into()),
        ("parity", parity),
        ("jx1", (o.jx1 / model.j()).into()),
        ("jx2", (o.jx2 / model.j()).into()),
        ("jz1", (o.jz1 / model.j()).into()),
        ("jz2", (o.jz2 / model.j()).into()),
        ("nb_per_n", (o.nb / n).into()),
    ]))
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Minimize(a) => cmd_minimize(a),
        Command::Phase(a) => cmd_phase(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Locate(a) => cmd_locate(a),
        Command::FitExponent(a) => cmd_fit(a),
        Command::Ed(a) => cmd_ed(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = if let Some(g) = e.downcast_ref::<gdicke::Error>() {
                g.kind()
            } else if e.downcast_ref::<io::Error>().is_some() {
                "Io"
            } else {
                "InvalidInput"
            };
            let record = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
