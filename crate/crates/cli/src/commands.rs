use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use fockhtm::basis::HermitianFrame;
use fockhtm::experiment::conserve::{run_conservation, ConserveConfig, UnitarySpec};
use fockhtm::experiment::dip::{dip_curve, fit_hom_dip, hom_dip, DipModel};
use fockhtm::experiment::prepare::{
    compare_row, paper_state_table, prepare_state_hom, state_from_alpha, PRINTED_STATE_TABLE, PRINTED_VALUE_TOL,
};
use fockhtm::experiment::tomography::{
    corrected_probabilities, reconstruct_ls, simulate_counts, tomography_settings, ReconstructionMethod,
    TOMOGRAPHY_ANGLES_DEG,
};
use fockhtm::experiment::{fidelity, trial_rng, RunManifest};
use fockhtm::fock::{lift_on, ScatteringUnitary};
use fockhtm::invariants::{invariants as invariant_set, InvariantSet};
use fockhtm::json::load_or_build_frame;
use fockhtm::optics::{experiment_unitaries, qhq_decompose, sample_haar_u2};
use fockhtm::transfer::DensityState;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::files::{parse_counts, parse_document, parse_samples, read_text, CountsFile, StateFile};
use crate::output::{Artifact, Cell};
use crate::{CliError, Global};

type Outcome = Result<(Artifact, bool), CliError>;

const TABLE_DECIMALS: usize = 3;
const DEFAULT_DECIMALS: usize = 10;
const DEFAULT_TOMOGRAPHY_SHOTS: u64 = 200_000;
const CONSERVE_TOL: f64 = 1e-9;

pub struct Context {
    pub global: Global,
    pub command: String,
    config: Value,
}

impl Context {
    pub fn new(global: Global, command: &impl Serialize) -> Result<Self, CliError> {
        let config = json!({ "global": global, "command": command });
        let name = config["command"]["command"].as_str().unwrap_or("unknown").to_string();
        Ok(Context { global, command: name, config })
    }

    fn decimals(&self, default: usize) -> usize {
        self.global.precision.unwrap_or(default)
    }

    fn frame(&self, n: usize, m: usize) -> Result<Arc<HermitianFrame>, CliError> {
        Ok(Arc::new(load_or_build_frame(n, m, self.global.frame_cache.as_deref())?))
    }

    /// Manifest whose hash covers the full configuration and the contents of
    /// every input file.
    fn manifest(&self, shots: Vec<u64>, models: Vec<String>, inputs: &[(&str, &str)]) -> Result<RunManifest, CliError> {
        let inputs: serde_json::Map<String, Value> = inputs.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        let config = json!({ "config": self.config, "inputs": inputs });
        Ok(RunManifest::new(&self.command, self.global.seed, shots, models, &config)?)
    }
}

fn inv_cells(inv: &InvariantSet) -> Vec<(&'static str, f64)> {
    vec![
        ("i_n", inv.i_n),
        ("i_t_prime", inv.i_t_prime),
        ("i_t", inv.i_t),
        ("i_p", inv.i_p),
        ("i_o", inv.i_o),
        ("purity", inv.purity),
    ]
}

pub fn table_s1(ctx: &Context) -> Outcome {
    let frame = ctx.frame(2, 2)?;
    let rows = paper_state_table(&frame)?;
    let mut a = Artifact::new(
        ctx.manifest(vec![], vec!["exact".into()], &[])?,
        ctx.decimals(TABLE_DECIMALS),
        &["theta_deg", "alpha_deg", "amp_20", "amp_11", "i_t", "i_p", "i_t_prime", "i_o", "pass", "mismatched"],
    );
    let mut failed = 0;
    for (row, printed) in rows.iter().zip(PRINTED_STATE_TABLE.iter()) {
        let checks = compare_row(row, printed);
        let bad: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.column).collect();
        failed += bad.len();
        let inv = &row.invariants;
        a.row(vec![
            row.theta_deg.into(),
            row.alpha_deg.into(),
            row.amp_20.into(),
            row.amp_11.into(),
            inv.i_t.into(),
            inv.i_p.into(),
            inv.i_t_prime.into(),
            inv.i_o.into(),
            bad.is_empty().into(),
            bad.join(";").into(),
        ]);
    }
    a.summary("rows", rows.len());
    a.summary("tolerance", Cell::Text(format!("{PRINTED_VALUE_TOL:e}")));
    a.summary("failed_cells", failed);
    Ok((a, failed == 0))
}

#[derive(Args, Debug, Serialize)]
pub struct Fig3Args {
    /// Grid spacing in degrees on α ∈ [0°, 90°].
    #[arg(long, default_value_t = 1.0)]
    pub alpha_step: f64,
}

pub fn fig3_theory(ctx: &Context, args: &Fig3Args) -> Outcome {
    if !(args.alpha_step > 0.0 && args.alpha_step <= 90.0) {
        return Err(CliError::Input(format!("alpha step {} outside (0, 90]", args.alpha_step)));
    }
    let frame = ctx.frame(2, 2)?;
    let mut grid: Vec<f64> = (0..).map(|k| k as f64 * args.alpha_step).take_while(|&x| x < 90.0 - 1e-9).collect();
    grid.push(90.0);
    let mut a = Artifact::new(
        ctx.manifest(vec![], vec!["exact".into()], &[])?,
        ctx.decimals(DEFAULT_DECIMALS),
        &["alpha_deg", "i_t_prime", "i_t", "i_p", "i_o"],
    );
    for alpha in grid {
        let inv = invariant_set(&state_from_alpha(alpha.to_radians(), &frame)?)?;
        a.row(vec![alpha.into(), inv.i_t_prime.into(), inv.i_t.into(), inv.i_p.into(), inv.i_o.into()]);
    }
    a.summary("points", a.rows.len());
    Ok((a, true))
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitarySet {
    /// The eight experiment unitaries.
    TableS2,
    /// Fresh Haar samples drawn from the master seed.
    Haar,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LinearClip,
    CholeskyRefined,
}

impl From<Method> for ReconstructionMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::LinearClip => ReconstructionMethod::LinearClip,
            Method::CholeskyRefined => ReconstructionMethod::CholeskyRefined,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConserveArgs {
    #[arg(long, value_enum, default_value_t = UnitarySet::TableS2)]
    pub unitaries: UnitarySet,
    /// Number of Haar samples.
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Half-wave angles in degrees; defaults to the prepared-state table.
    #[arg(long, value_delimiter = ',')]
    pub thetas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::LinearClip)]
    pub method: Method,
}

pub fn conserve(ctx: &Context, args: &ConserveArgs) -> Outcome {
    let frame = ctx.frame(2, 2)?;
    let unitaries = match args.unitaries {
        UnitarySet::TableS2 => UnitarySpec::experiment_set(),
        UnitarySet::Haar => UnitarySpec::haar_set(args.count, ctx.global.seed),
    };
    let thetas_deg =
        if args.thetas.is_empty() { PRINTED_STATE_TABLE.iter().map(|r| r.theta_deg).collect() } else { args.thetas.clone() };
    let config = ConserveConfig {
        thetas_deg,
        unitaries,
        shots: ctx.global.shots,
        detector_model: ctx.global.detector_model.into(),
        method: args.method.into(),
        master_seed: ctx.global.seed,
    };
    let report = run_conservation(&config, &frame)?;
    let models = vec![config.detector_model.to_string(), format!("{:?}", config.method)];
    let mut a = Artifact::new(
        ctx.manifest(ctx.global.shots.into_iter().collect(), models, &[])?,
        ctx.decimals(DEFAULT_DECIMALS),
        &[
            "theta_deg",
            "unitary",
            "i_n",
            "i_t_prime_in",
            "i_t_prime_out",
            "i_t_out",
            "i_p_out",
            "i_o_out",
            "exact_deviation",
            "tomography_i_t_prime",
            "tomography_fidelity",
            "direct_i_t_prime",
            "direct_std_error",
        ],
    );
    for c in &report.cells {
        a.row(vec![
            c.theta_deg.into(),
            c.unitary.clone().into(),
            c.evolved.i_n.into(),
            c.input.i_t_prime.into(),
            c.evolved.i_t_prime.into(),
            c.evolved.i_t.into(),
            c.evolved.i_p.into(),
            c.evolved.i_o.into(),
            Cell::Text(format!("{:.3e}", c.exact_deviation)),
            c.tomography_i_t_prime.into(),
            c.tomography_fidelity.into(),
            c.direct_i_t_prime.into(),
            c.direct_std_error.into(),
        ]);
    }
    a.summary("cells", report.cells.len());
    a.summary("shots", ctx.global.shots.map(|s| s.to_string()).unwrap_or_else(|| "exact".into()));
    a.summary("max_exact_deviation", Cell::Text(format!("{:.3e}", report.max_exact_deviation)));
    a.summary("tomography_spread", Cell::Text(format!("{:.3e}", report.tomography_spread)));
    a.summary("direct_spread", Cell::Text(format!("{:.3e}", report.direct_spread)));
    Ok((a, report.max_exact_deviation <= CONSERVE_TOL))
}

#[derive(Args, Debug, Serialize)]
pub struct InvariantsArgs {
    /// State file: `{"photons", "modes", "rho"}`, bare or as emitted by `prepare`.
    #[arg(long)]
    pub state: PathBuf,
}

fn load_state(ctx: &Context, file: &StateFile) -> Result<DensityState, CliError> {
    let frame = ctx.frame(file.photons, file.modes)?;
    if file.rho.shape() != (frame.dim(), frame.dim()) {
        return Err(CliError::Input(format!(
            "rho is {}x{}, but {} photons in {} modes need {}x{}",
            file.rho.nrows(),
            file.rho.ncols(),
            file.photons,
            file.modes,
            frame.dim(),
            frame.dim()
        )));
    }
    Ok(DensityState::new(file.rho.clone(), frame)?)
}

pub fn invariants(ctx: &Context, args: &InvariantsArgs) -> Outcome {
    let origin = args.state.display().to_string();
    let text = read_text(&args.state)?;
    let file: StateFile = parse_document(&text, &origin)?;
    let state = load_state(ctx, &file)?;
    let inv = invariant_set(&state)?;
    let mut a = Artifact::new(
        ctx.manifest(vec![], vec![], &[("state", &text)])?,
        ctx.decimals(DEFAULT_DECIMALS),
        &["index", "subspace", "coefficient"],
    );
    a.summary("photons", file.photons);
    a.summary("modes", file.modes);
    a.summary("dim", state.frame().dim());
    for (k, v) in inv_cells(&inv) {
        a.summary(k, v);
    }
    let t = file.modes * file.modes;
    for (i, x) in state.coeffs().iter().enumerate() {
        let subspace = if i == 0 {
            "photon_number"
        } else if i < t {
            "tangent"
        } else {
            "perpendicular"
        };
        a.row(vec![i.into(), subspace.into(), (*x).into()]);
    }
    Ok((a, true))
}

#[derive(Args, Debug, Serialize)]
pub struct PrepareArgs {
    /// Half-wave plate angle in degrees, in [0, 45].
    #[arg(long, default_value_t = 22.5)]
    pub theta: f64,
}

pub fn prepare(ctx: &Context, args: &PrepareArgs) -> Outcome {
    let frame = ctx.frame(2, 2)?;
    let p = prepare_state_hom(args.theta.to_radians(), &frame)?;
    let inv = invariant_set(&p.state)?;
    let mut a = Artifact::new(
        ctx.manifest(vec![], vec!["exact".into()], &[])?,
        ctx.decimals(DEFAULT_DECIMALS),
        &["fock_state", "amplitude_re", "amplitude_im"],
    );
    a.summary("theta_deg", args.theta);
    a.summary("alpha_deg", p.alpha.to_degrees());
    for (k, v) in inv_cells(&inv) {
        a.summary(k, v);
    }
    for (s, z) in frame.basis().states().iter().zip(p.amplitudes.iter()) {
        a.row(vec![s.to_string().into(), z.re.into(), z.im.into()]);
    }
    let file = StateFile { photons: 2, modes: 2, rho: p.state.rho().clone() };
    let value = serde_json::to_value(&file).map_err(|e| CliError::Input(e.to_string()))?;
    for key in ["photons", "modes", "rho"] {
        a.extra(key, value[key].clone());
    }
    Ok((a, true))
}

#[derive(Args, Debug, Serialize)]
pub struct TomoSimulateArgs {
    /// State file to measure.
    #[arg(long, conflicts_with = "theta")]
    pub state: Option<PathBuf>,
    /// Half-wave angle in degrees of a HOM-prepared state (default 22.5).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Evolve by experiment unitary `U<k>` before measuring.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub unitary: Option<u8>,
}

pub fn tomo_simulate(ctx: &Context, args: &TomoSimulateArgs) -> Outcome {
    let frame = ctx.frame(2, 2)?;
    let mut inputs = Vec::new();
    let text;
    let mut state = match &args.state {
        Some(path) => {
            text = read_text(path)?;
            inputs.push(("state", text.as_str()));
            let file: StateFile = parse_document(&text, &path.display().to_string())?;
            if (file.photons, file.modes) != (2, 2) {
                return Err(CliError::Input("tomography acts on two photons in two modes".into()));
            }
            load_state(ctx, &file)?
        }
        None => prepare_state_hom(args.theta.unwrap_or(22.5).to_radians(), &frame)?.state,
    };
    if let Some(k) = args.unitary {
        let u = &experiment_unitaries()[k as usize - 1];
        state = state.evolve(&lift_on(&ScatteringUnitary::new(u.matrix.clone())?, frame.basis())?)?;
    }
    let shots = ctx.global.shots.unwrap_or(DEFAULT_TOMOGRAPHY_SHOTS);
    let settings = tomography_settings()?;
    let model = ctx.global.detector_model.into();
    let record = simulate_counts(state.rho(), &settings, shots, &mut trial_rng(ctx.global.seed, 0), model)?;
    let mut a = Artifact::new(
        ctx.manifest(vec![shots], vec![model.to_string()], &inputs)?,
        ctx.decimals(DEFAULT_DECIMALS),
        &["qwp_deg", "hwp_deg", "shots", "n20", "n11", "n02", "pairs"],
    );
    a.summary("detector_model", model.to_string());
    a.summary("shots", shots);
    for s in &record.settings {
        let pairs = s.pair_counts.map(|p| p.map(|x| x.to_string()).join(";")).unwrap_or_default();
        a.row(vec![
            s.qwp_deg.into(),
            s.hwp_deg.into(),
            s.shots.into(),
            s.counts[0].into(),
            s.counts[1].into(),
            s.counts[2].into(),
            pairs.into(),
        ]);
    }
    let file = CountsFile { record, state: Some(StateFile { photons: 2, modes: 2, rho: state.rho().clone() }) };
    let value = serde_json::to_value(&file).map_err(|e| CliError::Input(e.to_string()))?;
    a.extra("record", value["record"].clone());
    a.extra("state", value["state"].clone());
    Ok((a, true))
}

#[derive(Args, Debug, Serialize)]
pub struct TomoReconstructArgs {
    /// Counts file as emitted by `tomo-simulate`, or a bare count record.
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::LinearClip)]
    pub method: Method,
}

pub fn tomo_reconstruct(ctx: &Context, args: &TomoReconstructArgs) -> Outcome {
    let origin = args.counts.display().to_string();
    let text = read_text(&args.counts)?;
    let file = parse_counts(&text, &origin)?;
    let settings = tomography_settings()?;
    let angles_match = file.record.settings.len() == TOMOGRAPHY_ANGLES_DEG.len()
        && file
            .record
            .settings
            .iter()
            .zip(TOMOGRAPHY_ANGLES_DEG)
            .all(|(s, (q, h))| (s.qwp_deg - q).abs() < 1e-9 && (s.hwp_deg - h).abs() < 1e-9);
    if !angles_match {
        return Err(CliError::Input(format!("{origin}: settings do not match the six analysis settings")));
    }
    let frame = ctx.frame(2, 2)?;
    let probs = corrected_probabilities(&file.record)?;
    let mut result = reconstruct_ls(&probs, &settings, &frame, args.method.into())?;
    if let Some(truth) = &file.state {
        result.fidelity_vs = Some(fidelity(result.rho_hat.rho(), &load_state(ctx, truth)?.rho().clone())?);
    }
    let inv = invariant_set(&result.rho_hat)?;
    let shots: Vec<u64> = file.record.settings.iter().map(|s| s.shots).collect();
    let mut a = Artifact::new(
        ctx.manifest(shots, vec![file.record.detector_model.to_string()], &[("counts", &text)])?,
        ctx.decimals(DEFAULT_DECIMALS),
        &["row", "col", "re", "im"],
    );
    a.summary("residual", Cell::Text(format!("{:.6e}", result.residual)));
    if let Some(f) = result.fidelity_vs {
        a.summary("fidelity", f);
    }
    for (k, v) in inv_cells(&inv) {
        a.summary(k, v);
    }
    let rho = result.rho_hat.rho();
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            a.row(vec![i.into(), j.into(), rho[(i, j)].re.into(), rho[(i, j)].im.into()]);
        }
    }
    a.extra("result", serde_json::to_value(&result).map_err(|e| CliError::Input(e.to_string()))?);
    Ok((a, true))
}

#[derive(Args, Debug, Serialize)]
pub struct SampleU2Args {
    #[arg(long, default_value_t = 8)]
    pub count: usize,
}

pub fn sample_u2(ctx: &Context, args: &SampleU2Args) -> Outcome {
    let mut headers = vec!["index", "alpha", "psi", "chi", "xi", "theta1_deg", "theta2_deg", "theta3_deg", "residual"];
    headers.extend(["u00_re", "u00_im", "u01_re", "u01_im", "u10_re", "u10_im", "u11_re", "u11_im"]);
    let mut a = Artifact::new(ctx.manifest(vec![], vec!["haar".into()], &[])?, ctx.decimals(DEFAULT_DECIMALS), &headers);
    for i in 0..args.count {
        let (p, u) = sample_haar_u2(&mut trial_rng(ctx.global.seed, i as u64));
        let angles = qhq_decompose(&u)?;
        let [t1, t2, t3] = angles.degrees();
        let mut row: Vec<Cell> = vec![
            i.into(),
            p.alpha.into(),
            p.psi.into(),
            p.chi.into(),
            p.xi.into(),
            t1.into(),
            t2.into(),
            t3.into(),
            Cell::Text(format!("{:.3e}", angles.residual)),
        ];
        for z in [u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]] {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        a.row(row);
    }
    a.summary("count", args.count);
    Ok((a, true))
}

#[derive(Args, Debug, Serialize)]
pub struct DipFitArgs {
    /// CSV of `delay,coincidence` samples; synthetic data when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Relative noise of the synthetic data.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
}

/// Dip used for synthetic data: visibility 0.968.
fn synthetic_model() -> DipModel {
    DipModel::new(1.0, 0.968, 0.5, 0.3, 2.0).expect("valid reference dip")
}

pub fn dip_fit(ctx: &Context, args: &DipFitArgs) -> Outcome {
    let mut inputs = Vec::new();
    let text;
    let samples = match &args.input {
        Some(path) => {
            text = read_text(path)?;
            inputs.push(("samples", text.as_str()));
            parse_samples(&text, &path.display().to_string())?
        }
        None => {
            let noise = Normal::new(0.0, args.noise).map_err(|e| CliError::Input(format!("noise: {e}")))?;
            let mut rng = trial_rng(ctx.global.seed, 0);
            dip_curve(&synthetic_model(), -8.0, 8.0, 201)
                .into_iter()
                .map(|(x, y)| (x, y * (1.0 + noise.sample(&mut rng))))
                .collect()
        }
    };
    let fit = fit_hom_dip(&samples)?;
    let rms = (samples.iter().map(|&(x, y)| (hom_dip(x, &fit) - y).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();
    let mut a = Artifact::new(
        ctx.manifest(vec![], vec!["gaussian-sinc".into()], &inputs)?,
        ctx.decimals(DEFAULT_DECIMALS),
        &["x", "y", "model"],
    );
    for (k, v) in [("a", fit.a), ("b", fit.b), ("sigma", fit.sigma), ("x0", fit.x0), ("k", fit.k), ("visibility", fit.visibility), ("rms", rms)] {
        a.summary(k, v);
    }
    a.summary("samples", samples.len());
    for &(x, y) in &samples {
        a.row(vec![x.into(), y.into(), hom_dip(x, &fit).into()]);
    }
    Ok((a, true))
}
