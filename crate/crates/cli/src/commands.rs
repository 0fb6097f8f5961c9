use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use opscaling::channels::{random_density, seeded_rng};
use opscaling::divergences::{central_difference_quotient, divergence};
use opscaling::fixtures::reference_rho0;
use opscaling::io::{self, MatrixFile, Payload};
use opscaling::scaling::{alternating_projections, capacity_from_trace, neg_log_capacity, operator_sinkhorn};
use opscaling::{
    ChoiMatrix, DensityMatrix, DivergenceTag, Ensemble, Error, HermitianMatrix, Method, ScalingConfig, ScalingTrace,
    Targets,
};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{emit, float, write_file, Csv};
use crate::{Cli, CliError, Command, Source};

type CliResult<T> = Result<T, CliError>;

/// `n,m` or `nxm`.
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split([',', 'x']).map(str::trim).collect();
    let [n, m] = parts.as_slice() else {
        return Err(format!("expected n,m, got {s:?}"));
    };
    let n: usize = n.parse().map_err(|e| format!("{n:?}: {e}"))?;
    let m: usize = m.parse().map_err(|e| format!("{m:?}: {e}"))?;
    if n == 0 || m == 0 {
        return Err("dimensions must be at least 1".into());
    }
    Ok((n, m))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Scale { source, method, fixed_iters } => {
            let method = Method::from_str(method)?;
            scale(cli, source, method, *fixed_iters || source.paper_rho0)
        }
        Command::Compare { source, fixed_iters } => compare(cli, source, *fixed_iters || source.paper_rho0),
        Command::Diffquot { source, tag, direction } => {
            diffquot(cli, source, DivergenceTag::from_str(tag)?, direction.as_deref())
        }
        Command::CapacityScatter { trials, tags, dims, diagonal } => {
            let tags = tags.iter().map(|t| DivergenceTag::from_str(t)).collect::<Result<Vec<_>, _>>()?;
            capacity_scatter(cli, *trials, &tags, *dims, *diagonal)
        }
        Command::Gen { dims, kind, diagonal } => gen(cli, *dims, kind, *diagonal),
    }
}

fn ensemble(cli: &Cli) -> Ensemble {
    if cli.real {
        Ensemble::Real
    } else {
        Ensemble::Complex
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_hermitian(path: &Path) -> CliResult<HermitianMatrix> {
    Ok(io::parse(&read(path)?)?.hermitian().clone())
}

fn diagonal_part(h: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(&h.real_diagonal())
}

fn initial_choi(cli: &Cli, source: &Source) -> CliResult<ChoiMatrix> {
    let (n, m) = source.dims;
    let choi = if source.paper_rho0 {
        ChoiMatrix::new(2, 2, reference_rho0().into_hermitian())?
    } else if let Some(path) = &source.input {
        match io::parse(&read(path)?)? {
            Payload::Choi(c) => c,
            other => {
                let h = other.hermitian().clone();
                if h.dim() != n * m {
                    return Err(Error::DimensionMismatch(format!(
                        "{0}x{0} input does not fit --dims {n},{m}",
                        h.dim()
                    ))
                    .into());
                }
                ChoiMatrix::new(n, m, h)?
            }
        }
    } else {
        let rho = random_density(n * m, ensemble(cli), &mut seeded_rng(cli.seed))?;
        ChoiMatrix::new(n, m, rho.into_hermitian())?
    };
    if source.diagonal {
        Ok(choi.with_matrix(diagonal_part(choi.matrix()))?)
    } else {
        Ok(choi)
    }
}

fn targets(cli: &Cli, n: usize, m: usize) -> CliResult<Option<Targets>> {
    if cli.target_p.is_none() && cli.target_q.is_none() {
        return Ok(None);
    }
    let uniform = Targets::uniform(n, m);
    let p = match &cli.target_p {
        Some(path) => read_hermitian(path)?,
        None => uniform.p().clone(),
    };
    let q = match &cli.target_q {
        Some(path) => read_hermitian(path)?,
        None => uniform.q().clone(),
    };
    Ok(Some(Targets::new(p, q)?))
}

fn reject_targets(cli: &Cli, command: &str) -> CliResult<()> {
    if cli.target_p.is_some() || cli.target_q.is_some() {
        return Err(Error::Unsupported(format!("{command} runs with uniform marginals only")).into());
    }
    Ok(())
}

fn config(cli: &Cli, targets: Option<Targets>, fixed: bool) -> ScalingConfig {
    ScalingConfig {
        max_iters: cli.max_iters,
        tol: cli.tol,
        targets,
        stop_at_tol: !fixed,
        ..ScalingConfig::default()
    }
}

fn capacity_fields(trace: &ScalingTrace) -> (Option<f64>, Option<f64>) {
    match (capacity_from_trace(trace), neg_log_capacity(trace)) {
        (Ok(cap), Ok(nlc)) => (Some(cap), Some(nlc)),
        _ => (None, None),
    }
}

fn residual_csv(trace: &ScalingTrace) -> String {
    let mut csv = Csv::new(&["iter", "residual"]);
    for (k, r) in trace.residuals.iter().enumerate() {
        csv.row([k.to_string(), float(*r)]);
    }
    csv.into_string()
}

fn scale(cli: &Cli, source: &Source, method: Method, fixed: bool) -> CliResult<()> {
    let choi = initial_choi(cli, source)?;
    let cfg = config(cli, targets(cli, choi.n(), choi.m())?, fixed);
    let trace = alternating_projections(method, &choi, &cfg)?;
    let (capacity, nlc) = capacity_fields(&trace);
    let state = MatrixFile::from_choi(&trace.choi());
    let summary = json!({
        "method": method.to_string(),
        "n": trace.n,
        "m": trace.m,
        "sweeps": trace.sweeps(),
        "converged": trace.converged,
        "final_residual": trace.final_residual(),
        "tol": trace.tol,
        "capacity": capacity,
        "neg_log_capacity": nlc,
    });
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        write_file(&dir.join("state.json"), &io::to_json(&state))?;
        write_file(&dir.join("residuals.csv"), &residual_csv(&trace))?;
        write_file(&dir.join("summary.json"), &format!("{summary:#}\n"))?;
    }
    let mut report = summary;
    report["state"] = serde_json::to_value(&state).expect("matrix files always serialize");
    emit(None, &format!("{report:#}\n"))?;
    if !fixed && !trace.converged {
        return Err(Error::Convergence { iterations: trace.sweeps(), residual: trace.final_residual() }.into());
    }
    Ok(())
}

fn max_entry_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    (a.as_matrix() - b.as_matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn compare(cli: &Cli, source: &Source, fixed: bool) -> CliResult<()> {
    let choi = initial_choi(cli, source)?;
    let cfg = config(cli, targets(cli, choi.n(), choi.m())?, fixed);
    let mut states = Vec::new();
    for method in Method::ALL {
        let trace = alternating_projections(method, &choi, &cfg)?;
        if !fixed && !trace.converged {
            warn!("{method} stopped at residual {:e} after {} sweeps", trace.final_residual(), trace.sweeps());
        }
        states.push((method, trace.final_state().clone()));
    }
    let mut csv = Csv::new(&["method", "row", "col", "re", "im"]);
    for (method, state) in &states {
        for i in 0..state.dim() {
            for j in 0..state.dim() {
                let z = state[(i, j)];
                csv.row([method.to_string(), i.to_string(), j.to_string(), float(z.re), float(z.im)]);
            }
        }
    }
    csv.blank();
    let mut header = vec!["method".to_string()];
    header.extend(states.iter().map(|(m, _)| m.to_string()));
    let mut table = Csv::default();
    table.row(header);
    for (method, a) in &states {
        let mut row = vec![method.to_string()];
        row.extend(states.iter().map(|(_, b)| float(max_entry_distance(a, b))));
        table.row(row);
    }
    csv.append(table);
    emit(cli.out.as_deref(), &csv.into_string())
}

/// `log10 h` for `h = 2^{-k}`, `k = 5, …, 40`.
pub const H_EXPONENTS: std::ops::RangeInclusive<i32> = 5..=40;

fn builtin_direction(dim: usize) -> CliResult<HermitianMatrix> {
    if dim != 4 {
        return Err(Error::InvalidInput(format!(
            "the built-in direction is 4x4; pass --direction for {dim}x{dim} states"
        ))
        .into());
    }
    Ok(HermitianMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]))
}

fn sinkhorn_limit(cli: &Cli, choi: &ChoiMatrix) -> CliResult<ScalingTrace> {
    let trace = operator_sinkhorn(choi, &config(cli, None, false))?;
    if !trace.converged {
        return Err(Error::Convergence { iterations: trace.sweeps(), residual: trace.final_residual() }.into());
    }
    Ok(trace)
}

fn diffquot(cli: &Cli, source: &Source, tag: DivergenceTag, direction: Option<&Path>) -> CliResult<()> {
    reject_targets(cli, "diffquot")?;
    let choi = initial_choi(cli, source)?;
    let trace = sinkhorn_limit(cli, &choi)?;
    let rho0 = &trace.iterates[0];
    let rho_star = trace.final_state();
    let a = match direction {
        Some(path) => read_hermitian(path)?,
        None => builtin_direction(rho0.dim())?,
    };
    let mut csv = Csv::new(&["log10_h", "delta"]);
    for k in H_EXPONENTS {
        let h = 2f64.powi(-k);
        let delta = match central_difference_quotient(tag, rho_star, rho0, &a, h) {
            Ok(d) => d,
            Err(Error::OutsideCone { .. }) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        csv.row([float(h.log10()), float(delta)]);
    }
    emit(cli.out.as_deref(), &csv.into_string())
}

struct TrialRow {
    values: Vec<f64>,
    neg_log_capacity: f64,
    converged: bool,
}

fn scatter_trial(
    cli: &Cli,
    trial: usize,
    tags: &[DivergenceTag],
    n: usize,
    diagonal: bool,
) -> CliResult<TrialRow> {
    let mut rng = seeded_rng(cli.seed.wrapping_add(trial as u64));
    let mut rho = random_density(n * n, ensemble(cli), &mut rng)?;
    if diagonal {
        rho = DensityMatrix::normalized(diagonal_part(&rho))?;
    }
    let choi = ChoiMatrix::new(n, n, rho.into_hermitian())?;
    let trace = operator_sinkhorn(&choi, &config(cli, None, false))?;
    let rho0 = &trace.iterates[0];
    let rho_star = trace.final_state();
    let values = tags
        .iter()
        .map(|&tag| divergence(tag, rho_star, rho0))
        .collect::<Result<Vec<_>, _>>()?;
    let neg_log_capacity = if trace.converged { neg_log_capacity(&trace)? } else { f64::NAN };
    Ok(TrialRow { values, neg_log_capacity, converged: trace.converged })
}

fn capacity_scatter(
    cli: &Cli,
    trials: usize,
    tags: &[DivergenceTag],
    dims: (usize, usize),
    diagonal: bool,
) -> CliResult<()> {
    reject_targets(cli, "capacity-scatter")?;
    let (n, m) = dims;
    if n != m {
        return Err(Error::Unsupported(format!("capacity needs square blocks, got {n},{m}")).into());
    }
    let rows: Vec<TrialRow> = (0..trials)
        .into_par_iter()
        .map(|t| scatter_trial(cli, t, tags, n, diagonal))
        .collect::<CliResult<_>>()?;

    let mut header = vec!["trial".to_string()];
    header.extend(tags.iter().map(|t| t.to_string()));
    header.push("neg_log_capacity".into());
    header.push("converged".into());
    let mut csv = Csv::default();
    csv.row(header);
    for (t, row) in rows.iter().enumerate() {
        let mut fields = vec![t.to_string()];
        fields.extend(row.values.iter().map(|&v| float(v)));
        fields.push(float(row.neg_log_capacity));
        fields.push(u8::from(row.converged).to_string());
        csv.row(fields);
    }
    emit(cli.out.as_deref(), &csv.into_string())?;

    let converged: Vec<&TrialRow> = rows.iter().filter(|r| r.converged).collect();
    if converged.len() < rows.len() {
        warn!("{} of {} trials did not converge and are left out of the summary", rows.len() - converged.len(), rows.len());
    }
    for (k, tag) in tags.iter().enumerate() {
        let mean = converged.iter().map(|r| (r.values[k] - r.neg_log_capacity).abs()).sum::<f64>()
            / converged.len().max(1) as f64;
        info!("mean |D_{tag} - (-log cap)| = {mean:e} over {} trials", converged.len());
        eprintln!("mean |{tag} - neg_log_capacity| = {}", float(mean));
    }
    Ok(())
}

fn gen(cli: &Cli, dims: (usize, usize), kind: &str, diagonal: bool) -> CliResult<()> {
    let (n, m) = dims;
    let mut rho = random_density(n * m, ensemble(cli), &mut seeded_rng(cli.seed))?;
    if diagonal {
        rho = DensityMatrix::normalized(diagonal_part(&rho))?;
    }
    let file = match kind {
        "choi" => MatrixFile::from_choi(&ChoiMatrix::new(n, m, rho.into_hermitian())?),
        "density" => MatrixFile::from_density(&rho),
        other => return Err(Error::Unsupported(format!("unknown kind {other:?}; use choi or density")).into()),
    };
    emit(cli.out.as_deref(), &(io::to_json(&file) + "\n"))
}
