use semiclassic::closed_form::{picard_vessiot_report, quadrature_J};
use semiclassic::propagator::analytic;
use semiclassic::{
    compute_action, det_j, exact_kernel_forced, exact_kernel_free, exact_kernel_ho, focal_scan, integrate_ivp, k_wkb,
    propagate_wavepacket, solve_bvp_shooting, BvpProblem, ClassicalTrajectory, Complex64, DVector, Error,
    GaugeReduction, KernelTable, KernelTableConfig, PotentialFamily, ShootingConfig, Warning, WavepacketGrid,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutDir;

#[derive(Debug, Clone, Copy, Default)]
pub struct Flags {
    pub oracle: bool,
    pub strict: bool,
}

fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im, "modulus": z.norm() })
}

/// Shooting with a singular Newton Jacobian reported as a focal point at `t₁`.
fn shoot(run: &RunConfig, bvp: &BvpProblem, cfg: &ShootingConfig) -> CliResult<ClassicalTrajectory> {
    solve_bvp_shooting(&run.spec, bvp, cfg).map_err(|e| match e {
        Error::SingularShootingJacobian { det_j, .. } => Error::FocalPoint { time: bvp.t1, det_j }.into(),
        other => other.into(),
    })
}

/// Boundary-value path when `problem.x1` is set, initial-value path otherwise.
fn trajectory(run: &RunConfig) -> CliResult<ClassicalTrajectory> {
    if run.x1.is_some() {
        shoot(run, &run.bvp()?, &run.shooting)
    } else {
        Ok(integrate_ivp(&run.spec, &run.initial_state()?, run.t1()?, run.tol)?)
    }
}

fn require_1d(run: &RunConfig) -> CliResult<f64> {
    Ok(run.spec.scalar_mass()?)
}

pub fn cmd_path(run: &RunConfig, out: &OutDir) -> CliResult<Value> {
    let bvp = run.bvp()?;
    let traj = shoot(run, &bvp, &run.shooting)?;
    let report = traj.shooting().expect("shooting attaches a report");
    out.write_with("path.csv", |w| traj.write_csv(w))?;
    let summary = json!({
        "command": "path",
        "y0": traj.initial_state().y.as_slice(),
        "S": compute_action(&traj),
        "converged": true,
        "iterations": report.iterations,
        "residual": report.residual,
        "energy_drift": traj.energy_drift(),
        "config": run.flat.to_json(),
    });
    out.write_json("path.json", &summary)?;
    Ok(summary)
}

pub fn cmd_detj(run: &RunConfig, out: &OutDir) -> CliResult<Value> {
    let traj = trajectory(run)?;
    let n_grid = run.grid.unwrap_or(64);
    let scan = focal_scan(&traj, n_grid)?;
    out.write_with("detj.csv", |w| scan.write_csv(w))?;
    let mut summary = scan.summary_json();
    summary["command"] = json!("detj");
    summary["n_grid"] = json!(n_grid);
    summary["config"] = run.flat.to_json();
    out.write_json("detj.json", &summary)?;
    Ok(summary)
}

/// Exact kernel for quadratic Hamiltonians with a common mass.
fn oracle(run: &RunConfig, bvp: &BvpProblem) -> CliResult<Option<Complex64>> {
    let mass = run.spec.mass();
    if mass.iter().any(|&m| m != mass[0]) {
        return Ok(None);
    }
    let m = mass[0];
    Ok(match (run.spec.potential(), run.spec.drive()) {
        (PotentialFamily::Free, None) => Some(exact_kernel_free(m, run.hbar, bvp)),
        (PotentialFamily::Harmonic { omega }, None) => Some(exact_kernel_ho(m, *omega, run.hbar, bvp)?),
        (PotentialFamily::Harmonic { omega }, Some(d)) => {
            Some(exact_kernel_forced(m, *omega, d, run.hbar, bvp, &run.shooting)?)
        }
        _ => None,
    })
}

pub fn cmd_kernel(run: &RunConfig, out: &OutDir, flags: Flags) -> CliResult<Value> {
    let bvp = run.bvp()?;
    let result = k_wkb(&run.spec, &bvp, run.hbar, &run.shooting)?;
    let mut summary = result.to_json();
    summary["command"] = json!("kernel");
    if flags.oracle {
        match oracle(run, &bvp)? {
            Some(exact) => {
                summary["oracle"] = complex(exact);
                summary["deviation"] = json!((result.amplitude - exact).norm() / exact.norm());
            }
            None => summary["oracle"] = Value::Null,
        }
    }

    if let Some(grid) = run.kernel_grid()? {
        require_1d(run)?;
        let mut header = vec!["x", "re", "im", "modulus", "action", "det_j"];
        if flags.oracle {
            header.extend(["exact_re", "exact_im", "deviation"]);
        }
        let mut rows = Vec::with_capacity(grid.points);
        // continue the initial momentum along the grid
        let mut guess: Option<DVector<f64>> = None;
        for x in grid.coords() {
            let p = BvpProblem::new(run.x0.clone(), DVector::from_element(1, x), run.t0, run.t1()?)?;
            let cfg = match guess.take() {
                Some(g) => run.shooting.clone().with_guess(g),
                None => run.shooting.clone(),
            };
            let traj = shoot(run, &p, &cfg)?;
            let y0 = traj.initial_state().y;
            let k = k_wkb(&run.spec, &p, run.hbar, &run.shooting.clone().with_guess(y0.clone()))?;
            guess = Some(y0);
            let z = k.amplitude;
            let mut row = vec![x, z.re, z.im, z.norm(), k.action, k.det_j];
            if flags.oracle {
                match oracle(run, &p)? {
                    Some(e) => row.extend([e.re, e.im, (z - e).norm() / e.norm()]),
                    None => row.extend([f64::NAN; 3]),
                }
            }
            rows.push(row);
        }
        out.write_csv("kernel.csv", &header, &rows)?;
        summary["grid_points"] = json!(grid.points);
    }
    summary["config"] = run.flat.to_json();
    out.write_json("kernel.json", &summary)?;
    Ok(summary)
}

pub fn cmd_evolve(run: &RunConfig, out: &OutDir, flags: Flags) -> CliResult<Value> {
    let m = require_1d(run)?;
    let ev = run.evolve()?;
    let g = ev.grid;
    let psi0 = WavepacketGrid::gaussian(
        g.x_min,
        g.x_max,
        g.points,
        ev.center,
        ev.sigma,
        ev.momentum,
        run.hbar,
        run.t0,
    )?;
    let coherent = match (run.spec.potential(), run.spec.drive()) {
        (PotentialFamily::Harmonic { omega }, None) => {
            let s = analytic::coherent_width(m, *omega, run.hbar);
            ((ev.sigma - s).abs() <= 1e-12 * s).then_some(*omega)
        }
        _ => None,
    };
    let free = matches!(run.spec.potential(), PotentialFamily::Free);
    let table_cfg = KernelTableConfig {
        x_range: (g.x_min, g.x_max),
        x_nodes: ev.table_nodes,
        x0_range: (g.x_min, g.x_max),
        x0_nodes: ev.table_nodes,
        shooting: run.shooting.clone(),
    };

    let mut rows = Vec::new();
    let mut per_time = Vec::new();
    let mut leaks: Vec<Warning> = Vec::new();
    for (k, &t) in ev.times.iter().enumerate() {
        let table = KernelTable::build(&run.spec, run.hbar, run.t0, t, &table_cfg)?;
        let res = propagate_wavepacket(|x, x0| table.eval(x, x0), &psi0, t);
        let psi = &res.psi;
        let dt = t - run.t0;
        let exact = if free {
            Some(WavepacketGrid::from_fn(g.x_min, g.x_max, g.points, t, |x| {
                analytic::free_gaussian(x, dt, m, run.hbar, ev.center, ev.sigma, ev.momentum)
            })?)
        } else if let Some(w) = coherent {
            Some(WavepacketGrid::from_fn(g.x_min, g.x_max, g.points, t, |x| {
                analytic::coherent_state(x, dt, m, w, run.hbar, ev.center, ev.momentum)
            })?)
        } else {
            None
        };
        let oracle_l2 = exact.as_ref().map(|e| psi.l2_distance(e));
        let analytic_width = free.then(|| analytic::free_gaussian_width(dt, m, run.hbar, ev.sigma));
        let name = format!("psi_{k:03}.csv");
        out.write_with(&name, |w| psi.write_csv(w))?;
        rows.push(vec![
            t,
            psi.norm(),
            psi.mean_position(),
            psi.width(),
            analytic_width.unwrap_or(f64::NAN),
            oracle_l2.unwrap_or(f64::NAN),
        ]);
        per_time.push(json!({
            "t": t,
            "file": name,
            "norm": psi.norm(),
            "mean": psi.mean_position(),
            "width": psi.width(),
            "analytic_width": analytic_width,
            "oracle_l2_error": oracle_l2,
            "warnings": res.warnings,
        }));
        leaks.extend(res.warnings);
    }
    out.write_csv(
        "evolve.csv",
        &["t", "norm", "mean", "width", "analytic_width", "oracle_l2_error"],
        &rows,
    )?;
    let summary = json!({
        "command": "evolve",
        "initial_norm": psi0.norm(),
        "times": per_time,
        "config": run.flat.to_json(),
    });
    out.write_json("evolve.json", &summary)?;
    if flags.strict && !leaks.is_empty() {
        return Err(CliError::Strict { warnings: leaks });
    }
    Ok(summary)
}

pub fn cmd_reduce(run: &RunConfig, out: &OutDir) -> CliResult<Value> {
    require_1d(run)?;
    let traj = trajectory(run)?;
    let red = GaugeReduction::build(&traj, run.grid.unwrap_or(50))?;
    out.write_with("reduce.csv", |w| red.write_csv(w))?;
    let t1 = traj.t1();
    let q = quadrature_J(&traj, t1)?;
    let d = det_j(&traj, t1)?;
    let rel = (q - d).abs() / d.abs();
    out.write_csv(
        "reduce_compare.csv",
        &["t", "quadrature_j", "det_j", "rel_deviation"],
        &[vec![t1, q, d, rel]],
    )?;
    let summary = json!({
        "command": "reduce",
        "structure_residual": red.structure_residual(),
        "comparison": { "t": t1, "quadrature_j": q, "det_j": d, "rel_deviation": rel },
        "picard_vessiot": picard_vessiot_report(&traj, t1)?,
        "config": run.flat.to_json(),
    });
    out.write_json("reduce.json", &summary)?;
    Ok(summary)
}
