//! The implicit-Euler step and scripted-sequence driver.

use crate::contact::{broad_phase, build_friction_anchors, narrow_phase, ContactSet};
use crate::energy::{
    accumulate_barrier, accumulate_elastic, accumulate_friction, accumulate_inertia,
    quadform_barrier, quadform_elastic, quadform_friction, quadform_inertia, EnergyReport,
    Material,
};
use crate::error::{Error, Result};
use crate::geometry::{extract_surface, signed_distance_to_shell, ShellNormals, SurfaceMesh, TetMesh};
use crate::math::{dot, inf_norm, Pose, Vec3};
use crate::solver::pncg::{dk_direction_into, step_size, StepSize};
use crate::solver::{RigidScript, SolverConfig};

/// Deformable gel pad bundled with its extracted surface, material, and
/// lumped node masses.
#[derive(Debug, Clone)]
pub struct DeformableBody {
    pub mesh: TetMesh,
    pub surface: SurfaceMesh,
    pub material: Material,
    pub masses: Vec<f64>,
}

impl DeformableBody {
    pub fn new(mesh: TetMesh, material: Material) -> Self {
        let surface = extract_surface(&mesh);
        let masses = mesh.lumped_masses(material.rho);
        DeformableBody {
            mesh,
            surface,
            material,
            masses,
        }
    }
}

/// Rigid indenter shell in its local frame with precomputed pseudonormals.
#[derive(Debug, Clone)]
pub struct RigidCollider {
    pub shell: SurfaceMesh,
    pub normals: ShellNormals,
}

impl RigidCollider {
    pub fn new(shell: SurfaceMesh) -> Result<Self> {
        shell.check_watertight()?;
        let normals = ShellNormals::build(&shell);
        Ok(RigidCollider { shell, normals })
    }

    pub fn posed_positions(&self, pose: &Pose) -> Vec<Vec3> {
        self.shell.vertices.iter().map(|v| pose.apply(v)).collect()
    }
}

/// Nodal positions and velocities at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub x: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub t: f64,
}

impl SimState {
    pub fn at_rest(mesh: &TetMesh) -> Self {
        SimState {
            x: mesh.vertices.clone(),
            v: vec![Vec3::zeros(); mesh.vertices.len()],
            t: 0.0,
        }
    }
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct StepDiagnostics {
    pub iterations: usize,
    pub backtracks: usize,
    pub grad_inf_norm: f64,
    pub energy_start: f64,
    pub energy_end: f64,
    /// Signed minimum distance of deformable surface vertices to the rigid
    /// shell after the step; +inf without a collider.
    pub min_signed_distance: f64,
    pub contact_pairs: usize,
    /// Largest per-iteration displacement over the solve.
    pub max_dx_inf: f64,
}

/// One scripted rigid motion for a single solve: the collider moves from
/// `prev_pose` to `pose` at the start of the step and stays there.
pub struct RigidStep<'a> {
    pub collider: &'a RigidCollider,
    pub prev_pose: Pose,
    pub pose: Pose,
}

const MAX_BACKTRACKS: usize = 4;
const DETECT_FACTOR: f64 = 2.0;

struct Workspace {
    report: EnergyReport,
    trial_report: EnergyReport,
    g: Vec<f64>,
    g_prev: Vec<f64>,
    p: Vec<f64>,
    precond: Vec<f64>,
    p3: Vec<Vec3>,
    x_trial: Vec<Vec3>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            report: EnergyReport::zeros(n),
            trial_report: EnergyReport::zeros(n),
            g: vec![0.0; 3 * n],
            g_prev: vec![0.0; 3 * n],
            p: vec![0.0; 3 * n],
            precond: vec![0.0; 3 * n],
            p3: vec![Vec3::zeros(); n],
            x_trial: vec![Vec3::zeros(); n],
        }
    }
}

fn assemble(
    body: &DeformableBody,
    x: &[Vec3],
    xhat: &[Vec3],
    x_t: &[Vec3],
    set: Option<&ContactSet>,
    cfg: &SolverConfig,
    h: f64,
    out: &mut EnergyReport,
) -> Result<()> {
    out.reset();
    accumulate_inertia(x, xhat, &body.masses, out);
    accumulate_elastic(&body.mesh, x, &body.material, h, out);
    if let Some(set) = set {
        accumulate_barrier(set, x, &cfg.barrier, out)?;
        accumulate_friction(set, x, x_t, &cfg.friction, out);
    }
    if !out.value.is_finite() {
        return Err(Error::NonFinite("step energy"));
    }
    Ok(())
}

fn quadform_total(
    body: &DeformableBody,
    x: &[Vec3],
    x_t: &[Vec3],
    set: Option<&ContactSet>,
    cfg: &SolverConfig,
    h: f64,
    p: &[Vec3],
) -> f64 {
    let mut q = quadform_inertia(&body.masses, p) + quadform_elastic(&body.mesh, x, &body.material, h, p);
    if let Some(set) = set {
        q += quadform_barrier(set, x, &cfg.barrier, p);
        q += quadform_friction(set, &cfg.friction, x, x_t, p);
    }
    q
}

/// Signed minimum distance of the deformable surface vertices to a posed
/// shell. Exact per-triangle distances with pseudonormal sign.
pub fn min_signed_distance(
    body: &DeformableBody,
    x: &[Vec3],
    collider: &RigidCollider,
    pose: &Pose,
) -> f64 {
    let posed = collider.posed_positions(pose);
    let normals = collider.normals.rotated(&pose.orientation);
    let mut min = f64::INFINITY;
    for &node in &body.surface.volume_map {
        let d = signed_distance_to_shell(&x[node], &collider.shell, &posed, &normals);
        min = min.min(d);
    }
    min
}

/// Advance one implicit-Euler step of size `cfg.h` (callers substep by
/// adjusting the config).
///
/// Contact topology is detected once at the step start, with the rigid shell
/// already jammed to its end-of-step pose; friction anchors are frozen
/// there. Inner iterations recompute distances on the frozen pairs, move by
/// preconditioned Dai-Kou directions, and can never travel more than
/// `dhat/2` per iteration, so fresh pairs cannot be missed mid-solve.
pub fn implicit_euler_step(
    state: &SimState,
    body: &DeformableBody,
    cfg: &SolverConfig,
    rigid: Option<&RigidStep<'_>>,
) -> Result<(SimState, StepDiagnostics)> {
    cfg.validate()?;
    let n = body.mesh.vertex_count();
    assert_eq!(state.x.len(), n, "state does not match mesh");
    let h = cfg.h;
    let x_t = &state.x;

    // Inertial prediction; pinned nodes stay put.
    let mut xhat = Vec::with_capacity(n);
    for i in 0..n {
        if body.mesh.dirichlet.contains(&i) {
            xhat.push(x_t[i]);
        } else {
            let mut target = x_t[i] + h * state.v[i];
            if let Some(g) = cfg.gravity {
                target += h * h * g;
            }
            xhat.push(target);
        }
    }

    // Contact set at the step start, rigid at its end-of-step pose.
    let contact_set = match rigid {
        None => None,
        Some(rs) => {
            let pre_gap = min_signed_distance(body, x_t, rs.collider, &rs.pose);
            if pre_gap <= 0.0 {
                return Err(Error::FeasibilityViolation(format!(
                    "rigid jam penetrates the surface (min signed distance {pre_gap:e})"
                )));
            }
            let surf_x: Vec<Vec3> = body
                .surface
                .volume_map
                .iter()
                .map(|&i| x_t[i])
                .collect();
            let rigid_x = rs.collider.posed_positions(&rs.pose);
            let detect = DETECT_FACTOR * cfg.barrier.dhat;
            let cands = broad_phase(&body.surface, &surf_x, &rs.collider.shell, &rigid_x, detect);
            let set = narrow_phase(
                &cands,
                &body.surface,
                &surf_x,
                &rs.collider.shell,
                &rigid_x,
                detect,
            )?;
            let mut set = build_friction_anchors(set, x_t, &cfg.barrier);
            set.set_rigid_step_motion(&rs.prev_pose, &rs.pose);
            Some(set)
        }
    };
    let set_ref = contact_set.as_ref();

    let mut ws = Workspace::new(n);
    let mut x = x_t.clone();
    assemble(body, &x, &xhat, x_t, set_ref, cfg, h, &mut ws.report)?;
    let energy_start = ws.report.value;

    let mut have_history = false;
    let mut p_prev: Vec<f64> = vec![0.0; 3 * n];
    let mut iterations = 0;
    let mut backtracks = 0;
    let mut max_dx_inf: f64 = 0.0;
    let mut force_steepest = false;

    for _ in 0..cfg.max_iters {
        // Flatten the gradient, projecting out pinned nodes, and build the
        // Jacobi preconditioner.
        for i in 0..n {
            let pinned = body.mesh.dirichlet.contains(&i);
            for a in 0..3 {
                let d = 3 * i + a;
                ws.g[d] = if pinned { 0.0 } else { ws.report.gradient[i][a] };
                let diag = ws.report.diag_hessian[i][a];
                ws.precond[d] = 1.0 / diag.max(1e-300);
            }
        }
        if inf_norm(&ws.g) == 0.0 {
            break;
        }

        let steepest = force_steepest || !have_history;
        if steepest {
            dk_direction_into(&ws.g, &ws.precond, None, &mut ws.p);
        } else {
            let (gp, pp) = (&ws.g_prev, &p_prev);
            dk_direction_into(&ws.g, &ws.precond, Some((gp, pp)), &mut ws.p);
            if dot(&ws.g, &ws.p) >= 0.0 {
                dk_direction_into(&ws.g, &ws.precond, None, &mut ws.p);
            }
        }
        force_steepest = false;

        for i in 0..n {
            ws.p3[i] = Vec3::new(ws.p[3 * i], ws.p[3 * i + 1], ws.p[3 * i + 2]);
        }
        let q = quadform_total(body, &x, x_t, set_ref, cfg, h, &ws.p3);
        let mut alpha = match step_size(&ws.g, &ws.p, q, cfg.barrier.dhat) {
            StepSize::Converged => break,
            StepSize::Alpha { alpha, .. } => alpha,
        };
        if alpha <= 0.0 {
            // Ascent from indefinite curvature: restart along -Pg with the
            // capped step.
            dk_direction_into(&ws.g, &ws.precond, None, &mut ws.p);
            for i in 0..n {
                ws.p3[i] = Vec3::new(ws.p[3 * i], ws.p[3 * i + 1], ws.p[3 * i + 2]);
            }
            alpha = cfg.barrier.dhat / (2.0 * inf_norm(&ws.p));
            while alpha * inf_norm(&ws.p) > 0.5 * cfg.barrier.dhat {
                alpha = f64::from_bits(alpha.to_bits() - 1);
            }
            have_history = false;
        }

        // Monotone acceptance: halve on energy increase or infeasible trial.
        let e0 = ws.report.value;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACKS {
            for i in 0..n {
                ws.x_trial[i] = x[i] + alpha * ws.p3[i];
            }
            match assemble(body, &ws.x_trial, &xhat, x_t, set_ref, cfg, h, &mut ws.trial_report) {
                Ok(()) if ws.trial_report.value <= e0 => {
                    accepted = true;
                    break;
                }
                _ => {
                    alpha *= 0.5;
                    backtracks += 1;
                }
            }
        }
        if !accepted {
            if steepest {
                // Cannot decrease even along steepest descent: numerically
                // at a minimum.
                break;
            }
            force_steepest = true;
            have_history = false;
            continue;
        }

        ws.g_prev.copy_from_slice(&ws.g);
        p_prev.copy_from_slice(&ws.p);
        have_history = true;
        std::mem::swap(&mut x, &mut ws.x_trial);
        std::mem::swap(&mut ws.report, &mut ws.trial_report);
        iterations += 1;

        let dx_inf = alpha * inf_norm(&ws.p);
        max_dx_inf = max_dx_inf.max(dx_inf);
        if dx_inf < cfg.tol_dx {
            break;
        }
    }

    let min_dist = match rigid {
        None => f64::INFINITY,
        Some(rs) => min_signed_distance(body, &x, rs.collider, &rs.pose),
    };
    if min_dist <= 0.0 {
        return Err(Error::SolverAbort {
            step: 0,
            reason: format!("post-solve penetration, min signed distance {min_dist:e}"),
        });
    }

    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        v.push((x[i] - x_t[i]) / h);
    }
    let diag = StepDiagnostics {
        iterations,
        backtracks,
        grad_inf_norm: inf_norm(&ws.g),
        energy_start,
        energy_end: ws.report.value,
        min_signed_distance: min_dist,
        contact_pairs: set_ref.map_or(0, |s| s.pairs.len()),
        max_dx_inf,
    };
    Ok((
        SimState {
            x,
            v,
            t: state.t + h,
        },
        diag,
    ))
}

/// One output frame of a scripted run.
#[derive(Debug, Clone)]
pub struct FrameResult {
    pub state: SimState,
    pub steps: Vec<StepDiagnostics>,
}

/// Drive the solver through a rigid script, substepping so the scripted
/// boundary never moves more than `dhat/2` per solve. Returns one result per
/// script frame (the initial state alone for an empty script).
pub fn simulate_sequence(
    initial: &SimState,
    body: &DeformableBody,
    collider: Option<(&RigidCollider, Pose)>,
    script: &RigidScript,
    cfg: &SolverConfig,
) -> Result<Vec<FrameResult>> {
    cfg.validate()?;
    script.validate()?;
    if script.is_empty() {
        return Ok(vec![FrameResult {
            state: initial.clone(),
            steps: Vec::new(),
        }]);
    }
    let mut results = Vec::with_capacity(script.len());
    let mut state = initial.clone();
    let mut pose = collider.map(|(_, p)| p).unwrap_or_default();

    for (frame_idx, frame) in script.frames.iter().enumerate() {
        let dt = frame.t - state.t;
        if dt <= 0.0 {
            return Err(Error::DiscontinuousScript {
                frame: frame_idx,
                reason: format!("frame time {} is not ahead of state time {}", frame.t, state.t),
            });
        }
        let mut steps = Vec::new();
        match collider {
            None => {
                // No boundary: advance in solver-sized steps.
                let n_sub = (dt / cfg.h).ceil().max(1.0) as usize;
                let h_sub = dt / n_sub as f64;
                let sub_cfg = SolverConfig { h: h_sub, ..*cfg };
                for _ in 0..n_sub {
                    let (next, diag) = implicit_euler_step(&state, body, &sub_cfg, None)
                        .map_err(|e| step_error(e, frame_idx))?;
                    state = next;
                    steps.push(diag);
                }
            }
            Some((rigid, _)) => {
                let n_sub = substep_count(rigid, &pose, &frame.pose, dt, cfg);
                for k in 0..n_sub {
                    let s0 = k as f64 / n_sub as f64;
                    let s1 = (k + 1) as f64 / n_sub as f64;
                    let pose_a = pose.interpolate(&frame.pose, s0);
                    let pose_b = pose.interpolate(&frame.pose, s1);
                    let h_sub = dt / n_sub as f64;
                    advance_substep(
                        &mut state,
                        body,
                        rigid,
                        &pose_a,
                        &pose_b,
                        h_sub,
                        cfg,
                        frame_idx,
                        0,
                        &mut steps,
                    )?;
                }
                pose = frame.pose;
            }
        }
        results.push(FrameResult {
            state: state.clone(),
            steps,
        });
    }
    Ok(results)
}

fn step_error(e: Error, frame: usize) -> Error {
    match e {
        Error::SolverAbort { reason, .. } => Error::SolverAbort {
            step: frame,
            reason,
        },
        other => other,
    }
}

/// Substeps so both the solver step size and the boundary displacement bound
/// hold on every piece.
fn substep_count(
    rigid: &RigidCollider,
    from: &Pose,
    to: &Pose,
    dt: f64,
    cfg: &SolverConfig,
) -> usize {
    let mut n = (dt / cfg.h).ceil().max(1.0) as usize;
    let half_dhat = 0.5 * cfg.barrier.dhat;
    loop {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let a = from.interpolate(to, k as f64 / n as f64);
            let b = from.interpolate(to, (k + 1) as f64 / n as f64);
            let disp = rigid
                .shell
                .vertices
                .iter()
                .map(|v| (b.apply(v) - a.apply(v)).norm())
                .fold(0.0, f64::max);
            worst = worst.max(disp);
        }
        if worst <= half_dhat || n >= 1 << 22 {
            return n;
        }
        // Scale directly to the violating ratio (at least double).
        let scale = (worst / half_dhat).ceil() as usize;
        n = (n * scale.max(2)).min(1 << 22);
    }
}

/// Run one substep; on a rigid-jam feasibility violation, split the motion
/// in half recursively (the standing gap is positive, so small enough jams
/// always succeed).
#[allow(clippy::too_many_arguments)]
fn advance_substep(
    state: &mut SimState,
    body: &DeformableBody,
    rigid: &RigidCollider,
    pose_a: &Pose,
    pose_b: &Pose,
    dt: f64,
    cfg: &SolverConfig,
    frame_idx: usize,
    depth: usize,
    steps: &mut Vec<StepDiagnostics>,
) -> Result<()> {
    let sub_cfg = SolverConfig { h: dt, ..*cfg };
    let rs = RigidStep {
        collider: rigid,
        prev_pose: *pose_a,
        pose: *pose_b,
    };
    match implicit_euler_step(state, body, &sub_cfg, Some(&rs)) {
        Ok((next, diag)) => {
            *state = next;
            steps.push(diag);
            Ok(())
        }
        Err(Error::FeasibilityViolation(_)) if depth < 16 => {
            let mid = pose_a.interpolate(pose_b, 0.5);
            advance_substep(
                state, body, rigid, pose_a, &mid, 0.5 * dt, cfg, frame_idx, depth + 1, steps,
            )?;
            advance_substep(
                state, body, rigid, &mid, pose_b, 0.5 * dt, cfg, frame_idx, depth + 1, steps,
            )
        }
        Err(e) => Err(step_error(e, frame_idx)),
    }
}
