//! Multistart Nelder–Mead maximization of `|⟨K_N⟩|` over the measurement axes.
//!
//! Each axis is parameterized by spherical angles `(θ, φ)`, so directions are
//! unit by construction. The `Reduced` ansatz ties `â_2 = … = â_N` and
//! `b̂_2 = … = b̂_N`, leaving twelve parameters for every `N ≥ 2`.
//!
//! Restarts are independent: restart `r` draws from its own generator stream,
//! so running them in any order or concurrently and reducing with
//! [`select_best`] gives the same answer as [`maximize`].

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use crate::direction::Direction;
use crate::error::{QuasiBellError, Result};
use crate::quasi_bell::QuasiBellInstance;
use crate::sampling::{random_unit, seeded_rng};

/// Largest order [`maximize`] accepts.
pub const MAX_OPTIMIZE_ORDER: usize = 10;

/// Which directions are free parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Ansatz {
    /// All `2(N+1)` directions free.
    Full,
    /// `â_k = â_2` and `b̂_k = b̂_2` for `k ≥ 2`.
    #[default]
    Reduced,
}

/// Settings for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizeConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Simplex spread in objective value at which a local search stops.
    pub tol: f64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    pub ansatz: Ansatz,
}

impl OptimizeConfig {
    /// 64 restarts up to `N = 4`, 256 beyond.
    pub fn for_order(order: usize) -> Self {
        Self {
            restarts: if order <= 4 { 64 } else { 256 },
            seed: 0,
            tol: 1e-9,
            max_evals: 20_000,
            ansatz: Ansatz::Reduced,
        }
    }
}

/// Minimizer found by [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead simplex minimization of `f` from `x0`.
///
/// The initial simplex offsets each coordinate by `step`. Stops when the
/// spread of objective values across the simplex is at most `tol`, or after
/// `max_evals` evaluations (`converged = false`).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut converged = false;

    let towards = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] <= tol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let reflected = towards(&centroid, &simplex[n], -1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < values[0] {
            let expanded = towards(&centroid, &simplex[n], -2.0);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = towards(&centroid, &reflected, 0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c = towards(&centroid, &simplex[n], 0.5);
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = towards(&simplex[0], &simplex[i], 0.5);
                    values[i] = eval(&simplex[i], &mut evals);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("non-empty simplex");
    SimplexResult {
        x: simplex[best].clone(),
        value: values[best],
        evaluations: evals,
        converged,
    }
}

fn free_directions(order: usize, ansatz: Ansatz) -> usize {
    match ansatz {
        Ansatz::Full => order + 1,
        Ansatz::Reduced => (order + 1).min(3),
    }
}

/// Number of spherical angles optimized for `(N, ansatz)`.
pub fn parameter_count(order: usize, ansatz: Ansatz) -> usize {
    4 * free_directions(order, ansatz)
}

/// Instance from `[θ, φ]` pairs, Alice's free directions first.
pub fn instance_from_params(order: usize, ansatz: Ansatz, params: &[f64]) -> QuasiBellInstance {
    let free = free_directions(order, ansatz);
    let dirs: Vec<Direction> = params
        .chunks(2)
        .map(|p| Direction::from_spherical(p[0], p[1]))
        .collect();
    let expand =
        |d: &[Direction]| -> Vec<Direction> { (0..=order).map(|k| d[k.min(free - 1)]).collect() };
    QuasiBellInstance {
        order,
        a_dirs: expand(&dirs[..free]),
        b_dirs: expand(&dirs[free..]),
    }
}

fn params_from_dirs(order: usize, ansatz: Ansatz, inst: &QuasiBellInstance) -> Vec<f64> {
    let free = free_directions(order, ansatz);
    inst.a_dirs[..free]
        .iter()
        .chain(&inst.b_dirs[..free])
        .flat_map(|d| {
            let (t, p) = d.to_spherical();
            [t, p]
        })
        .collect()
}

/// Paper-style starting point: the order-2 optimum, with the third
/// direction repeated for `N > 2` and truncated for `N < 2`.
pub fn seeded_start(order: usize) -> QuasiBellInstance {
    if order == 1 {
        return QuasiBellInstance::chsh();
    }
    let base = QuasiBellInstance::order2_optimum();
    let extend = |d: &[Direction]| -> Vec<Direction> { (0..=order).map(|k| d[k.min(2)]).collect() };
    QuasiBellInstance {
        order,
        a_dirs: extend(&base.a_dirs),
        b_dirs: extend(&base.b_dirs),
    }
}

/// Result of one local search.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RestartOutcome {
    pub restart: usize,
    /// `|⟨K_N⟩|` at the local optimum.
    pub value: f64,
    pub params: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Runs restart `r`: restart 0 starts from [`seeded_start`], the others from
/// directions drawn on generator stream `r` of `cfg.seed`.
pub fn run_restart(order: usize, cfg: &OptimizeConfig, restart: usize) -> RestartOutcome {
    let n = parameter_count(order, cfg.ansatz);
    let mut x = if restart == 0 {
        params_from_dirs(order, cfg.ansatz, &seeded_start(order))
    } else {
        let mut rng = seeded_rng(cfg.seed, restart as u64);
        (0..n / 2)
            .flat_map(|_| {
                let (t, p) = random_unit(&mut rng).to_spherical();
                [t, p]
            })
            .collect()
    };
    let objective = |p: &[f64]| {
        -instance_from_params(order, cfg.ansatz, p)
            .quantum_value()
            .abs()
    };
    let mut evaluations = 0;
    let mut best = f64::INFINITY;
    let mut converged = false;
    let mut step = 0.5;
    // restart the simplex around the incumbent until it stops improving
    while evaluations < cfg.max_evals {
        let r = nelder_mead(objective, &x, step, cfg.tol, cfg.max_evals - evaluations);
        evaluations += r.evaluations;
        let improvement = best - r.value;
        x = r.x;
        best = best.min(r.value);
        if r.converged && improvement <= cfg.tol {
            converged = true;
            break;
        }
        step = 0.1;
    }
    RestartOutcome {
        restart,
        value: -best,
        params: x,
        evaluations,
        converged,
    }
}

/// Highest value, ties broken by the lower restart index.
pub fn select_best(outcomes: &[RestartOutcome]) -> Option<&RestartOutcome> {
    outcomes.iter().reduce(|best, o| {
        if o.value > best.value || (o.value == best.value && o.restart < best.restart) {
            o
        } else {
            best
        }
    })
}

/// Best local optimum over all restarts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizationResult {
    pub order: usize,
    /// Signed `⟨K_N⟩` at the optimum; its magnitude is what was maximized.
    pub best_value: f64,
    /// `â_0…â_N` then `b̂_0…b̂_N`, gauge-fixed by [`gauge_fix`].
    pub best_dirs: Vec<Direction>,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub seed: u64,
    pub ansatz: Ansatz,
    /// The winning local search met the simplex tolerance.
    pub converged: bool,
    /// Some restart ran out of evaluations.
    pub budget_exhausted: bool,
    /// Norm of the finite-difference gradient of `|⟨K_N⟩|` at the optimum.
    pub gradient_norm: f64,
    /// `|⟨K_N⟩|` reached by each restart, in restart order.
    pub restart_values: Vec<f64>,
}

impl OptimizationResult {
    pub fn instance(&self) -> QuasiBellInstance {
        let (a, b) = self.best_dirs.split_at(self.order + 1);
        QuasiBellInstance {
            order: self.order,
            a_dirs: a.to_vec(),
            b_dirs: b.to_vec(),
        }
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_OPTIMIZE_ORDER {
        return Err(QuasiBellError::OutOfRange {
            what: "order",
            value: order as f64,
            lo: 0.0,
            hi: MAX_OPTIMIZE_ORDER as f64,
        });
    }
    Ok(())
}

const POLISH_STEP: f64 = 1e-3;
const POLISH_TOL: f64 = 1e-15;

/// Assembles the [`OptimizationResult`] from restart outcomes produced in any
/// order, after a final tight simplex search around the best one.
pub fn finish(
    order: usize,
    cfg: &OptimizeConfig,
    mut outcomes: Vec<RestartOutcome>,
) -> Result<OptimizationResult> {
    check_order(order)?;
    outcomes.sort_by_key(|o| o.restart);
    let best = select_best(&outcomes).ok_or(QuasiBellError::OutOfRange {
        what: "restarts",
        value: 0.0,
        lo: 1.0,
        hi: f64::INFINITY,
    })?;
    let objective = |p: &[f64]| {
        -instance_from_params(order, cfg.ansatz, p)
            .quantum_value()
            .abs()
    };
    let polished = nelder_mead(
        objective,
        &best.params,
        POLISH_STEP,
        POLISH_TOL,
        cfg.max_evals,
    );
    let params = if -polished.value >= best.value {
        &polished.x
    } else {
        &best.params
    };
    let inst = gauge_fix(&instance_from_params(order, cfg.ansatz, params));
    let stationarity = local_stationarity_check(&inst);
    Ok(OptimizationResult {
        order,
        best_value: inst.quantum_value(),
        best_dirs: inst.a_dirs.iter().chain(&inst.b_dirs).copied().collect(),
        restarts_used: outcomes.len(),
        evaluations: outcomes.iter().map(|o| o.evaluations).sum::<usize>() + polished.evaluations,
        seed: cfg.seed,
        ansatz: cfg.ansatz,
        converged: best.converged,
        budget_exhausted: outcomes.iter().any(|o| !o.converged),
        gradient_norm: stationarity.gradient_norm,
        restart_values: outcomes.iter().map(|o| o.value).collect(),
    })
}

/// Sequential multistart maximization of `|⟨K_N⟩|`.
///
/// Running out of evaluations is not an error: the best point found is
/// returned with `converged = false` / `budget_exhausted = true`.
pub fn maximize(order: usize, cfg: &OptimizeConfig) -> Result<OptimizationResult> {
    check_order(order)?;
    let outcomes = (0..cfg.restarts.max(1))
        .map(|r| run_restart(order, cfg, r))
        .collect();
    finish(order, cfg, outcomes)
}

/// Rotates every direction so that `â_0 = x̂` and `â_1` lies in the
/// `xy`-plane with `y ≥ 0`. Inner products, and so the value, are unchanged.
pub fn gauge_fix(inst: &QuasiBellInstance) -> QuasiBellInstance {
    let e1 = inst.a_dirs[0];
    let candidates = inst.a_dirs[1..]
        .iter()
        .chain(&inst.b_dirs)
        .copied()
        .chain([Direction::X, Direction::Y]);
    let e2 = candidates
        .map(|v| v - e1 * e1.dot(v))
        .find(|v| v.norm() > 1e-6)
        .and_then(Direction::normalized)
        .unwrap_or(Direction::Y);
    let e3 = e1.cross(e2);
    let rotate = |v: &Direction| Direction::new(v.dot(e1), v.dot(e2), v.dot(e3));
    QuasiBellInstance {
        order: inst.order,
        a_dirs: inst.a_dirs.iter().map(rotate).collect(),
        b_dirs: inst.b_dirs.iter().map(rotate).collect(),
    }
}

/// First- and second-order behaviour of `|⟨K_N⟩|` around an instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationarityReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    pub max_abs_gradient: f64,
    /// Eigenvalues of the Hessian, ascending. Three are zero from global rotations.
    pub hessian_eigenvalues: Vec<f64>,
}

impl StationarityReport {
    pub fn min_curvature(&self) -> f64 {
        self.hessian_eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_curvature(&self) -> f64 {
        self.hessian_eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Gradient below `tol` and no direction of positive curvature beyond `tol`.
    pub fn is_local_max(&self, tol: f64) -> bool {
        self.gradient_norm < tol && self.max_curvature() <= tol
    }
}

const GRADIENT_STEP: f64 = 1e-5;
const HESSIAN_STEP: f64 = 1e-4;

/// Moves direction `d` along the great circle with initial velocity
/// `s e1 + t e2`, where `e1`, `e2` are the local polar and azimuthal unit
/// vectors. At `s = t = 0` these are spherical coordinates measured in
/// radians of arc, with the pole singularity removed.
fn perturb(d: Direction, tangent: (Direction, Direction), s: f64, t: f64) -> Direction {
    let v = tangent.0 * s + tangent.1 * t;
    let r = v.norm();
    if r == 0.0 {
        return d;
    }
    d * libm::cos(r) + v * (libm::sin(r) / r)
}

fn tangent_basis(d: Direction) -> (Direction, Direction) {
    let helper = if d.x.abs() < 0.9 {
        Direction::X
    } else {
        Direction::Y
    };
    let e1 = (helper - d * d.dot(helper))
        .normalized()
        .expect("helper not parallel");
    (e1, d.cross(e1))
}

/// Central-difference gradient and Hessian of `|⟨K_N⟩|` in local angular
/// coordinates of every direction (two per axis, `4(N+1)` in all).
pub fn local_stationarity_check(inst: &QuasiBellInstance) -> StationarityReport {
    let dirs: Vec<Direction> = inst.a_dirs.iter().chain(&inst.b_dirs).copied().collect();
    let bases: Vec<_> = dirs.iter().map(|d| tangent_basis(*d)).collect();
    let n = 2 * dirs.len();
    let order = inst.order;
    let sign = if inst.quantum_value() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let eval = |delta: &[(usize, f64)]| -> f64 {
        let mut moved = dirs.clone();
        for &(p, h) in delta {
            let k = p / 2;
            let (s, t) = if p % 2 == 0 { (h, 0.0) } else { (0.0, h) };
            moved[k] = perturb(moved[k], bases[k], s, t);
        }
        let (a, b) = moved.split_at(order + 1);
        sign * QuasiBellInstance {
            order,
            a_dirs: a.to_vec(),
            b_dirs: b.to_vec(),
        }
        .quantum_value()
    };
    let f0 = eval(&[]);
    let gradient: Vec<f64> = (0..n)
        .map(|p| {
            (eval(&[(p, GRADIENT_STEP)]) - eval(&[(p, -GRADIENT_STEP)])) / (2.0 * GRADIENT_STEP)
        })
        .collect();
    let h = HESSIAN_STEP;
    let mut hess = DMatrix::<f64>::zeros(n, n);
    for p in 0..n {
        hess[(p, p)] = (eval(&[(p, h)]) - 2.0 * f0 + eval(&[(p, -h)])) / (h * h);
        for q in p + 1..n {
            let v = (eval(&[(p, h), (q, h)]) - eval(&[(p, h), (q, -h)]) - eval(&[(p, -h), (q, h)])
                + eval(&[(p, -h), (q, -h)]))
                / (4.0 * h * h);
            hess[(p, q)] = v;
            hess[(q, p)] = v;
        }
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(hess)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eig.sort_by(f64::total_cmp);
    let gradient_norm = libm::sqrt(gradient.iter().map(|g| g * g).sum());
    let max_abs_gradient = gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    StationarityReport {
        value: f0,
        gradient,
        gradient_norm,
        max_abs_gradient,
        hessian_eigenvalues: eig,
    }
}

/// How far an optimum is from lying in one plane, and how far the tail
/// directions `k ≥ 2` are from coinciding.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoplanarityReport {
    /// Unit normal of the best-fit plane through the origin.
    pub plane_normal: Direction,
    /// Largest angle (radians) between any direction and that plane.
    pub max_plane_angle: f64,
    /// Largest angle (radians) between `â_k` and `â_m`, `k, m ≥ 2`.
    pub max_tail_angle_a: f64,
    /// Same for Bob's directions.
    pub max_tail_angle_b: f64,
}

fn angle(u: Direction, v: Direction) -> f64 {
    libm::atan2(u.cross(v).norm(), u.dot(v))
}

fn max_tail_angle(dirs: &[Direction]) -> f64 {
    let tail = dirs.get(2..).unwrap_or(&[]);
    let mut m = 0.0f64;
    for (i, u) in tail.iter().enumerate() {
        for v in &tail[i + 1..] {
            m = m.max(angle(*u, *v));
        }
    }
    m
}

/// Plane fit of all optimal directions via the smallest eigenvector of
/// `Σ d dᵀ`, plus the spread of the tail directions.
pub fn coplanarity_report(r: &OptimizationResult) -> CoplanarityReport {
    let mut scatter = Matrix3::<f64>::zeros();
    for d in &r.best_dirs {
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        scatter += v * v.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let k = eig.eigenvalues.imin();
    let n = eig.eigenvectors.column(k);
    let normal = Direction::new(n[0], n[1], n[2]);
    let max_plane_angle = r
        .best_dirs
        .iter()
        .map(|d| libm::asin(d.dot(normal).abs().min(1.0)))
        .fold(0.0, f64::max);
    let (a, b) = r.best_dirs.split_at(r.order + 1);
    CoplanarityReport {
        plane_normal: normal,
        max_plane_angle,
        max_tail_angle_a: max_tail_angle(a),
        max_tail_angle_b: max_tail_angle(b),
    }
}

/// Largest `|⟨K_N⟩|` over `samples` instances with independent uniformly
/// random axes; a crude lower bound on the global maximum.
pub fn random_search(order: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed, u64::MAX);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let a = (0..=order).map(|_| random_unit(&mut rng)).collect();
        let b = (0..=order).map(|_| random_unit(&mut rng)).collect();
        best = best.max(
            QuasiBellInstance {
                order,
                a_dirs: a,
                b_dirs: b,
            }
            .quantum_value()
            .abs(),
        );
    }
    best
}
