//! Complementarity solvers for the discrete variational inequality and the
//! preprocessing solver that absorbs the capacity-singular negative part of
//! the datum into the reported reaction.
//!
//! `solve_lcp` runs projected SOR with a fixed lexicographic sweep order and
//! finishes with a reaction-extraction step: the identified inactive block is
//! solved exactly, so the reaction vanishes off the contact set to
//! factorization roundoff rather than to iteration tolerance.
//!
//! `solve_op` never feeds capacity-singular negative atoms to the LCP: the
//! datum is replaced by its regularized part and the removed component is
//! echoed as the singular reaction. `solve_naive` is the control arm that
//! discretizes the datum as-is.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::band::{Band, SymBand};
use crate::error::{Error, Result};
use crate::grid::NodalFunction;
use crate::measure::{capacity_decompose, jordan_decompose, Measure};
use crate::operator::EllipticOperator;

/// Nodal obstacle; `f64::NEG_INFINITY` marks an unconstrained node.
#[derive(Debug, Clone)]
pub struct Obstacle {
    values: Vec<f64>,
    pub tag: String,
}

impl Obstacle {
    pub fn new(values: Vec<f64>, tag: &str) -> Result<Self> {
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InfeasibleObstacle(
                "obstacle values must be finite or the unconstrained sentinel".into(),
            ));
        }
        Ok(Obstacle {
            values,
            tag: tag.to_string(),
        })
    }

    pub fn constant(n: usize, v: f64, tag: &str) -> Result<Self> {
        Obstacle::new(vec![v; n], tag)
    }

    pub fn unconstrained(n: usize) -> Self {
        Obstacle {
            values: vec![f64::NEG_INFINITY; n],
            tag: "unconstrained".into(),
        }
    }

    pub fn from_nodal(f: &NodalFunction, shift: f64, tag: &str) -> Result<Self> {
        Obstacle::new(f.values().iter().map(|v| v + shift).collect(), tag)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.values[i] > f64::NEG_INFINITY
    }
}

/// Projected-SOR controls. `omega` is the relaxation factor; the iteration
/// stops when a sweep changes no node by more than `delta_tol` and the
/// complementarity residual is below `comp_tol`.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub omega: f64,
    pub delta_tol: f64,
    pub comp_tol: f64,
    pub max_iterations: usize,
    /// Solve the inactive block exactly once the active set settles.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            omega: 1.8,
            delta_tol: 1e-11,
            comp_tol: 1e-10,
            max_iterations: 1_000_000,
            polish: true,
        }
    }
}

impl SolverOptions {
    /// Near-optimal relaxation for the five-point stencil at `n` cells per
    /// unit side.
    pub fn tuned_for(n: usize) -> Self {
        let omega = 2.0 / (1.0 + (std::f64::consts::PI / n as f64).sin());
        SolverOptions {
            omega,
            ..SolverOptions::default()
        }
    }
}

/// Solution of the discrete complementarity problem.
#[derive(Debug, Clone)]
pub struct LcpResult {
    pub u: NodalFunction,
    /// Nodal reaction masses `A u - m`.
    pub reaction: Vec<f64>,
    pub iterations: usize,
    pub comp_residual: f64,
    pub solver: String,
}

/// Solution of the preprocessed obstacle problem.
#[derive(Debug, Clone)]
pub struct OpResult {
    pub u: NodalFunction,
    /// Regular reaction: nodal masses of the LCP reaction.
    pub lambda0: Vec<f64>,
    /// The capacity-singular negative part of the datum, echoed atom for atom.
    pub singular_reaction: Measure,
    pub iterations: usize,
    pub comp_residual: f64,
    pub solver: String,
}

fn comp_residual(u: &[f64], reaction: &[f64], psi: &Obstacle) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..u.len() {
        let c = if psi.is_constrained(i) {
            reaction[i] * (u[i] - psi.values()[i])
        } else {
            reaction[i].abs()
        };
        worst = worst.max(c);
    }
    worst
}

/// Projected SOR for `u >= psi`, `A u - m >= 0`, `(A u - m)^T (u - psi) = 0`,
/// with lexicographic sweeps and a terminal exact solve on the inactive set.
pub fn solve_lcp(
    op: &EllipticOperator,
    load: &[f64],
    psi: &Obstacle,
    opts: &SolverOptions,
) -> Result<LcpResult> {
    let n = op.grid().interior_count();
    if load.len() != n || psi.values().len() != n {
        return Err(Error::InvalidGrid(
            "load or obstacle length does not match the grid".into(),
        ));
    }
    if !(opts.omega > 0.0 && opts.omega < 2.0) {
        return Err(Error::Config(format!(
            "relaxation factor must lie in (0, 2), got {}",
            opts.omega
        )));
    }
    let csr = op.stiffness();
    // feasible start: the projection of zero
    let mut u: Vec<f64> = psi.values().iter().map(|&p| p.max(0.0)).collect();
    let mut iterations = 0usize;
    let mut reaction = vec![0.0; n];
    let mut comp;
    let mut polish_attempts = 0usize;
    loop {
        // PSOR sweeps until both stopping tests hold
        loop {
            if iterations >= opts.max_iterations {
                let delta = sweep(csr, load, psi, opts.omega, &mut u);
                csr.apply(&u, &mut reaction);
                for i in 0..n {
                    reaction[i] -= load[i];
                }
                return Err(Error::SolverDiverged {
                    iterations,
                    delta,
                    comp: comp_residual(&u, &reaction, psi),
                });
            }
            let delta = sweep(csr, load, psi, opts.omega, &mut u);
            iterations += 1;
            if delta < opts.delta_tol {
                csr.apply(&u, &mut reaction);
                for i in 0..n {
                    reaction[i] -= load[i];
                }
                comp = comp_residual(&u, &reaction, psi);
                if comp < opts.comp_tol {
                    break;
                }
            }
        }
        if !opts.polish || polish_attempts >= 3 {
            break;
        }
        // nothing to clean up when the reaction already vanishes off the
        // contact set (e.g. zero loads)
        let off_active_max = (0..n)
            .filter(|&i| !(psi.is_constrained(i) && u[i] <= psi.values()[i] + 1e-12))
            .fold(0.0f64, |m, i| m.max(reaction[i].abs()));
        if comp <= 1e-13 && off_active_max <= 1e-13 {
            break;
        }
        polish_attempts += 1;
        match polish(op, load, psi, &u)? {
            Some((pu, preaction)) => {
                let pcomp = comp_residual(&pu, &preaction, psi);
                u = pu;
                reaction = preaction;
                comp = pcomp;
                break;
            }
            // active set not settled: resume sweeping from the current state
            None => continue,
        }
    }
    Ok(LcpResult {
        u: NodalFunction::new(op.grid(), u),
        reaction,
        iterations,
        comp_residual: comp,
        solver: "psor".into(),
    })
}

fn sweep(
    csr: &crate::operator::Csr,
    load: &[f64],
    psi: &Obstacle,
    omega: f64,
    u: &mut [f64],
) -> f64 {
    let mut delta = 0.0f64;
    for i in 0..u.len() {
        let (cols, vals) = csr.row(i);
        let mut r = load[i];
        let mut diag = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                diag = v;
            }
            r -= v * u[c];
        }
        let mut cand = u[i] + omega * r / diag;
        if psi.is_constrained(i) {
            cand = cand.max(psi.values()[i]);
        }
        delta = delta.max((cand - u[i]).abs());
        u[i] = cand;
    }
    delta
}

/// Exact solve on the inactive block; `None` when the resulting pair violates
/// feasibility or reaction signs, meaning the active set has not settled.
fn polish(
    op: &EllipticOperator,
    load: &[f64],
    psi: &Obstacle,
    u: &[f64],
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let n = u.len();
    let grid = op.grid();
    let csr = op.stiffness();
    let active: Vec<bool> = (0..n)
        .map(|i| psi.is_constrained(i) && u[i] <= psi.values()[i] + 1e-12)
        .collect();
    let mut newid = vec![usize::MAX; n];
    let mut nfree = 0usize;
    for i in 0..n {
        if !active[i] {
            newid[i] = nfree;
            nfree += 1;
        }
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        if active[i] {
            out[i] = psi.values()[i];
        }
    }
    if nfree > 0 {
        let bw = grid.interior_nx() + 1;
        let mut rhs = vec![0.0; nfree];
        for i in 0..n {
            if active[i] {
                continue;
            }
            let (cols, vals) = csr.row(i);
            let mut b = load[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if active[c] {
                    b -= v * psi.values()[c];
                }
            }
            rhs[newid[i]] = b;
        }
        if op.is_symmetric() {
            let mut sb = SymBand::zeros(nfree, bw);
            for i in 0..n {
                if active[i] {
                    continue;
                }
                let (cols, vals) = csr.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if !active[c] && c <= i {
                        sb.add(newid[i], newid[c], v);
                    }
                }
            }
            sb.cholesky()?.solve_in_place(&mut rhs);
        } else {
            let mut band = Band::zeros(nfree, bw, bw);
            for i in 0..n {
                if active[i] {
                    continue;
                }
                let (cols, vals) = csr.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if !active[c] {
                        band.add(newid[i], newid[c], v);
                    }
                }
            }
            band.lu()?.solve_in_place(&mut rhs);
        }
        for i in 0..n {
            if !active[i] {
                out[i] = rhs[newid[i]];
            }
        }
    }
    let mut reaction = vec![0.0; n];
    csr.apply(&out, &mut reaction);
    for i in 0..n {
        reaction[i] -= load[i];
    }
    for i in 0..n {
        if active[i] {
            if reaction[i] < -1e-10 {
                return Ok(None);
            }
        } else if psi.is_constrained(i) && out[i] < psi.values()[i] - 1e-12 {
            return Ok(None);
        }
    }
    Ok(Some((out, reaction)))
}

/// Splits the datum, drops its capacity-singular negative part, and returns
/// the regularized measure together with the dropped part.
pub fn regularize_datum(mu: &Measure) -> Result<(Measure, Measure)> {
    let (plus, minus) = jordan_decompose(mu);
    let dec = capacity_decompose(&minus)?;
    let reg = plus.linear_combination(&dec.regular, -1.0)?;
    Ok((reg, dec.singular))
}

/// Obstacle solve with exact preprocessing of the datum: the LCP sees
/// `mu_plus - mu_minus_regular`; the singular negative part reappears only in
/// the reported reaction split `lambda0 + singular_reaction`.
pub fn solve_op(
    op: &EllipticOperator,
    mu: &Measure,
    psi: &Obstacle,
    opts: &SolverOptions,
) -> Result<OpResult> {
    let (reg, singular) = regularize_datum(mu)?;
    let load = op.load_vector(&reg)?;
    let lcp = solve_lcp(op, &load, psi, opts)?;
    Ok(OpResult {
        u: lcp.u,
        lambda0: lcp.reaction,
        singular_reaction: singular,
        iterations: lcp.iterations,
        comp_residual: lcp.comp_residual,
        solver: lcp.solver,
    })
}

/// Control arm: discretize the datum as-is, singular atoms included.
pub fn solve_naive(
    op: &EllipticOperator,
    mu: &Measure,
    psi: &Obstacle,
    opts: &SolverOptions,
) -> Result<LcpResult> {
    let load = op.load_vector(mu)?;
    solve_lcp(op, &load, psi, opts)
}

/// Total regular-reaction mass on nodes separated from the obstacle by more
/// than `eps`.
pub fn complementarity_residual(result: &OpResult, psi: &Obstacle, eps: f64) -> f64 {
    assert!(eps > 0.0, "separation must be positive");
    let u = result.u.values();
    let mut mass = 0.0;
    for i in 0..u.len() {
        let off_contact = if psi.is_constrained(i) {
            u[i] > psi.values()[i] + eps
        } else {
            true
        };
        if off_contact {
            mass += result.lambda0[i].abs();
        }
    }
    mass
}

/// Randomized least-solution probe: admissible competitors built from random
/// nonnegative nodal measures, scaled until they clear the obstacle. Returns
/// the worst amount by which the computed solution exceeds a competitor.
pub fn minimality_probe(
    op: &EllipticOperator,
    mu: &Measure,
    psi: &Obstacle,
    result: &OpResult,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let (reg, _) = regularize_datum(mu)?;
    let u_reg = op.solve_dirichlet(&reg)?;
    let n = op.grid().interior_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let nu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let u_nu = op.solve_load(&nu)?;
        let mut t = 0.0f64;
        for i in 0..n {
            if psi.is_constrained(i) {
                let need = psi.values()[i] - u_reg.values()[i];
                if need > 0.0 {
                    t = t.max(need / u_nu[i]);
                }
            }
        }
        let mut violation = f64::NEG_INFINITY;
        for i in 0..n {
            let candidate = u_reg.values()[i] + t * u_nu[i];
            violation = violation.max(result.u.values()[i] - candidate);
        }
        worst = worst.max(violation);
    }
    Ok(worst)
}

/// Node and side of the first violated obstacle bound.
#[derive(Debug, Clone)]
pub struct ConditionViolation {
    pub node: usize,
    pub upper_side: bool,
    pub psi: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub ok: bool,
    pub violation: Option<ConditionViolation>,
}

/// Checks the two-sided obstacle bounds `-u_tau - u_sigma - w <= psi <= u_sigma`
/// nodewise with tolerance `1e-12`. `sigma` must be capacity-regular; the
/// caller is responsible for `tau` being singular to the datum's removed part.
pub fn condition_check(
    psi: &Obstacle,
    sigma: &Measure,
    tau: &Measure,
    w: &[f64],
    op: &EllipticOperator,
) -> Result<ConditionReport> {
    let dec = capacity_decompose(sigma)?;
    if !dec.singular.is_zero() {
        return Err(Error::NotRegular(
            "sigma must vanish on capacity-zero sets".into(),
        ));
    }
    let u_sigma = op.solve_dirichlet(sigma)?;
    let u_tau = op.solve_dirichlet(tau)?;
    let n = op.grid().interior_count();
    let tol = 1e-12;
    for i in 0..n {
        let p = psi.values()[i];
        let upper = u_sigma.values()[i];
        if p > upper + tol {
            return Ok(ConditionReport {
                ok: false,
                violation: Some(ConditionViolation {
                    node: i,
                    upper_side: true,
                    psi: p,
                    bound: upper,
                }),
            });
        }
        let lower = -u_tau.values()[i] - u_sigma.values()[i] - w[i];
        if lower > p + tol {
            return Ok(ConditionReport {
                ok: false,
                violation: Some(ConditionViolation {
                    node: i,
                    upper_side: false,
                    psi: p,
                    bound: lower,
                }),
            });
        }
    }
    Ok(ConditionReport {
        ok: true,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxN, Rect};
    use crate::grid::Grid;
    use crate::measure::Density;
    use crate::operator::{assemble, CoefficientField};

    fn setup(n: usize) -> (Grid, EllipticOperator) {
        let grid = Grid::unit_square(n).unwrap();
        let op = assemble(&grid, &CoefficientField::identity(grid)).unwrap();
        (grid, op)
    }

    fn unit_measure() -> Measure {
        Measure::new(2, BoxN::from_rect(Rect::unit_square())).unwrap()
    }

    #[test]
    fn unconstrained_equals_dirichlet() {
        let (grid, op) = setup(12);
        let mu = unit_measure()
            .with_density(Density::SinSin { amp: -5.0 })
            .unwrap();
        let load = op.load_vector(&mu).unwrap();
        let lcp = solve_lcp(
            &op,
            &load,
            &Obstacle::unconstrained(grid.interior_count()),
            &SolverOptions::default(),
        )
        .unwrap();
        let u = op.solve_dirichlet(&mu).unwrap();
        assert!(lcp.u.max_diff(&u) < 1e-10);
        assert!(lcp.reaction.iter().all(|r| r.abs() < 1e-10));
    }

    #[test]
    fn zero_load_nonpositive_obstacle() {
        let (grid, op) = setup(8);
        let mut psi_vals = vec![-0.3; grid.interior_count()];
        psi_vals[5] = 0.0;
        let psi = Obstacle::new(psi_vals, "touching zero").unwrap();
        let load = vec![0.0; grid.interior_count()];
        let lcp = solve_lcp(&op, &load, &psi, &SolverOptions::default()).unwrap();
        assert!(lcp.u.max_norm() <= 1e-12);
        assert!(lcp.reaction.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn kkt_holds_with_active_contact() {
        let (grid, op) = setup(16);
        // negative regular datum pulls the solution onto the obstacle
        let mu = unit_measure().with_density(Density::Const(-30.0)).unwrap();
        let psi = Obstacle::constant(grid.interior_count(), -0.05, "floor").unwrap();
        let lcp = solve_naive(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        let u = lcp.u.values();
        assert!((lcp.u.min() + 0.05).abs() < 1e-12, "contact forms");
        for i in 0..u.len() {
            assert!(u[i] >= -0.05 - 1e-12);
            assert!(lcp.reaction[i] >= -1e-10);
        }
        assert!(lcp.comp_residual <= 1e-10);
        // reaction is supported on the contact set after the exact polish
        for i in 0..u.len() {
            if u[i] > -0.05 + 1e-9 {
                assert!(lcp.reaction[i].abs() < 1e-11);
            }
        }
    }

    #[test]
    fn infeasible_obstacle_rejected() {
        assert!(Obstacle::new(vec![0.0, f64::INFINITY], "bad").is_err());
    }

    #[test]
    fn negative_delta_is_absorbed() {
        // mu = -delta_y with a constant negative obstacle: the preprocessed
        // solve returns the zero solution and echoes the atom
        let (grid, op) = setup(33);
        let y = [0.5, 0.5, 0.0];
        let mu = unit_measure().with_atom(y, -1.0).unwrap();
        let psi = Obstacle::constant(grid.interior_count(), -0.35, "floor").unwrap();
        let res = solve_op(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        assert!(res.u.max_norm() <= 1e-11);
        let l0: f64 = res.lambda0.iter().map(|v| v.abs()).sum();
        assert!(l0 <= 1e-10);
        assert_eq!(res.singular_reaction.atoms().len(), 1);
        assert_eq!(res.singular_reaction.atoms()[0].mass, 1.0);
        assert_eq!(res.singular_reaction.atoms()[0].location, y);
    }

    #[test]
    fn regular_datum_passthrough() {
        let (grid, op) = setup(16);
        let mu = unit_measure()
            .with_density(Density::Affine {
                a: [1.0, 1.0, 0.0],
                c: -1.2,
            })
            .unwrap();
        let psi = Obstacle::constant(grid.interior_count(), -0.02, "floor").unwrap();
        let opts = SolverOptions::default();
        let a = solve_op(&op, &mu, &psi, &opts).unwrap();
        let b = solve_naive(&op, &mu, &psi, &opts).unwrap();
        assert!(a.u.max_diff(&b.u) <= 1e-11);
        assert!(a.singular_reaction.is_zero());
    }

    #[test]
    fn invariance_under_explicit_regularization() {
        let (grid, op) = setup(17);
        let mu = unit_measure()
            .with_density(Density::SinSin { amp: 8.0 })
            .unwrap()
            .with_atom([0.5, 0.5, 0.0], -1.0)
            .unwrap();
        let psi = Obstacle::constant(grid.interior_count(), -0.35, "floor").unwrap();
        let opts = SolverOptions::default();
        let direct = solve_op(&op, &mu, &psi, &opts).unwrap();
        let (reg, _) = regularize_datum(&mu).unwrap();
        let pre = solve_op(&op, &reg, &psi, &opts).unwrap();
        assert!(direct.u.max_diff(&pre.u) <= 1e-11);
    }

    #[test]
    fn naive_arm_contacts_for_singular_datum() {
        let (grid, op) = setup(33);
        let k = 0.35;
        let mu = unit_measure().with_atom([0.5, 0.5, 0.0], -1.0).unwrap();
        let psi = Obstacle::constant(grid.interior_count(), -k, "floor").unwrap();
        let lcp = solve_naive(&op, &mu, &psi, &SolverOptions::tuned_for(33)).unwrap();
        assert!((lcp.u.min() + k).abs() < 1e-9);
        // the preprocessed arm stays at zero: the two limits genuinely differ
        let res = solve_op(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        assert!(res.u.max_norm() <= 1e-11);
        assert!(lcp.u.l1_norm() > 0.01);
    }

    #[test]
    fn comparison_principle_in_obstacle_and_load() {
        let (grid, op) = setup(10);
        let n = grid.interior_count();
        let mu = unit_measure().with_density(Density::Const(-8.0)).unwrap();
        let load = op.load_vector(&mu).unwrap();
        let psi1 = Obstacle::constant(n, -0.08, "lower").unwrap();
        let psi2 = Obstacle::constant(n, -0.04, "higher").unwrap();
        let opts = SolverOptions::default();
        let u1 = solve_lcp(&op, &load, &psi1, &opts).unwrap();
        let u2 = solve_lcp(&op, &load, &psi2, &opts).unwrap();
        for i in 0..n {
            assert!(u1.u.values()[i] <= u2.u.values()[i] + 1e-10);
        }
        // monotone in the load with a common obstacle
        let nu = unit_measure().with_density(Density::Const(-4.0)).unwrap();
        let load2 = op.load_vector(&nu).unwrap();
        let v1 = solve_lcp(&op, &load, &psi1, &opts).unwrap();
        let v2 = solve_lcp(&op, &load2, &psi1, &opts).unwrap();
        for i in 0..n {
            assert!(v1.u.values()[i] <= v2.u.values()[i] + 1e-10);
        }
    }

    #[test]
    fn complementarity_residual_cases() {
        let (grid, op) = setup(16);
        let n = grid.interior_count();
        // lambda0 = 0
        let mu = unit_measure()
            .with_density(Density::SinSin { amp: 2.0 })
            .unwrap();
        let psi = Obstacle::constant(n, -0.5, "floor").unwrap();
        let res = solve_op(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        assert!(complementarity_residual(&res, &psi, 0.01) <= 1e-12);
        // u = psi everywhere: mass off contact is empty
        let res_contact = OpResult {
            u: NodalFunction::new(grid, vec![-0.5; n]),
            lambda0: vec![1.0; n],
            singular_reaction: Measure::zero2(),
            iterations: 0,
            comp_residual: 0.0,
            solver: "synthetic".into(),
        };
        assert_eq!(complementarity_residual(&res_contact, &psi, 0.01), 0.0);
        // the absorbed-atom instance: reaction lives in the singular part
        let mud = unit_measure().with_atom([0.5, 0.5, 0.0], -1.0).unwrap();
        let res_d = solve_op(&op, &mud, &psi, &SolverOptions::default()).unwrap();
        assert!(complementarity_residual(&res_d, &psi, 0.01) <= 1e-12);
    }

    #[test]
    fn complementarity_with_active_contact() {
        let (grid, op) = setup(24);
        let n = grid.interior_count();
        let mu = unit_measure().with_density(Density::Const(-30.0)).unwrap();
        let psi = Obstacle::constant(n, -0.05, "floor").unwrap();
        let res = solve_op(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        let total: f64 = res.lambda0.iter().sum();
        assert!(total > 0.1, "reaction must be nontrivial, got {total}");
        let eps = 10.0 * grid.h();
        assert!(complementarity_residual(&res, &psi, eps) <= 1e-8);
    }

    #[test]
    fn minimality_probe_small() {
        let (grid, op) = setup(12);
        let mu = unit_measure().with_density(Density::Const(-10.0)).unwrap();
        let psi = Obstacle::constant(grid.interior_count(), -0.04, "floor").unwrap();
        let res = solve_op(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        let worst = minimality_probe(&op, &mu, &psi, &res, 10, 42).unwrap();
        assert!(worst <= 1e-9, "worst violation {worst}");
        // reaction itself reproduces the solution
        let u_reg = op.solve_dirichlet(&mu).unwrap();
        let u_l0 = op.solve_load(&res.lambda0).unwrap();
        for i in 0..grid.interior_count() {
            let rebuilt = u_reg.values()[i] + u_l0[i];
            assert!((rebuilt - res.u.values()[i]).abs() < 1e-10);
        }
        // the reaction plus a positive bump is an admissible competitor and
        // the solution stays below it
        let mut bumped = res.lambda0.clone();
        bumped[grid.interior_count() / 3] += 0.5;
        let u_bumped = op.solve_load(&bumped).unwrap();
        for i in 0..grid.interior_count() {
            let candidate = u_reg.values()[i] + u_bumped[i];
            assert!(res.u.values()[i] <= candidate + 1e-10);
        }
    }

    #[test]
    fn condition_check_cases() {
        let (grid, op) = setup(16);
        let n = grid.interior_count();
        // constants: psi = -k, sigma large Lebesgue multiple, tau = 0, w = k
        let k = 0.35;
        let psi = Obstacle::constant(n, -k, "floor").unwrap();
        let sigma = unit_measure().with_density(Density::Const(50.0)).unwrap();
        let tau = unit_measure();
        let w = vec![k; n];
        let rep = condition_check(&psi, &sigma, &tau, &w, &op).unwrap();
        assert!(rep.ok);

        // push the obstacle above u_sigma at one node
        let u_sigma = op.solve_dirichlet(&sigma).unwrap();
        let mut vals = vec![-k; n];
        vals[n / 2] = u_sigma.values()[n / 2] + 0.01;
        let bad = Obstacle::new(vals, "peeking").unwrap();
        let rep = condition_check(&bad, &sigma, &tau, &w, &op).unwrap();
        assert!(!rep.ok);
        let v = rep.violation.unwrap();
        assert!(v.upper_side);
        assert_eq!(v.node, n / 2);

        // psi = -u_{delta_z} - 0.1 with tau = delta_z
        let z = (0.25, 0.25);
        let green_z = op.discrete_green(z).unwrap();
        let psi_vals: Vec<f64> = green_z.values().iter().map(|v| -v - 0.1).collect();
        let psi_g = Obstacle::new(psi_vals, "green-shifted").unwrap();
        let tau_z = unit_measure().with_atom([z.0, z.1, 0.0], 1.0).unwrap();
        let w01 = vec![0.1; n];
        let rep = condition_check(&psi_g, &sigma, &tau_z, &w01, &op).unwrap();
        assert!(rep.ok);

        // sigma with an atom is not capacity-regular
        let sigma_bad = unit_measure().with_atom([0.7, 0.7, 0.0], 1.0).unwrap();
        assert!(condition_check(&psi, &sigma_bad, &tau, &w, &op).is_err());
    }

    #[test]
    fn sentinel_obstacle_shares_code_path() {
        let (grid, op) = setup(10);
        let n = grid.interior_count();
        let mut vals = vec![f64::NEG_INFINITY; n];
        // constrain one quadrant only
        for i in 0..n {
            let (x, y) = grid.node_position(i);
            if x < 0.5 && y < 0.5 {
                vals[i] = -0.01;
            }
        }
        let psi = Obstacle::new(vals, "quadrant").unwrap();
        let mu = unit_measure().with_density(Density::Const(-20.0)).unwrap();
        let lcp = solve_naive(&op, &mu, &psi, &SolverOptions::default()).unwrap();
        for i in 0..n {
            if psi.is_constrained(i) {
                assert!(lcp.u.values()[i] >= -0.01 - 1e-12);
            }
        }
        assert!(lcp.u.min() < -0.02, "unconstrained side dips freely");
    }
}
