//! Multilevel runs: poles on a hierarchy of uniformly refined meshes and
//! their observed convergence orders.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, OperatorFunction};
use crate::error::{Error, Result};
use crate::geometry::Problem;
use crate::mesh::{generate, refine_uniform, Mesh};
use crate::neps::{solve_region, track, PoleEstimate, SolverConfig};

/// Poles computed on one mesh of the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSolution {
    /// 1 for the generated mesh, `j + 1` after `j` refinements.
    pub level: usize,
    pub nominal_h: f64,
    pub dofs: usize,
    pub poles: Vec<PoleEstimate>,
}

/// Mesh at `level` (1-based) of the hierarchy started at `target_h`.
pub fn mesh_at(problem: &Problem, target_h: f64, level: usize) -> Result<Mesh> {
    if level == 0 {
        return Err(Error::Config("mesh levels start at 1".into()));
    }
    let mut m = generate(problem, target_h)?;
    for _ in 1..level {
        m = refine_uniform(&m, problem)?;
    }
    Ok(m)
}

fn operator(mesh: &Mesh, problem: &Problem) -> Result<OperatorFunction> {
    OperatorFunction::new(assemble(mesh, problem)?)
}

/// Global search on the first `cfg.search_levels` meshes, then tracking
/// through the remaining ones.
/// `progress` sees every level as soon as it is finished.
pub fn solve_levels(
    problem: &Problem,
    target_h: f64,
    levels: usize,
    cfg: &SolverConfig,
    mut progress: impl FnMut(&LevelSolution),
) -> Result<Vec<LevelSolution>> {
    if levels == 0 {
        return Err(Error::Config("at least one mesh level is required".into()));
    }
    cfg.validate()?;
    let mut mesh = generate(problem, target_h)?;
    let mut out: Vec<LevelSolution> = Vec::with_capacity(levels);
    for level in 1..=levels {
        if level > 1 {
            mesh = refine_uniform(&mesh, problem)?;
        }
        let op = operator(&mesh, problem)?;
        let poles = match out.last() {
            Some(prev) if level > cfg.search_levels => track(&prev.poles, &problem.search_region, &op, cfg, level)?,
            _ => solve_region(&problem.search_region, &op, cfg, level)?,
        };
        let sol = LevelSolution { level, nominal_h: mesh.nominal_h, dofs: op.dim(), poles };
        progress(&sol);
        out.push(sol);
    }
    Ok(out)
}

/// Poles on the single mesh at `level`.
pub fn solve_at_level(problem: &Problem, target_h: f64, level: usize, cfg: &SolverConfig) -> Result<LevelSolution> {
    let mesh = mesh_at(problem, target_h, level)?;
    let op = operator(&mesh, problem)?;
    let poles = solve_region(&problem.search_region, &op, cfg, level)?;
    Ok(LevelSolution { level, nominal_h: mesh.nominal_h, dofs: op.dim(), poles })
}

/// Follows known approximate poles (for instance exact values, or poles from
/// another run) through levels `1..=levels` without any global search.
pub fn follow(
    problem: &Problem,
    target_h: f64,
    levels: usize,
    seeds: &[(Complex64, usize)],
    cfg: &SolverConfig,
) -> Result<Vec<LevelSolution>> {
    cfg.validate()?;
    let mut prev: Vec<PoleEstimate> = seeds
        .iter()
        .map(|&(k, m)| PoleEstimate {
            k,
            multiplicity: m,
            residual: 0.0,
            spread: 0.0,
            members: vec![k; m],
            contour_id: 0,
            mesh_level: 0,
        })
        .collect();
    let mut mesh = generate(problem, target_h)?;
    let mut out = Vec::with_capacity(levels);
    for level in 1..=levels {
        if level > 1 {
            mesh = refine_uniform(&mesh, problem)?;
        }
        let op = operator(&mesh, problem)?;
        prev = track(&prev, &problem.search_region, &op, cfg, level)?;
        out.push(LevelSolution { level, nominal_h: mesh.nominal_h, dofs: op.dim(), poles: prev.clone() });
    }
    Ok(out)
}

/// How the error of a pole is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Against an exact value: `e_j = k_j - k`.
    Exact,
    /// Between consecutive levels: `e_j = k_j - k_{j+1}`.
    Successive,
}

/// History of one pole across the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleHistory {
    /// Value per level, `None` where the pole was not matched.
    pub values: Vec<Option<Complex64>>,
    pub multiplicities: Vec<Option<usize>>,
    /// Exact value used for [`ErrorKind::Exact`].
    pub reference: Option<Complex64>,
    pub errors: Vec<Option<Complex64>>,
    /// `log2(|e_{j-1}| / |e_j|)` at index `j`.
    pub orders: Vec<Option<f64>>,
    /// Set when the level-to-level matching was not unique.
    pub ambiguous: bool,
}

impl PoleHistory {
    /// Value on the finest level where the pole was found.
    pub fn finest(&self) -> Option<Complex64> {
        self.values.iter().rev().flatten().next().copied()
    }

    /// Last available observed order.
    pub fn final_order(&self) -> Option<f64> {
        self.orders.iter().rev().flatten().next().copied()
    }

    /// Last available error.
    pub fn final_error(&self) -> Option<Complex64> {
        self.errors.iter().rev().flatten().next().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<usize>,
    pub error_kind: ErrorKind,
    /// Errors at or below this magnitude get no order.
    pub order_floor: f64,
    pub poles: Vec<PoleHistory>,
}

impl ConvergenceReport {
    /// History whose finest value is closest to `k`.
    pub fn nearest(&self, k: Complex64) -> Option<&PoleHistory> {
        self.poles
            .iter()
            .filter_map(|p| p.finest().map(|f| ((f - k).norm(), p)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, p)| p)
    }
}

/// Accuracy of an extracted eigenvalue under quadrature refinement; errors
/// within ten times this carry no order information.
pub const EXTRACTION_ACCURACY: f64 = 1e-9;

fn same_pole_distance(k: Complex64) -> f64 {
    1e-5 * (1.0 + k.norm())
}

/// Links poles of successive levels by nearest neighbours and computes
/// errors and orders. With `reference` given, errors are taken against the
/// reference value nearest to each pole's finest value.
pub fn convergence_report(levels: &[LevelSolution], reference: Option<&[Complex64]>) -> ConvergenceReport {
    let nl = levels.len();
    let mut chains: Vec<PoleHistory> = Vec::new();
    // Chain index of every pole on the previous level.
    let mut prev_chain: Vec<usize> = Vec::new();
    for (j, lvl) in levels.iter().enumerate() {
        let mut this_chain = vec![usize::MAX; lvl.poles.len()];
        if j > 0 {
            let prev = &levels[j - 1].poles;
            // Nearest previous pole for every current pole.
            let mut claims: Vec<(usize, usize, f64, bool)> = Vec::new();
            for (i, p) in lvl.poles.iter().enumerate() {
                let mut d: Vec<(f64, usize)> =
                    prev.iter().enumerate().map(|(q, x)| ((x.k - p.k).norm(), q)).collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0));
                if let Some(&(best, q)) = d.first() {
                    let tie = d.get(1).is_some_and(|&(second, _)| second - best < same_pole_distance(p.k));
                    claims.push((i, q, best, tie));
                }
            }
            claims.sort_by(|a, b| a.2.total_cmp(&b.2));
            let mut taken = vec![false; prev.len()];
            for (i, q, _, tie) in claims {
                let c = prev_chain[q];
                if taken[q] {
                    chains[c].ambiguous = true;
                    continue;
                }
                taken[q] = true;
                this_chain[i] = c;
                chains[c].ambiguous |= tie;
            }
        }
        for (i, p) in lvl.poles.iter().enumerate() {
            if this_chain[i] == usize::MAX {
                this_chain[i] = chains.len();
                chains.push(PoleHistory {
                    values: vec![None; nl],
                    multiplicities: vec![None; nl],
                    reference: None,
                    errors: vec![None; nl],
                    orders: vec![None; nl],
                    ambiguous: false,
                });
            }
            let c = &mut chains[this_chain[i]];
            c.values[j] = Some(p.k);
            c.multiplicities[j] = Some(p.multiplicity);
        }
        prev_chain = this_chain;
    }

    let order_floor = 10.0 * EXTRACTION_ACCURACY;
    for c in &mut chains {
        match reference {
            Some(refs) => {
                c.reference = c.finest().and_then(|f| {
                    refs.iter().copied().min_by(|a, b| (a - f).norm().total_cmp(&(b - f).norm()))
                });
                if let Some(r) = c.reference {
                    c.errors = c.values.iter().map(|v| v.map(|k| k - r)).collect();
                }
            }
            None => {
                for j in 0..nl.saturating_sub(1) {
                    if let (Some(a), Some(b)) = (c.values[j], c.values[j + 1]) {
                        c.errors[j] = Some(a - b);
                    }
                }
            }
        }
        for j in 1..nl {
            if let (Some(a), Some(b)) = (c.errors[j - 1], c.errors[j]) {
                if a.norm() > order_floor && b.norm() > order_floor {
                    c.orders[j] = Some((a.norm() / b.norm()).log2());
                }
            }
        }
    }
    chains.sort_by(|a, b| {
        let (x, y) = (a.finest().unwrap_or_default(), b.finest().unwrap_or_default());
        x.norm().total_cmp(&y.norm()).then(x.re.total_cmp(&y.re))
    });
    ConvergenceReport {
        levels: levels.iter().map(|l| l.level).collect(),
        error_kind: if reference.is_some() { ErrorKind::Exact } else { ErrorKind::Successive },
        order_floor,
        poles: chains,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(level: usize, ks: &[(f64, f64)]) -> LevelSolution {
        LevelSolution {
            level,
            nominal_h: 0.1 / level as f64,
            dofs: 0,
            poles: ks
                .iter()
                .map(|&(re, im)| PoleEstimate {
                    k: Complex64::new(re, im),
                    multiplicity: 1,
                    residual: 0.0,
                    spread: 0.0,
                    members: vec![Complex64::new(re, im)],
                    contour_id: 0,
                    mesh_level: level,
                })
                .collect(),
        }
    }

    #[test]
    fn second_order_sequence_has_order_two() {
        let exact = Complex64::new(1.0, -0.5);
        let levels: Vec<LevelSolution> = (1..=4)
            .map(|j| {
                let e = 1e-2 / 4f64.powi(j as i32 - 1);
                level(j, &[(1.0 + e, -0.5 - e), (3.0, -1.0)])
            })
            .collect();
        let rep = convergence_report(&levels, Some(&[exact]));
        let p = rep.nearest(exact).unwrap();
        assert!((p.final_order().unwrap() - 2.0).abs() < 1e-12);
        assert!(!p.ambiguous);
        let self_rep = convergence_report(&levels, None);
        let q = self_rep.nearest(exact).unwrap();
        assert!((q.final_order().unwrap() - 2.0).abs() < 1e-12);
        assert!(q.errors[3].is_none());
    }

    #[test]
    fn two_poles_claiming_one_predecessor_are_flagged() {
        let levels = vec![level(1, &[(1.0, -1.0)]), level(2, &[(1.0 + 1e-3, -1.0), (1.0 - 2e-3, -1.0)])];
        let rep = convergence_report(&levels, None);
        assert_eq!(rep.poles.len(), 2);
        assert!(rep.poles.iter().any(|p| p.ambiguous));
    }

    #[test]
    fn tiny_errors_get_no_order() {
        let levels = vec![level(1, &[(1.0 + 1e-9, -1.0)]), level(2, &[(1.0 + 2e-10, -1.0)])];
        let rep = convergence_report(&levels, Some(&[Complex64::new(1.0, -1.0)]));
        assert!(rep.poles[0].orders.iter().all(Option::is_none));
    }
}
