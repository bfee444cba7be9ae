use rustc_hash::FxHashMap as HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problem::{BlackBoxProblem, Domain};
use super::stencil::{self, point_bits};
use crate::error::{Error, Result};

/// How mesh width and poll size react to success and failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    /// Coarse mesh search, then a fine poll around the new best. A successful
    /// poll contracts the poll size by `contract_factor`; a failed mesh
    /// search expands the mesh width by `1 / expand_factor`. When the mesh
    /// search fails, a refinement poll runs around the incumbent: on failure
    /// the poll size contracts by `contract_factor` (which is what lets it
    /// fall below epsilon), on success it grows by `1 / contract_factor`,
    /// staying below the mesh width.
    #[default]
    CoarseFine,
    /// Classic pattern search: grow both sizes by `1 / contract_factor` on
    /// success, shrink both by `contract_factor` on failure.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadsSettings {
    /// Stop once the poll size (relative to each variable's range) drops
    /// below this.
    pub epsilon: f64,
    pub max_evaluations: usize,
    /// Initial mesh width, relative to variable range.
    pub initial_mesh_width: f64,
    /// Initial poll size, relative to variable range.
    pub initial_poll_size: f64,
    pub expand_factor: f64,
    pub contract_factor: f64,
    /// Mesh width never exceeds this multiple of its initial value.
    pub mesh_cap: f64,
    /// Mesh anchors: the incumbent plus the most recent improving points.
    pub max_anchors: usize,
    /// Add one seeded random unit direction to the stencil each iteration.
    pub random_direction: bool,
    pub seed: u64,
    pub rule: UpdateRule,
    pub max_iterations: usize,
}

impl Default for MadsSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_evaluations: 20_000,
            initial_mesh_width: 0.25,
            initial_poll_size: 0.05,
            expand_factor: 0.5,
            contract_factor: 0.7,
            mesh_cap: 10.0,
            max_anchors: 5,
            random_direction: true,
            seed: 0,
            rule: UpdateRule::CoarseFine,
            max_iterations: 1_000_000,
        }
    }
}

impl MadsSettings {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            out.push(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if self.max_evaluations == 0 {
            out.push("max_evaluations must be >= 1".into());
        }
        if !(self.initial_mesh_width > self.initial_poll_size && self.initial_poll_size > 0.0)
            || !self.initial_mesh_width.is_finite()
        {
            out.push(format!(
                "need initial_mesh_width > initial_poll_size > 0, got {} and {}",
                self.initial_mesh_width, self.initial_poll_size
            ));
        }
        if !(0.0 < self.expand_factor
            && self.expand_factor < self.contract_factor
            && self.contract_factor < 1.0)
        {
            out.push(format!(
                "need 0 < expand_factor < contract_factor < 1, got {} and {}",
                self.expand_factor, self.contract_factor
            ));
        }
        if !(self.mesh_cap >= 1.0 && self.mesh_cap.is_finite()) {
            out.push(format!("mesh_cap must be >= 1, got {}", self.mesh_cap));
        }
        if self.max_anchors == 0 {
            out.push("max_anchors must be >= 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncumbentSolution {
    pub point: Vec<f64>,
    pub value: f64,
    pub feasible: bool,
}

/// Result of evaluating a point under the extreme barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    Feasible(f64),
    Rejected { violation: f64 },
}

impl Evaluation {
    /// Objective value, with rejected points at negative infinity.
    pub fn value(&self) -> f64 {
        match self {
            Evaluation::Feasible(v) => *v,
            Evaluation::Rejected { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Evaluation::Feasible(_))
    }
}

/// Evaluates constraints first; any positive violation rejects the point
/// without calling the objective.
pub fn evaluate_with_barrier(problem: &BlackBoxProblem<'_>, point: &[f64]) -> Result<Evaluation> {
    let Some(total) = problem.barrier_violation(point) else {
        return Err(Error::Evaluation {
            point: point.to_vec(),
            reason: "constraint returned NaN".into(),
        });
    };
    if total > 0.0 {
        return Ok(Evaluation::Rejected { violation: total });
    }
    let value = problem.objective(point);
    if !value.is_finite() {
        return Err(Error::Evaluation {
            point: point.to_vec(),
            reason: format!("objective returned {value}"),
        });
    }
    Ok(Evaluation::Feasible(value))
}

/// Mesh and poll sizes plus the anchor set of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshState {
    pub mesh_width: f64,
    pub poll_size: f64,
    pub expand_factor: f64,
    pub contract_factor: f64,
    /// Best point first, then the most recent improving points.
    pub incumbents: Vec<IncumbentSolution>,
    pub iteration: usize,
}

impl MeshState {
    pub fn new(settings: &MadsSettings, start: IncumbentSolution) -> Result<Self> {
        settings.validate()?;
        if !start.feasible {
            return Err(Error::InvalidState("starting incumbent must be feasible".into()));
        }
        Ok(Self {
            mesh_width: settings.initial_mesh_width,
            poll_size: settings.initial_poll_size,
            expand_factor: settings.expand_factor,
            contract_factor: settings.contract_factor,
            incumbents: vec![start],
            iteration: 0,
        })
    }

    pub fn best(&self) -> &IncumbentSolution {
        &self.incumbents[0]
    }

    fn promote(&mut self, solution: IncumbentSolution, max_anchors: usize) {
        self.incumbents.retain(|s| s.point != solution.point);
        self.incumbents.insert(0, solution);
        self.incumbents.truncate(max_anchors);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    EpsilonOptimal,
    BudgetExhausted,
    NoFeasibleStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub best_value: f64,
    pub mesh_width: f64,
    pub poll_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    /// `None` when no feasible point was found.
    pub best: Option<IncumbentSolution>,
    pub evaluations: usize,
    pub iterations: usize,
    pub history: Vec<HistoryEntry>,
    pub termination_reason: TerminationReason,
}

/// Optimizer run state: evaluation cache, budget accounting and the seeded
/// direction generator.
pub struct Mads<'p, 'a> {
    problem: &'p BlackBoxProblem<'a>,
    settings: MadsSettings,
    base_directions: Vec<Vec<f64>>,
    cache: HashMap<Vec<u64>, Evaluation>,
    key: Vec<u64>,
    evaluations: usize,
    budget: usize,
    rng: ChaCha8Rng,
}

impl<'p, 'a> Mads<'p, 'a> {
    pub fn new(problem: &'p BlackBoxProblem<'a>, settings: MadsSettings) -> Result<Self> {
        settings.validate()?;
        let domain = problem.domain();
        let mut base_directions = stencil::coordinate_directions(domain);
        base_directions.extend(stencil::exchange_directions(domain, problem.exchange_groups()));
        Ok(Self {
            problem,
            budget: settings.max_evaluations,
            rng: ChaCha8Rng::seed_from_u64(settings.seed),
            settings,
            base_directions,
            cache: HashMap::default(),
            key: Vec::new(),
            evaluations: 0,
        })
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn budget_exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    fn domain(&self) -> &Domain {
        self.problem.domain()
    }

    /// Cached barrier evaluation; `None` once the budget is spent.
    pub fn evaluate(&mut self, point: &[f64]) -> Result<Option<Evaluation>> {
        self.key.clear();
        self.key.extend(point.iter().map(|v| point_bits(*v)));
        if let Some(e) = self.cache.get(self.key.as_slice()) {
            return Ok(Some(*e));
        }
        if self.budget_exhausted() {
            return Ok(None);
        }
        let e = evaluate_with_barrier(self.problem, point)?;
        self.evaluations += 1;
        self.cache.insert(self.key.clone(), e);
        Ok(Some(e))
    }

    /// Best feasible point among `anchor + size * d` over all anchors and
    /// directions. Ties go to the lexicographically smallest point so the
    /// result does not depend on evaluation order.
    fn best_of(
        &mut self,
        anchors: &[&[f64]],
        size: f64,
        dirs: &[Vec<f64>],
    ) -> Result<Option<IncumbentSolution>> {
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "stencil size must be finite and > 0, got {size}"
            )));
        }
        let domain = self.problem.domain();
        let mut best: Option<IncumbentSolution> = None;
        let mut p = Vec::with_capacity(domain.dimension());
        'anchors: for anchor in anchors {
            for d in dirs {
                if !domain.displace_into(anchor, size, d, &mut p) {
                    continue;
                }
                let Some(e) = self.evaluate(&p)? else { break 'anchors };
                let Evaluation::Feasible(v) = e else { continue };
                let better = match &best {
                    None => true,
                    Some(b) => v > b.value || (v == b.value && lex_less(&p, &b.point)),
                };
                if better {
                    best = Some(IncumbentSolution {
                        point: p.clone(),
                        value: v,
                        feasible: true,
                    });
                }
            }
        }
        Ok(best)
    }

    fn directions(&mut self) -> Vec<Vec<f64>> {
        let mut dirs = self.base_directions.clone();
        if self.settings.random_direction && self.domain().dimension() > 0 {
            let d = stencil::random_direction(self.problem.domain(), self.problem.exchange_groups(), &mut self.rng);
            dirs.push(d);
        }
        dirs
    }

    fn poll(
        &mut self,
        center: &[f64],
        size: f64,
        dirs: &[Vec<f64>],
    ) -> Result<Option<IncumbentSolution>> {
        self.best_of(&[center], size, dirs)
    }

    /// One iteration of the mesh/poll loop.
    pub fn step(&mut self, mut state: MeshState) -> Result<MeshState> {
        let dirs = self.directions();
        let max_anchors = self.settings.max_anchors;
        let mesh_cap = self.settings.mesh_cap * self.settings.initial_mesh_width;
        let anchors: Vec<Vec<f64>> = state.incumbents.iter().map(|s| s.point.clone()).collect();
        let refs: Vec<&[f64]> = anchors.iter().map(Vec::as_slice).collect();
        let mesh_best = self.best_of(&refs, state.mesh_width, &dirs)?;
        let incumbent_value = state.best().value;

        match self.settings.rule {
            UpdateRule::CoarseFine => match mesh_best {
                Some(zw) if zw.value > incumbent_value => {
                    let zw_value = zw.value;
                    let center = zw.point.clone();
                    state.promote(zw, max_anchors);
                    if let Some(zs) = self.poll(&center, state.poll_size, &dirs)? {
                        if zs.value > zw_value {
                            state.promote(zs, max_anchors);
                            state.poll_size *= state.contract_factor;
                        }
                    }
                }
                _ => {
                    state.mesh_width = (state.mesh_width / state.expand_factor).min(mesh_cap);
                    let center = state.best().point.clone();
                    match self.poll(&center, state.poll_size, &dirs)? {
                        Some(zs) if zs.value > incumbent_value => {
                            state.promote(zs, max_anchors);
                            let cap = (self.settings.mesh_cap * self.settings.initial_poll_size)
                                .min(state.mesh_width * state.contract_factor);
                            state.poll_size = (state.poll_size / state.contract_factor).min(cap).max(state.poll_size);
                        }
                        _ => state.poll_size *= state.contract_factor,
                    }
                }
            },
            UpdateRule::Canonical => {
                let mut success = false;
                if let Some(zw) = mesh_best.filter(|z| z.value > incumbent_value) {
                    state.promote(zw, max_anchors);
                    success = true;
                } else {
                    let center = state.best().point.clone();
                    if let Some(zs) = self
                        .poll(&center, state.poll_size, &dirs)?
                        .filter(|z| z.value > incumbent_value)
                    {
                        state.promote(zs, max_anchors);
                        success = true;
                    }
                }
                let factor = state.contract_factor;
                if success {
                    let poll_cap = self.settings.mesh_cap * self.settings.initial_poll_size;
                    state.mesh_width = (state.mesh_width / factor).min(mesh_cap);
                    state.poll_size = (state.poll_size / factor).min(poll_cap);
                } else {
                    state.mesh_width *= factor;
                    state.poll_size *= factor;
                }
            }
        }
        state.iteration += 1;
        Ok(state)
    }

    /// Iterates until the poll size drops below epsilon, the budget runs out,
    /// or (when given) the incumbent reaches `target`.
    fn run(
        &mut self,
        mut state: MeshState,
        target: Option<f64>,
    ) -> Result<(MeshState, Vec<HistoryEntry>, TerminationReason)> {
        let mut history = vec![entry(&state)];
        let reason = loop {
            if target.is_some_and(|t| state.best().value >= t) {
                break TerminationReason::EpsilonOptimal;
            }
            if state.poll_size < self.settings.epsilon {
                break TerminationReason::EpsilonOptimal;
            }
            if self.budget_exhausted() || state.iteration >= self.settings.max_iterations {
                break TerminationReason::BudgetExhausted;
            }
            state = self.step(state)?;
            history.push(entry(&state));
        };
        Ok((state, history, reason))
    }
}

fn entry(state: &MeshState) -> HistoryEntry {
    HistoryEntry {
        iteration: state.iteration,
        best_value: state.best().value,
        mesh_width: state.mesh_width,
        poll_size: state.poll_size,
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Maximizes `problem` from `initial_point`. An infeasible start triggers a
/// feasibility search (maximizing minus the total violation) that shares the
/// evaluation budget.
pub fn optimize(
    problem: &BlackBoxProblem<'_>,
    initial_point: &[f64],
    settings: &MadsSettings,
) -> Result<OptimizerReport> {
    settings.validate()?;
    if initial_point.len() != problem.dimension() {
        return Err(Error::ShapeMismatch(format!(
            "initial point has {} coordinates, problem has {}",
            initial_point.len(),
            problem.dimension()
        )));
    }
    let start = problem.domain().project(initial_point);
    let mut runner = Mads::new(problem, settings.clone())?;
    let mut spent = 0;

    let start_eval = runner.evaluate(&start)?.expect("budget is at least one evaluation");
    let start_point = if start_eval.is_feasible() {
        Some(start)
    } else {
        let restoration = BlackBoxProblem::new(
            problem.domain().lower().to_vec(),
            problem.domain().upper().to_vec(),
            |x: &[f64]| -problem.total_violation(x),
        )?
        .with_periodic(
            &(0..problem.dimension())
                .filter(|&i| problem.domain().is_periodic(i))
                .collect::<Vec<_>>(),
        )?;
        let restoration = problem
            .exchange_groups()
            .iter()
            .try_fold(restoration, |p, g| p.with_exchange_group(g.clone()))?;
        let mut phase1 = Mads::new(
            &restoration,
            MadsSettings {
                max_evaluations: settings.max_evaluations - runner.evaluations(),
                ..settings.clone()
            },
        )?;
        let first = phase1.evaluate(&start)?;
        let found = match first {
            Some(Evaluation::Feasible(v)) => {
                let state = MeshState::new(
                    settings,
                    IncumbentSolution {
                        point: start.clone(),
                        value: v,
                        feasible: true,
                    },
                )?;
                let (state, _, _) = phase1.run(state, Some(0.0))?;
                (state.best().value >= 0.0).then(|| state.best().point.clone())
            }
            _ => None,
        };
        spent = phase1.evaluations();
        runner.budget = settings.max_evaluations.saturating_sub(spent);
        found
    };

    let report = |runner: &Mads, best, iterations, history, reason| OptimizerReport {
        best,
        evaluations: runner.evaluations() + spent,
        iterations,
        history,
        termination_reason: reason,
    };

    let Some(start_point) = start_point else {
        return Ok(report(&runner, None, 0, Vec::new(), TerminationReason::NoFeasibleStart));
    };
    let value = match runner.evaluate(&start_point)? {
        Some(Evaluation::Feasible(v)) => v,
        _ => {
            return Ok(report(&runner, None, 0, Vec::new(), TerminationReason::NoFeasibleStart));
        }
    };
    let state = MeshState::new(
        settings,
        IncumbentSolution {
            point: start_point,
            value,
            feasible: true,
        },
    )?;
    let (state, history, reason) = runner.run(state, None)?;
    Ok(report(
        &runner,
        Some(state.best().clone()),
        state.iteration,
        history,
        reason,
    ))
}
