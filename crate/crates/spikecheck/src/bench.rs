//! Benchmark grids: seeded models and inputs per `(T, hidden)` shape, every
//! method and budget run on the same instances, results logged and
//! summarized.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use rand::Rng;
use spikecheck_core::{infer, PerturbationBudget, SnnModel, SpikeTimes};

use crate::error::{Error, Result};
use crate::gen::{gen_model_with, random_input, rng, GenSpec};
use crate::report::{CellShape, Method, ReportLog, ReportRecord};
use crate::solver::SolverConfig;
use crate::verify::{dcs_verify, smt_verify, DcsOptions, SmtOptions};

/// Default number of inputs verified per model.
pub const DEFAULT_SAMPLES: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub time_steps: Vec<u32>,
    pub hidden: Vec<usize>,
    pub inputs: usize,
    pub outputs: usize,
    pub deltas: Vec<u32>,
    pub methods: Vec<Method>,
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Per-run limit for both methods.
    pub deadline: Option<Duration>,
    pub tau: u32,
    pub theta: f64,
    /// Worker threads inside each direct search.
    pub workers: usize,
    /// Run different `(T, hidden)` shapes on different threads.
    pub parallel_cells: bool,
    pub solver: SolverConfig,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            time_steps: vec![16, 32, 48, 64],
            hidden: vec![32],
            inputs: 8,
            outputs: 10,
            deltas: vec![1, 2],
            methods: vec![Method::Dcs],
            samples: DEFAULT_SAMPLES,
            repetitions: 1,
            seed: 0,
            deadline: None,
            tau: 1,
            theta: 1.0,
            workers: 1,
            parallel_cells: false,
            solver: SolverConfig::default(),
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T values", self.time_steps.iter().all(|&t| t > 0) && !self.time_steps.is_empty()),
            ("hidden sizes", self.hidden.iter().all(|&h| h > 0) && !self.hidden.is_empty()),
            ("deltas", self.deltas.iter().all(|&d| d > 0) && !self.deltas.is_empty()),
            ("methods", !self.methods.is_empty()),
            ("inputs", self.inputs > 0),
            ("outputs", self.outputs > 0),
            ("samples", self.samples > 0),
            ("repetitions", self.repetitions > 0),
        ];
        match positive.iter().find(|(_, ok)| !ok) {
            Some((what, _)) => Err(Error::Usage(format!("bench plan: {what} must be positive and non-empty"))),
            None => Ok(()),
        }
    }

    /// `(T, hidden)` pairs in grid order.
    pub fn shapes(&self) -> Vec<CellShape> {
        let mut out = Vec::new();
        for &time_steps in &self.time_steps {
            for &hidden in &self.hidden {
                out.push(CellShape {
                    time_steps,
                    inputs: self.inputs,
                    hidden,
                });
            }
        }
        out
    }

    /// Seed for one shape, mixed from the plan seed so shapes are
    /// independent but reproducible.
    pub fn shape_seed(&self, shape: &CellShape) -> u64 {
        let mut r = rng(self.seed ^ (u64::from(shape.time_steps) << 32) ^ shape.hidden as u64);
        r.gen()
    }
}

/// Models and inputs for the benchmark grid.
pub trait InstanceSource: Sync {
    fn model(&self, plan: &BenchPlan, shape: &CellShape, seed: u64) -> Result<SnnModel>;
    fn inputs(&self, plan: &BenchPlan, model: &SnnModel, seed: u64) -> Result<Vec<SpikeTimes>>;
}

/// Random grid-weight models `[inputs, hidden, outputs]` and uniformly
/// random input spike times.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomInstances;

impl InstanceSource for RandomInstances {
    fn model(&self, plan: &BenchPlan, shape: &CellShape, seed: u64) -> Result<SnnModel> {
        let mut spec = GenSpec::new(vec![shape.inputs, shape.hidden, plan.outputs], shape.time_steps);
        spec.tau = plan.tau;
        spec.theta = plan.theta;
        gen_model_with(&spec, &mut rng(seed))
    }

    fn inputs(&self, plan: &BenchPlan, model: &SnnModel, seed: u64) -> Result<Vec<SpikeTimes>> {
        let mut r = rng(seed.wrapping_add(1));
        let c = model.config();
        Ok((0..plan.samples).map(|_| random_input(&mut r, c.input_size(), c.time_steps)).collect())
    }
}

fn run_shape(
    plan: &BenchPlan,
    source: &dyn InstanceSource,
    shape: &CellShape,
    log: Option<&ReportLog>,
) -> Result<Vec<ReportRecord>> {
    let seed = plan.shape_seed(shape);
    let model = source.model(plan, shape, seed)?;
    let inputs = source.inputs(plan, &model, seed)?;
    let mut out = Vec::new();
    for &delta in &plan.deltas {
        for &method in &plan.methods {
            for (i, input) in inputs.iter().enumerate() {
                let label = infer(&model, input)?.label;
                for rep in 0..plan.repetitions {
                    let budget = PerturbationBudget(delta);
                    let verdict = match method {
                        Method::Dcs => {
                            let opts = DcsOptions {
                                workers: plan.workers,
                                deadline: plan.deadline,
                                ..DcsOptions::default()
                            };
                            dcs_verify(&model, input, label, budget, &opts)?
                        }
                        Method::Smt => {
                            let opts = SmtOptions {
                                solver: plan.solver.clone().with_timeout(plan.deadline),
                                dump: None,
                            };
                            smt_verify(&model, input, label, budget, &opts)?
                        }
                    };
                    let id = format!("T{}-h{}-s{i}-r{rep}", shape.time_steps, shape.hidden);
                    let record = ReportRecord::new(id, method, &model, input, label, delta, &verdict, Some(*shape));
                    if let Some(log) = log {
                        log.append(&record)?;
                    }
                    out.push(record);
                }
            }
        }
    }
    Ok(out)
}

/// Run every cell of `plan`, appending each record to `log` as it is
/// produced. Records come back in grid order regardless of
/// `parallel_cells`.
pub fn run_plan(plan: &BenchPlan, source: &dyn InstanceSource, log: Option<&ReportLog>) -> Result<Vec<ReportRecord>> {
    plan.validate()?;
    let shapes = plan.shapes();
    if !plan.parallel_cells {
        let mut out = Vec::new();
        for shape in &shapes {
            out.extend(run_shape(plan, source, shape, log)?);
        }
        return Ok(out);
    }

    let threads = thread::available_parallelism().map_or(1, usize::from).min(shapes.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<ReportRecord>>>>> =
        Mutex::new(shapes.iter().map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(shape) = shapes.get(i) else { break };
                let r = run_shape(plan, source, shape, log);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut out = Vec::new();
    for r in results.into_inner().unwrap() {
        out.extend(r.expect("every shape ran")?);
    }
    Ok(out)
}
