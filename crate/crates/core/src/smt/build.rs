use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::term::{Sort, Term, VarId};
use crate::dcs::check_label;
use crate::error::Result;
use crate::model::{SnnModel, SpikeTimes};
use crate::perturb::PerturbationBudget;
use crate::validate::Constraint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub origin: Constraint,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub model_hash: String,
    pub input_hash: String,
    pub delta: u32,
    pub label: usize,
}

/// Position of every variable family inside `decls`.
///
/// Declarations are grouped: spike times of layers `0..=L`, potentials of
/// layers `1..=L` (all `t`), flags (same shape), then the `|shift|` helpers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    steps: u32,
    sizes: Vec<usize>,
    spike_base: Vec<u32>,
    potential_base: Vec<u32>,
    flag_base: Vec<u32>,
    helper_base: u32,
    total: u32,
}

impl VarLayout {
    pub fn new(sizes: &[usize], steps: u32) -> Self {
        let mut next = 0u32;
        let mut spike_base = Vec::with_capacity(sizes.len());
        for &n in sizes {
            spike_base.push(next);
            next += n as u32;
        }
        let mut potential_base = Vec::new();
        for &n in &sizes[1..] {
            potential_base.push(next);
            next += n as u32 * steps;
        }
        let mut flag_base = Vec::new();
        for &n in &sizes[1..] {
            flag_base.push(next);
            next += n as u32 * steps;
        }
        let helper_base = next;
        next += sizes[0] as u32;
        Self {
            steps,
            sizes: sizes.to_vec(),
            spike_base,
            potential_base,
            flag_base,
            helper_base,
            total: next,
        }
    }

    pub fn spike(&self, layer: usize, n: usize) -> VarId {
        VarId(self.spike_base[layer] + n as u32)
    }

    pub fn potential(&self, layer: usize, t: u32, n: usize) -> VarId {
        VarId(self.potential_base[layer - 1] + t * self.sizes[layer] as u32 + n as u32)
    }

    pub fn flag(&self, layer: usize, t: u32, n: usize) -> VarId {
        VarId(self.flag_base[layer - 1] + t * self.sizes[layer] as u32 + n as u32)
    }

    /// Helper bounding `|s_{0,n} - x_n|`.
    pub fn helper(&self, n: usize) -> VarId {
        VarId(self.helper_base + n as u32)
    }

    pub fn len(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn declarations(&self) -> Vec<Decl> {
        let mut decls = Vec::with_capacity(self.len());
        for (l, &n) in self.sizes.iter().enumerate() {
            for i in 0..n {
                decls.push(Decl {
                    name: format!("s_{l}_{i}"),
                    sort: Sort::Int,
                });
            }
        }
        for (prefix, sort) in [("p", Sort::Real), ("a", Sort::Bool)] {
            for (l, &n) in self.sizes.iter().enumerate().skip(1) {
                for t in 0..self.steps {
                    for i in 0..n {
                        decls.push(Decl {
                            name: format!("{prefix}_{l}_{t}_{i}"),
                            sort,
                        });
                    }
                }
            }
        }
        for i in 0..self.sizes[0] {
            decls.push(Decl {
                name: format!("d_{i}"),
                sort: Sort::Int,
            });
        }
        decls
    }
}

/// Per-family declaration counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarCounts {
    pub input_spikes: usize,
    pub spikes: usize,
    pub potentials: usize,
    pub flags: usize,
    pub helpers: usize,
}

/// The robustness query: network semantics, the input perturbation budget,
/// and the negated strict-win property of the label.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub decls: Vec<Decl>,
    pub assertions: Vec<Assertion>,
    pub meta: Metadata,
    pub layout: VarLayout,
}

impl ConstraintSystem {
    pub fn name(&self, v: VarId) -> &str {
        &self.decls[v.0 as usize].name
    }

    pub fn counts(&self) -> VarCounts {
        let sizes = &self.layout.sizes;
        let hidden: usize = sizes[1..].iter().sum();
        let steps = self.layout.steps as usize;
        VarCounts {
            input_spikes: sizes[0],
            spikes: hidden,
            potentials: hidden * steps,
            flags: hidden * steps,
            helpers: sizes[0],
        }
    }

    pub fn assertions_for(&self, origin: Constraint) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(move |a| a.origin == origin)
    }
}

/// Instantiate the constraint system whose models are exactly the
/// perturbations of `input` (within `budget`) on which `label` does not win
/// strictly, together with the network's full run on them.
pub fn build_constraints(
    model: &SnnModel,
    input: &SpikeTimes,
    label: usize,
    budget: PerturbationBudget,
) -> Result<ConstraintSystem> {
    let config = model.config();
    input.check_input(config)?;
    check_label(model, label)?;

    let steps = config.time_steps;
    let last = steps - 1;
    let tau = config.tau;
    let depth = config.depth();
    let sizes = &config.layer_sizes;
    let layout = VarLayout::new(sizes, steps);
    let v = |id: VarId| Term::Var(id);
    let theta = || Term::Real(config.theta);
    let mut assertions = Vec::new();
    let mut assert = |origin: Constraint, term: Term| assertions.push(Assertion { origin, term });

    // spike-time ranges; layer 0 is the input range [0, T-1]
    for (l, &width) in sizes.iter().enumerate() {
        let lo = i64::from(config.earliest_spike(l));
        for n in 0..width {
            let s = v(layout.spike(l, n));
            assert(
                Constraint::Xi1,
                Term::and(alloc::vec![
                    Term::ge(s.clone(), Term::Int(lo)),
                    Term::le(s, Term::Int(i64::from(last))),
                ]),
            );
        }
    }

    for l in 1..=depth {
        for n in 0..sizes[l] {
            assert(
                Constraint::Xi2,
                Term::eq(v(layout.potential(l, 0, n)), Term::Real(0.0)),
            );
        }
    }

    for l in 1..=depth {
        let w = model.weights_into(l);
        for n in 0..sizes[l] {
            for t in 1..steps {
                let sum = (0..sizes[l - 1])
                    .map(|m| {
                        Term::ite(
                            Term::le(v(layout.spike(l - 1, m)), Term::Int(i64::from(t))),
                            Term::Real(w.get(m, n)),
                            Term::Real(0.0),
                        )
                    })
                    .collect();
                assert(
                    Constraint::Xi3,
                    Term::eq(v(layout.potential(l, t, n)), Term::add(sum)),
                );
            }
        }
    }

    // a_{l,0,n} is the empty disjunction
    for l in 1..=depth {
        for n in 0..sizes[l] {
            assert(Constraint::Xi4, Term::not(v(layout.flag(l, 0, n))));
            for t in 1..steps {
                let crossed = (0..t)
                    .map(|u| Term::ge(v(layout.potential(l, u, n)), theta()))
                    .collect();
                assert(
                    Constraint::Xi4,
                    Term::eq(v(layout.flag(l, t, n)), Term::or(crossed)),
                );
            }
        }
    }

    for l in 1..=depth {
        for n in 0..sizes[l] {
            for t in config.earliest_spike(l)..last {
                let u = t - tau;
                let fires = Term::and(alloc::vec![
                    Term::not(v(layout.flag(l, u, n))),
                    Term::ge(v(layout.potential(l, u, n)), theta()),
                ]);
                assert(
                    Constraint::Xi5,
                    Term::eq(fires, Term::eq(v(layout.spike(l, n)), Term::Int(i64::from(t)))),
                );
            }
        }
    }

    for l in 1..=depth {
        for n in 0..sizes[l] {
            assert(
                Constraint::Xi6,
                Term::eq(
                    Term::not(v(layout.flag(l, last - tau, n))),
                    Term::eq(v(layout.spike(l, n)), Term::Int(i64::from(last))),
                ),
            );
        }
    }

    // L1 budget via d_n >= |s_{0,n} - x_n|
    let mut helpers = Vec::with_capacity(sizes[0]);
    for (n, &x) in input.times.iter().enumerate() {
        let s = v(layout.spike(0, n));
        let d = v(layout.helper(n));
        let x = Term::Int(i64::from(x));
        assert(Constraint::Xi7, Term::ge(d.clone(), Term::sub(s.clone(), x.clone())));
        assert(Constraint::Xi7, Term::ge(d.clone(), Term::sub(x, s)));
        assert(Constraint::Xi7, Term::ge(d.clone(), Term::Int(0)));
        helpers.push(d);
    }
    assert(
        Constraint::Xi7,
        Term::le(Term::add(helpers), Term::Int(i64::from(budget.get()))),
    );

    // negated strict win: some other output spikes no later than the label
    let output = v(layout.spike(depth, label));
    let rivals = (0..sizes[depth])
        .filter(|&n| n != label)
        .map(|n| Term::le(v(layout.spike(depth, n)), output.clone()))
        .collect();
    assert(Constraint::Xi8, Term::or(rivals));

    Ok(ConstraintSystem {
        decls: layout.declarations(),
        assertions,
        meta: Metadata {
            model_hash: model.short_hash(),
            input_hash: input.short_hash(),
            delta: budget.get(),
            label,
        },
        layout,
    })
}
