//! Gate-level structure of the logical boosting circuit.
//!
//! The circuit has `n` uniform sources, one OR tree per clause (with a NOT
//! gate in front of every negated literal), an AND tree over the clause
//! outputs producing `D_0`, and `N` boost stages `D_v = D_{v-1} OR
//! CLONE(D_{v-1})`. Wide AND/OR gates are decomposed into trees of gates
//! with at most `K` inputs.

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, CnfError, CnfFormula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate fan-in must be at least 2, got {0}")]
    FanIn(usize),
    #[error("a gate tree needs at least one input")]
    NoInputs,
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    /// Fresh uniform bit or qubit.
    Source,
    Not,
    And,
    Or,
    /// Copy of its single input; the input wire continues unchanged.
    Clone,
}

/// A balanced tree of gates over inputs `0 .. M`, in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateTree {
    Input(usize),
    Gate(Vec<GateTree>),
}

impl GateTree {
    pub fn gate_count(&self) -> usize {
        match self {
            GateTree::Input(_) => 0,
            GateTree::Gate(children) => 1 + children.iter().map(GateTree::gate_count).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            GateTree::Input(_) => 0,
            GateTree::Gate(children) => 1 + children.iter().map(GateTree::depth).max().unwrap_or(0),
        }
    }

    /// Largest number of inputs on any single gate.
    pub fn max_fan_in(&self) -> usize {
        match self {
            GateTree::Input(_) => 0,
            GateTree::Gate(children) => children
                .iter()
                .map(GateTree::max_fan_in)
                .max()
                .unwrap_or(0)
                .max(children.len()),
        }
    }

    /// Evaluates the tree with every gate computing `op` (AND or OR).
    pub fn eval(&self, op: GateKind, inputs: &[bool]) -> bool {
        match self {
            GateTree::Input(i) => inputs[*i],
            GateTree::Gate(children) => {
                let mut values = children.iter().map(|c| c.eval(op, inputs));
                match op {
                    GateKind::And => values.all(|v| v),
                    GateKind::Or => values.any(|v| v),
                    other => panic!("{other:?} is not a tree gate"),
                }
            }
        }
    }
}

/// Smallest `d` with `base^d >= value`.
pub fn ceil_log(base: usize, value: usize) -> u32 {
    let mut d = 0;
    let mut reach: u128 = 1;
    while reach < value as u128 {
        reach *= base as u128;
        d += 1;
    }
    d
}

/// Decomposes an `inputs`-ary AND/OR into gates of at most `fan_in` inputs.
///
/// The tree uses exactly `ceil((M-1)/(K-1))` gates and has depth
/// `ceil(log_K M)`. Subtrees are filled greedily left to right: every
/// gate above the leaves takes `K` children, the leftmost children are full
/// subtrees of capacity `K^(depth-1)`, one child takes the remainder and any
/// children after it are single wires.
pub fn decompose_gate(inputs: usize, fan_in: usize) -> Result<GateTree, CircuitError> {
    if fan_in < 2 {
        return Err(CircuitError::FanIn(fan_in));
    }
    if inputs == 0 {
        return Err(CircuitError::NoInputs);
    }
    Ok(build_tree(0, inputs, fan_in))
}

fn build_tree(start: usize, len: usize, k: usize) -> GateTree {
    if len == 1 {
        return GateTree::Input(start);
    }
    if len <= k {
        return GateTree::Gate((start..start + len).map(GateTree::Input).collect());
    }
    let depth = ceil_log(k, len);
    let cap = k.pow(depth - 1);
    let mut children = Vec::with_capacity(k);
    let mut next = start;
    let mut remaining = len;
    for slot in 0..k {
        let later_slots = k - slot - 1;
        let size = cap.min(remaining - later_slots);
        children.push(build_tree(next, size, k));
        next += size;
        remaining -= size;
    }
    debug_assert_eq!(remaining, 0);
    GateTree::Gate(children)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub kind: GateKind,
    pub inputs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub n: u32,
    pub m: usize,
    pub level: u32,
    pub fan_in: usize,
}

/// The LB(N) circuit as a DAG whose nodes are stored in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoostCircuit {
    params: CircuitParams,
    nodes: Vec<Node>,
    layers: Vec<u32>,
    clause_outputs: Vec<usize>,
    clause_or_depths: Vec<u32>,
    and_depth: u32,
    // D_0 .. D_N
    boost_nodes: Vec<usize>,
    warnings: Vec<String>,
}

struct Builder {
    nodes: Vec<Node>,
    layers: Vec<u32>,
}

impl Builder {
    fn push(&mut self, kind: GateKind, inputs: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let layer = inputs.iter().map(|&i| self.layers[i] + 1).max().unwrap_or(0);
        self.nodes.push(Node { id, kind, inputs });
        self.layers.push(layer);
        id
    }

    fn instantiate(&mut self, tree: &GateTree, wires: &[usize], kind: GateKind) -> usize {
        match tree {
            GateTree::Input(i) => wires[*i],
            GateTree::Gate(children) => {
                let ins = children
                    .iter()
                    .map(|c| self.instantiate(c, wires, kind))
                    .collect();
                self.push(kind, ins)
            }
        }
    }
}

/// Builds the circuit for `formula` with `level` boost stages and gates of
/// fan-in at most `fan_in`.
pub fn build_lb_circuit(
    formula: &CnfFormula,
    level: u32,
    fan_in: usize,
) -> Result<BoostCircuit, CircuitError> {
    if fan_in < 2 {
        return Err(CircuitError::FanIn(fan_in));
    }
    let n = formula.num_vars();
    let mut warnings = Vec::new();
    if level < n {
        warnings.push(format!(
            "boosting level {level} is below the variable count {n}; the error bound is weak"
        ));
    }
    let mut b = Builder {
        nodes: Vec::new(),
        layers: Vec::new(),
    };
    let sources: Vec<usize> = (0..n).map(|_| b.push(GateKind::Source, vec![])).collect();

    let mut clause_outputs = Vec::with_capacity(formula.num_clauses());
    let mut clause_or_depths = Vec::with_capacity(formula.num_clauses());
    for clause in formula.clauses() {
        let wires: Vec<usize> = clause
            .literals()
            .iter()
            .map(|lit| {
                let src = sources[lit.var as usize];
                if lit.negated {
                    b.push(GateKind::Not, vec![src])
                } else {
                    src
                }
            })
            .collect();
        let tree = decompose_gate(wires.len(), fan_in)?;
        clause_or_depths.push(tree.depth());
        clause_outputs.push(b.instantiate(&tree, &wires, GateKind::Or));
    }

    let and_tree = decompose_gate(clause_outputs.len(), fan_in)?;
    let mut current = b.instantiate(&and_tree, &clause_outputs, GateKind::And);
    let mut boost_nodes = vec![current];
    for _ in 0..level {
        let copy = b.push(GateKind::Clone, vec![current]);
        current = b.push(GateKind::Or, vec![current, copy]);
        boost_nodes.push(current);
    }

    Ok(BoostCircuit {
        params: CircuitParams {
            n,
            m: formula.num_clauses(),
            level,
            fan_in,
        },
        nodes: b.nodes,
        layers: b.layers,
        clause_outputs,
        clause_or_depths,
        and_depth: and_tree.depth(),
        boost_nodes,
        warnings,
    })
}

impl BoostCircuit {
    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn layer(&self, id: usize) -> u32 {
        self.layers[id]
    }

    pub fn output(&self) -> usize {
        *self.boost_nodes.last().expect("D_0 always exists")
    }

    /// Node ids of `D_0 .. D_N`.
    pub fn boost_nodes(&self) -> &[usize] {
        &self.boost_nodes
    }

    pub fn clause_outputs(&self) -> &[usize] {
        &self.clause_outputs
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Deterministic evaluation with CLONE as plain fan-out; returns the
    /// value of every node.
    pub fn eval(&self, assignment: &Assignment) -> Result<Vec<bool>, CircuitError> {
        if assignment.len() != self.params.n as usize {
            return Err(CnfError::AssignmentLength {
                expected: self.params.n,
                got: assignment.len(),
            }
            .into());
        }
        let mut values: Vec<bool> = Vec::with_capacity(self.nodes.len());
        let mut next_source = 0;
        for node in &self.nodes {
            let v = match node.kind {
                GateKind::Source => {
                    let v = assignment.get(next_source);
                    next_source += 1;
                    v
                }
                GateKind::Not => !values[node.inputs[0]],
                GateKind::Clone => values[node.inputs[0]],
                GateKind::And => node.inputs.iter().all(|&i| values[i]),
                GateKind::Or => node.inputs.iter().any(|&i| values[i]),
            };
            values.push(v);
        }
        Ok(values)
    }

    /// Output value `D_N` under a concrete assignment.
    pub fn eval_output(&self, assignment: &Assignment) -> Result<bool, CircuitError> {
        Ok(self.eval(assignment)?[self.output()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub source: usize,
    pub not: usize,
    pub and: usize,
    pub or: usize,
    pub clone: usize,
}

/// A time cost `q * t_q + k * t_K + c * t_C`, kept symbolic as its
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeModel {
    pub t_q: u64,
    pub t_k: u64,
    pub t_c: u64,
}

impl TimeModel {
    pub fn evaluate(&self, t_q: f64, t_k: f64, t_c: f64) -> f64 {
        self.t_q as f64 * t_q + self.t_k as f64 * t_k + self.t_c as f64 * t_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub gates: GateCounts,
    /// Longest source-to-output path, in gate layers.
    pub depth: u32,
    /// Layers from the sources to `D_0` (NOT layer, clause ORs, clause AND).
    pub logic_depth: u32,
    pub max_clause_or_depth: u32,
    pub and_depth: u32,
    /// Per-step time: `n` source creations, `logic_depth` gate layers, then
    /// one gate layer and one clone per boost stage.
    pub time_model: TimeModel,
    /// Coarser per-step bound `t_q n + t_K (m ceil(log_K n) + ceil(log_K m))
    /// + (t_K + t_C) N`, which assumes every clause has `O(n)` literals.
    pub complexity_bound: TimeModel,
    pub time_total: f64,
    pub bound_total: f64,
}

/// Gate counts, depths and time model of a circuit for unit times
/// `t_q` (source), `t_k` (gate) and `t_c` (clone).
pub fn report_resources(c: &BoostCircuit, t_q: f64, t_k: f64, t_c: f64) -> ResourceReport {
    let p = c.params;
    let gates = GateCounts {
        source: c.count(GateKind::Source),
        not: c.count(GateKind::Not),
        and: c.count(GateKind::And),
        or: c.count(GateKind::Or),
        clone: c.count(GateKind::Clone),
    };
    let logic_depth = c.layers[c.boost_nodes[0]];
    let level = u64::from(p.level);
    let time_model = TimeModel {
        t_q: u64::from(p.n),
        t_k: u64::from(logic_depth) + level,
        t_c: level,
    };
    let complexity_bound = TimeModel {
        t_q: u64::from(p.n),
        t_k: p.m as u64 * u64::from(ceil_log(p.fan_in, p.n as usize))
            + u64::from(ceil_log(p.fan_in, p.m))
            + level,
        t_c: level,
    };
    ResourceReport {
        gates,
        depth: c.layers[c.output()],
        logic_depth,
        max_clause_or_depth: c.clause_or_depths.iter().copied().max().unwrap_or(0),
        and_depth: c.and_depth,
        time_model,
        complexity_bound,
        time_total: time_model.evaluate(t_q, t_k, t_c),
        bound_total: complexity_bound.evaluate(t_q, t_k, t_c),
    }
}

/// Serializable export of a circuit with its resource report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitDocument {
    pub params: CircuitParams,
    pub nodes: Vec<Node>,
    pub output: usize,
    pub boost_nodes: Vec<usize>,
    pub resources: ResourceReport,
    pub warnings: Vec<String>,
}

impl CircuitDocument {
    pub fn new(c: &BoostCircuit, resources: ResourceReport) -> Self {
        CircuitDocument {
            params: c.params,
            nodes: c.nodes.clone(),
            output: c.output(),
            boost_nodes: c.boost_nodes.clone(),
            resources,
            warnings: c.warnings.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expected_gates(m: usize, k: usize) -> usize {
        (m - 1).div_ceil(k - 1)
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose_gate(9, 2).unwrap().gate_count(), 8);
        let wire = decompose_gate(1, 2).unwrap();
        assert_eq!(wire, GateTree::Input(0));
        assert_eq!(wire.gate_count(), 0);
        // ceil(9/2) = 5 gates and ceil(log3 10) = 3 layers
        let t = decompose_gate(10, 3).unwrap();
        assert_eq!((t.gate_count(), t.depth()), (5, 3));
    }

    #[test]
    fn decompose_rejects_bad_arguments() {
        assert_eq!(decompose_gate(4, 1), Err(CircuitError::FanIn(1)));
        assert_eq!(decompose_gate(0, 2), Err(CircuitError::NoInputs));
    }

    #[test]
    fn decompose_counts_depth_and_fan_in() {
        for k in 2..=8 {
            for m in 1..=200 {
                let t = decompose_gate(m, k).unwrap();
                assert_eq!(t.gate_count(), expected_gates(m, k), "M={m} K={k}");
                assert_eq!(t.depth(), ceil_log(k, m), "M={m} K={k}");
                assert!(t.max_fan_in() <= k);
            }
        }
    }

    #[test]
    fn ceil_log_values() {
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(2, 8), 3);
        assert_eq!(ceil_log(2, 9), 4);
        assert_eq!(ceil_log(3, 10), 3);
        assert_eq!(ceil_log(3, 9), 2);
    }

    #[test]
    fn smallest_instance() {
        let f = CnfFormula::from_signed(2, &[&[1, 2]]).unwrap();
        let c = build_lb_circuit(&f, 2, 2).unwrap();
        assert_eq!(c.count(GateKind::Source), 2);
        assert_eq!(c.count(GateKind::Not), 0);
        assert_eq!(c.count(GateKind::And), 0);
        // one clause OR plus one OR per boost stage
        assert_eq!(c.count(GateKind::Or), 3);
        assert_eq!(c.count(GateKind::Clone), 2);
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn example_formula_counts() {
        let f = CnfFormula::from_signed(4, &[&[-2, -3], &[1, 2, 4]]).unwrap();
        let c = build_lb_circuit(&f, 0, 2).unwrap();
        assert_eq!(c.count(GateKind::Not), 2);
        assert_eq!(c.count(GateKind::Or), 1 + 2);
        assert_eq!(c.count(GateKind::And), 1);
        assert_eq!(c.count(GateKind::Clone), 0);
        assert_eq!(c.output(), c.boost_nodes()[0]);
        assert_eq!(c.warnings().len(), 1);
    }

    #[test]
    fn level_zero_outputs_d0() {
        let f = CnfFormula::from_signed(3, &[&[1], &[2, -3]]).unwrap();
        let c = build_lb_circuit(&f, 0, 3).unwrap();
        assert_eq!(c.boost_nodes().len(), 1);
        let d0 = c.boost_nodes()[0];
        assert_eq!(c.nodes()[d0].kind, GateKind::And);
    }

    #[test]
    fn circuit_eval_matches_formula() {
        let f = CnfFormula::from_signed(5, &[&[-2, -3], &[1, 2, 4], &[5, -1, 3, 2], &[4]]).unwrap();
        for k in 2..=4 {
            let c = build_lb_circuit(&f, 3, k).unwrap();
            for mask in 0..32 {
                let a = Assignment::from_mask(5, mask);
                let values = c.eval(&a).unwrap();
                let truth = f.evaluate(&a).unwrap();
                assert_eq!(values[c.boost_nodes()[0]], truth);
                assert_eq!(values[c.output()], truth);
            }
        }
    }

    #[test]
    fn resources_for_boost_stages() {
        let f = CnfFormula::from_signed(4, &[&[-2, -3], &[1, 2, 4]]).unwrap();
        let c = build_lb_circuit(&f, 10, 2).unwrap();
        let r = report_resources(&c, 0.0, 1.0, 1.0);
        let base = report_resources(&build_lb_circuit(&f, 0, 2).unwrap(), 0.0, 1.0, 1.0);
        // each stage is one clone plus one gate layer
        assert_eq!(r.time_total - base.time_total, 10.0 * (1.0 + 1.0));
        assert_eq!(r.time_model.t_c, 10);
        assert_eq!(r.depth, r.logic_depth + 2 * 10);
        // NOT + OR on the first clause and two OR layers on the second both
        // reach layer 2, then one AND layer
        assert_eq!(r.logic_depth, 3);
        assert_eq!(r.and_depth, 1);
        assert_eq!(r.max_clause_or_depth, 2);
    }

    #[test]
    fn single_clause_and_tree_is_empty() {
        let f = CnfFormula::from_signed(8, &[&[1, 2, 3, 4, 5, 6, 7, 8]]).unwrap();
        let c = build_lb_circuit(&f, 8, 2).unwrap();
        let r = report_resources(&c, 1.0, 1.0, 1.0);
        assert_eq!(r.gates.and, 0);
        assert_eq!(r.and_depth, 0);
        assert_eq!(r.max_clause_or_depth, 3);
        assert_eq!(r.gates.or, 7 + 8);
    }
}
