//! Full-wave trajectory enumeration.
//!
//! Each photon's full wave follows exactly one mode per stage boundary and
//! can only move along nonzero transform entries. An assignment picks one
//! such path per photon, starting from a jointly supported pair at the end
//! of the preparation region. A rule set decides which assignments a
//! hidden-trajectory model may realize; the report compares the reachable
//! detector pairs with the Born weights.
//!
//! * [`RuleSet::Contextual`]: only the fully evolved state constrains the
//!   assignment; the final pair must carry nonzero amplitude.
//! * [`RuleSet::LocalCounterfactual`]: the contextual constraint, plus each
//!   arm is evolved on its own and the exit of the evolved photon must have
//!   nonzero probability conditioned on the other photon's (unevolved)
//!   full-wave mode.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;

use crate::amplitude::{format_rational, Rational};
use crate::circuit::{Circuit, Stage};
use crate::engine::{self, EngineError, OutcomeTable};
use crate::state::{Arm, ModeLabel, PairKey, TwoPhotonState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleSet {
    LocalCounterfactual,
    Contextual,
}

impl RuleSet {
    pub fn keyword(self) -> &'static str {
        match self {
            RuleSet::LocalCounterfactual => "local",
            RuleSet::Contextual => "contextual",
        }
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for RuleSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(RuleSet::LocalCounterfactual),
            "contextual" => Ok(RuleSet::Contextual),
            other => Err(format!(
                "unknown rule set {other:?} (expected local or contextual)"
            )),
        }
    }
}

/// Staged DAG of the modes one photon can occupy after preparation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmGraph {
    arm: Arm,
    roots: BTreeSet<ModeLabel>,
    /// One edge map per detection-region stage on this arm.
    layers: Vec<BTreeMap<ModeLabel, Vec<ModeLabel>>>,
}

impl ArmGraph {
    fn build(arm: Arm, roots: BTreeSet<ModeLabel>, stages: &[&Stage]) -> Result<Self, EngineError> {
        let mut layers = Vec::with_capacity(stages.len());
        let mut frontier = roots.clone();
        for stage in stages {
            let transform = stage.transform()?;
            let mut edges = BTreeMap::new();
            let mut next = BTreeSet::new();
            for label in &frontier {
                let targets: Vec<ModeLabel> = match transform.column(label) {
                    Some(column) => column
                        .iter()
                        .filter(|(_, amp)| !amp.is_zero())
                        .map(|(l, _)| l.clone())
                        .collect(),
                    None => vec![label.clone()],
                };
                next.extend(targets.iter().cloned());
                edges.insert(label.clone(), targets);
            }
            layers.push(edges);
            frontier = next;
        }
        Ok(Self { arm, roots, layers })
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn roots(&self) -> &BTreeSet<ModeLabel> {
        &self.roots
    }

    pub fn layers(&self) -> &[BTreeMap<ModeLabel, Vec<ModeLabel>>] {
        &self.layers
    }

    /// Labels reachable at the last boundary.
    pub fn leaves(&self) -> BTreeSet<ModeLabel> {
        match self.layers.last() {
            None => self.roots.clone(),
            Some(last) => last.values().flatten().cloned().collect(),
        }
    }

    /// Every root-to-leaf path starting at `root`, in lexicographic order.
    pub fn paths_from(&self, root: &ModeLabel) -> Vec<Vec<ModeLabel>> {
        let mut paths = vec![vec![root.clone()]];
        for layer in &self.layers {
            paths = paths
                .into_iter()
                .flat_map(|path| {
                    let last = path.last().expect("nonempty path");
                    layer
                        .get(last)
                        .into_iter()
                        .flatten()
                        .map(move |next| {
                            let mut p = path.clone();
                            p.push(next.clone());
                            p
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        paths.sort();
        paths
    }

    /// True if `path` starts at a root and follows edges to the last layer.
    pub fn contains_path(&self, path: &[ModeLabel]) -> bool {
        if path.len() != self.layers.len() + 1 || !self.roots.contains(&path[0]) {
            return false;
        }
        path.windows(2).zip(&self.layers).all(|(step, layer)| {
            layer
                .get(&step[0])
                .is_some_and(|targets| targets.contains(&step[1]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryGraph {
    plus: ArmGraph,
    minus: ArmGraph,
    joint_roots: BTreeSet<PairKey>,
}

impl TrajectoryGraph {
    pub fn arm(&self, arm: Arm) -> &ArmGraph {
        match arm {
            Arm::Plus => &self.plus,
            Arm::Minus => &self.minus,
        }
    }

    /// Root pairs carrying nonzero amplitude after preparation.
    pub fn joint_roots(&self) -> &BTreeSet<PairKey> {
        &self.joint_roots
    }

    /// All assignments over jointly supported roots, sorted.
    pub fn assignments(&self) -> Vec<TrajectoryAssignment> {
        let mut out = Vec::new();
        for (rp, rm) in &self.joint_roots {
            let minus_paths = self.minus.paths_from(rm);
            for p in self.plus.paths_from(rp) {
                for m in &minus_paths {
                    out.push(TrajectoryAssignment {
                        plus: p.clone(),
                        minus: m.clone(),
                    });
                }
            }
        }
        out.sort();
        out
    }
}

/// One full-wave path per photon.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrajectoryAssignment {
    pub plus: Vec<ModeLabel>,
    pub minus: Vec<ModeLabel>,
}

impl TrajectoryAssignment {
    pub fn new(plus: Vec<ModeLabel>, minus: Vec<ModeLabel>) -> Self {
        Self { plus, minus }
    }

    pub fn path(&self, arm: Arm) -> &[ModeLabel] {
        match arm {
            Arm::Plus => &self.plus,
            Arm::Minus => &self.minus,
        }
    }

    pub fn root(&self, arm: Arm) -> &ModeLabel {
        self.path(arm).first().expect("nonempty path")
    }

    pub fn exit(&self, arm: Arm) -> &ModeLabel {
        self.path(arm).last().expect("nonempty path")
    }

    pub fn outcome(&self) -> PairKey {
        (self.exit(Arm::Plus).clone(), self.exit(Arm::Minus).clone())
    }
}

impl fmt::Display for TrajectoryAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |p: &[ModeLabel]| {
            p.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(">")
        };
        write!(f, "{} | {}", join(&self.plus), join(&self.minus))
    }
}

type Rejection = (TrajectoryAssignment, Vec<Reason>);

/// Why an assignment was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    NotInGraph(Arm),
    UnsupportedRoot(PairKey),
    /// Evolving only `evolved` and conditioning on the other photon's root
    /// `given` leaves `exit` with probability zero.
    ZeroConditional {
        evolved: Arm,
        given: ModeLabel,
        exit: ModeLabel,
    },
    ZeroFinalAmplitude(PairKey),
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::NotInGraph(arm) => write!(f, "{arm} path is not in the trajectory graph"),
            Reason::UnsupportedRoot((p, m)) => {
                write!(f, "joint root ({p},{m}) has zero amplitude after preparation")
            }
            Reason::ZeroConditional {
                evolved,
                given,
                exit,
            } => write!(
                f,
                "single-sided evolution of the {evolved} arm: given {given}, {exit} has conditional probability 0"
            ),
            Reason::ZeroFinalAmplitude((p, m)) => {
                write!(f, "final pair ({p},{m}) has zero amplitude")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    pub reasons: Vec<Reason>,
}

/// Everything derived from a circuit that feasibility checks need.
#[derive(Debug, Clone)]
pub struct ParadoxContext {
    graph: TrajectoryGraph,
    prepared: TwoPhotonState,
    /// Prepared state with only the plus (index 0) or minus (index 1)
    /// detection stages applied.
    single_sided: [TwoPhotonState; 2],
    detected: TwoPhotonState,
    table: OutcomeTable,
    outcomes_plus: BTreeSet<ModeLabel>,
    outcomes_minus: BTreeSet<ModeLabel>,
}

impl ParadoxContext {
    pub fn new(circuit: &Circuit) -> Result<Self, EngineError> {
        let split = circuit.preparation_len();
        let (prep, detect) = circuit.stages().split_at(split);
        let evolved = engine::evolve_stages(circuit.source(), prep)?;
        let (prepared, _) = engine::postselect(&evolved, circuit.discard())?;

        let on_arm = |arm: Arm| -> Vec<Stage> {
            detect.iter().filter(|s| s.arm() == arm).cloned().collect()
        };
        let (plus_stages, minus_stages) = (on_arm(Arm::Plus), on_arm(Arm::Minus));
        let graph = TrajectoryGraph {
            plus: ArmGraph::build(
                Arm::Plus,
                prepared.support(Arm::Plus),
                &plus_stages.iter().collect::<Vec<_>>(),
            )?,
            minus: ArmGraph::build(
                Arm::Minus,
                prepared.support(Arm::Minus),
                &minus_stages.iter().collect::<Vec<_>>(),
            )?,
            joint_roots: prepared.iter().map(|(k, _)| k.clone()).collect(),
        };
        let single_sided = [
            engine::evolve_stages(&prepared, &plus_stages)?,
            engine::evolve_stages(&prepared, &minus_stages)?,
        ];
        let detected = engine::evolve_stages(&prepared, detect)?;
        let table = engine::outcome_table(circuit)?;

        let outcomes = |arm: Arm| {
            let placed = circuit.detectors_on(arm);
            if placed.is_empty() {
                graph.arm(arm).leaves()
            } else {
                placed
            }
        };
        let outcomes_plus = outcomes(Arm::Plus);
        let outcomes_minus = outcomes(Arm::Minus);
        Ok(Self {
            graph,
            prepared,
            single_sided,
            detected,
            table,
            outcomes_plus,
            outcomes_minus,
        })
    }

    pub fn graph(&self) -> &TrajectoryGraph {
        &self.graph
    }

    /// Post-selected state at the end of the preparation region.
    pub fn prepared(&self) -> &TwoPhotonState {
        &self.prepared
    }

    /// Prepared state with only `arm`'s detection stages applied.
    pub fn single_sided(&self, arm: Arm) -> &TwoPhotonState {
        match arm {
            Arm::Plus => &self.single_sided[0],
            Arm::Minus => &self.single_sided[1],
        }
    }

    pub fn table(&self) -> &OutcomeTable {
        &self.table
    }

    pub fn feasible(&self, a: &TrajectoryAssignment, rules: RuleSet) -> Feasibility {
        let mut reasons = Vec::new();
        for arm in [Arm::Plus, Arm::Minus] {
            if !self.graph.arm(arm).contains_path(a.path(arm)) {
                reasons.push(Reason::NotInGraph(arm));
            }
        }
        if !reasons.is_empty() {
            return Feasibility {
                feasible: false,
                reasons,
            };
        }
        match rules {
            RuleSet::LocalCounterfactual => {
                let root = (a.root(Arm::Plus).clone(), a.root(Arm::Minus).clone());
                if self.prepared.amplitude(&root.0, &root.1).is_zero() {
                    reasons.push(Reason::UnsupportedRoot(root));
                }
                for evolved in [Arm::Plus, Arm::Minus] {
                    let given = a.root(evolved.other());
                    let exit = a.exit(evolved);
                    // An unsupported root has already been reported above.
                    let Ok(dist) = engine::conditional(self.single_sided(evolved), given) else {
                        continue;
                    };
                    if dist.get(exit).is_none_or(Zero::is_zero) {
                        reasons.push(Reason::ZeroConditional {
                            evolved,
                            given: given.clone(),
                            exit: exit.clone(),
                        });
                    }
                }
            }
            RuleSet::Contextual => {}
        }
        // Both rule sets respect the actual arrangement's zeros, so the
        // local rules are a strict tightening of the contextual ones.
        let (p, m) = a.outcome();
        if self.detected.amplitude(&p, &m).is_zero() {
            reasons.push(Reason::ZeroFinalAmplitude((p, m)));
        }
        Feasibility {
            feasible: reasons.is_empty(),
            reasons,
        }
    }

    pub fn report(&self, rules: RuleSet) -> ParadoxReport {
        let mut by_outcome: BTreeMap<PairKey, (Vec<TrajectoryAssignment>, Vec<Rejection>)> =
            BTreeMap::new();
        let assignments = self.graph.assignments();
        for a in &assignments {
            let verdict = self.feasible(a, rules);
            let slot = by_outcome.entry(a.outcome()).or_default();
            if verdict.feasible {
                slot.0.push(a.clone());
            } else {
                slot.1.push((a.clone(), verdict.reasons));
            }
        }
        let mut outcomes = Vec::new();
        for p in &self.outcomes_plus {
            for m in &self.outcomes_minus {
                let key = (p.clone(), m.clone());
                let (feasible, rejected) = by_outcome.remove(&key).unwrap_or_default();
                let qm_probability = self.table.probability(p, m);
                let verdict = Verdict::classify(&qm_probability, !feasible.is_empty());
                outcomes.push(OutcomeReport {
                    outcome: key,
                    qm_probability,
                    feasible,
                    rejected,
                    verdict,
                });
            }
        }
        ParadoxReport {
            rules,
            assignment_count: assignments.len(),
            outcomes,
        }
    }
}

/// Trajectory graph of a circuit.
pub fn build_graph(circuit: &Circuit) -> Result<TrajectoryGraph, EngineError> {
    Ok(ParadoxContext::new(circuit)?.graph)
}

/// Checks one assignment against a rule set.
pub fn feasible(
    assignment: &TrajectoryAssignment,
    rules: RuleSet,
    circuit: &Circuit,
) -> Result<Feasibility, EngineError> {
    Ok(ParadoxContext::new(circuit)?.feasible(assignment, rules))
}

/// Exhaustive enumeration with a verdict for every detector pair.
pub fn paradox_report(circuit: &Circuit, rules: RuleSet) -> Result<ParadoxReport, EngineError> {
    Ok(ParadoxContext::new(circuit)?.report(rules))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Consistent,
    /// Nonzero Born weight but no feasible assignment reaches the pair.
    ForbiddenButPredicted,
    /// Some assignment reaches the pair, but its Born weight is zero. The
    /// built-in rule sets both check the final amplitude, so neither
    /// produces this verdict.
    AllowedButImpossible,
}

impl Verdict {
    fn classify(qm_probability: &Rational, reachable: bool) -> Verdict {
        match (qm_probability.is_zero(), reachable) {
            (false, false) => Verdict::ForbiddenButPredicted,
            (true, true) => Verdict::AllowedButImpossible,
            _ => Verdict::Consistent,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::ForbiddenButPredicted => "forbidden-but-predicted",
            Verdict::AllowedButImpossible => "allowed-but-impossible",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeReport {
    pub outcome: PairKey,
    pub qm_probability: Rational,
    pub feasible: Vec<TrajectoryAssignment>,
    pub rejected: Vec<(TrajectoryAssignment, Vec<Reason>)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadoxReport {
    pub rules: RuleSet,
    pub assignment_count: usize,
    pub outcomes: Vec<OutcomeReport>,
}

impl ParadoxReport {
    pub fn outcome(&self, plus: &ModeLabel, minus: &ModeLabel) -> Option<&OutcomeReport> {
        self.outcomes
            .iter()
            .find(|o| &o.outcome.0 == plus && &o.outcome.1 == minus)
    }

    pub fn with_verdict(&self, verdict: Verdict) -> Vec<&PairKey> {
        self.outcomes
            .iter()
            .filter(|o| o.verdict == verdict)
            .map(|o| &o.outcome)
            .collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Path {
            plus: Vec<String>,
            minus: Vec<String>,
        }
        #[derive(Serialize)]
        struct Rejected {
            plus: Vec<String>,
            minus: Vec<String>,
            reasons: Vec<String>,
        }
        #[derive(Serialize)]
        struct Outcome {
            outcome: [String; 2],
            qm_p: String,
            feasible: Vec<Path>,
            verdict: &'static str,
            rejected: Vec<Rejected>,
        }
        #[derive(Serialize)]
        struct Doc {
            rules: &'static str,
            assignments: usize,
            outcomes: Vec<Outcome>,
        }
        let names = |p: &[ModeLabel]| p.iter().map(ToString::to_string).collect::<Vec<_>>();
        let doc = Doc {
            rules: self.rules.keyword(),
            assignments: self.assignment_count,
            outcomes: self
                .outcomes
                .iter()
                .map(|o| Outcome {
                    outcome: [o.outcome.0.to_string(), o.outcome.1.to_string()],
                    qm_p: format_rational(&o.qm_probability),
                    feasible: o
                        .feasible
                        .iter()
                        .map(|a| Path {
                            plus: names(&a.plus),
                            minus: names(&a.minus),
                        })
                        .collect(),
                    verdict: o.verdict.as_str(),
                    rejected: o
                        .rejected
                        .iter()
                        .map(|(a, r)| Rejected {
                            plus: names(&a.plus),
                            minus: names(&a.minus),
                            reasons: r.iter().map(ToString::to_string).collect(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("report serializes")
    }
}

/// Outcome of testing a joint table for independent responses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductVerdict {
    Feasible,
    Infeasible {
        witness: PairKey,
        joint: Rational,
        product: Rational,
    },
}

impl ProductVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ProductVerdict::Feasible)
    }
}

/// Two independently responding photons can only produce the outer product
/// of the table's own marginals. Returns the first cell (in label order)
/// where the table differs from it.
pub fn product_test(table: &OutcomeTable) -> ProductVerdict {
    let plus = table.marginal(Arm::Plus);
    let minus = table.marginal(Arm::Minus);
    for (p, pp) in &plus {
        for (m, pm) in &minus {
            let joint = table.probability(p, m);
            let product = pp * pm;
            if joint != product {
                return ProductVerdict::Infeasible {
                    witness: (p.clone(), m.clone()),
                    joint,
                    product,
                };
            }
        }
    }
    ProductVerdict::Feasible
}
