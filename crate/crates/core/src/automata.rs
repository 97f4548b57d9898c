//! Variable-structure learning automaton over a finite action set.
//!
//! The automaton's whole state is a [`ProbabilityVector`]. Environment
//! responses arrive as [`Feedback`] and are folded into the vector by the
//! linear reinforcement rules below; [`select_action`] turns a uniform draw
//! into an action through the cumulative sum of the probabilities.
//!
//! Action indices in this module are 0-based. Configuration files, CSV
//! output and the robot action table use 1-based ids.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum allowed deviation of `Σp` from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Probability distribution over `r >= 2` actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidActionCount(probs.len()));
        }
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbabilities(format!(
                "component {bad} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbabilities(format!(
                "components sum to {sum}"
            )));
        }
        Ok(Self(probs))
    }

    /// Every component equal to `1/r`.
    pub fn uniform(r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidActionCount(r));
        }
        Ok(Self(vec![1.0 / r as f64; r]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.0.get(index).copied()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Index of the component equal to 1, if the automaton has absorbed.
    pub fn absorbed_index(&self) -> Option<usize> {
        self.0.iter().position(|&p| p == 1.0)
    }

    /// Index of the most probable action (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.0.len() {
            return Err(Error::InvalidAction {
                index,
                count: self.0.len(),
            });
        }
        Ok(())
    }

    /// Clamp rounding spill into [0, 1] and rescale if the sum drifted.
    fn settle(mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            *p = p.clamp(0.0, 1.0);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            for p in probs.iter_mut() {
                *p /= sum;
            }
        }
        Self(probs)
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(value: ProbabilityVector) -> Self {
        value.0
    }
}

/// Uniform starting distribution over `r` actions.
pub fn init_uniform(r: usize) -> Result<ProbabilityVector> {
    ProbabilityVector::uniform(r)
}

/// Binary P-model response: 0 is success, 1 is failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PFlag {
    Success,
    Failure,
}

impl PFlag {
    pub fn as_u8(self) -> u8 {
        match self {
            PFlag::Success => 0,
            PFlag::Failure => 1,
        }
    }
}

impl TryFrom<u8> for PFlag {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            0 => Ok(PFlag::Success),
            1 => Ok(PFlag::Failure),
            other => Err(Error::InvalidFeedback(format!(
                "P-model flag must be 0 or 1, got {other}"
            ))),
        }
    }
}

impl From<PFlag> for u8 {
    fn from(value: PFlag) -> Self {
        value.as_u8()
    }
}

/// Environment response to the last action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    PModel(PFlag),
    /// Continuous response in [0, 1]; 0 is the best outcome.
    SModel(f64),
    /// Response drawn from a declared finite set of levels in [0, 1].
    QModel {
        beta: f64,
        levels: Vec<f64>,
    },
}

impl Feedback {
    pub fn p_model(flag: u8) -> Result<Self> {
        Ok(Feedback::PModel(PFlag::try_from(flag)?))
    }

    pub fn s_model(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Feedback::SModel(beta))
    }

    pub fn q_model(beta: f64, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidFeedback("Q-model level set is empty".into()));
        }
        for &level in &levels {
            check_beta(level)?;
        }
        if !levels.contains(&beta) {
            return Err(Error::InvalidFeedback(format!(
                "Q-model response {beta} is not one of the declared levels"
            )));
        }
        Ok(Feedback::QModel { beta, levels })
    }

    pub fn flag(&self) -> Option<PFlag> {
        match self {
            Feedback::PModel(flag) => Some(*flag),
            _ => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Feedback::PModel(_) => "P-model",
            Feedback::SModel(_) => "S-model",
            Feedback::QModel { .. } => "Q-model",
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidFeedback(format!(
            "response {beta} outside [0, 1]"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Independent reward and penalty parameters.
    #[serde(rename = "general")]
    GeneralP,
    /// Linear reward-penalty, `a == b`.
    #[serde(rename = "lrp")]
    LRP,
    /// Linear reward-inaction, `b == 0`.
    #[serde(rename = "lri")]
    LRI,
    /// Penalty only, `a == 0`.
    PenaltyOnly,
    /// Continuous-response scheme, `0 < a < 1`.
    SModel,
}

impl SchemeKind {
    pub fn is_p_model(self) -> bool {
        !matches!(self, SchemeKind::SModel)
    }

    /// The most specific P-model kind matching a parameter pair.
    pub fn infer(a: f64, b: f64) -> Self {
        if a == b {
            SchemeKind::LRP
        } else if b == 0.0 {
            SchemeKind::LRI
        } else if a == 0.0 {
            SchemeKind::PenaltyOnly
        } else {
            SchemeKind::GeneralP
        }
    }

    fn name(self) -> &'static str {
        match self {
            SchemeKind::GeneralP => "general P-model",
            SchemeKind::LRP => "L_RP",
            SchemeKind::LRI => "L_RI",
            SchemeKind::PenaltyOnly => "penalty-only",
            SchemeKind::SModel => "S-model",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reward parameter `a`, penalty parameter `b` and the scheme they form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct LearningScheme {
    a: f64,
    b: f64,
    kind: SchemeKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    a: f64,
    b: f64,
    kind: SchemeKind,
}

impl TryFrom<RawScheme> for LearningScheme {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        LearningScheme::new(raw.kind, raw.a, raw.b)
    }
}

impl From<LearningScheme> for RawScheme {
    fn from(s: LearningScheme) -> Self {
        RawScheme {
            a: s.a,
            b: s.b,
            kind: s.kind,
        }
    }
}

impl LearningScheme {
    pub fn new(kind: SchemeKind, a: f64, b: f64) -> Result<Self> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        match kind {
            SchemeKind::GeneralP => {}
            SchemeKind::LRP if a != b => {
                return Err(Error::InvalidParameter {
                    name: "b",
                    value: b,
                    reason: "L_RP requires a == b",
                })
            }
            SchemeKind::LRI if b != 0.0 => {
                return Err(Error::InvalidParameter {
                    name: "b",
                    value: b,
                    reason: "L_RI requires b == 0",
                })
            }
            SchemeKind::PenaltyOnly if a != 0.0 => {
                return Err(Error::InvalidParameter {
                    name: "a",
                    value: a,
                    reason: "penalty-only requires a == 0",
                })
            }
            SchemeKind::SModel if !(a > 0.0 && a < 1.0) => {
                return Err(Error::InvalidParameter {
                    name: "a",
                    value: a,
                    reason: "S-model requires 0 < a < 1",
                })
            }
            _ => {}
        }
        Ok(Self { a, b, kind })
    }

    pub fn general(a: f64, b: f64) -> Result<Self> {
        Self::new(SchemeKind::GeneralP, a, b)
    }

    pub fn reward_penalty(a: f64) -> Result<Self> {
        Self::new(SchemeKind::LRP, a, a)
    }

    pub fn reward_inaction(a: f64) -> Result<Self> {
        Self::new(SchemeKind::LRI, a, 0.0)
    }

    pub fn penalty_only(b: f64) -> Result<Self> {
        Self::new(SchemeKind::PenaltyOnly, 0.0, b)
    }

    pub fn s_model(a: f64) -> Result<Self> {
        Self::new(SchemeKind::SModel, a, 0.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// Reward step before settling: the chosen action gains `a·(1 − p_i)`,
/// every other action keeps a `(1 − a)` share of its mass.
pub fn favorable_components(p: &ProbabilityVector, chosen: usize, a: f64) -> Result<Vec<f64>> {
    p.check_index(chosen)?;
    check_unit("a", a)?;
    Ok(p.0
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            if j == chosen {
                pj + a * (1.0 - pj)
            } else {
                (1.0 - a) * pj
            }
        })
        .collect())
}

/// Penalty step before settling: the chosen action keeps `(1 − b)` of its
/// mass and the freed mass is spread evenly over the other `r − 1` actions.
pub fn unfavorable_components(p: &ProbabilityVector, chosen: usize, b: f64) -> Result<Vec<f64>> {
    p.check_index(chosen)?;
    check_unit("b", b)?;
    let share = b / (p.len() - 1) as f64;
    Ok(p.0
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            if j == chosen {
                (1.0 - b) * pj
            } else {
                share + (1.0 - b) * pj
            }
        })
        .collect())
}

/// Continuous-response step before settling; the effective step is `a·(1 − β)`.
pub fn s_model_components(
    p: &ProbabilityVector,
    chosen: usize,
    beta: f64,
    a: f64,
) -> Result<Vec<f64>> {
    p.check_index(chosen)?;
    check_beta(beta)?;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "S-model requires 0 < a < 1",
        });
    }
    let step = a * (1.0 - beta);
    Ok(p.0
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            if j == chosen {
                pj + step * (1.0 - pj)
            } else {
                pj - step * pj
            }
        })
        .collect())
}

pub fn update_p_favorable(
    p: &ProbabilityVector,
    chosen: usize,
    a: f64,
) -> Result<ProbabilityVector> {
    favorable_components(p, chosen, a).map(ProbabilityVector::settle)
}

pub fn update_p_unfavorable(
    p: &ProbabilityVector,
    chosen: usize,
    b: f64,
) -> Result<ProbabilityVector> {
    unfavorable_components(p, chosen, b).map(ProbabilityVector::settle)
}

pub fn update_s_model(
    p: &ProbabilityVector,
    chosen: usize,
    beta: f64,
    a: f64,
) -> Result<ProbabilityVector> {
    s_model_components(p, chosen, beta, a).map(ProbabilityVector::settle)
}

/// One learning step: route the response to the rule the scheme prescribes.
pub fn apply_feedback(
    p: &ProbabilityVector,
    chosen: usize,
    feedback: &Feedback,
    scheme: &LearningScheme,
) -> Result<ProbabilityVector> {
    match (feedback, scheme.kind.is_p_model()) {
        (Feedback::QModel { .. }, _) => Err(Error::UnsupportedModel),
        (Feedback::PModel(PFlag::Success), true) => update_p_favorable(p, chosen, scheme.a),
        (Feedback::PModel(PFlag::Failure), true) => update_p_unfavorable(p, chosen, scheme.b),
        (Feedback::SModel(beta), false) => update_s_model(p, chosen, *beta, scheme.a),
        (fb, _) => Err(Error::IncompatibleFeedback {
            feedback: fb.kind_name(),
            scheme: scheme.kind.name(),
        }),
    }
}

/// Roulette selection: the first action whose cumulative probability
/// reaches `z`. Zero-probability actions are never returned, so an
/// absorbed vector always yields its absorbed index.
pub fn select_action(p: &ProbabilityVector, z: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidDraw(z));
    }
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &pi) in p.0.iter().enumerate() {
        if pi <= 0.0 {
            continue;
        }
        cumulative += pi;
        last_positive = i;
        if cumulative >= z {
            return Ok(i);
        }
    }
    // Σp fell short of z by rounding.
    Ok(last_positive)
}
