use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::influence::InverseHessian;
use crate::model::{NoiseModel, Problem, RawInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeuristicKind {
    /// `(σ_zᵀθ̇)²`, needs the candidate's label.
    SldLabeled,
    /// `σ²(σ̄_xᵀθ̇)²`: expected squared loss derivative over the label model.
    SldUnlabeled,
    /// `(σ_jᵀH⁻¹σ̄_x)²` for a single reference point `j`.
    Si,
    SsiLabeled,
    SsiUnlabeled,
    StiLabeled,
    StiUnlabeled,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 7] = [
        HeuristicKind::SldLabeled,
        HeuristicKind::SldUnlabeled,
        HeuristicKind::Si,
        HeuristicKind::SsiLabeled,
        HeuristicKind::SsiUnlabeled,
        HeuristicKind::StiLabeled,
        HeuristicKind::StiUnlabeled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HeuristicKind::SldLabeled => "sld-labeled",
            HeuristicKind::SldUnlabeled => "sld-unlabeled",
            HeuristicKind::Si => "si",
            HeuristicKind::SsiLabeled => "ssi-labeled",
            HeuristicKind::SsiUnlabeled => "ssi-unlabeled",
            HeuristicKind::StiLabeled => "sti-labeled",
            HeuristicKind::StiUnlabeled => "sti-unlabeled",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown heuristic '{name}'")))
    }

    pub fn needs_reference(&self) -> bool {
        !matches!(self, HeuristicKind::SldLabeled | HeuristicKind::SldUnlabeled)
    }
}

/// A heuristic together with its reference set `T` (indices into the training data).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heuristic {
    pub kind: HeuristicKind,
    pub reference: Vec<usize>,
}

impl Heuristic {
    pub fn new(kind: HeuristicKind, reference: Vec<usize>) -> Self {
        Self { kind, reference }
    }

    pub fn sld_labeled() -> Self {
        Self::new(HeuristicKind::SldLabeled, Vec::new())
    }

    pub fn sld_unlabeled() -> Self {
        Self::new(HeuristicKind::SldUnlabeled, Vec::new())
    }

    /// Reference set = every training point.
    pub fn over_training_set(kind: HeuristicKind, problem: &Problem) -> Self {
        Self::new(kind, (0..problem.n()).collect())
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Some(&j) = self.reference.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidInput(format!("reference index {j} out of range for {n} points")));
        }
        if self.kind.needs_reference() && self.reference.is_empty() {
            return Err(Error::InvalidInput(format!("{} needs a nonempty reference set", self.kind.name())));
        }
        if self.kind == HeuristicKind::Si && self.reference.len() != 1 {
            return Err(Error::InvalidInput("si takes exactly one reference point".into()));
        }
        Ok(())
    }
}

/// A query candidate; labels are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: RawInput,
    pub y: Option<f64>,
}

impl Candidate {
    pub fn unlabeled(x: impl Into<RawInput>) -> Self {
        Self { x: x.into(), y: None }
    }

    pub fn labeled(x: impl Into<RawInput>, y: f64) -> Self {
        Self { x: x.into(), y: Some(y) }
    }
}

/// Scores candidates against fixed `(θ*, θ̇, σ²)`.
pub struct Scorer<'a> {
    inv: InverseHessian<'a>,
    tangent: DVector<f64>,
    noise: NoiseModel,
}

impl<'a> Scorer<'a> {
    pub fn new(problem: &'a Problem, theta: &DVector<f64>, tangent: &DVector<f64>, noise: NoiseModel) -> Result<Self> {
        problem.check_params(tangent)?;
        Ok(Self { inv: InverseHessian::auto(problem, theta)?, tangent: tangent.clone(), noise })
    }

    pub fn inverse_hessian(&self) -> &InverseHessian<'a> {
        &self.inv
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    /// Unlabeled gradient `σ̄_x = 2φ(x)`.
    pub fn unlabeled_gradient(&self, x: &RawInput) -> Result<DVector<f64>> {
        Ok(self.inv.problem().featurize(x)? * 2.0)
    }

    fn reference_gradient(&self, j: usize, labeled: bool) -> DVector<f64> {
        let problem = self.inv.problem();
        if labeled {
            problem.point_gradient(j, self.inv.theta())
        } else {
            problem.features(j) * 2.0
        }
    }

    pub fn score(&self, candidate: &Candidate, heuristic: &Heuristic) -> Result<f64> {
        let problem = self.inv.problem();
        heuristic.validate(problem.n())?;
        let score = match heuristic.kind {
            HeuristicKind::SldLabeled => {
                let y = candidate.y.ok_or_else(|| {
                    Error::InvalidInput("sld-labeled needs a labeled candidate".into())
                })?;
                let sigma = self.inv.loss_gradient(&candidate.x, y)?;
                sigma.dot(&self.tangent).powi(2)
            }
            HeuristicKind::SldUnlabeled => {
                let bar = self.unlabeled_gradient(&candidate.x)?;
                self.noise.variance() * bar.dot(&self.tangent).powi(2)
            }
            kind => {
                let labeled = matches!(kind, HeuristicKind::Si | HeuristicKind::SsiLabeled | HeuristicKind::StiLabeled);
                let solved = self.inv.solve(&self.unlabeled_gradient(&candidate.x)?)?;
                let influences = heuristic
                    .reference
                    .iter()
                    .map(|&j| -self.reference_gradient(j, labeled).dot(&solved));
                match kind {
                    HeuristicKind::StiLabeled | HeuristicKind::StiUnlabeled => influences.sum::<f64>().powi(2),
                    _ => influences.map(|v| v * v).sum(),
                }
            }
        };
        Ok(score)
    }

    pub fn score_all(&self, candidates: &[Candidate], heuristic: &Heuristic) -> Result<QueryScores> {
        let raw = candidates
            .iter()
            .map(|c| self.score(c, heuristic))
            .collect::<Result<Vec<f64>>>()?;
        QueryScores::new(candidates.to_vec(), raw)
    }
}

/// Score one candidate.
pub fn score(
    problem: &Problem,
    theta: &DVector<f64>,
    tangent: &DVector<f64>,
    candidate: &Candidate,
    heuristic: &Heuristic,
    noise: NoiseModel,
) -> Result<f64> {
    Scorer::new(problem, theta, tangent, noise)?.score(candidate, heuristic)
}

/// Raw and RMS-normalized scores with their ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryScores {
    pub candidates: Vec<Candidate>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl QueryScores {
    pub fn new(candidates: Vec<Candidate>, raw: Vec<f64>) -> Result<Self> {
        if candidates.len() != raw.len() {
            return Err(Error::DimensionMismatch { expected: candidates.len(), found: raw.len() });
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown("non-finite query score".into()));
        }
        let normalized = rms_normalize(&raw);
        let ranking = rank_scores(&raw);
        Ok(Self { candidates, raw, normalized, ranking })
    }
}

/// Scale to unit root-mean-square; all-zero input is returned unchanged.
pub fn rms_normalize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    if rms == 0.0 {
        values.to_vec()
    } else {
        values.iter().map(|v| v / rms).collect()
    }
}

/// Indices by descending score, ties broken by ascending index.
pub fn rank_scores(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

pub fn rank_queries(scores: &QueryScores) -> Vec<usize> {
    rank_scores(&scores.raw)
}
