use crate::error::{Error, Result};

/// Maps a point to a real value: the objective to maximize, or a constraint
/// violation magnitude (0 when satisfied).
pub type Evaluator<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// Box bounds with optional periodic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    periodic: Vec<bool>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != periodic.len() {
            return Err(Error::ShapeMismatch(format!(
                "bounds have lengths {}/{}/{}",
                lower.len(),
                upper.len(),
                periodic.len()
            )));
        }
        for i in 0..lower.len() {
            if lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i] {
                return Err(Error::InvalidArgument(format!(
                    "dimension {i}: lower bound {} exceeds upper bound {}",
                    lower[i], upper[i]
                )));
            }
            if periodic[i] && !(lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i]) {
                return Err(Error::InvalidArgument(format!(
                    "periodic dimension {i} needs finite bounds with positive span"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            periodic,
        })
    }

    /// Unbounded, non-periodic domain of dimension `n`.
    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            periodic: vec![false; n],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic[i]
    }

    /// Step scale of dimension `i`: its range when finite, else 1.
    pub fn scale(&self, i: usize) -> f64 {
        let span = self.upper[i] - self.lower[i];
        if span.is_finite() && span > 0.0 {
            span
        } else {
            1.0
        }
    }

    fn wrap(&self, i: usize, x: f64) -> f64 {
        let span = self.upper[i] - self.lower[i];
        let offset = x - self.lower[i];
        // Exact shortcuts for offsets within one span; fmod is slow.
        let w = if (0.0..span).contains(&offset) {
            offset
        } else if (span..2.0 * span).contains(&offset) {
            offset - span
        } else if (-span..0.0).contains(&offset) {
            offset + span
        } else {
            offset.rem_euclid(span)
        };
        if w >= span {
            self.lower[i]
        } else {
            self.lower[i] + w
        }
    }

    /// Projects a point into the domain: periodic coordinates wrap, the rest
    /// clamp.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.periodic[i] {
                    self.wrap(i, v)
                } else {
                    v.clamp(self.lower[i], self.upper[i])
                }
            })
            .collect()
    }

    /// `anchor + t * direction` with `t = step`, shortened along the
    /// direction so non-periodic coordinates stay inside their bounds.
    /// Periodic coordinates wrap. Returns `None` when the anchor already sits
    /// on the boundary the direction points through.
    pub fn displace(&self, anchor: &[f64], step: f64, direction: &[f64]) -> Option<Vec<f64>> {
        let mut point = Vec::with_capacity(anchor.len());
        self.displace_into(anchor, step, direction, &mut point)
            .then_some(point)
    }

    /// [`Domain::displace`] writing into `out`; returns false where that
    /// returns `None`.
    pub fn displace_into(
        &self,
        anchor: &[f64],
        step: f64,
        direction: &[f64],
        out: &mut Vec<f64>,
    ) -> bool {
        let mut t = step;
        let mut limit = None;
        for i in 0..anchor.len() {
            let d = direction[i];
            if self.periodic[i] || d == 0.0 {
                continue;
            }
            let bound = if d > 0.0 { self.upper[i] } else { self.lower[i] };
            let room = (bound - anchor[i]) / d;
            if room < t {
                t = room;
                limit = Some((i, bound));
            }
        }
        if !(t > 0.0) {
            return false;
        }
        out.clear();
        out.extend(anchor.iter().zip(direction).enumerate().map(|(i, (&a, &d))| {
            let v = a + t * d;
            if self.periodic[i] {
                self.wrap(i, v)
            } else {
                v.clamp(self.lower[i], self.upper[i])
            }
        }));
        if let Some((i, bound)) = limit {
            out[i] = bound;
        }
        out.as_slice() != anchor
    }
}

/// A bounded black-box maximization problem with inequality constraints.
pub struct BlackBoxProblem<'a> {
    domain: Domain,
    objective: Evaluator<'a>,
    constraints: Vec<Evaluator<'a>>,
    exchange_groups: Vec<Vec<usize>>,
}

impl std::fmt::Debug for BlackBoxProblem<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlackBoxProblem")
            .field("domain", &self.domain)
            .field("constraints", &self.constraints.len())
            .field("exchange_groups", &self.exchange_groups)
            .finish()
    }
}

impl<'a> BlackBoxProblem<'a> {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        objective: impl Fn(&[f64]) -> f64 + 'a,
    ) -> Result<Self> {
        let n = lower.len();
        Ok(Self {
            domain: Domain::new(lower, upper, vec![false; n])?,
            objective: Box::new(objective),
            constraints: Vec::new(),
            exchange_groups: Vec::new(),
        })
    }

    /// Marks coordinates as periodic over their bound span.
    pub fn with_periodic(self, dims: &[usize]) -> Result<Self> {
        let mut periodic = self.domain.periodic.clone();
        for &i in dims {
            *periodic.get_mut(i).ok_or(Error::IndexOutOfRange {
                index: i,
                lo: 0,
                hi: self.dimension().saturating_sub(1),
            })? = true;
        }
        Ok(Self {
            domain: Domain::new(self.domain.lower.clone(), self.domain.upper.clone(), periodic)?,
            ..self
        })
    }

    /// Adds a constraint returning its violation magnitude.
    pub fn with_constraint(mut self, violation: impl Fn(&[f64]) -> f64 + 'a) -> Self {
        self.constraints.push(Box::new(violation));
        self
    }

    /// Declares coordinates that share a linear sum budget. Stencils then
    /// also move along `e_i - e_j` within the group, which keeps the sum
    /// fixed when the budget constraint is active.
    pub fn with_exchange_group(mut self, dims: Vec<usize>) -> Result<Self> {
        if let Some(&i) = dims.iter().find(|&&i| i >= self.dimension()) {
            return Err(Error::IndexOutOfRange {
                index: i,
                lo: 0,
                hi: self.dimension().saturating_sub(1),
            });
        }
        self.exchange_groups.push(dims);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn exchange_groups(&self) -> &[Vec<usize>] {
        &self.exchange_groups
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    pub fn violations(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| c(x)).collect()
    }

    /// Sum of the positive violations, or `None` when a constraint returns
    /// NaN.
    pub(crate) fn barrier_violation(&self, x: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for c in &self.constraints {
            let v = c(x);
            if v.is_nan() {
                return None;
            }
            if v > 0.0 {
                total += v;
            }
        }
        Some(total)
    }

    pub fn total_violation(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c(x).max(0.0)).sum()
    }
}
