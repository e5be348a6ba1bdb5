use crate::error::DomainError;

/// Axis-aligned search box in objective coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

const UNIT_SLACK: f64 = 1e-12;

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DomainError> {
        if lower.is_empty() {
            return Err(DomainError::Empty);
        }
        if lower.len() != upper.len() {
            return Err(DomainError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DomainError::InvalidBounds { coord: i, lower: *lo, upper: *hi });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, DomainError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_unit(&self, theta: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.check_dim(theta.len())?;
        theta
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let (lo, hi) = (self.lower[i], self.upper[i]);
                if !(t >= lo && t <= hi) {
                    return Err(DomainError::OutOfBounds { coord: i, value: t, lower: lo, upper: hi });
                }
                Ok((t - lo) / (hi - lo))
            })
            .collect()
    }

    /// Inverse of [`to_unit`](Self::to_unit). Components within 1e-12 outside
    /// the unit interval are accepted and mapped to the nearest face.
    pub fn from_unit(&self, u: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.check_dim(u.len())?;
        u.iter()
            .enumerate()
            .map(|(i, &v)| {
                if !(v >= -UNIT_SLACK && v <= 1.0 + UNIT_SLACK) {
                    return Err(DomainError::OutOfBounds { coord: i, value: v, lower: 0.0, upper: 1.0 });
                }
                let v = v.clamp(0.0, 1.0);
                let (lo, hi) = (self.lower[i], self.upper[i]);
                // lerp form keeps the endpoints exact
                Ok(if v == 1.0 { hi } else { lo + v * (hi - lo) })
            })
            .collect()
    }

    fn check_dim(&self, got: usize) -> Result<(), DomainError> {
        if got != self.dim() {
            return Err(DomainError::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}
