use crate::error::DomainError;

/// Append-only record of every evaluated point, in unit-cube coordinates,
/// with its raw (un-annealed) objective value.
#[derive(Clone, Debug, Default)]
pub struct EvaluationLog {
    dim: usize,
    points: Vec<Vec<f64>>,
    raw_values: Vec<f64>,
    call_index: Vec<usize>,
    best_index: Option<usize>,
}

impl EvaluationLog {
    pub fn new(dim: usize) -> Self {
        Self { dim, ..Default::default() }
    }

    pub fn push(&mut self, point: Vec<f64>, value: f64) -> Result<usize, DomainError> {
        if point.len() != self.dim {
            return Err(DomainError::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        if let Some((coord, &v)) = point.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(DomainError::OutOfBounds { coord, value: v, lower: 0.0, upper: 1.0 });
        }
        let idx = self.points.len();
        self.points.push(point);
        self.raw_values.push(value);
        self.call_index.push(idx);
        // first maximum wins ties
        match self.best_index {
            Some(b) if self.raw_values[b] >= value => {}
            _ => self.best_index = Some(idx),
        }
        Ok(idx)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.raw_values
    }

    pub fn call_index(&self) -> &[usize] {
        &self.call_index
    }

    pub fn best_index(&self) -> Option<usize> {
        self.best_index
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best_index.map(|i| self.raw_values[i])
    }

    pub fn best_point(&self) -> Option<&[f64]> {
        self.best_index.map(|i| self.points[i].as_slice())
    }

    /// Raw values scaled by an inverse temperature. The stored values are
    /// never modified.
    pub fn annealed_values(&self, beta: f64) -> Vec<f64> {
        self.raw_values.iter().map(|v| beta * v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_best_and_rejects_bad_points() {
        let mut log = EvaluationLog::new(2);
        log.push(vec![0.1, 0.2], 1.0).unwrap();
        log.push(vec![0.3, 0.2], 3.0).unwrap();
        log.push(vec![0.5, 0.2], 3.0).unwrap();
        log.push(vec![0.7, 0.2], -1.0).unwrap();
        assert_eq!(log.best_index(), Some(1));
        assert_eq!(log.best_value(), Some(3.0));
        assert!(log.push(vec![1.2, 0.0], 0.0).is_err());
        assert!(log.push(vec![0.2], 0.0).is_err());
        assert_eq!(log.len(), 4);
        assert_eq!(log.annealed_values(2.0), vec![2.0, 6.0, 6.0, -2.0]);
        assert_eq!(log.raw_values(), &[1.0, 3.0, 3.0, -1.0]);
    }
}
