use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::Scalar;

/// Running extremes of every quality value the search has recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityBounds<S> {
    pub q_max: S,
    pub q_min: S,
}

impl<S: Scalar> QualityBounds<S> {
    /// The starting sentinels: `q_max = -1e5`, `q_min = 0`.
    ///
    /// Note that `q_min = 0` persists whenever every observed quality is positive.
    pub fn initial() -> Self {
        Self {
            q_max: S::of(-1e5),
            q_min: S::zero(),
        }
    }

    pub fn update(self, new_q: S) -> Result<Self, SearchError> {
        if !new_q.is_finite() {
            return Err(SearchError::NonFiniteQuality);
        }
        Ok(Self {
            q_max: self.q_max.max(new_q),
            q_min: self.q_min.min(new_q),
        })
    }

    pub fn span(&self) -> S {
        self.q_max - self.q_min
    }

    pub fn contains(&self, q: S) -> bool {
        self.q_min <= q && q <= self.q_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_update_overwrites_both_sentinels_for_negative_quality() {
        let b = QualityBounds::<f64>::initial().update(-6.3).unwrap();
        assert_eq!(b.q_max, -6.3);
        assert_eq!(b.q_min, -6.3);
    }

    #[test]
    fn interior_point_leaves_bounds_unchanged() {
        let b = QualityBounds { q_max: 10.0, q_min: 2.0 };
        assert_eq!(b.update(5.0).unwrap(), b);
    }

    #[test]
    fn max_update() {
        let b = QualityBounds { q_max: 10.0, q_min: 2.0 }.update(12.0).unwrap();
        assert_eq!((b.q_max, b.q_min), (12.0, 2.0));
    }

    #[test]
    fn rejects_non_finite() {
        let b = QualityBounds::<f64>::initial();
        assert!(b.update(f64::NAN).is_err());
        assert!(b.update(f64::INFINITY).is_err());
    }
}
