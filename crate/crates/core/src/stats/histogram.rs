use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Counts of nonnegative integer observations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Histogram(BTreeMap<u64, u64>);

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut h = Self::new();
        values.into_iter().for_each(|v| h.add(v));
        h
    }

    pub fn add(&mut self, value: u64) {
        self.add_n(value, 1);
    }

    pub fn add_n(&mut self, value: u64, count: u64) {
        if count > 0 {
            *self.0.entry(value).or_insert(0) += count;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&v, &c) in &other.0 {
            self.add_n(v, c);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of observations.
    pub fn samples(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn count(&self, value: u64) -> u64 {
        self.0.get(&value).copied().unwrap_or(0)
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.samples();
        (n > 0).then(|| self.0.iter().map(|(&v, &c)| v as f64 * c as f64).sum::<f64>() / n as f64)
    }

    pub fn max(&self) -> Option<u64> {
        self.0.keys().next_back().copied()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.keys().next().copied()
    }

    /// `(value, count)` in increasing value order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.0.iter().map(|(&v, &c)| (v, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_moments() {
        let mut h = Histogram::from_values([1, 1, 2, 5]);
        assert_eq!(h.samples(), 4);
        assert_eq!(h.mean(), Some(2.25));
        assert_eq!((h.min(), h.max()), (Some(1), Some(5)));
        h.merge(&Histogram::from_values([5, 7]));
        assert_eq!(h.count(5), 2);
        assert_eq!(h.samples(), 6);
        assert_eq!(Histogram::new().mean(), None);
    }

    #[test]
    fn json_roundtrip() {
        let h = Histogram::from_values([3, 1, 3]);
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(text, r#"{"1":1,"3":2}"#);
        assert_eq!(serde_json::from_str::<Histogram>(&text).unwrap(), h);
    }
}
