use crate::error::DomainError;
use crate::stream::RngHandle;

/// Result of offering one item.
#[derive(Debug, PartialEq, Eq)]
pub struct OfferOutcome<T> {
    pub inserted: bool,
    pub evicted: Option<T>,
}

/// Fixed-capacity uniform sample (Algorithm R). After `seen` offers every
/// offered item is resident with probability `min(1, capacity / seen)`.
#[derive(Clone, Debug)]
pub struct Reservoir<T> {
    capacity: usize,
    items: Vec<T>,
    seen: u64,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize) -> Result<Self, DomainError> {
        if capacity == 0 {
            return Err(DomainError::new("reservoir capacity must be positive"));
        }
        Ok(Reservoir {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 20)),
            seen: 0,
        })
    }

    /// The coin (`below(seen) < capacity`) and the victim slot are two
    /// separate draws, taken in that order.
    pub fn offer(&mut self, item: T, rng: &mut RngHandle) -> OfferOutcome<T> {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return OfferOutcome {
                inserted: true,
                evicted: None,
            };
        }
        if rng.below(self.seen) >= self.capacity as u64 {
            return OfferOutcome {
                inserted: false,
                evicted: None,
            };
        }
        let slot = rng.below(self.capacity as u64) as usize;
        let old = std::mem::replace(&mut self.items[slot], item);
        OfferOutcome {
            inserted: true,
            evicted: Some(old),
        }
    }

    /// Evicts uniformly chosen items until at most `new_capacity` remain and
    /// lowers the capacity. The kept items are a uniform subset of the old
    /// ones, so a uniform sample of the stream stays uniform.
    pub fn shrink(&mut self, new_capacity: usize, rng: &mut RngHandle) -> Vec<T> {
        assert!(new_capacity > 0, "reservoir capacity must be positive");
        let mut evicted = Vec::new();
        while self.items.len() > new_capacity {
            let slot = rng.below(self.items.len() as u64) as usize;
            evicted.push(self.items.swap_remove(slot));
        }
        self.capacity = new_capacity;
        evicted
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn clear(&mut self) {
        self.items.clear();
        self.seen = 0;
    }
}

/// Probability that `k` specific items are all resident after `t` offers to a
/// reservoir of capacity `m`.
pub fn joint_inclusion_prob(k: u64, t: u64, m: u64) -> Result<f64, DomainError> {
    if k == 0 || k > t || k > m {
        return Err(DomainError::new(format!(
            "joint inclusion needs 1 <= k <= min(t, M); got k={k}, t={t}, M={m}"
        )));
    }
    Ok(joint_inclusion(k, t, m))
}

/// Unchecked form: `k = 0` gives 1 and `k > m` (with `t > m`) gives 0.
pub(crate) fn joint_inclusion(k: u64, t: u64, m: u64) -> f64 {
    if t <= m {
        return 1.0;
    }
    let mut p = 1.0;
    for i in 0..k {
        if i >= m {
            return 0.0;
        }
        p *= (m - i) as f64 / (t - i) as f64;
    }
    p
}
