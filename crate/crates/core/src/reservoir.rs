use rand::Rng;

/// Fixed-capacity uniform sample of a stream (Algorithm R).
#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirBuffer<I> {
    capacity: usize,
    items: Vec<I>,
    seen: u64,
}

impl<I> ReservoirBuffer<I> {
    pub fn new(capacity: usize) -> Self {
        ReservoirBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            seen: 0,
        }
    }

    /// Offers one stream item. The first `capacity` items are kept; the
    /// `k`-th after that replaces a uniformly chosen slot with probability
    /// `capacity / k`.
    pub fn offer<R: Rng + ?Sized>(&mut self, item: I, rng: &mut R) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let slot = rng.random_range(0..self.seen);
        if let Ok(slot) = usize::try_from(slot) {
            if slot < self.capacity {
                self.items[slot] = item;
            }
        }
    }

    pub fn items(&self) -> &[I] {
        &self.items
    }

    pub fn into_items(self) -> Vec<I> {
        self.items
    }

    pub fn seen(&self) -> u64 {
        self.seen
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
}

/// Value-passing form of [`ReservoirBuffer::offer`].
pub fn reservoir_offer<I, R: Rng + ?Sized>(mut buf: ReservoirBuffer<I>, item: I, rng: &mut R) -> ReservoirBuffer<I> {
    buf.offer(item, rng);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn under_capacity_keeps_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut buf = ReservoirBuffer::new(5);
        for i in 0..3 {
            buf = reservoir_offer(buf, i, &mut rng);
            assert_eq!(buf.seen(), i as u64 + 1);
        }
        assert_eq!(buf.items(), &[0, 1, 2]);
    }

    #[test]
    fn capacity_one_keeps_second_item_half_the_time() {
        let trials = 10_000;
        let kept_second = (0..trials)
            .filter(|&t| {
                let mut rng = ChaCha8Rng::seed_from_u64(t);
                let mut buf = ReservoirBuffer::new(1);
                buf.offer(1, &mut rng);
                buf.offer(2, &mut rng);
                buf.items() == [2]
            })
            .count();
        let rate = kept_second as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn inclusion_is_uniform() {
        // Each of 10 items should survive in a capacity-3 reservoir w.p. 3/10.
        let trials = 20_000;
        let mut counts = [0usize; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..trials {
            let mut buf = ReservoirBuffer::new(3);
            for i in 0..10 {
                buf.offer(i, &mut rng);
            }
            assert_eq!(buf.len(), 3);
            for &i in buf.items() {
                counts[i] += 1;
            }
        }
        for c in counts {
            let rate = c as f64 / trials as f64;
            assert!((rate - 0.3).abs() < 0.02, "rate {rate}");
        }
    }
}
