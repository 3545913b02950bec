use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::Result;
use crate::qcore::{c, matrix_exp, CMatrix};

/// Memoized `exp(L·Δt)` for a fixed generator, keyed by the exact bits of `Δt`.
///
/// Reads are concurrent; a miss computes outside the lock and the first insert
/// wins, so racing fills agree.
#[derive(Debug)]
pub struct PropagatorCache {
    generator: CMatrix,
    entries: RwLock<HashMap<u64, Arc<CMatrix>>>,
}

impl PropagatorCache {
    pub fn new(generator: CMatrix) -> Self {
        Self {
            generator,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn get(&self, dt: f64) -> Result<Arc<CMatrix>> {
        let key = dt.to_bits();
        if let Some(hit) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let fresh = Arc::new(matrix_exp(&(&self.generator * c(dt)))?);
        let mut entries = self.entries.write().expect("cache lock");
        Ok(Arc::clone(entries.entry(key).or_insert(fresh)))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Clone for PropagatorCache {
    fn clone(&self) -> Self {
        Self {
            generator: self.generator.clone(),
            entries: RwLock::new(self.entries.read().expect("cache lock").clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::random::random_lindblad;
    use crate::qcore::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn semigroup_property() {
        let l = random_lindblad(&mut ChaCha8Rng::seed_from_u64(1), 3, 2);
        let cache = PropagatorCache::new(l.into_matrix());
        let (a, b) = (0.37, 1.21);
        let lhs = cache.get(a + b).unwrap();
        let rhs = cache.get(a).unwrap().as_ref() * cache.get(b).unwrap().as_ref();
        assert!(max_abs(&(lhs.as_ref() - rhs)) < 1e-9);
        assert_eq!(cache.len(), 3);
        cache.get(a).unwrap();
        assert_eq!(cache.len(), 3);
    }
}
