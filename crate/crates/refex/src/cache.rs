//! A small least-recently-used cache for memoizing query results.
//!
//! The store runs the same subgraph evaluations many times during a
//! search, so results are kept in an LRU map. Recency is tracked with a
//! monotonic tick: the map stores the tick of the last access per key and
//! a companion ordered map from tick to key yields the eviction victim in
//! O(log n). Capacity 0 disables caching entirely.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

#[derive(Debug)]
pub struct LruCache<K, V> {
    capacity: usize,
    entries: HashMap<K, (V, u64)>,
    by_tick: BTreeMap<u64, K>,
    tick: u64,
    hits: u64,
    misses: u64,
}

impl<K: Eq + Hash + Clone, V: Clone> LruCache<K, V> {
    pub fn new(capacity: usize) -> Self {
        LruCache {
            capacity,
            entries: HashMap::new(),
            by_tick: BTreeMap::new(),
            tick: 0,
            hits: 0,
            misses: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn get(&mut self, key: &K) -> Option<V> {
        if self.capacity == 0 {
            return None;
        }
        let tick = self.next_tick();
        match self.entries.get_mut(key) {
            Some((value, last)) => {
                self.by_tick.remove(last);
                *last = tick;
                self.by_tick.insert(tick, key.clone());
                self.hits += 1;
                Some(value.clone())
            }
            None => {
                self.misses += 1;
                None
            }
        }
    }

    pub fn insert(&mut self, key: K, value: V) {
        if self.capacity == 0 {
            return;
        }
        let tick = self.next_tick();
        if let Some((_, last)) = self.entries.get(&key) {
            self.by_tick.remove(last);
        } else if self.entries.len() >= self.capacity {
            if let Some((&oldest, _)) = self.by_tick.iter().next() {
                if let Some(victim) = self.by_tick.remove(&oldest) {
                    self.entries.remove(&victim);
                }
            }
        }
        self.entries.insert(key.clone(), (value, tick));
        self.by_tick.insert(tick, key);
    }

    fn next_tick(&mut self) -> u64 {
        self.tick += 1;
        self.tick
    }
}
