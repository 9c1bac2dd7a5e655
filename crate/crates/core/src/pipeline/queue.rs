use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};

use rand::Rng;

use crate::{Error, Result};

/// Bounded buffer that hands out a uniformly random element on each pop.
/// `push` blocks while the queue is full.
#[derive(Debug)]
pub struct ShuffleQueue<T> {
    capacity: usize,
    state: Mutex<State<T>>,
    not_full: Condvar,
    not_empty: Condvar,
}

#[derive(Debug)]
struct State<T> {
    items: VecDeque<T>,
    closed: bool,
}

impl<T> ShuffleQueue<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("queue capacity must be at least 1".into()));
        }
        Ok(ShuffleQueue {
            capacity,
            state: Mutex::new(State {
                items: VecDeque::with_capacity(capacity),
                closed: false,
            }),
            not_full: Condvar::new(),
            not_empty: Condvar::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.lock().items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State<T>> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Blocks until there is room. Items pushed after [`close`](Self::close)
    /// are still accepted.
    pub fn push(&self, item: T) {
        let mut st = self.lock();
        while st.items.len() >= self.capacity {
            st = self.not_full.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        st.items.push_back(item);
        drop(st);
        self.not_empty.notify_all();
    }

    /// Non-blocking push; gives the item back when full.
    pub fn try_push(&self, item: T) -> std::result::Result<(), T> {
        let mut st = self.lock();
        if st.items.len() >= self.capacity {
            return Err(item);
        }
        st.items.push_back(item);
        drop(st);
        self.not_empty.notify_all();
        Ok(())
    }

    fn take(&self, st: &mut State<T>, rng: &mut impl Rng) -> T {
        let i = rng.random_range(0..st.items.len());
        let item = st.items.swap_remove_back(i).expect("index in range");
        self.not_full.notify_one();
        item
    }

    /// Removes a uniformly random element; never blocks.
    pub fn pop(&self, rng: &mut impl Rng) -> Result<T> {
        let mut st = self.lock();
        if st.items.is_empty() {
            return Err(Error::PopFromEmpty);
        }
        Ok(self.take(&mut st, rng))
    }

    /// Waits until `n` items are queued (or the queue is closed) and removes
    /// up to `n` of them at random. Empty only once closed and drained.
    pub fn pop_batch(&self, n: usize, rng: &mut impl Rng) -> Vec<T> {
        let mut st = self.lock();
        while st.items.len() < n.max(1) && !st.closed {
            st = self.not_empty.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        let k = n.min(st.items.len());
        let out = (0..k).map(|_| self.take(&mut st, rng)).collect();
        drop(st);
        self.not_full.notify_all();
        out
    }

    /// Signals that no more items will arrive, waking waiting consumers.
    pub fn close(&self) {
        self.lock().closed = true;
        self.not_empty.notify_all();
    }
}
