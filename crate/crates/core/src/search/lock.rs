use std::cell::Cell;
use std::ops::{Deref, DerefMut};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex, MutexGuard, PoisonError};
use std::time::Duration;

thread_local! {
    static LOCK_HELD: Cell<bool> = const { Cell::new(false) };
}

/// Whether the calling thread currently holds a search-state lock.
pub fn search_lock_held() -> bool {
    LOCK_HELD.with(Cell::get)
}

fn set_held(v: bool) {
    LOCK_HELD.with(|c| c.set(v));
}

/// Mutex plus change notification, tracking lock ownership per thread.
pub(crate) struct SearchLock<T> {
    state: Mutex<T>,
    changed: Condvar,
    violations: AtomicU64,
}

pub(crate) struct Guard<'a, T> {
    inner: Option<MutexGuard<'a, T>>,
}

impl<T> SearchLock<T> {
    pub fn new(state: T) -> Self {
        SearchLock {
            state: Mutex::new(state),
            changed: Condvar::new(),
            violations: AtomicU64::new(0),
        }
    }

    pub fn lock(&self) -> Guard<'_, T> {
        let inner = self.state.lock().unwrap_or_else(PoisonError::into_inner);
        set_held(true);
        Guard { inner: Some(inner) }
    }

    pub fn notify(&self) {
        self.changed.notify_all();
    }

    pub fn wait<'a>(&'a self, mut guard: Guard<'a, T>, timeout: Option<Duration>) -> Guard<'a, T> {
        let inner = guard.inner.take().expect("guard holds the lock");
        drop(guard);
        let inner = match timeout {
            None => self.changed.wait(inner).unwrap_or_else(PoisonError::into_inner),
            Some(t) => {
                self.changed
                    .wait_timeout(inner, t)
                    .unwrap_or_else(PoisonError::into_inner)
                    .0
            }
        };
        set_held(true);
        Guard { inner: Some(inner) }
    }

    /// Call before any model or environment call; counts calls made under the lock.
    pub fn check_unlocked(&self) {
        if search_lock_held() {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn violations(&self) -> u64 {
        self.violations.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> T {
        self.state.into_inner().unwrap_or_else(PoisonError::into_inner)
    }
}

impl<T> Drop for Guard<'_, T> {
    fn drop(&mut self) {
        set_held(false);
    }
}

impl<T> Deref for Guard<'_, T> {
    type Target = T;

    fn deref(&self) -> &T {
        self.inner.as_ref().expect("guard holds the lock")
    }
}

impl<T> DerefMut for Guard<'_, T> {
    fn deref_mut(&mut self) -> &mut T {
        self.inner.as_mut().expect("guard holds the lock")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_follows_guard() {
        let lock = SearchLock::new(0u32);
        assert!(!search_lock_held());
        {
            let mut g = lock.lock();
            *g += 1;
            assert!(search_lock_held());
            lock.check_unlocked();
        }
        assert!(!search_lock_held());
        lock.check_unlocked();
        assert_eq!(lock.violations(), 1);
    }

    #[test]
    fn wait_restores_flag() {
        let lock = SearchLock::new(());
        let g = lock.lock();
        let g = lock.wait(g, Some(Duration::from_millis(1)));
        assert!(search_lock_held());
        drop(g);
        assert!(!search_lock_held());
    }
}
