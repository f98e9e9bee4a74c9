//! In-memory proof sessions. They are not persisted and expire after a
//! period without requests.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;

use crate::proof::ProofState;

pub struct Session {
    pub workspace: String,
    /// Held for the whole of each operation, so requests on one proof are
    /// applied one at a time.
    pub state: tokio::sync::Mutex<ProofState>,
    last_used: Mutex<Instant>,
}

impl Session {
    fn touch(&self) {
        *self.last_used.lock().unwrap_or_else(|e| e.into_inner()) = Instant::now();
    }

    fn idle_for(&self, now: Instant) -> Duration {
        now.saturating_duration_since(*self.last_used.lock().unwrap_or_else(|e| e.into_inner()))
    }
}

pub struct Sessions {
    ttl: Duration,
    map: Mutex<HashMap<String, Arc<Session>>>,
}

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Sessions {
            ttl,
            map: Mutex::new(HashMap::new()),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    /// Stores a new proof under a fresh random 128-bit id.
    pub fn insert(&self, workspace: String, state: ProofState) -> (String, Arc<Session>) {
        let session = Arc::new(Session {
            workspace,
            state: tokio::sync::Mutex::new(state),
            last_used: Mutex::new(Instant::now()),
        });
        let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            let id = format!("{:032x}", rand::thread_rng().gen::<u128>());
            if !map.contains_key(&id) {
                map.insert(id.clone(), session.clone());
                return (id, session);
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        let map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        let session = map.get(id)?.clone();
        if session.idle_for(Instant::now()) > self.ttl {
            return None;
        }
        session.touch();
        Some(session)
    }

    /// Drops expired sessions and returns how many were removed.
    pub fn sweep(&self) -> usize {
        let now = Instant::now();
        let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        let before = map.len();
        map.retain(|_, s| s.idle_for(now) <= self.ttl);
        before - map.len()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
