//! Joint conditional transform `E[exp(phi v_T + psi lambda_T) | F_t]`.
//!
//! The transform is `exp(F(t) + G(t) v + H(t) lambda)`. Each `(phi, psi)`
//! needs its own Riccati solve, so [`CharFn`] memoizes solutions by the exact
//! bit pattern of the arguments.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::MeasureShift;
use crate::riccati::{OdeSolution, RiccatiSystem, SolveOptions};

type Key = [u64; 4];

fn key(phi: Complex64, psi: Complex64) -> Key {
    [phi.re.to_bits(), phi.im.to_bits(), psi.re.to_bits(), psi.im.to_bits()]
}

/// One solved transform, ready to evaluate at any state on its grid.
#[derive(Debug, Clone)]
pub struct CharFnSolution {
    pub phi: Complex64,
    pub psi: Complex64,
    pub shift: MeasureShift,
    pub lambda0: f64,
    pub ode: Arc<OdeSolution>,
}

impl CharFnSolution {
    /// `F(t) + G(t) v + H(t) lambda`.
    pub fn exponent(&self, t: f64, v: f64, lambda: f64) -> Result<Complex64> {
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!("variance state v = {v} must be > 0")));
        }
        if !(lambda >= self.lambda0) {
            return Err(Error::InvalidInput(format!(
                "intensity state lambda = {lambda} must be >= lambda0 = {}",
                self.lambda0
            )));
        }
        let [g, h, f] = self.ode.eval(t)?;
        Ok(f + g * v + h * lambda)
    }

    pub fn evaluate(&self, t: f64, v: f64, lambda: f64) -> Result<Complex64> {
        Ok(self.exponent(t, v, lambda)?.exp())
    }
}

/// Memoizing transform engine for one Riccati system.
#[derive(Debug)]
pub struct CharFn {
    system: RiccatiSystem,
    shift: MeasureShift,
    lambda0: f64,
    opts: SolveOptions,
    cache: Mutex<HashMap<Key, Arc<OdeSolution>>>,
    hits: AtomicUsize,
    solves: AtomicUsize,
}

impl CharFn {
    pub fn new(system: RiccatiSystem, shift: MeasureShift, opts: SolveOptions) -> Self {
        Self {
            lambda0: system.lambda0,
            system,
            shift,
            opts,
            cache: Mutex::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
        }
    }

    pub fn system(&self) -> &RiccatiSystem {
        &self.system
    }

    pub fn cache_hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    fn wrap(&self, phi: Complex64, psi: Complex64, ode: Arc<OdeSolution>) -> CharFnSolution {
        CharFnSolution { phi, psi, shift: self.shift, lambda0: self.lambda0, ode }
    }

    fn lookup(&self, k: &Key) -> Option<Arc<OdeSolution>> {
        self.cache.lock().expect("cache lock poisoned").get(k).cloned()
    }

    fn solve_and_store(&self, phi: Complex64, psi: Complex64) -> Result<Arc<OdeSolution>> {
        let ode = Arc::new(self.system.solve(phi, psi, &self.opts)?);
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.cache
            .lock()
            .expect("cache lock poisoned")
            .insert(key(phi, psi), Arc::clone(&ode));
        Ok(ode)
    }

    /// Cached solution for `(phi, psi)`.
    pub fn solution(&self, phi: Complex64, psi: Complex64) -> Result<CharFnSolution> {
        let k = key(phi, psi);
        let ode = match self.lookup(&k) {
            Some(ode) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                ode
            }
            None => self.solve_and_store(phi, psi)?,
        };
        Ok(self.wrap(phi, psi, ode))
    }

    pub fn char_fn(&self, phi: Complex64, psi: Complex64, t: f64, v: f64, lambda: f64) -> Result<Complex64> {
        self.solution(phi, psi)?.evaluate(t, v, lambda)
    }

    /// Exponents `F + G v + H lambda` for many arguments. Distinct uncached
    /// arguments are solved in parallel; output order follows `args`.
    pub fn exponent_batch(
        &self,
        t: f64,
        v: f64,
        lambda: f64,
        args: &[(Complex64, Complex64)],
    ) -> Result<Vec<Complex64>> {
        let mut pending: Vec<(Key, Complex64, Complex64)> = Vec::new();
        let mut seen: HashMap<Key, ()> = HashMap::new();
        {
            let cache = self.cache.lock().expect("cache lock poisoned");
            for &(phi, psi) in args {
                let k = key(phi, psi);
                if !cache.contains_key(&k) && seen.insert(k, ()).is_none() {
                    pending.push((k, phi, psi));
                }
            }
        }

        let index_of: HashMap<Key, usize> = args
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &(phi, psi))| (key(phi, psi), i))
            .collect();
        let solved: Vec<Result<(Key, OdeSolution)>> = pending
            .par_iter()
            .map(|&(k, phi, psi)| {
                self.system
                    .solve(phi, psi, &self.opts)
                    .map(|s| (k, s))
                    .map_err(|e| Error::AtIndex { index: index_of[&k], source: Box::new(e) })
            })
            .collect();
        {
            let mut cache = self.cache.lock().expect("cache lock poisoned");
            for r in solved {
                let (k, s) = r?;
                cache.insert(k, Arc::new(s));
                self.solves.fetch_add(1, Ordering::Relaxed);
            }
        }
        self.hits.fetch_add(args.len() - pending.len(), Ordering::Relaxed);

        let cache = self.cache.lock().expect("cache lock poisoned");
        args.iter()
            .enumerate()
            .map(|(i, &(phi, psi))| {
                let ode = Arc::clone(&cache[&key(phi, psi)]);
                self.wrap(phi, psi, ode)
                    .exponent(t, v, lambda)
                    .map_err(|e| Error::AtIndex { index: i, source: Box::new(e) })
            })
            .collect()
    }

    /// Element-wise [`CharFn::char_fn`] over `args`, sharing the cache.
    pub fn char_fn_batch(
        &self,
        t: f64,
        v: f64,
        lambda: f64,
        args: &[(Complex64, Complex64)],
    ) -> Result<Vec<Complex64>> {
        Ok(self.exponent_batch(t, v, lambda, args)?.into_iter().map(|e| e.exp()).collect())
    }
}
