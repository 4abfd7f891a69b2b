//! Exact simulation of the exponential-kernel Hawkes intensity by thinning.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Event times of one Hawkes path on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesPath {
    pub events: Vec<f64>,
    pub lambda0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub horizon: f64,
    /// `lambda` just after each event.
    post_jump: Vec<f64>,
}

impl HawkesPath {
    /// Left-continuous intensity `lambda(t)`, i.e. excluding an event at `t` itself.
    pub fn intensity(&self, t: f64) -> f64 {
        let i = self.events.partition_point(|&e| e < t);
        if i == 0 {
            return self.lambda0;
        }
        let (s, l) = (self.events[i - 1], self.post_jump[i - 1]);
        self.lambda0 + (l - self.lambda0) * (-self.beta * (t - s)).exp()
    }

    /// `lambda` at `t` including an event at exactly `t`.
    pub fn intensity_after(&self, t: f64) -> f64 {
        let i = self.events.partition_point(|&e| e <= t);
        if i == 0 {
            return self.lambda0;
        }
        let (s, l) = (self.events[i - 1], self.post_jump[i - 1]);
        self.lambda0 + (l - self.lambda0) * (-self.beta * (t - s)).exp()
    }

    pub fn lambda_end(&self) -> f64 {
        self.intensity_after(self.horizon)
    }

    /// `int_0^t lambda(u) du`, exact between events.
    pub fn integrated_intensity(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut s = 0.0;
        let mut l = self.lambda0;
        for (&e, &post) in self.events.iter().zip(&self.post_jump) {
            if e > t {
                break;
            }
            acc += decay_integral(self.lambda0, self.beta, l, e - s);
            s = e;
            l = post;
        }
        acc + decay_integral(self.lambda0, self.beta, l, t - s)
    }
}

/// `int_0^h [lambda0 + (l - lambda0) e^{-beta u}] du`.
fn decay_integral(lambda0: f64, beta: f64, l: f64, h: f64) -> f64 {
    lambda0 * h - (l - lambda0) * (-beta * h).exp_m1() / beta
}

/// Ogata thinning with the current intensity as the dominating rate; the
/// intensity only decays between events, so the bound is valid until the next
/// accepted point.
pub fn simulate_hawkes<R: Rng + ?Sized>(lambda0: f64, alpha: f64, beta: f64, horizon: f64, rng: &mut R) -> HawkesPath {
    let mut events = Vec::new();
    let mut post_jump = Vec::new();
    let mut s = 0.0;
    let mut bound = lambda0;
    loop {
        let w: f64 = Exp1.sample(rng);
        let cand = s + w / bound;
        if cand > horizon {
            break;
        }
        let l = lambda0 + (bound - lambda0) * (-beta * (cand - s)).exp();
        let u: f64 = rng.random();
        s = cand;
        if u * bound <= l {
            events.push(cand);
            bound = l + alpha;
            post_jump.push(bound);
        } else {
            bound = l;
        }
    }
    HawkesPath { events, lambda0, alpha, beta, horizon, post_jump }
}
