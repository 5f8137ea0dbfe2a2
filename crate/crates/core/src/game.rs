//! Symmetric two-player matrix games and the time-decaying trend matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO_SUM_TOL: f64 = 1e-12;

/// Row-player payoff matrix of a symmetric game, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    m: usize,
    a: Vec<f64>,
}

impl Game {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Game("payoff matrix is empty".into()));
        }
        let mut a = Vec::with_capacity(m * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Game(format!("row {i} has {} entries, expected {m}", row.len())));
            }
            a.extend_from_slice(row);
        }
        Self::from_row_major(m, a)
    }

    pub fn from_row_major(m: usize, a: Vec<f64>) -> Result<Self> {
        if m == 0 || a.len() != m * m {
            return Err(Error::Game(format!("expected {} entries for a {m}x{m} matrix, got {}", m * m, a.len())));
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(Error::Game(format!("non-finite payoff {bad}")));
        }
        Ok(Self { m, a })
    }

    /// `[[R, S], [T, P]]`, requiring `T > R > P > S`.
    pub fn prisoners_dilemma(r: f64, s: f64, t: f64, p: f64) -> Result<Self> {
        if !(t > r) {
            return Err(Error::Game(format!("prisoner's dilemma needs T > R, got T={t}, R={r}")));
        }
        if !(r > p) {
            return Err(Error::Game(format!("prisoner's dilemma needs R > P, got R={r}, P={p}")));
        }
        if !(p > s) {
            return Err(Error::Game(format!("prisoner's dilemma needs P > S, got P={p}, S={s}")));
        }
        Self::from_row_major(2, vec![r, s, t, p])
    }

    pub fn stag_hunt() -> Self {
        Self { m: 2, a: vec![2.0, -1.0, -1.0, 2.0] }
    }

    /// Strategy 1 is "swerve", strategy 2 "don't swerve".
    pub fn chicken() -> Self {
        Self { m: 2, a: vec![0.0, -1.0, 1.0, -10.0] }
    }

    /// Biased rock-paper-scissors; `a = 0` is zero-sum.
    pub fn rps(a: f64) -> Self {
        let w = 1.0 + a;
        Self { m: 3, a: vec![0.0, -1.0, w, w, 0.0, -1.0, -1.0, w, 0.0] }
    }

    pub fn strategies(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    /// `A = -Aᵀ` entrywise.
    pub fn is_zero_sum(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| (self.entry(i, j) + self.entry(j, i)).abs() <= ZERO_SUM_TOL))
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.a.iter().all(|&v| v > 0.0)
    }

    /// `⟨x, A y⟩` without dimension checks; callers guarantee `len == m`.
    #[inline]
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let m = self.m;
        let mut total = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.a[i * m..(i + 1) * m];
            let ay: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum();
            total += xi * ay;
        }
        total
    }

    /// Expected payoff `⟨x, A y⟩` to the player using `x` against `y`.
    pub fn expected_payoff(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        for v in [x, y] {
            if v.len() != self.m {
                return Err(Error::Dimension { expected: self.m, got: v.len() });
            }
        }
        Ok(self.bilinear(x, y))
    }
}

/// How elapsed adoption time enters the trend matrix exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSign {
    /// `X0 - (X0 - X)·β^(t-τ)`: entries start at the limiting payoff `X` and
    /// relax toward `X0`, so the trend advantage erodes.
    #[default]
    Decay,
    /// `X0 - (X0 - X)·β^-(t-τ)`: the exponent as literally printed, which
    /// grows without bound for `β < 1`.
    Literal,
}

/// Payoff parameters of the two-strategy trend game (strategy 2 is the trend).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendParams {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub p: f64,
    #[serde(default)]
    pub s0: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub p0: f64,
    pub beta: f64,
    #[serde(default)]
    pub exponent_sign: ExponentSign,
}

impl TrendParams {
    /// Parameters with `S0 = T0 = P0 = 0` and decaying exponent.
    pub fn new(r: f64, s: f64, t: f64, p: f64, beta: f64) -> Result<Self> {
        let params = Self { r, s, t, p, s0: 0.0, t0: 0.0, p0: 0.0, beta, exponent_sign: ExponentSign::Decay };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.r, self.s, self.t, self.p, self.s0, self.t0, self.p0, self.beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Game("trend parameters must be finite".into()));
        }
        if !(self.t > self.r) {
            return Err(Error::Game(format!("trend game needs T > R, got T={}, R={}", self.t, self.r)));
        }
        if !(self.p > self.s) {
            return Err(Error::Game(format!("trend game needs P > S, got P={}, S={}", self.p, self.s)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Game(format!("decay beta must lie in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }

    /// Weight multiplying `(X0 - X)` after `elapsed` steps in the trend.
    pub fn decay_factor(&self, elapsed: u64) -> f64 {
        let e = elapsed as f64;
        match self.exponent_sign {
            ExponentSign::Decay => self.beta.powf(e),
            ExponentSign::Literal => self.beta.powf(-e),
        }
    }

    /// Row-major `[R, S_t, T_t, P_t]` after `elapsed` steps.
    pub fn entries(&self, elapsed: u64) -> [f64; 4] {
        let f = self.decay_factor(elapsed);
        [
            self.r,
            self.s0 - (self.s0 - self.s) * f,
            self.t0 - (self.t0 - self.t) * f,
            self.p0 - (self.p0 - self.p) * f,
        ]
    }

    /// Player matrix at time `t` for a player who adopted at `adopted_at`.
    pub fn trend_matrix(&self, t: u64, adopted_at: u64) -> Result<Game> {
        if t < adopted_at {
            return Err(Error::Domain(format!("time {t} precedes adoption time {adopted_at}")));
        }
        Game::from_row_major(2, self.entries(t - adopted_at).to_vec())
    }
}
