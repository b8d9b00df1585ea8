use serde::{Deserialize, Serialize};

/// Stage-indexed likelihood P(T_n | h).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodSchedule {
    Constant(f64),
    /// `limit - (limit - start) * exp(-rate * (n - 1))`: monotone in `n`,
    /// starting at `start` and converging to `limit`.
    MonotoneToLimit { start: f64, limit: f64, rate: f64 },
    Complement(Box<LikelihoodSchedule>),
}

impl LikelihoodSchedule {
    pub fn constant(c: f64) -> Self {
        LikelihoodSchedule::Constant(c)
    }

    pub fn monotone(start: f64, limit: f64, rate: f64) -> Self {
        LikelihoodSchedule::MonotoneToLimit { start, limit, rate }
    }

    pub fn complement(of: LikelihoodSchedule) -> Self {
        LikelihoodSchedule::Complement(Box::new(of))
    }

    /// Value at stage `n` (1-based).
    pub fn value(&self, n: usize) -> f64 {
        match self {
            LikelihoodSchedule::Constant(c) => *c,
            LikelihoodSchedule::MonotoneToLimit { start, limit, rate } => {
                let k = n.saturating_sub(1) as f64;
                limit - (limit - start) * (-rate * k).exp()
            }
            LikelihoodSchedule::Complement(inner) => 1.0 - inner.value(n),
        }
    }

    /// The value the schedule converges to.
    pub fn limit(&self) -> f64 {
        match self {
            LikelihoodSchedule::Constant(c) => *c,
            LikelihoodSchedule::MonotoneToLimit { start, limit, rate } => {
                if *rate > 0.0 {
                    *limit
                } else {
                    *start
                }
            }
            LikelihoodSchedule::Complement(inner) => 1.0 - inner.limit(),
        }
    }

    /// Whether the schedule kind converges to exactly 1.
    pub fn converges_to_one(&self) -> bool {
        self.limit() == 1.0
    }

    pub fn is_constant(&self) -> bool {
        match self {
            LikelihoodSchedule::Constant(_) => true,
            LikelihoodSchedule::MonotoneToLimit { start, limit, rate } => start == limit || *rate == 0.0,
            LikelihoodSchedule::Complement(inner) => inner.is_constant(),
        }
    }

    /// Checks that every parameter lies in [0, 1] (rate must be nonnegative).
    pub fn validate(&self) -> Result<(), String> {
        let unit = |x: f64, what: &str| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(format!("{what} {x} outside [0, 1]"))
            }
        };
        match self {
            LikelihoodSchedule::Constant(c) => unit(*c, "constant"),
            LikelihoodSchedule::MonotoneToLimit { start, limit, rate } => {
                unit(*start, "start")?;
                unit(*limit, "limit")?;
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(format!("rate {rate} must be finite and nonnegative"));
                }
                Ok(())
            }
            LikelihoodSchedule::Complement(inner) => inner.validate(),
        }
    }
}

/// First index `k <= horizon / 2` from which the schedule never decreases up to `horizon`.
pub fn eventually_nondecreasing(schedule: &LikelihoodSchedule, horizon: usize) -> bool {
    let values: Vec<f64> = (1..=horizon).map(|n| schedule.value(n)).collect();
    // last index where a decrease happens
    let last_drop = values.windows(2).rposition(|w| w[1] < w[0]);
    match last_drop {
        None => true,
        Some(i) => i + 2 <= horizon.max(1) / 2,
    }
}
