use crate::model::C64;

/// Values below this are written as the sentinel `<-100`.
pub const NMSE_FLOOR_DB: f64 = -100.0;

/// Pooled NMSE: Σ‖ĥ - h‖² / Σ‖h‖² over the samples added so far.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NmseAccumulator {
    pub err: f64,
    pub energy: f64,
    pub count: usize,
}

impl NmseAccumulator {
    pub fn add(&mut self, h: &[C64], est: &[C64]) {
        assert_eq!(h.len(), est.len());
        self.err += h.iter().zip(est).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>();
        self.energy += h.iter().map(|a| a.norm_sqr()).sum::<f64>();
        self.count += 1;
    }

    /// Adds another partial sum; callers merge in a fixed order.
    pub fn merge(&mut self, other: &NmseAccumulator) {
        self.err += other.err;
        self.energy += other.energy;
        self.count += other.count;
    }

    /// NMSE in dB; -∞ for an exact estimate.
    pub fn db(&self) -> f64 {
        10.0 * (self.err / self.energy).log10()
    }
}

/// 10·log₁₀(Σ‖ĥ - h‖² / Σ‖h‖²) over (h, ĥ) pairs.
pub fn nmse_db<'a, I>(pairs: I) -> f64
where
    I: IntoIterator<Item = (&'a [C64], &'a [C64])>,
{
    let mut acc = NmseAccumulator::default();
    for (h, est) in pairs {
        acc.add(h, est);
    }
    acc.db()
}

/// Table formatting of an NMSE value.
pub fn format_db(v: f64) -> String {
    if v < NMSE_FLOOR_DB {
        "<-100".into()
    } else {
        format!("{v:.6}")
    }
}
