use rand::Rng;

use super::operator::ForwardOperator;
use super::sampling::Draws;
use super::simulate::{simulate_model1, simulate_model2, simulate_model3, DataModel, Model3Link};
use super::{Observation, C64};

/// Generator of (true channel, observation) pairs for one operating point.
#[derive(Debug, Clone)]
pub struct SampleSource {
    pub op: ForwardOperator,
    pub model: DataModel,
    /// Noise power in model units (ignored by Model 1).
    pub n0: f64,
    /// Dither power; absolute (W) for Model 3.
    pub ed: f64,
    /// Absolute-power link (used by Model 3 only).
    pub link: Model3Link,
}

impl SampleSource {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<C64>, Observation) {
        let dr = Draws::new(rng, &self.op);
        let d = dr.dither(self.ed);
        let obs = match self.model {
            DataModel::M1 => simulate_model1(&self.op, &dr.h, &d),
            DataModel::M2 => simulate_model2(&self.op, &dr.h, &dr.noise(self.n0), &d),
            DataModel::M3 => simulate_model3(&self.op, &dr.h, &dr.noise(self.n0), &d, &self.link, rng),
        };
        (dr.h, obs)
    }
}
