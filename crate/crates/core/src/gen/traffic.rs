//! Gravity-model demand and per-epoch variability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volumes indexed by class, then epoch.
pub type TrafficMatrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdVolume {
    pub from: String,
    pub to: String,
    pub volume: f64,
}

/// Splits `total` over every ordered pair in proportion to the product of
/// the endpoint populations. Pairs come out source-major in input order.
pub fn gravity_traffic(populations: &[(String, f64)], total: f64) -> Result<Vec<OdVolume>> {
    if populations.is_empty() {
        return Err(Error::Argument("gravity model needs at least one location".into()));
    }
    if !(total.is_finite() && total >= 0.0) {
        return Err(Error::Argument(format!("total volume {total} must be finite and >= 0")));
    }
    if let Some((id, p)) = populations.iter().find(|(_, p)| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::Argument(format!("population of `{id}` is {p}, must be positive")));
    }
    let sum: f64 = populations.iter().map(|(_, p)| p).sum();
    let mut out = Vec::with_capacity(populations.len() * populations.len());
    for (a, pa) in populations {
        for (b, pb) in populations {
            out.push(OdVolume {
                from: a.clone(),
                to: b.clone(),
                volume: total * (pa * pb) / (sum * sum),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariabilityModel {
    None,
    /// Each entry scaled by an independent draw from `[1 - alpha, 1 + alpha]`.
    UniformJitter { alpha: f64, seed: u64 },
    /// Entries of the 1-based `epoch` multiplied by `factor`.
    SingleSpike { epoch: usize, factor: f64 },
}

impl VariabilityModel {
    pub fn check(&self) -> Result<()> {
        match *self {
            VariabilityModel::UniformJitter { alpha, .. } if !(0.0..1.0).contains(&alpha) => {
                Err(Error::Argument(format!("jitter alpha {alpha} must lie in [0, 1)")))
            }
            VariabilityModel::SingleSpike { epoch, .. } if epoch == 0 => {
                Err(Error::Argument("spike epoch is 1-based".into()))
            }
            VariabilityModel::SingleSpike { factor, .. } if !(factor.is_finite() && factor >= 1.0) => {
                Err(Error::Argument(format!("spike factor {factor} must be >= 1")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            VariabilityModel::None => "none".into(),
            VariabilityModel::UniformJitter { alpha, .. } => format!("uniform_jitter({alpha})"),
            VariabilityModel::SingleSpike { epoch, factor } => format!("single_spike({epoch},{factor})"),
        }
    }
}

pub fn apply_variability(base: &[Vec<f64>], model: &VariabilityModel) -> Result<TrafficMatrix> {
    model.check()?;
    let mut out = base.to_vec();
    match *model {
        VariabilityModel::None => {}
        VariabilityModel::UniformJitter { alpha, seed } => {
            if alpha > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for v in out.iter_mut().flatten() {
                    *v *= rng.random_range(1.0 - alpha..=1.0 + alpha);
                }
            }
        }
        VariabilityModel::SingleSpike { epoch, factor } => {
            for row in &mut out {
                if let Some(v) = row.get_mut(epoch - 1) {
                    *v *= factor;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pops(p: &[(&str, f64)]) -> Vec<(String, f64)> {
        p.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn two_city_gravity() {
        let v = gravity_traffic(&pops(&[("A", 2.0), ("B", 1.0)]), 9.0).unwrap();
        let got: Vec<f64> = v.iter().map(|o| o.volume).collect();
        assert_eq!(got, vec![4.0, 2.0, 2.0, 1.0]);
        assert_eq!((v[1].from.as_str(), v[1].to.as_str()), ("A", "B"));
    }

    #[test]
    fn single_city_takes_everything() {
        let v = gravity_traffic(&pops(&[("A", 3.0)]), 7.0).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].volume, 7.0);
    }

    #[test]
    fn equal_populations_split_evenly() {
        let v = gravity_traffic(&pops(&[("A", 5.0), ("B", 5.0), ("C", 5.0), ("D", 5.0)]), 16.0).unwrap();
        assert!(v.iter().all(|o| o.volume == 1.0));
    }

    #[test]
    fn empty_or_bad_populations_fail() {
        assert!(gravity_traffic(&[], 1.0).is_err());
        assert!(gravity_traffic(&pops(&[("A", 0.0)]), 1.0).is_err());
        assert!(gravity_traffic(&pops(&[("A", 1.0)]), -1.0).is_err());
    }

    #[test]
    fn spike_in_third_epoch() {
        let out = apply_variability(&[vec![1.0; 4]], &VariabilityModel::SingleSpike { epoch: 3, factor: 10.0 }).unwrap();
        assert_eq!(out, vec![vec![1.0, 1.0, 10.0, 1.0]]);
    }

    #[test]
    fn identity_cases() {
        let base = vec![vec![1.5, 2.0], vec![0.0, 3.25]];
        assert_eq!(apply_variability(&base, &VariabilityModel::None).unwrap(), base);
        let zero = VariabilityModel::UniformJitter { alpha: 0.0, seed: 9 };
        assert_eq!(apply_variability(&base, &zero).unwrap(), base);
    }

    #[test]
    fn jitter_is_seeded_and_bounded() {
        let base = vec![vec![10.0; 6]; 3];
        let m = VariabilityModel::UniformJitter { alpha: 0.3, seed: 42 };
        let a = apply_variability(&base, &m).unwrap();
        assert_eq!(a, apply_variability(&base, &m).unwrap());
        assert!(a.iter().flatten().all(|v| (7.0..=13.0).contains(v)));
        assert_ne!(a, base);
    }

    #[test]
    fn parameters_are_checked() {
        assert!(VariabilityModel::UniformJitter { alpha: 1.0, seed: 0 }.check().is_err());
        assert!(VariabilityModel::SingleSpike { epoch: 1, factor: 0.5 }.check().is_err());
        assert!(VariabilityModel::SingleSpike { epoch: 0, factor: 2.0 }.check().is_err());
    }

    #[test]
    fn json_shape() {
        let m: VariabilityModel = serde_json::from_str(r#"{"kind":"single_spike","epoch":3,"factor":5}"#).unwrap();
        assert_eq!(m, VariabilityModel::SingleSpike { epoch: 3, factor: 5.0 });
        assert_eq!(m.label(), "single_spike(3,5)");
    }
}
