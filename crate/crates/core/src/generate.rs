//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{density_estimate, GeomObject, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum ShapeSpec {
    /// Radius-1 disks; instance `psi` is 2.
    UnitDisk,
    /// Radii uniform in `[1, ratio]`; instance `psi` is `2·ratio`.
    DiskRatio { ratio: f64 },
    /// Side lengths uniform in `[1, psi]`.
    Box { psi: f64 },
}

impl ShapeSpec {
    /// Side of the square every generated object fits in.
    pub fn psi(&self) -> f64 {
        match *self {
            ShapeSpec::UnitDisk => 2.0,
            ShapeSpec::DiskRatio { ratio } => 2.0 * ratio,
            ShapeSpec::Box { psi } => psi,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, id: usize, x: f64, y: f64) -> GeomObject {
        match *self {
            ShapeSpec::UnitDisk => GeomObject::unit_disk(id, x, y),
            ShapeSpec::DiskRatio { ratio } => {
                let r = if ratio > 1.0 { rng.gen_range(1.0..=ratio) } else { 1.0 };
                GeomObject::disk(id, x, y, r)
            }
            ShapeSpec::Box { psi } => {
                let mut side = || if psi > 1.0 { rng.gen_range(1.0..=psi) } else { 1.0 };
                let (w, h) = (side(), side());
                GeomObject::rect(id, x - 0.5 * w, y - 0.5 * h, x + 0.5 * w, y + 0.5 * h)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum Regime {
    /// Uniform positions, redrawn until `density_estimate ≤ rho`.
    LowDensity { rho: usize },
    /// Objects scattered around `⌈n / depth⌉` uniform centers.
    Clustered { depth: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    pub n: usize,
    #[serde(flatten)]
    pub regime: Regime,
    /// Objects are centered in `[0, side]²`.
    pub side: f64,
}

/// Full redraws tried by the low-density regime.
pub const GENERATION_ATTEMPTS: usize = 50;

impl GeneratorSpec {
    /// Unit disks in a square sized for about one disk per 4 units of area
    /// with no density target.
    pub fn unit_disks(n: usize) -> Self {
        GeneratorSpec {
            shape: ShapeSpec::UnitDisk,
            n,
            regime: Regime::LowDensity { rho: usize::MAX },
            side: (4.0 * n as f64).sqrt().max(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = match self.shape {
            ShapeSpec::UnitDisk => false,
            ShapeSpec::DiskRatio { ratio } => !(ratio >= 1.0 && ratio.is_finite()),
            ShapeSpec::Box { psi } => !(psi >= 1.0 && psi.is_finite()),
        };
        if bad || !(self.side >= 0.0 && self.side.is_finite()) {
            return Err(Error::InvalidParams(format!("bad generator spec {self:?}")));
        }
        if matches!(self.regime, Regime::Clustered { depth: 0 } | Regime::LowDensity { rho: 0 }) {
            return Err(Error::InvalidParams("zero density or depth target".into()));
        }
        Ok(())
    }
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = spec.shape.psi();
    match spec.regime {
        Regime::LowDensity { rho } => {
            for _ in 0..GENERATION_ATTEMPTS {
                let objs: Vec<GeomObject> = (0..spec.n)
                    .map(|i| {
                        let (x, y) = (rng.gen_range(0.0..=spec.side), rng.gen_range(0.0..=spec.side));
                        spec.shape.sample(&mut rng, i, x, y)
                    })
                    .collect();
                if rho == usize::MAX || density_estimate(&objs) <= rho {
                    return Ok(Instance::new(psi, objs));
                }
            }
            Err(Error::GenerationFailed(format!(
                "density target {rho} not met in {GENERATION_ATTEMPTS} draws"
            )))
        }
        Regime::Clustered { depth: d } => {
            let k = spec.n.div_ceil(d).max(1);
            let centers: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.gen_range(0.0..=spec.side), rng.gen_range(0.0..=spec.side)))
                .collect();
            let objs: Vec<GeomObject> = (0..spec.n)
                .map(|i| {
                    let (cx, cy) = centers[rng.gen_range(0..k)];
                    let (dx, dy) = (rng.gen_range(-0.5..=0.5), rng.gen_range(-0.5..=0.5));
                    spec.shape.sample(&mut rng, i, cx + dx, cy + dy)
                })
                .collect();
            Ok(Instance::new(psi, objs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_deterministic() {
        let spec = GeneratorSpec { n: 0, ..GeneratorSpec::unit_disks(0) };
        assert!(generate(&spec, 1).unwrap().objects.is_empty());
        let spec = GeneratorSpec::unit_disks(50);
        assert_eq!(generate(&spec, 9).unwrap(), generate(&spec, 9).unwrap());
    }

    #[test]
    fn sparse_unit_disks() {
        let spec = GeneratorSpec {
            shape: ShapeSpec::UnitDisk,
            n: 100,
            regime: Regime::LowDensity { rho: 8 },
            side: 40.0,
        };
        let inst = generate(&spec, 2).unwrap();
        assert!(density_estimate(&inst.objects) <= 8);
        inst.check_psi_bounds().unwrap();
    }

    #[test]
    fn ratio_and_boxes_fit() {
        for shape in [ShapeSpec::DiskRatio { ratio: 3.0 }, ShapeSpec::Box { psi: 3.0 }] {
            let spec = GeneratorSpec { shape, n: 200, regime: Regime::Clustered { depth: 6 }, side: 30.0 };
            let inst = generate(&spec, 4).unwrap();
            inst.check_psi_bounds().unwrap();
            if let ShapeSpec::DiskRatio { .. } = shape {
                for o in &inst.objects {
                    let crate::geom::Shape::Disk { radius, .. } = o.shape else { panic!() };
                    assert!((1.0..=3.0).contains(&radius));
                }
            }
        }
    }

    #[test]
    fn unreachable_target_fails() {
        let spec = GeneratorSpec {
            shape: ShapeSpec::UnitDisk,
            n: 50,
            regime: Regime::LowDensity { rho: 2 },
            side: 1.0,
        };
        assert!(matches!(generate(&spec, 0), Err(Error::GenerationFailed(_))));
    }
}
