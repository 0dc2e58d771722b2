//! Fixtures shared by the benchmarks in `benches/`.

use geomatch_core::generate::{generate, GeneratorSpec, Regime, ShapeSpec};
use geomatch_core::geom::Point;
use geomatch_core::{GeomObject, Instance};

/// Unit disks at the default density.
pub fn unit_disks(n: usize, seed: u64) -> Instance {
    generate(&GeneratorSpec::unit_disks(n), seed).expect("default generator")
}

/// Unit disks piled around `n / depth` centers.
pub fn clustered(n: usize, depth: usize, seed: u64) -> Instance {
    let spec = GeneratorSpec {
        regime: Regime::Clustered { depth },
        ..GeneratorSpec::unit_disks(n)
    };
    generate(&spec, seed).expect("clustered generator")
}

/// Disks with radii in `[1, ratio]`.
pub fn mixed_radii(n: usize, ratio: f64, seed: u64) -> Instance {
    let spec = GeneratorSpec {
        shape: ShapeSpec::DiskRatio { ratio },
        ..GeneratorSpec::unit_disks(n)
    };
    let spec = GeneratorSpec { side: spec.side * ratio, ..spec };
    generate(&spec, seed).expect("disk-ratio generator")
}

/// `m` disks of varying radius, all containing the origin.
pub fn pierced_disks(m: usize) -> (Vec<GeomObject>, Point) {
    let disks = (0..m)
        .map(|i| {
            let t = i as f64 * 2.399963;
            let r = 1.0 + (i % 7) as f64 * 0.3;
            let d = 0.8 * r * ((i * 37 % 101) as f64 / 101.0);
            GeomObject::disk(i, d * t.cos(), d * t.sin(), r)
        })
        .collect();
    (disks, Point::new(0.0, 0.0))
}
