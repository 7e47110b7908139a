//! Synthetic tag-to-physics data with known smooth structure, for demos,
//! tests and benchmarks.
//!
//! Density and thickness depend on family and fibers; every physics target is
//! a smooth monotone function of density, thickness and structure type with
//! multiplicative noise of the requested relative standard deviation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{T2PDataset, T2PRecord};
use crate::physmap::{Directional, PhysicsParams, Sided, WarpWeft};
use crate::tagparse::{FabricAttributes, FiberComposition, StructureType};
use crate::vocab::Vocabulary;

/// (family, structure, base density g/m^2, thickness mm per 100 g/m^2)
const FAMILIES: &[(&str, StructureType, f64, f64)] = &[
    ("jersey", StructureType::Knit, 180.0, 0.35),
    ("rib knit", StructureType::Knit, 230.0, 0.40),
    ("fleece", StructureType::Knit, 320.0, 0.55),
    ("interlock", StructureType::Knit, 210.0, 0.38),
    ("denim", StructureType::Woven, 380.0, 0.18),
    ("poplin", StructureType::Woven, 120.0, 0.20),
    ("twill", StructureType::Woven, 220.0, 0.25),
    ("chiffon", StructureType::Woven, 55.0, 0.30),
    ("satin", StructureType::Woven, 110.0, 0.22),
    ("lace", StructureType::Others, 90.0, 0.45),
    ("mesh", StructureType::Others, 70.0, 0.50),
];

/// (fiber, density multiplier)
const FIBERS: &[(&str, f64)] = &[
    ("Cotton", 1.05),
    ("Polyester", 0.95),
    ("Wool", 1.20),
    ("Viscose Rayon", 1.00),
    ("Nylon", 0.90),
    ("Linen", 1.10),
    ("Silk", 0.80),
];

fn structure_factor(s: StructureType) -> (f64, f64, f64) {
    // (stretch, bending, buckling-ratio offset)
    match s {
        StructureType::Knit => (0.35, 0.6, 10.0),
        StructureType::Woven => (1.6, 1.2, 30.0),
        StructureType::Lining => (1.0, 0.5, 20.0),
        StructureType::Others => (0.5, 0.3, 5.0),
    }
}

/// Multiplicative noise with relative standard deviation `sd` (uniform shape).
fn jitter(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 1.0;
    }
    1.0 + sd * 3f64.sqrt() * rng.gen_range(-1.0..1.0)
}

/// Physics implied by density, thickness and structure, before noise.
pub fn smooth_physics(density: f64, thickness: f64, structure: StructureType) -> PhysicsParams {
    let (ks, kb, r0) = structure_factor(structure);
    let stretch = 8000.0 * ks * (density / 100.0).powf(1.2);
    let bend = 400.0 * kb * thickness.powi(2) * density / 100.0;
    let ratio = r0 + 40.0 * thickness / (1.0 + thickness);
    PhysicsParams {
        density,
        thickness,
        friction: 0.3,
        internal_damping: 1.0,
        buckling_stiffness: Directional { bias_l: 0.3 * bend, bias_r: 0.3 * bend, warp: 0.5 * bend, weft: 0.45 * bend },
        buckling_ratio: Directional { bias_l: ratio * 0.8, bias_r: ratio * 0.8, warp: ratio, weft: ratio * 0.9 },
        bending_stiffness: Directional { bias_l: 0.6 * bend, bias_r: 0.6 * bend, warp: bend, weft: 0.85 * bend },
        shear_stiffness: Sided { left: 0.06 * stretch, right: 0.06 * stretch },
        stretch_stiffness: WarpWeft { warp: stretch, weft: 0.8 * stretch },
    }
}

/// `n` records with ids `t2p-00000`, ... drawn deterministically from `seed`.
pub fn t2p_like(vocab: &Vocabulary, n: usize, seed: u64, noise: f64) -> T2PDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let &(family, structure, base_density, t_per_100) = &FAMILIES[rng.gen_range(0..FAMILIES.len())];
        let (primary, pf) = FIBERS[rng.gen_range(0..FIBERS.len())];
        let mut shares = vec![(primary, 100.0)];
        let mut factor = pf;
        match rng.gen_range(0..3) {
            0 => {}
            1 => {
                let e = rng.gen_range(2..=8) as f64;
                shares[0].1 -= e;
                shares.push(("Elastane", e));
                factor *= 1.0 + e / 100.0;
            }
            _ => {
                let (second, sf) = FIBERS[rng.gen_range(0..FIBERS.len())];
                if second != primary {
                    let p = (rng.gen_range(1..=9) * 5) as f64;
                    shares[0].1 -= p;
                    shares.push((second, p));
                    factor = (pf * (100.0 - p) + sf * p) / 100.0;
                }
            }
        }
        let composition = FiberComposition::from_raw(vocab, &shares).expect("synthetic composition is valid");
        let density = (base_density * factor * jitter(&mut rng, 0.12)).clamp(10.0, 1500.0);
        let thickness = (density / 100.0 * t_per_100 * jitter(&mut rng, 0.10)).clamp(0.05, 15.0);

        let clean = smooth_physics(density, thickness, structure).to_array();
        let mut values = clean;
        for v in values.iter_mut().skip(4) {
            *v *= jitter(&mut rng, noise);
        }
        let physics = PhysicsParams::from_array(&values);
        let family = crate::tagparse::normalize_family(vocab, family).expect("synthetic family is canonical");
        records.push(T2PRecord {
            id: format!("t2p-{i:05}"),
            attributes: FabricAttributes::new(composition, family, structure).with_scalars(density, thickness),
            physics,
        });
    }
    T2PDataset::new(vocab, records).expect("synthetic records are valid")
}
