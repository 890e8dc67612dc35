//! Seeded synthetic materials databases.
//!
//! Classes are assigned round-robin (Polymer, Ceramic, Metal, ...). For the
//! properties of the default schema each class draws from the ranges in
//! [`RANGES`]; they are representative engineering values, not measured
//! data. Properties the table does not know are drawn uniformly from
//! `[1, 100]` (numeric and interval) or uniformly over the scale labels
//! (ordinal). Numbers are rounded to four significant digits so the CSV form
//! stays readable and round-trips exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datastore::MaterialDatabase;
use crate::model::{Material, MaterialClass, PropertyValue};
use crate::schema::{PropertyDef, PropertyKind, PropertySchema};

/// Per-class draw range for one property.
#[derive(Debug, Clone, Copy)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    /// Draw uniformly in log space (for quantities spanning decades).
    pub log: bool,
}

const fn lin(lo: f64, hi: f64) -> Range {
    Range { lo, hi, log: false }
}

const fn log(lo: f64, hi: f64) -> Range {
    Range { lo, hi, log: true }
}

/// `(property, [polymer, ceramic, metal])`. Ordinal ranges are in scale
/// weight units and snap to the nearest label.
pub const RANGES: &[(&str, [Range; 3])] = &[
    ("Tensile Strength", [lin(5.0, 110.0), lin(100.0, 500.0), lin(200.0, 1500.0)]),
    ("Yield Strength", [lin(5.0, 100.0), lin(100.0, 450.0), lin(160.0, 1300.0)]),
    ("Impact Strength", [lin(1.0, 80.0), lin(0.1, 0.9), lin(10.0, 150.0)]),
    ("Hardness", [lin(10.0, 118.0), lin(900.0, 2800.0), lin(60.0, 700.0)]),
    ("Tensile Modulus", [lin(500.0, 4800.0), lin(70000.0, 450000.0), lin(45000.0, 240000.0)]),
    ("Density", [lin(0.85, 2.1), lin(2.3, 6.4), lin(6.6, 19.0)]),
    ("Elongation at Break", [lin(11.0, 600.0), lin(0.01, 0.9), lin(1.5, 60.0)]),
    ("Flexural Strength", [lin(10.0, 160.0), lin(150.0, 900.0), lin(250.0, 1600.0)]),
    ("Flexural Modulus", [lin(400.0, 4800.0), lin(70000.0, 450000.0), lin(45000.0, 240000.0)]),
    ("Compressive Strength", [lin(10.0, 140.0), lin(1600.0, 4500.0), lin(200.0, 1500.0)]),
    ("Poisson Ratio", [lin(0.33, 0.45), lin(0.15, 0.27), lin(0.26, 0.35)]),
    ("Melting Point", [lin(100.0, 380.0), lin(1850.0, 3500.0), lin(420.0, 1780.0)]),
    ("Max Service Temperature", [lin(60.0, 240.0), lin(1050.0, 1900.0), lin(150.0, 900.0)]),
    ("Thermal Conductivity", [lin(0.1, 0.9), lin(1.5, 150.0), lin(16.0, 400.0)]),
    ("Thermal Expansion Coefficient", [lin(40.0, 200.0), lin(2.0, 9.5), lin(8.0, 30.0)]),
    ("Specific Heat", [lin(1000.0, 2300.0), lin(600.0, 1100.0), lin(120.0, 900.0)]),
    ("Electrical Resistivity", [log(1e9, 1e17), log(1e11, 1e15), log(1.5e-6, 9e-4)]),
    ("Dielectric Strength", [lin(10.0, 40.0), lin(8.0, 30.0), lin(0.1, 1.0)]),
    ("Water Absorption", [lin(0.01, 3.0), lin(0.001, 0.5), lin(0.0001, 0.01)]),
    ("Corrosion Resistance", [lin(3.0, 5.0), lin(4.0, 5.0), lin(1.0, 4.0)]),
    ("Chemical Resistance", [lin(2.0, 5.0), lin(4.0, 5.0), lin(1.0, 3.0)]),
    ("Machinability", [lin(3.0, 5.0), lin(1.0, 2.0), lin(2.0, 5.0)]),
    ("Wear Resistance", [lin(1.0, 3.0), lin(4.0, 5.0), lin(2.0, 4.0)]),
];

const FALLBACK: Range = lin(1.0, 100.0);

fn range_for(property: &str, class: MaterialClass) -> Range {
    RANGES
        .iter()
        .find(|(name, _)| *name == property)
        .map(|(_, r)| r[class as usize])
        .unwrap_or(FALLBACK)
}

fn round_sig(v: f64) -> f64 {
    format!("{v:.3e}").parse().expect("formatted float parses")
}

fn draw(rng: &mut ChaCha8Rng, r: Range) -> f64 {
    let v = if r.log {
        rng.random_range(r.lo.ln()..=r.hi.ln()).exp()
    } else {
        rng.random_range(r.lo..=r.hi)
    };
    round_sig(v)
}

fn draw_value(rng: &mut ChaCha8Rng, def: &PropertyDef, class: MaterialClass) -> PropertyValue {
    let r = range_for(&def.name, class);
    match def.kind {
        PropertyKind::Numeric => PropertyValue::Numeric(draw(rng, r)),
        PropertyKind::Interval => {
            let centre = draw(rng, r);
            // Half-width up to 2% of the centre value.
            let half = round_sig(centre * rng.random_range(0.0..0.02));
            let lo = round_sig(centre - half);
            let hi = round_sig(centre + half);
            PropertyValue::Interval {
                lo: lo.min(hi),
                hi: lo.max(hi),
            }
        }
        PropertyKind::Ordinal => {
            let scale = def.ordinal_scale.as_ref().expect("ordinal has scale");
            let levels = scale.levels();
            let known = RANGES.iter().any(|(n, _)| *n == def.name);
            let idx = if known {
                let w = rng.random_range(r.lo..=r.hi);
                levels
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 .1 - w).abs().total_cmp(&(b.1 .1 - w).abs()))
                    .map(|(i, _)| i)
                    .unwrap_or(0)
            } else {
                rng.random_range(0..levels.len())
            };
            PropertyValue::Ordinal(levels[idx].0.clone())
        }
    }
}

/// Generates `n_materials` materials deterministically from `seed`.
///
/// Panics if `n_materials` is zero.
pub fn generate_synthetic(seed: u64, n_materials: usize, schema: &PropertySchema) -> MaterialDatabase {
    assert!(n_materials >= 1, "n_materials must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n_materials.to_string().len().max(4);
    let materials = (0..n_materials)
        .map(|i| {
            let class = MaterialClass::ALL[i % 3];
            let values = schema
                .properties()
                .iter()
                .map(|def| draw_value(&mut rng, def, class))
                .collect();
            Material {
                id: format!("M{:0width$}", i + 1),
                name: format!("Synthetic {} {}", class, i / 3 + 1),
                class,
                values,
            }
        })
        .collect();
    MaterialDatabase::new(schema.clone(), materials).expect("generated rows validate")
}
