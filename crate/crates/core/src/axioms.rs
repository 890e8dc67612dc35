//! Seeded checks of the four metric conditions: non-negativity, identity,
//! symmetry and the triangle inequality.
//!
//! Identity is judged in orientation-appropriate form: `d(x, x) = 0` for
//! distance kinds, `d(x, x) = 1` for similarity kinds. The literal
//! `d(x, x) = 0` test is tallied separately for every kind so that a
//! similarity's failure as a distance stays visible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{MetricKind, Orientation};

/// Relative tolerance for identity, symmetry and the triangle inequality.
pub const AXIOM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    NonNegativity,
    Identity,
    IdentityAsDistance,
    Symmetry,
    Triangle,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::NonNegativity,
        Axiom::Identity,
        Axiom::IdentityAsDistance,
        Axiom::Symmetry,
        Axiom::Triangle,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Axiom::NonNegativity => "non-negativity",
            Axiom::Identity => "identity",
            Axiom::IdentityAsDistance => "identity-as-distance",
            Axiom::Symmetry => "symmetry",
            Axiom::Triangle => "triangle",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
}

impl Tally {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

/// A failed check. `lhs` and `rhs` are the two sides that were compared, so
/// the failure can be reproduced by evaluating the metric on `x`, `y`, `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub axiom: Axiom,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Option<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub metric: MetricKind,
    pub samples: usize,
    pub seed: u64,
    pub tallies: Vec<(Axiom, Tally)>,
    /// Up to [`MAX_COUNTEREXAMPLES`] per axiom.
    pub counterexamples: Vec<Counterexample>,
    /// Triples skipped because the metric's domain excludes them.
    pub skipped: usize,
}

pub const MAX_COUNTEREXAMPLES: usize = 3;

impl AxiomReport {
    pub fn tally(&self, axiom: Axiom) -> Tally {
        self.tallies
            .iter()
            .find(|(a, _)| *a == axiom)
            .map(|(_, t)| *t)
            .unwrap_or_default()
    }

    pub fn passes(&self, axiom: Axiom) -> bool {
        self.tally(axiom).all_passed()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= AXIOM_TOLERANCE * a.abs().max(b.abs())
}

/// Draws `samples` random triples `(x, y, z)` of dimension 2..=23 and checks
/// each condition. Components are drawn from `[-100, 100]`, or from
/// `[0.01, 100]` for the geometric average which needs positive inputs.
pub fn check_metric_axioms(kind: MetricKind, samples: usize, seed: u64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = match kind {
        MetricKind::GeometricAverageMin => (0.01, 100.0),
        _ => (-100.0, 100.0),
    };
    let mut tallies: Vec<(Axiom, Tally)> = Axiom::ALL.iter().map(|a| (*a, Tally::default())).collect();
    let mut counterexamples: Vec<Counterexample> = Vec::new();
    let mut skipped = 0;

    let mut record = |axiom: Axiom, ok: bool, ce: &dyn Fn() -> Counterexample| {
        let slot = tallies.iter_mut().find(|(a, _)| *a == axiom).expect("every axiom tallied");
        if ok {
            slot.1.passed += 1;
        } else {
            slot.1.failed += 1;
            if counterexamples.iter().filter(|c| c.axiom == axiom).count() < MAX_COUNTEREXAMPLES {
                counterexamples.push(ce());
            }
        }
    };

    for _ in 0..samples {
        let n = rng.random_range(2..=23);
        let mut vector = || -> Vec<f64> { (0..n).map(|_| rng.random_range(lo..=hi)).collect() };
        let (x, y, z) = (vector(), vector(), vector());

        let (Ok(dxy), Ok(dyx), Ok(dxz), Ok(dzy), Ok(dxx)) = (
            kind.score(&x, &y),
            kind.score(&y, &x),
            kind.score(&x, &z),
            kind.score(&z, &y),
            kind.score(&x, &x),
        ) else {
            skipped += 1;
            continue;
        };

        let pair = |axiom, lhs, rhs| Counterexample {
            axiom,
            x: x.clone(),
            y: y.clone(),
            z: None,
            lhs,
            rhs,
        };

        record(Axiom::NonNegativity, dxy >= 0.0, &|| pair(Axiom::NonNegativity, dxy, 0.0));

        let ideal = match kind.orientation() {
            Orientation::Distance => 0.0,
            Orientation::Similarity => 1.0,
        };
        record(Axiom::Identity, close(dxx, ideal), &|| Counterexample {
            y: x.clone(),
            ..pair(Axiom::Identity, dxx, ideal)
        });
        record(Axiom::IdentityAsDistance, dxx == 0.0, &|| Counterexample {
            y: x.clone(),
            ..pair(Axiom::IdentityAsDistance, dxx, 0.0)
        });

        record(Axiom::Symmetry, close(dxy, dyx), &|| pair(Axiom::Symmetry, dxy, dyx));

        let detour = dxz + dzy;
        let ok = detour >= dxy || close(detour, dxy);
        record(Axiom::Triangle, ok, &|| Counterexample {
            z: Some(z.clone()),
            ..pair(Axiom::Triangle, detour, dxy)
        });
    }

    AxiomReport {
        metric: kind,
        samples,
        seed,
        tallies,
        counterexamples,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_and_city_block_are_metrics() {
        for kind in [MetricKind::Euclidean, MetricKind::CityBlock] {
            let r = check_metric_axioms(kind, 1000, 11);
            for axiom in Axiom::ALL {
                assert!(r.passes(axiom), "{kind} {axiom:?} {:?}", r.tally(axiom));
            }
            assert!(r.counterexamples.is_empty());
        }
    }

    #[test]
    fn absolute_exponential_fails_identity_as_distance() {
        let r = check_metric_axioms(MetricKind::AbsoluteExponential, 1000, 3);
        assert!(r.passes(Axiom::Symmetry));
        assert!(r.passes(Axiom::NonNegativity));
        assert!(r.passes(Axiom::Identity));
        assert_eq!(r.tally(Axiom::IdentityAsDistance).passed, 0);
        assert_eq!(r.tally(Axiom::IdentityAsDistance).failed, 1000);
        let ce = r
            .counterexamples
            .iter()
            .find(|c| c.axiom == Axiom::IdentityAsDistance)
            .unwrap();
        // Re-verify by direct evaluation.
        assert_eq!(MetricKind::AbsoluteExponential.score(&ce.x, &ce.y), Ok(ce.lhs));
        assert_eq!(ce.lhs, 1.0);
    }

    #[test]
    fn geomavg_sampling_is_positive() {
        let r = check_metric_axioms(MetricKind::GeometricAverageMin, 500, 5);
        assert_eq!(r.skipped, 0);
        assert!(r.passes(Axiom::NonNegativity));
        assert!(r.passes(Axiom::Symmetry));
        assert!(r.passes(Axiom::Identity));
    }

    #[test]
    fn counterexamples_reproduce() {
        let r = check_metric_axioms(MetricKind::ExponentialSimilarity, 1000, 9);
        for ce in r.counterexamples.iter().filter(|c| c.axiom == Axiom::Triangle) {
            let z = ce.z.as_ref().unwrap();
            let k = MetricKind::ExponentialSimilarity;
            let detour = k.score(&ce.x, z).unwrap() + k.score(z, &ce.y).unwrap();
            assert_eq!(detour, ce.lhs);
            assert_eq!(k.score(&ce.x, &ce.y).unwrap(), ce.rhs);
            assert!(ce.lhs < ce.rhs);
        }
    }

    #[test]
    fn deterministic() {
        let a = check_metric_axioms(MetricKind::CorrelationCoefficient, 200, 1);
        let b = check_metric_axioms(MetricKind::CorrelationCoefficient, 200, 1);
        assert_eq!(a, b);
    }
}
