mod support;

use proptest::prelude::*;
use sitrep_core::features::{Localisation, SemanticFeature};
use sitrep_core::proximity::{proximity, Kernel, ProximitySettings};
use sitrep_core::Ontology;

fn settings(kernel: Kernel) -> ProximitySettings {
    ProximitySettings { spatial_scale: 1000.0, temporal_scale: 10.0, kernel }
}

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![Just(Kernel::Linear), Just(Kernel::Gaussian)]
}

fn moved(f: &SemanticFeature, dx: f64, dt: u64) -> SemanticFeature {
    let mut g = f.clone();
    if let Localisation::Known { x, y } = g.localisation {
        g.localisation = Localisation::Known { x: x + dx, y };
    }
    g.time += dt;
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn symmetric_and_bounded(a in support::world_feature(), b in support::world_feature(), k in kernel()) {
        let ont = Ontology::default_rcr();
        let s = settings(k);
        let ab = proximity(&ont, &s, &a, &b);
        let ba = proximity(&ont, &s, &b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert!(ab.combined.abs() <= 1.0);
        prop_assert!((0.0..=1.0).contains(&ab.spatial) && (0.0..=1.0).contains(&ab.temporal));
        if ab.semantic == 0.0 {
            prop_assert_eq!(ab.combined.to_bits(), 0.0f64.to_bits());
        }
    }

    #[test]
    fn attenuation_is_monotone(
        a in support::world_feature(),
        b in support::world_feature(),
        d1 in 0.0f64..1500.0,
        extra in 0.0f64..1500.0,
        t1 in 0u64..15,
        textra in 0u64..15,
        k in kernel(),
    ) {
        let ont = Ontology::default_rcr();
        let s = settings(k);
        // place b to the right of a, strictly apart so the place-based
        // contradiction rule cannot switch on or off between the two probes
        let mut b = b;
        b.localisation = match a.localisation {
            Localisation::Known { x, y } => Localisation::Known { x: x + d1 + 1.0, y },
            Localisation::Unknown => Localisation::Unknown,
        };
        b.time = a.time + t1;
        let near = proximity(&ont, &s, &a, &b).combined.abs();
        let farther = proximity(&ont, &s, &a, &moved(&b, extra, 0)).combined.abs();
        let later = proximity(&ont, &s, &a, &moved(&b, 0.0, textra)).combined.abs();
        prop_assert!(farther <= near, "distance: {farther} > {near}");
        prop_assert!(later <= near, "time: {later} > {near}");
    }

    #[test]
    fn zero_at_and_beyond_scales(a in support::world_feature(), b in support::world_feature(), over in 0.0f64..5000.0, tover in 0u64..50, k in kernel()) {
        let ont = Ontology::default_rcr();
        let s = settings(k);
        let mut far = b.clone();
        if let Localisation::Known { x, y } = a.localisation {
            far.localisation = Localisation::Known { x: x + 1000.0 + over, y };
            prop_assert_eq!(proximity(&ont, &s, &a, &far).combined, 0.0);
        }
        let mut late = b;
        late.time = a.time + 10 + tover;
        prop_assert_eq!(proximity(&ont, &s, &a, &late).combined, 0.0);
    }
}

#[test]
fn same_place_same_time_uses_table_value() {
    let ont = Ontology::default_rcr();
    let at = |kind: &str| {
        SemanticFeature::new(sitrep_core::FeatureKey::new("Phenomenon", 1), kind, 3, Localisation::Known { x: 0.0, y: 0.0 })
            .with("intensity", "low")
    };
    let mut blk = at("blockade");
    blk.key.id = 2;
    let p = proximity(&ont, &settings(Kernel::Linear), &at("break"), &blk);
    assert_eq!(p.combined, 0.6);
}
