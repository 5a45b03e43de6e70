use drqa_core::agreement::{agreement_profile, item_agreement};
use drqa_core::geometry::config_ranks;
use drqa_core::viz::{
    default_item_order, loess_surface, render_heatmap, render_lift, render_loess_overlay, render_scatter, ColorMode,
    ColorScale, Palette, RenderSpec,
};
use drqa_core::{Configuration, KRange};
use proptest::prelude::*;

fn points(n: usize, m: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(-10.0f64..10.0, n * m).prop_map(move |v| Configuration::from_flat(n, m, v).unwrap())
}

fn well_formed(svg: &str) -> roxmltree::Document<'_> {
    roxmltree::Document::parse(svg).expect("well-formed SVG")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn color_scale_monotone(mut vals in prop::collection::vec(-5.0f64..5.0, 2..40)) {
        let p = Palette::default();
        for mode in [ColorMode::Comparative, ColorMode::RelativeToRandom, ColorMode::Absolute] {
            let scale = ColorScale::fit(mode, &vals, &p).unwrap();
            vals.sort_by(f64::total_cmp);
            for w in vals.windows(2) {
                let (c0, c1) = (scale.color(w[0]), scale.color(w[1]));
                prop_assert!(c1.0 <= c0.0, "red rises: {:?} -> {:?}", c0, c1);
                prop_assert!(c1.2 >= c0.2, "blue falls: {:?} -> {:?}", c0, c1);
            }
        }
    }

    #[test]
    fn loess_translation_invariant(c in points(20, 2), v in prop::collection::vec(-1.0f64..1.0, 20), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let moved = Configuration::from_flat(20, 2, (0..20).flat_map(|i| [c.get(i, 0) + dx, c.get(i, 1) + dy]).collect()).unwrap();
        let a = loess_surface(&c, &v, 0.6, 5).unwrap();
        let b = loess_surface(&moved, &v, 0.6, 5).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
        }
    }

    #[test]
    fn renderers_emit_well_formed_deterministic_xml(a in points(15, 3), b in points(15, 2)) {
        let pa = agreement_profile(&config_ranks(&a).unwrap(), &config_ranks(&b).unwrap(), true).unwrap();
        let ks: Vec<usize> = (1..=5).collect();
        let items = item_agreement(&pa, &ks, false).unwrap();
        let spec = RenderSpec { range_k: KRange::Span { from: 1, to: 5 }, ..Default::default() };
        let aggregates = vec![("mean <AR>".to_string(), 0.5)];

        let scatter = render_scatter(&[&a], &items, &aggregates, &spec).unwrap();
        let doc = well_formed(&scatter);
        let marks = doc.descendants().filter(|n| n.attribute("class") == Some("item")).count();
        prop_assert_eq!(marks, 15);
        prop_assert_eq!(&scatter, &render_scatter(&[&a], &items, &aggregates, &spec).unwrap());

        let pref = &pa;
        let matrix: Vec<f64> = (0..15).flat_map(|i| ks.iter().map(move |&k| pref.item_value(i, k).unwrap())).collect();
        let heat = render_heatmap(&matrix, &default_item_order(&b), &aggregates, &spec, false).unwrap();
        let doc = well_formed(&heat);
        prop_assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("cell")).count(), 75);

        let mut loess_spec = spec.clone();
        loess_spec.plot.grid = 6;
        let overlay = render_loess_overlay(&b, &items, None, &aggregates, &loess_spec).unwrap();
        well_formed(&overlay);

        let lift = render_lift(&[("a", &pa)], &RenderSpec::default()).unwrap();
        well_formed(&lift);
        prop_assert_eq!(&lift, &render_lift(&[("a", &pa)], &RenderSpec::default()).unwrap());
    }
}

#[test]
fn uniformly_better_technique_is_blue() {
    let c = Configuration::from_flat(12, 2, (0..24).map(|v| (v as f64).cos()).collect()).unwrap();
    let spec = RenderSpec { comp: drqa_core::viz::Comparison::Compare, ..Default::default() };
    let diffs: Vec<f64> = (0..12).map(|i| 0.1 + i as f64 * 0.01).collect();
    let svg = render_scatter(&[&c], &diffs, &[], &spec).unwrap();
    let doc = well_formed(&svg);
    for node in doc.descendants().filter(|n| n.attribute("class") == Some("item")) {
        let fill = node.attribute("fill").unwrap();
        let r = u8::from_str_radix(&fill[1..3], 16).unwrap();
        let b = u8::from_str_radix(&fill[5..7], 16).unwrap();
        assert!(b > r, "{fill}");
    }
}
