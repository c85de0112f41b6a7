use caloric::capacity::{backward_content, capacity_slab_pair, ContentCheckOptions};
use caloric::geometry::{DomainFile, SpacetimePoint};
use caloric::kernels::ScaledHeatKernel;
use caloric::scenarios::bundled_domains;

#[test]
fn bundled_domains_survive_the_file_format() {
    for b in bundled_domains() {
        let text = serde_json::json!({"version": 1, "domain": b.domain}).to_string();
        assert_eq!(DomainFile::parse(&text).unwrap(), b.domain, "{}", b.name);
    }
}

#[test]
fn lateral_content_bounds_are_ordered() {
    let cylinder = &bundled_domains()[0].domain;
    let p = SpacetimePoint::new(&[1.0], 2.0);
    let est = backward_content(cylinder, &p, 0.2, 2.0, &ContentCheckOptions::default());
    assert!(est.frostman_mass > 0.0);
    assert!(est.content_lower <= est.cover_upper + 1e-12, "{est:?}");
    assert!(est.frostman_mass <= est.cover_upper * (1.0 + 1e-9), "{est:?}");
}

#[test]
fn exterior_part_of_a_slab_has_smaller_capacity() {
    let cylinder = &bundled_domains()[0].domain;
    let k = ScaledHeatKernel { m: 1.0, n: 1 };
    let (part, whole) = capacity_slab_pair(cylinder, &k, &SpacetimePoint::new(&[1.0], 2.0), 0.3, 0.5, 4).unwrap();
    assert!(part > 0.0 && part < whole, "{part} vs {whole}");
}
