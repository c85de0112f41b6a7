//! Parabolic Hausdorff content by dyadic covers, and the Frostman witness measure.

use super::cells::{group_by_parent, CellIndex, CellSet};
use crate::geometry::{CellBox, Coords};
use crate::kernels::DiscreteMeasure;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Cover value of a completely filled cell at `level`, given that refinement stops at `finest`.
fn full_value(set: &CellSet, level: i32, s: f64) -> f64 {
    let n = set.grid.dim() as i32;
    let mut v = set.grid.diameter(set.finest_level.min(level)).powf(s);
    for k in set.finest_level + 1..=level {
        v = set.grid.diameter(k).powf(s).min(f64::powi(2.0, n + 2) * v);
    }
    v
}

struct Node {
    value: f64,
    /// `value / Σ children`, at most 1; 1 for leaves.
    factor: f64,
}

/// Bottom-up dyadic program `best(Q) = min(diam(Q)^s, Σ best(children))`. Returns every
/// visited node, and the nodes at the last processed level.
fn dyadic_program(set: &CellSet, s: f64, max_depth: Option<u32>) -> (BTreeMap<CellIndex, Node>, Vec<CellIndex>) {
    let mut all = BTreeMap::new();
    if set.cells.is_empty() {
        return (all, vec![]);
    }
    let mut by_level: BTreeMap<i32, Vec<&CellIndex>> = BTreeMap::new();
    for c in &set.cells {
        by_level.entry(c.level).or_default().push(c);
    }
    let lowest = *by_level.keys().next().unwrap();
    let highest = *by_level.keys().last().unwrap();
    let stop = max_depth.map(|d| lowest + d as i32);
    let mut level = lowest;
    let mut current: BTreeMap<CellIndex, f64> = BTreeMap::new();
    loop {
        for c in by_level.get(&level).into_iter().flatten() {
            let v = full_value(set, level, s);
            current.insert((*c).clone(), v);
            all.insert((*c).clone(), Node { value: v, factor: 1.0 });
        }
        // Cells on opposite sides of the anchor never share an ancestor, so merging is over once
        // every index has collapsed to 0 or -1.
        let settled = level >= highest
            && current
                .keys()
                .all(|c| (-1..=0).contains(&c.time) && c.space.iter().all(|i| (-1..=0).contains(i)));
        let done = settled || stop.is_some_and(|m| level >= m);
        if done {
            return (all, current.into_keys().collect());
        }
        let mut next = BTreeMap::new();
        for (parent, kids) in group_by_parent(&current) {
            let sum: f64 = kids.iter().map(|(_, v)| v).sum();
            let cap = set.grid.diameter(parent.level).powf(s);
            let value = cap.min(sum);
            let factor = if sum > 0.0 { value / sum } else { 1.0 };
            all.insert(parent.clone(), Node { value, factor });
            next.insert(parent, value);
        }
        current = next;
        level += 1;
    }
}

/// Parabolic diameter of the bounding hull of some cells.
fn hull_diameter(set: &CellSet, members: &[usize]) -> f64 {
    let n = set.grid.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let (mut t_lo, mut t_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in members {
        let b = set.grid.cell_box(&set.cells[i]);
        for k in 0..n {
            lo[k] = lo[k].min(b.lo[k]);
            hi[k] = hi[k].max(b.hi[k]);
        }
        t_lo = t_lo.min(b.t_lo);
        t_hi = t_hi.max(b.t_hi);
    }
    let spatial = (0..n).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt();
    spatial.max((t_hi - t_lo).sqrt())
}

/// Groups of cells connected through touching closed boxes.
fn clusters(set: &CellSet) -> Vec<Vec<usize>> {
    let boxes: Vec<_> = set.cells.iter().map(|c| set.grid.cell_box(c)).collect();
    let touch = |a: &CellBox, b: &CellBox| {
        a.t_lo <= b.t_hi && b.t_lo <= a.t_hi && (0..a.dim()).all(|k| a.lo[k] <= b.hi[k] && b.lo[k] <= a.hi[k])
    };
    let mut label: Vec<Option<usize>> = vec![None; boxes.len()];
    let mut groups = Vec::new();
    for start in 0..boxes.len() {
        if label[start].is_some() {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        label[start] = Some(id);
        let mut head = 0;
        while head < members.len() {
            let i = members[head];
            head += 1;
            for j in 0..boxes.len() {
                if label[j].is_none() && touch(&boxes[i], &boxes[j]) {
                    label[j] = Some(id);
                    members.push(j);
                }
            }
        }
        groups.push(members);
    }
    groups
}

/// Best dyadic cover value using merges across at most `max_depth` levels above the finest
/// cells.
pub fn dyadic_cover_value(cells: &CellSet, s: f64, max_depth: u32) -> f64 {
    let (all, top) = dyadic_program(cells, s, Some(max_depth));
    top.iter().map(|c| all[c].value).sum()
}

/// Upper bound for the `s`-dimensional parabolic content of the set.
///
/// Each connected cluster of cells is covered either by its bounding hull or by its best dyadic
/// cover, and the result is compared with the same two options for the whole set.
pub fn hausdorff_content_upper(cells: &CellSet, s: f64, max_depth: u32) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    let all: Vec<usize> = (0..cells.cells.len()).collect();
    let whole = dyadic_cover_value(cells, s, max_depth).min(hull_diameter(cells, &all).powf(s));
    let groups = clusters(cells);
    if groups.len() == 1 {
        return whole;
    }
    let by_cluster: f64 = groups
        .iter()
        .map(|members| {
            let part = CellSet {
                grid: cells.grid.clone(),
                cells: members.iter().map(|&i| cells.cells[i].clone()).collect(),
                finest_level: cells.finest_level,
            };
            dyadic_cover_value(&part, s, max_depth).min(hull_diameter(cells, members).powf(s))
        })
        .sum();
    whole.min(by_cluster)
}

/// Total Frostman mass and its witness measure (atoms at leaf-cell centers).
///
/// Masses start at `diam^s` per finest cell and are scaled down proportionally wherever an
/// ancestor's total would exceed its own `diam^s`. The total equals the optimal dyadic cover
/// value over the full tree.
pub fn frostman_lower_bound(cells: &CellSet, s: f64) -> (f64, DiscreteMeasure) {
    let (all, top) = dyadic_program(cells, s, None);
    let total = top.iter().map(|c| all[c].value).sum();
    let atoms = cells
        .cells
        .iter()
        .map(|leaf| {
            let mut mass = all[leaf].value;
            let mut node = leaf.parent();
            while let Some(entry) = all.get(&node) {
                mass *= entry.factor;
                node = node.parent();
            }
            (cells.grid.cell_box(leaf).center(), mass)
        })
        .collect();
    (total, DiscreteMeasure { atoms })
}

/// Constant `C` with `content ≥ dyadic content / C` when dyadic cells are available at every
/// scale: a set of parabolic diameter `d` meets at most `2^{n+1}` dyadic cells of side in
/// `[d, 2d)`, each of diameter below `2√n·d`.
pub fn dimensional_constant(n: usize, s: f64) -> f64 {
    f64::powi(2.0, n as i32 + 1) * (2.0 * (n as f64).sqrt()).powf(s)
}

/// Spatial cube of side `side` centered at `center`, over times `[t_top − (a·side)², t_top]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub center: Coords,
    pub side: f64,
    pub t_top: f64,
}

/// Tile the slab with `a^{−n}` closed cells of spatial side `a·side` and time side `(a·side)²`,
/// where `a = 2^{−m}`.
pub fn slab_subdivision(slab: &Slab, m: u32) -> Vec<CellBox> {
    let n = slab.center.len();
    let per_axis = 1usize << m;
    let small = slab.side / per_axis as f64;
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let lo: Coords = (0..n)
                .map(|k| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    slab.center[k] - 0.5 * slab.side + small * i as f64
                })
                .collect();
            let hi = lo.iter().map(|v| v + small).collect();
            CellBox {
                lo,
                hi,
                t_lo: slab.t_top - small * small,
                t_hi: slab.t_top,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::cells::{rasterize_dyadic, DyadicGrid};
    use super::*;
    use crate::geometry::{CubeKind, Domain, ParabolicCube, SpacetimePoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube_set(center: &[f64], t: f64, r: f64, levels: i32) -> CellSet {
        let c = SpacetimePoint::new(center, t);
        let target = Domain::Cube(ParabolicCube::new(c.clone(), r, CubeKind::Full));
        let grid = DyadicGrid {
            anchor: c.clone(),
            h: r / f64::powi(2.0, levels),
        };
        let bounds = CellBox {
            lo: center.iter().map(|v| v - r).collect(),
            hi: center.iter().map(|v| v + r).collect(),
            t_lo: t - r * r,
            t_hi: t + r * r,
        };
        rasterize_dyadic(&target, &grid, &bounds, levels, 0)
    }

    #[test]
    fn empty_set_has_zero_content_and_mass() {
        let grid = DyadicGrid {
            anchor: SpacetimePoint::origin(1),
            h: 1.0,
        };
        let set = CellSet::empty(grid, 0);
        assert_eq!(hausdorff_content_upper(&set, 2.0, 10), 0.0);
        assert_eq!(frostman_lower_bound(&set, 2.0).0, 0.0);
    }

    #[test]
    fn single_cell_mass_is_its_diameter_power() {
        let grid = DyadicGrid {
            anchor: SpacetimePoint::origin(2),
            h: 0.5,
        };
        let set = CellSet {
            grid,
            cells: vec![CellIndex {
                level: 0,
                space: smallvec::smallvec![0, 0],
                time: 0,
            }],
            finest_level: 0,
        };
        let (mass, mu) = frostman_lower_bound(&set, 3.0);
        assert!((mass - (2f64.sqrt() * 0.5).powi(3)).abs() < 1e-15);
        assert_eq!(mu.atoms.len(), 1);
    }

    #[test]
    fn single_cube_content_is_at_most_its_own_cover() {
        for s in [0.5, 1.0, 2.0, 3.0] {
            let set = cube_set(&[0.0], 0.0, 1.0, 4);
            let c = hausdorff_content_upper(&set, s, 20);
            assert!(c <= 2f64.powf(s) * (1.0 + 1e-12), "s={s}: {c}");
        }
    }

    #[test]
    fn two_cubes_are_subadditive() {
        let a = cube_set(&[0.0], 0.0, 1.0, 3);
        let mut both = a.clone();
        let b = cube_set(&[5.0], 0.0, 1.0, 3);
        let shift = (5.0 / a.grid.h).round() as i64;
        both.cells.extend(b.cells.iter().map(|c| {
            let mut c = c.clone();
            c.space[0] += shift >> c.level;
            c
        }));
        both.cells.sort();
        for s in [1.0, 2.0, 3.0] {
            let sum = hausdorff_content_upper(&a, s, 20) + hausdorff_content_upper(&b, s, 20);
            assert!(hausdorff_content_upper(&both, s, 20) <= sum * (1.0 + 1e-12));
        }
    }

    #[test]
    fn content_scales_like_radius_power() {
        for s in [1.5, 2.0, 3.0] {
            let unit = hausdorff_content_upper(&cube_set(&[0.0], 0.0, 1.0, 4), s, 20);
            let big = hausdorff_content_upper(&cube_set(&[0.0], 0.0, 4.0, 4), s, 20);
            let ratio = big / unit / 4f64.powf(s);
            assert!((0.8..=1.2).contains(&ratio), "s={s}: {ratio}");
        }
    }

    #[test]
    fn unit_cube_mass_against_volume() {
        // at s = n + 2 the per-cell cap is proportional to volume
        let set = cube_set(&[0.0], 0.0, 1.0, 4);
        let (mass, _) = frostman_lower_bound(&set, 3.0);
        let volume = 2.0 * 2.0;
        let ratio = mass / volume;
        assert!((ratio - 1.0).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn subdivision_counts_and_tiles() {
        let slab = Slab {
            center: smallvec::smallvec![0.0],
            side: 1.0,
            t_top: 0.0,
        };
        assert_eq!(slab_subdivision(&slab, 1).len(), 2);
        let slab2 = Slab {
            center: smallvec::smallvec![0.0, 0.0],
            side: 2.0,
            t_top: 1.0,
        };
        let cubes = slab_subdivision(&slab2, 2);
        assert_eq!(cubes.len(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let small = 0.5;
        for _ in 0..2000 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let t = 1.0 - rng.random_range(0.0..small * small);
            let hits = cubes
                .iter()
                .filter(|c| (0..2).all(|k| x[k] >= c.lo[k] && x[k] <= c.hi[k]) && t >= c.t_lo && t <= c.t_hi)
                .count();
            assert_eq!(hits, 1);
        }
    }

    proptest! {
        #[test]
        fn frostman_mass_matches_cover_and_respects_caps(
            seed in 0u64..500, s in 0.5f64..3.5
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let grid = DyadicGrid { anchor: SpacetimePoint::origin(1), h: 0.125 };
            let mut cells: Vec<CellIndex> = (0..rng.random_range(1..40))
                .map(|_| CellIndex {
                    level: 0,
                    space: smallvec::smallvec![rng.random_range(-16..16)],
                    time: rng.random_range(-64..64),
                })
                .collect();
            cells.sort();
            cells.dedup();
            let set = CellSet { grid: grid.clone(), cells, finest_level: 0 };
            let (mass, mu) = frostman_lower_bound(&set, s);
            let dyadic = dyadic_cover_value(&set, s, 64);
            let cover = hausdorff_content_upper(&set, s, 64);
            prop_assert!((mass - dyadic).abs() <= 1e-9 * dyadic.max(1.0));
            prop_assert!(cover <= dyadic * (1.0 + 1e-12));
            prop_assert!((mu.total_mass() - mass).abs() <= 1e-9 * mass.max(1.0));
            prop_assert!(cover >= mass / dimensional_constant(1, s));
            // every dyadic ancestor carries at most its own cap
            let mut totals: BTreeMap<CellIndex, f64> = BTreeMap::new();
            for (leaf, (_, m)) in set.cells.iter().zip(&mu.atoms) {
                let mut node = leaf.clone();
                for _ in 0..8 {
                    *totals.entry(node.clone()).or_default() += m;
                    node = node.parent();
                }
            }
            for (node, m) in totals {
                prop_assert!(m <= grid.diameter(node.level).powf(s) * (1.0 + 1e-9));
            }
        }
    }
}
