use super::layout::Layout;

/// Per UE, the indices of BSs within `serving_radius_m` horizontally, in BS
/// order. With `fallback` an uncovered UE gets its nearest BS; without it the
/// set stays empty.
pub fn assign_serving_sets(layout: &Layout, serving_radius_m: f64, fallback: bool) -> Vec<Vec<usize>> {
    layout
        .ue
        .iter()
        .map(|u| {
            let mut set: Vec<usize> = layout
                .bs
                .iter()
                .enumerate()
                .filter(|(_, b)| b.distance(u) <= serving_radius_m)
                .map(|(i, _)| i)
                .collect();
            if set.is_empty() && fallback {
                let nearest = layout
                    .bs
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.distance(u).total_cmp(&b.1.distance(u)))
                    .map(|(i, _)| i);
                set.extend(nearest);
            }
            set
        })
        .collect()
}
