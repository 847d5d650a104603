//! Fairness-aware training-data transformations: relabelling, reweighting,
//! and the two sampling schemes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core::{partition_groups, BinaryLabels, Dataset, GroupPartition, SampleWeights};
use crate::error::{Error, Result};
use crate::estimators::{fit_logistic, Classifier, LogisticConfig};

/// A trainable scoring model used to rank observations by P(y=1 | x).
pub trait Ranker {
    /// Fits on the dataset and returns one score per observation.
    fn fit_scores(&self, d: &Dataset) -> Result<Vec<f64>>;

    /// Identifier recorded in the relabel plan.
    fn id(&self) -> &'static str;
}

/// Logistic-regression ranker trained on the full dataset, protected
/// attribute included.
#[derive(Debug, Clone, Default)]
pub struct LogisticRanker {
    pub config: LogisticConfig,
}

impl Ranker for LogisticRanker {
    fn fit_scores(&self, d: &Dataset) -> Result<Vec<f64>> {
        let x_with_s = d.x.append_column("__protected__", &d.s.as_f64())?;
        let model = fit_logistic(&x_with_s, &d.y, None, &self.config)?;
        Ok(model.predict_proba(&x_with_s)?.values().to_vec())
    }

    fn id(&self) -> &'static str {
        "logistic"
    }
}

/// Which observations a relabelling pass flips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelPlan {
    /// Indices moved from (disadvantaged, negative) to positive.
    pub promote: Vec<usize>,
    /// Indices moved from (advantaged, positive) to negative.
    pub demote: Vec<usize>,
    pub ranker_id: String,
}

fn require_cells_and_labels(part: &GroupPartition) -> Result<()> {
    if part.disadvantaged_count() == 0 || part.advantaged_count() == 0 {
        return Err(Error::Validation(
            "both protected groups must be present".into(),
        ));
    }
    let pos = part.dis_pos.len() + part.adv_pos.len();
    if pos == 0 || pos == part.total() {
        return Err(Error::Validation("both label values must be present".into()));
    }
    Ok(())
}

/// Relabels the training targets so the groups' positive rates equalize: the
/// M highest-scored disadvantaged negatives are promoted and the M
/// lowest-scored advantaged positives demoted, with M the integer minimizing
/// the post-relabel mean difference (closed form `round(n_d * n_a * md / n)`,
/// zero when md <= 0).
pub fn relabel(d: &Dataset, ranker: &dyn Ranker) -> Result<(BinaryLabels, RelabelPlan)> {
    let part = partition_groups(&d.y, &d.s)?;
    require_cells_and_labels(&part)?;

    let n_dis = part.disadvantaged_count() as f64;
    let n_adv = part.advantaged_count() as f64;
    let n = n_dis + n_adv;
    let md = part.adv_pos.len() as f64 / n_adv - part.dis_pos.len() as f64 / n_dis;
    let m = if md > 0.0 {
        (n_dis * n_adv * md / n).round() as usize
    } else {
        0
    };

    if m > part.dis_neg.len() {
        return Err(Error::InfeasibleRelabel {
            cell: "(d, y-)",
            needed: m,
            available: part.dis_neg.len(),
        });
    }
    if m > part.adv_pos.len() {
        return Err(Error::InfeasibleRelabel {
            cell: "(a, y+)",
            needed: m,
            available: part.adv_pos.len(),
        });
    }

    let scores = ranker.fit_scores(d)?;
    if scores.len() != d.n_rows() {
        return Err(Error::LengthMismatch {
            left: "dataset",
            left_len: d.n_rows(),
            right: "ranker scores",
            right_len: scores.len(),
        });
    }

    // Highest-scored disadvantaged negatives; score ties break to the lower
    // observation index.
    let mut promote: Vec<usize> = part.dis_neg.clone();
    promote.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    promote.truncate(m);
    promote.sort_unstable();

    // Lowest-scored advantaged positives.
    let mut demote: Vec<usize> = part.adv_pos.clone();
    demote.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    demote.truncate(m);
    demote.sort_unstable();

    let mut new_y = d.y.values().to_vec();
    for &i in &promote {
        new_y[i] = 1;
    }
    for &i in &demote {
        new_y[i] = 0;
    }

    Ok((
        BinaryLabels::new(new_y)?,
        RelabelPlan {
            promote,
            demote,
            ranker_id: ranker.id().to_string(),
        },
    ))
}

const CELL_NAMES: [&str; 4] = ["(d, y+)", "(d, y-)", "(a, y+)", "(a, y-)"];

/// Expected-over-observed frequency weights per (group, label) cell:
/// `w(s, y) = n_s * n_y / (n * n_{s,y})`. The weighted data is then
/// group-label independent.
pub fn reweigh(
    y: &BinaryLabels,
    s: &crate::core::ProtectedAttribute,
) -> Result<SampleWeights> {
    let part = partition_groups(y, s)?;
    let cells = [&part.dis_pos, &part.dis_neg, &part.adv_pos, &part.adv_neg];
    for (cell, name) in cells.iter().zip(CELL_NAMES) {
        if cell.is_empty() {
            return Err(Error::UndefinedWeight(name));
        }
    }
    let n = part.total() as f64;
    let n_dis = part.disadvantaged_count() as f64;
    let n_adv = n - n_dis;
    let n_pos = (part.dis_pos.len() + part.adv_pos.len()) as f64;
    let n_neg = n - n_pos;

    let mut weights = vec![0.0; part.total()];
    let cell_weight = |n_group: f64, n_label: f64, n_cell: usize| {
        n_group * n_label / (n * n_cell as f64)
    };
    for &i in &part.dis_pos {
        weights[i] = cell_weight(n_dis, n_pos, part.dis_pos.len());
    }
    for &i in &part.dis_neg {
        weights[i] = cell_weight(n_dis, n_neg, part.dis_neg.len());
    }
    for &i in &part.adv_pos {
        weights[i] = cell_weight(n_adv, n_pos, part.adv_pos.len());
    }
    for &i in &part.adv_neg {
        weights[i] = cell_weight(n_adv, n_neg, part.adv_neg.len());
    }
    SampleWeights::new(weights)
}

/// Per-cell observation counts that make labels and groups independent:
/// `round(n_s * n_y / n)` per cell, with any rounding drift repaid one unit
/// at a time against the currently largest cell.
fn target_cell_counts(part: &GroupPartition) -> Result<[usize; 4]> {
    let sizes = part.cell_sizes();
    for (size, name) in sizes.iter().zip(CELL_NAMES) {
        if *size == 0 {
            return Err(Error::Validation(format!(
                "sampling requires all four (group, label) cells non-empty; {name} is empty"
            )));
        }
    }
    let n = part.total() as f64;
    let n_dis = part.disadvantaged_count() as f64;
    let n_adv = n - n_dis;
    let n_pos = (part.dis_pos.len() + part.adv_pos.len()) as f64;
    let n_neg = n - n_pos;
    let expected = [
        n_dis * n_pos / n,
        n_dis * n_neg / n,
        n_adv * n_pos / n,
        n_adv * n_neg / n,
    ];
    let mut targets: [usize; 4] = [0; 4];
    for (t, e) in targets.iter_mut().zip(expected) {
        *t = e.round() as usize; // round half away from zero
    }
    let mut total: i64 = targets.iter().map(|&t| t as i64).sum();
    let want = part.total() as i64;
    while total != want {
        let step: i64 = if total < want { 1 } else { -1 };
        // Largest cell first; ties resolve in fixed cell order.
        let pick = (0..4)
            .max_by(|&a, &b| targets[a].cmp(&targets[b]).then(b.cmp(&a)))
            .unwrap();
        targets[pick] = (targets[pick] as i64 + step) as usize;
        total += step;
    }
    Ok(targets)
}

fn assemble(d: &Dataset, chosen: [Vec<usize>; 4]) -> Dataset {
    let mut rows = Vec::new();
    for mut cell in chosen {
        cell.sort_unstable();
        rows.extend(cell);
    }
    d.select_rows(&rows)
}

/// Uniformly resamples each (group, label) cell to its expected size: with
/// replacement when the cell grows, without when it shrinks. Deterministic
/// given the seed.
pub fn uniform_sample(d: &Dataset, rng_seed: u64) -> Result<Dataset> {
    let part = partition_groups(&d.y, &d.s)?;
    let targets = target_cell_counts(&part)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let cells = [&part.dis_pos, &part.dis_neg, &part.adv_pos, &part.adv_neg];
    let mut chosen: [Vec<usize>; 4] = Default::default();
    for (slot, (cell, &target)) in chosen.iter_mut().zip(cells.iter().zip(&targets)) {
        *slot = match target.cmp(&cell.len()) {
            std::cmp::Ordering::Equal => cell.to_vec(),
            std::cmp::Ordering::Less => {
                let picked = rand::seq::index::sample(&mut rng, cell.len(), target);
                picked.into_iter().map(|k| cell[k]).collect()
            }
            std::cmp::Ordering::Greater => (0..target)
                .map(|_| cell[rng.gen_range(0..cell.len())])
                .collect(),
        };
    }
    Ok(assemble(d, chosen))
}

/// Resamples each cell to the same target sizes as [`uniform_sample`], but
/// chooses members by ranker score: growing cells duplicate their top-ranked
/// rows, shrinking cells drop their top-ranked rows. Deterministic given the
/// data and ranker; the seed parameter is accepted for interface parity and
/// unused.
pub fn preferential_sample(d: &Dataset, ranker: &dyn Ranker, _rng_seed: u64) -> Result<Dataset> {
    let part = partition_groups(&d.y, &d.s)?;
    let targets = target_cell_counts(&part)?;
    let scores = ranker.fit_scores(d)?;

    let cells = [&part.dis_pos, &part.dis_neg, &part.adv_pos, &part.adv_neg];
    let mut chosen: [Vec<usize>; 4] = Default::default();
    for ((slot, (cell, &target)), name) in chosen
        .iter_mut()
        .zip(cells.iter().zip(&targets))
        .zip(CELL_NAMES)
    {
        let mut ranked: Vec<usize> = cell.to_vec();
        ranked.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        *slot = match target.cmp(&cell.len()) {
            std::cmp::Ordering::Equal => ranked,
            std::cmp::Ordering::Greater => {
                let extra = target - cell.len();
                let mut out = ranked.clone();
                for c in 0..extra {
                    out.push(ranked[c % ranked.len()]);
                }
                out
            }
            std::cmp::Ordering::Less => {
                let removals = cell.len() - target;
                if removals > cell.len() {
                    return Err(Error::InfeasibleSample {
                        cell: name,
                        removals,
                        available: cell.len(),
                    });
                }
                ranked.split_off(removals)
            }
        };
    }
    Ok(assemble(d, chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{FeatureMatrix, ProtectedAttribute};
    use crate::metrics::mean_difference;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn toy_dataset(y: &[u8], s: &[u8], feature: &[f64]) -> Dataset {
        let x = FeatureMatrix::from_rows(&feature.iter().map(|&v| vec![v]).collect::<Vec<_>>())
            .unwrap();
        Dataset::new(
            x,
            BinaryLabels::new(y.to_vec()).unwrap(),
            ProtectedAttribute::new(s.to_vec(), "s").unwrap(),
        )
        .unwrap()
    }

    /// Ranker with externally fixed scores, for deterministic tests.
    struct FixedRanker(Vec<f64>);

    impl Ranker for FixedRanker {
        fn fit_scores(&self, _d: &Dataset) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }

        fn id(&self) -> &'static str {
            "fixed"
        }
    }

    #[test]
    fn relabel_noop_when_rates_equal() {
        let d = toy_dataset(
            &[1, 0, 1, 0],
            &[0, 0, 1, 1],
            &[0.1, 0.2, 0.3, 0.4],
        );
        let (new_y, plan) = relabel(&d, &LogisticRanker::default()).unwrap();
        assert_eq!(new_y.values(), d.y.values());
        assert!(plan.promote.is_empty() && plan.demote.is_empty());
    }

    #[test]
    fn relabel_four_versus_four() {
        // Groups of 4; positives d:1, a:3. md = 0.5, M = round(4*4*0.5/8) = 1.
        let y = [1, 0, 0, 0, 1, 1, 1, 0];
        let s = [1, 1, 1, 1, 0, 0, 0, 0];
        let scores = vec![0.9, 0.8, 0.3, 0.1, 0.95, 0.2, 0.6, 0.4];
        let d = toy_dataset(&y, &s, &[0.0; 8]);
        let (new_y, plan) = relabel(&d, &FixedRanker(scores)).unwrap();
        // Highest-scored disadvantaged negative is index 1; lowest-scored
        // advantaged positive is index 5.
        assert_eq!(plan.promote, vec![1]);
        assert_eq!(plan.demote, vec![5]);
        assert_eq!(new_y.values(), &[1, 1, 0, 0, 1, 0, 1, 0]);
        let snew = ProtectedAttribute::new(s.to_vec(), "s").unwrap();
        assert_abs_diff_eq!(mean_difference(&new_y, &snew).unwrap().value, 0.0);
    }

    #[test]
    fn relabel_m_matches_exhaustive_search() {
        // For every feasible flip count, |md| after flipping m pairs is
        // |md - m*n/(n_d*n_a)|; the closed form must pick the minimizer.
        for (n_dis_pos, n_dis, n_adv_pos, n_adv) in
            [(1usize, 5usize, 4usize, 5usize), (2, 7, 6, 9), (0, 3, 5, 8), (3, 10, 9, 12)]
        {
            let mut y = Vec::new();
            let mut s = Vec::new();
            for i in 0..n_dis {
                y.push(u8::from(i < n_dis_pos));
                s.push(1);
            }
            for i in 0..n_adv {
                y.push(u8::from(i < n_adv_pos));
                s.push(0);
            }
            let scores: Vec<f64> = (0..y.len()).map(|i| i as f64 * 0.01).collect();
            let d = toy_dataset(&y, &s, &vec![0.0; y.len()]);
            let (_, plan) = relabel(&d, &FixedRanker(scores)).unwrap();
            let chosen_m = plan.promote.len();

            let n = (n_dis + n_adv) as f64;
            let md = n_adv_pos as f64 / n_adv as f64 - n_dis_pos as f64 / n_dis as f64;
            let residual = |m: usize| (md - m as f64 * n / (n_dis as f64 * n_adv as f64)).abs();
            let max_m = (n_dis - n_dis_pos).min(n_adv_pos);
            let best = (0..=max_m)
                .map(residual)
                .min_by(|a, b| a.partial_cmp(b).unwrap())
                .unwrap();
            // Exact-half rounding can tie two counts; the achieved residual
            // is what the contract pins down.
            assert!(
                (residual(chosen_m) - best).abs() < 1e-12,
                "cells d:{n_dis_pos}/{n_dis} a:{n_adv_pos}/{n_adv}: m={chosen_m} residual {} vs best {}",
                residual(chosen_m),
                best
            );
        }
    }

    #[test]
    fn reweigh_proportional_cells_are_unit_weight() {
        let y = [1, 0, 1, 0, 1, 0, 1, 0];
        let s = [0, 0, 1, 1, 0, 0, 1, 1];
        let w = reweigh(
            &BinaryLabels::new(y.to_vec()).unwrap(),
            &ProtectedAttribute::new(s.to_vec(), "s").unwrap(),
        )
        .unwrap();
        for &v in w.values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reweigh_hand_computed_cells() {
        // n = 10, n_d = 5, positives d:1, a:4.
        let y = [1, 0, 0, 0, 0, 1, 1, 1, 1, 0];
        let s = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let w = reweigh(
            &BinaryLabels::new(y.to_vec()).unwrap(),
            &ProtectedAttribute::new(s.to_vec(), "s").unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(w.values()[0], 2.5, epsilon = 1e-12); // (5*5)/(10*1)
        assert_abs_diff_eq!(w.values()[1], 0.625, epsilon = 1e-12); // (5*5)/(10*4)
        assert_abs_diff_eq!(w.values()[5], 0.625, epsilon = 1e-12); // (5*5)/(10*4)
        assert_abs_diff_eq!(w.values()[9], 2.5, epsilon = 1e-12); // (5*5)/(10*1)
        assert_abs_diff_eq!(w.sum(), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn reweigh_requires_all_cells() {
        let y = [1, 1, 0];
        let s = [1, 0, 0];
        let err = reweigh(
            &BinaryLabels::new(y.to_vec()).unwrap(),
            &ProtectedAttribute::new(s.to_vec(), "s").unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UndefinedWeight("(d, y-)")));
    }

    #[test]
    fn uniform_sample_keeps_independent_dataset_counts() {
        let y = [1, 0, 1, 0, 1, 0, 1, 0];
        let s = [0, 0, 1, 1, 0, 0, 1, 1];
        let d = toy_dataset(&y, &s, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let out = uniform_sample(&d, 5).unwrap();
        let part = partition_groups(&out.y, &out.s).unwrap();
        assert_eq!(part.cell_sizes(), [2, 2, 2, 2]);
        assert_eq!(out.n_rows(), 8);
    }

    #[test]
    fn uniform_sample_hits_expected_counts_on_biased_data() {
        // d: 1 positive of 4; a: 3 positives of 4; n=8, n_pos=4.
        // Expected cells: d+ = 4*4/8 = 2, d- = 2, a+ = 2, a- = 2.
        let y = [1, 0, 0, 0, 1, 1, 1, 0];
        let s = [1, 1, 1, 1, 0, 0, 0, 0];
        let d = toy_dataset(&y, &s, &[0.0; 8]);
        let out = uniform_sample(&d, 11).unwrap();
        let part = partition_groups(&out.y, &out.s).unwrap();
        assert_eq!(part.cell_sizes(), [2, 2, 2, 2]);
        let md = mean_difference(&out.y, &out.s).unwrap().value;
        assert_abs_diff_eq!(md, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_sample_is_seed_deterministic() {
        let y = [1, 0, 0, 0, 1, 1, 1, 0, 1, 0];
        let s = [1, 1, 1, 1, 0, 0, 0, 0, 1, 0];
        let d = toy_dataset(&y, &s, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let a = uniform_sample(&d, 42).unwrap();
        let b = uniform_sample(&d, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn preferential_sample_duplicates_top_ranked_grower() {
        // 8 rows; (d,+) holds one row and must grow to 2: its only member
        // duplicates. (a,+) must shrink from 3 to 2: its top-scored member
        // is removed.
        let y = [1, 0, 0, 0, 1, 1, 1, 0];
        let s = [1, 1, 1, 1, 0, 0, 0, 0];
        let scores = vec![0.9, 0.8, 0.3, 0.1, 0.95, 0.2, 0.6, 0.4];
        let d = toy_dataset(&y, &s, &[10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0]);
        let out = preferential_sample(&d, &FixedRanker(scores), 0).unwrap();
        let part = partition_groups(&out.y, &out.s).unwrap();
        assert_eq!(part.cell_sizes(), [2, 2, 2, 2]);
        let col: Vec<f64> = out.x.values().column(0).iter().copied().collect();
        // Row 0 (feature 10.0) is the lone (d,+) member: present twice.
        assert_eq!(col.iter().filter(|&&v| v == 10.0).count(), 2);
        // (a,+) = {4, 5, 6} with scores {0.95, 0.2, 0.6}: top-ranked index 4
        // (feature 14.0) is removed, 5 and 6 survive.
        assert_eq!(col.iter().filter(|&&v| v == 14.0).count(), 0);
        assert_eq!(col.iter().filter(|&&v| v == 15.0).count(), 1);
        assert_eq!(col.iter().filter(|&&v| v == 16.0).count(), 1);
        // (d,-) = {1, 2, 3} with scores {0.8, 0.3, 0.1}: top-ranked index 1
        // (feature 11.0) is removed.
        assert_eq!(col.iter().filter(|&&v| v == 11.0).count(), 0);
    }

    #[test]
    fn preferential_sample_noop_when_counts_match() {
        let y = [1, 0, 1, 0];
        let s = [0, 0, 1, 1];
        let d = toy_dataset(&y, &s, &[0.5, 1.5, 2.5, 3.5]);
        let out = preferential_sample(&d, &FixedRanker(vec![0.4, 0.3, 0.2, 0.1]), 7).unwrap();
        // Same rows up to order.
        let mut got: Vec<f64> = out.x.values().column(0).iter().copied().collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, vec![0.5, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn preferential_matches_uniform_targets() {
        let y = [1, 0, 0, 0, 1, 1, 1, 0, 1, 1];
        let s = [1, 1, 1, 1, 0, 0, 0, 0, 0, 1];
        let d = toy_dataset(&y, &s, &[0.0; 10]);
        let scores: Vec<f64> = (0..10).map(|i| (i as f64) / 10.0).collect();
        let uni = uniform_sample(&d, 3).unwrap();
        let pref = preferential_sample(&d, &FixedRanker(scores), 3).unwrap();
        let cu = partition_groups(&uni.y, &uni.s).unwrap().cell_sizes();
        let cp = partition_groups(&pref.y, &pref.s).unwrap().cell_sizes();
        assert_eq!(cu, cp);
    }

    fn arbitrary_labels() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        proptest::collection::vec((0u8..2, 0u8..2), 8..120).prop_map(|pairs| {
            (
                pairs.iter().map(|p| p.0).collect(),
                pairs.iter().map(|p| p.1).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn reweigh_mass_and_rate_invariants((y, s) in arbitrary_labels()) {
            let yl = BinaryLabels::new(y.clone()).unwrap();
            let sl = ProtectedAttribute::new(s.clone(), "s").unwrap();
            if let Ok(w) = reweigh(&yl, &sl) {
                prop_assert!((w.sum() - y.len() as f64).abs() < 1e-9);
                let rate = |group: u8| {
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for i in 0..y.len() {
                        if s[i] == group {
                            num += w.values()[i] * y[i] as f64;
                            den += w.values()[i];
                        }
                    }
                    num / den
                };
                prop_assert!((rate(0) - rate(1)).abs() < 1e-9);
                // Under-represented combinations get upweighted: when the
                // data discriminates against the disadvantaged group, the
                // (d,+) and (a,-) cells carry weight >= 1 and the other two
                // cells weight <= 1.
                if mean_difference(&yl, &sl).unwrap().value > 0.0 {
                    for i in 0..y.len() {
                        let expect_heavy = (s[i] == 1) == (y[i] == 1);
                        if expect_heavy {
                            prop_assert!(w.values()[i] >= 1.0 - 1e-12);
                        } else {
                            prop_assert!(w.values()[i] <= 1.0 + 1e-12);
                        }
                    }
                }
            }
        }

        #[test]
        fn relabel_flips_exactly_two_m_labels((y, s) in arbitrary_labels()) {
            let d = toy_dataset(&y, &s, &vec![0.0; y.len()]);
            let scores: Vec<f64> = (0..y.len()).map(|i| (i % 7) as f64).collect();
            if let Ok((new_y, plan)) = relabel(&d, &FixedRanker(scores.clone())) {
                let m = plan.promote.len();
                prop_assert_eq!(plan.demote.len(), m);
                let flipped = new_y
                    .values()
                    .iter()
                    .zip(&y)
                    .filter(|(a, b)| a != b)
                    .count();
                prop_assert_eq!(flipped, 2 * m);
                // Promoted rows are the top of the (d, y-) score order and
                // demoted rows the bottom of (a, y+): every chosen row
                // outranks (or, on ties, out-indexes) every unchosen one.
                let part = partition_groups(
                    &BinaryLabels::new(y.clone()).unwrap(),
                    &ProtectedAttribute::new(s.clone(), "s").unwrap(),
                )
                .unwrap();
                let outranks = |chosen: usize, skipped: usize| {
                    scores[chosen] > scores[skipped]
                        || (scores[chosen] == scores[skipped] && chosen < skipped)
                };
                for &p in &plan.promote {
                    for q in &part.dis_neg {
                        if !plan.promote.contains(q) {
                            prop_assert!(outranks(p, *q), "promoted {} vs skipped {}", p, q);
                        }
                    }
                }
                let underranks = |chosen: usize, skipped: usize| {
                    scores[chosen] < scores[skipped]
                        || (scores[chosen] == scores[skipped] && chosen < skipped)
                };
                for &d in &plan.demote {
                    for q in &part.adv_pos {
                        if !plan.demote.contains(q) {
                            prop_assert!(underranks(d, *q), "demoted {} vs skipped {}", d, q);
                        }
                    }
                }
                // Post-relabel disparity falls below one observation per
                // group. Relabelling is directional (promote disadvantaged,
                // demote advantaged), so the bound applies when the input
                // discriminates against the disadvantaged group.
                let sl = ProtectedAttribute::new(s.clone(), "s").unwrap();
                let yl = BinaryLabels::new(y.clone()).unwrap();
                if mean_difference(&yl, &sl).unwrap().value > 0.0 {
                    let part = partition_groups(&new_y, &sl).unwrap();
                    let bound =
                        1.0 / part.disadvantaged_count().min(part.advantaged_count()) as f64;
                    let md = mean_difference(&new_y, &sl).unwrap().value;
                    prop_assert!(md.abs() <= bound + 1e-12, "md {} bound {}", md, bound);
                }
            }
        }

        #[test]
        fn sampling_outputs_have_low_md((y, s) in arbitrary_labels(), seed in 0u64..500) {
            let d = toy_dataset(&y, &s, &vec![0.0; y.len()]);
            if let Ok(out) = uniform_sample(&d, seed) {
                prop_assert_eq!(out.n_rows(), y.len());
                let part = partition_groups(&out.y, &out.s).unwrap();
                let min_cell = part.cell_sizes().iter().copied().min().unwrap();
                if min_cell > 0 {
                    let md = mean_difference(&out.y, &out.s).unwrap().value;
                    prop_assert!(md.abs() <= 1.0 / min_cell as f64 + 1e-12,
                        "md {} exceeds 1/{}", md, min_cell);
                }
                // Determinism.
                let again = uniform_sample(&d, seed).unwrap();
                prop_assert_eq!(out, again);
            }
        }

        #[test]
        fn preferential_sampling_is_deterministic((y, s) in arbitrary_labels()) {
            let d = toy_dataset(&y, &s, &vec![0.0; y.len()]);
            let scores: Vec<f64> = (0..y.len()).map(|i| ((i * 13) % 11) as f64).collect();
            let r = FixedRanker(scores);
            if let Ok(out) = preferential_sample(&d, &r, 1) {
                let again = preferential_sample(&d, &r, 2).unwrap();
                prop_assert_eq!(&out, &again);
                let part = partition_groups(&out.y, &out.s).unwrap();
                let min_cell = part.cell_sizes().iter().copied().min().unwrap();
                if min_cell > 0 {
                    let md = mean_difference(&out.y, &out.s).unwrap().value;
                    prop_assert!(md.abs() <= 1.0 / min_cell as f64 + 1e-12);
                }
            }
        }
    }
}
