use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grid::LabelMap;

/// Largest `k` handled by exhaustive permutation search.
pub const MAX_PERMUTATION_K: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct MatchReport {
    /// `permutation[e]` is the truth label assigned to estimated label `e`
    /// (`None` for an estimated label left unmatched).
    pub permutation: Vec<Option<u32>>,
    pub accuracy: f64,
    pub error_rate: f64,
    pub mismatched_count: usize,
    pub total: usize,
}

impl MatchReport {
    fn from_counts(permutation: Vec<Option<u32>>, matched: usize, total: usize) -> Self {
        let mismatched_count = total - matched;
        let (accuracy, error_rate) = if total == 0 {
            (1.0, 0.0)
        } else {
            (
                matched as f64 / total as f64,
                mismatched_count as f64 / total as f64,
            )
        };
        Self {
            permutation,
            accuracy,
            error_rate,
            mismatched_count,
            total,
        }
    }
}

fn check_shapes(est: &LabelMap, truth: &LabelMap) -> Result<()> {
    if est.shape() != truth.shape() {
        return Err(Error::ShapeMismatch {
            expected_rows: truth.rows(),
            expected_cols: truth.cols(),
            rows: est.rows(),
            cols: est.cols(),
        });
    }
    Ok(())
}

/// `table[e * kt + t]` counts pixels with estimated label `e` and true label `t`,
/// over pixels where `keep` holds.
fn contingency(
    est: &[u32],
    truth: &[u32],
    ke: usize,
    kt: usize,
    keep: impl Fn(usize) -> bool,
) -> (Vec<usize>, usize) {
    let mut table = vec![0usize; ke * kt];
    let mut total = 0;
    for (i, (&e, &t)) in est.iter().zip(truth).enumerate() {
        if keep(i) {
            table[e as usize * kt + t as usize] += 1;
            total += 1;
        }
    }
    (table, total)
}

/// Best agreement over all `k!` relabelings of `est`. Ties keep the
/// lexicographically first permutation, so the identity wins when it is optimal.
pub fn best_permutation_match(est: &LabelMap, truth: &LabelMap, k: usize) -> Result<MatchReport> {
    check_shapes(est, truth)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > MAX_PERMUTATION_K {
        return Err(Error::TooManyLabels(k));
    }
    for (name, map) in [("estimated", est), ("true", truth)] {
        if let Some(&l) = map.labels().iter().find(|&&l| l as usize >= k) {
            return Err(Error::invalid(format!(
                "{name} label {l} is not below k = {k}"
            )));
        }
    }
    let (table, total) = contingency(est.labels(), truth.labels(), k, k, |_| true);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let agree: usize = perm
            .iter()
            .enumerate()
            .map(|(e, &t)| table[e * k + t])
            .sum();
        if best.as_ref().is_none_or(|b| agree > b.0) {
            best = Some((agree, perm));
        }
    }
    let (agree, perm) = best.expect("k >= 1");
    Ok(MatchReport::from_counts(
        perm.into_iter().map(|t| Some(t as u32)).collect(),
        agree,
        total,
    ))
}

/// Best one-to-one matching from estimated labels (any number) to at most
/// [`MAX_PERMUTATION_K`] true labels, scored over pixels where `mask` is true
/// (all pixels when `mask` is `None`). Unmatched estimated labels count as errors.
pub fn best_injective_match(
    est: &LabelMap,
    truth: &LabelMap,
    mask: Option<&[bool]>,
) -> Result<MatchReport> {
    check_shapes(est, truth)?;
    if let Some(m) = mask {
        if m.len() != est.len() {
            return Err(Error::invalid("mask length differs from the label map"));
        }
    }
    let ke = est.num_labels();
    let kt = truth.num_labels();
    if kt > MAX_PERMUTATION_K {
        return Err(Error::TooManyLabels(kt));
    }
    let (table, total) = contingency(est.labels(), truth.labels(), ke, kt, |i| {
        mask.is_none_or(|m| m[i])
    });
    // dp[e][used]: best agreement using estimated labels < e with truth set `used`
    let states = 1usize << kt;
    let mut dp = vec![vec![usize::MAX; states]; ke + 1];
    let mut choice = vec![vec![None; states]; ke + 1];
    dp[0][0] = 0;
    for e in 0..ke {
        for used in 0..states {
            let cur = dp[e][used];
            if cur == usize::MAX {
                continue;
            }
            let mut relax = |next: usize, gain: usize, pick: Option<u32>| {
                let v = cur + gain;
                if dp[e + 1][next] == usize::MAX || v > dp[e + 1][next] {
                    dp[e + 1][next] = v;
                    choice[e + 1][next] = Some((used, pick));
                }
            };
            relax(used, 0, None);
            for t in (0..kt).filter(|t| used >> t & 1 == 0) {
                relax(used | 1 << t, table[e * kt + t], Some(t as u32));
            }
        }
    }
    let (mut used, agree) = dp[ke]
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != usize::MAX)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(s, &v)| (s, v))
        .expect("empty assignment is always reachable");
    let mut permutation = vec![None; ke];
    for e in (1..=ke).rev() {
        let (prev, pick) = choice[e][used].expect("reachable state");
        permutation[e - 1] = pick;
        used = prev;
    }
    Ok(MatchReport::from_counts(permutation, agree, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lm(labels: &[u32]) -> LabelMap {
        LabelMap::new(1, labels.len(), labels.to_vec()).unwrap()
    }

    #[test]
    fn identical_and_flipped() {
        let truth = lm(&[0, 0, 1, 1, 1]);
        let r = best_permutation_match(&truth, &truth, 2).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.permutation, vec![Some(0), Some(1)]);
        let flipped = lm(&[1, 1, 0, 0, 0]);
        let r = best_permutation_match(&flipped, &truth, 2).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.permutation, vec![Some(1), Some(0)]);
    }

    #[test]
    fn four_pixel_half() {
        let r = best_permutation_match(&lm(&[0, 1, 0, 1]), &lm(&[0, 0, 1, 1]), 2).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.mismatched_count, 2);
        assert_eq!(r.accuracy + r.error_rate, 1.0);
    }

    #[test]
    fn rejects_large_k_and_bad_labels() {
        let a = lm(&[0, 1]);
        assert!(matches!(
            best_permutation_match(&a, &a, 9),
            Err(Error::TooManyLabels(9))
        ));
        assert!(best_permutation_match(&lm(&[0, 2]), &a, 2).is_err());
        let b = LabelMap::new(2, 1, vec![0, 1]).unwrap();
        assert!(best_permutation_match(&a, &b, 2).is_err());
    }

    #[test]
    fn injective_with_extra_components() {
        let truth = lm(&[0, 0, 0, 0, 1, 1, 1, 1]);
        let est = lm(&[2, 2, 0, 0, 1, 1, 1, 1]);
        let r = best_injective_match(&est, &truth, None).unwrap();
        assert_eq!(r.mismatched_count, 2);
        assert_eq!(r.permutation[1], Some(1));
        // restricted to the last six pixels, one estimated component is dropped at no cost
        let mask = [false, false, true, true, true, true, true, true];
        let r = best_injective_match(&est, &truth, Some(&mask)).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.total, 6);
    }

    #[test]
    fn injective_single_component_gets_one_region() {
        let truth = lm(&[0, 0, 0, 1]);
        let r = best_injective_match(&lm(&[0, 0, 0, 0]), &truth, None).unwrap();
        assert_eq!(r.accuracy, 0.75);
    }
}
