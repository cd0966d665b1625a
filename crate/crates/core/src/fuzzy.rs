//! Fuzzy fusion of the two image errors into a single cross-track error.
//!
//! EOD and EOA are fuzzified over seven-set uniform triangular partitions
//! with saturating end shoulders, pushed through a 7x7 Mamdani min-max rule
//! table onto thirteen output sets, and defuzzified by center of gravity.
//! The rule table is stored literally; structurally it is additive:
//! index(out) = index(EOA) + index(EOD) under NB..PB -> -3..3 and
//! NBX..PBX -> -6..6.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum FuzzyError {
    /// No rule fired (cannot happen for finite inputs with saturating
    /// shoulders and a complete table; guarded anyway).
    #[error("no fuzzy rule fired")]
    NoRuleFired,
}

/// Input linguistic sets, negative-big through positive-big.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSet {
    Nb,
    Nm,
    Ns,
    Zo,
    Ps,
    Pm,
    Pb,
}

/// Output linguistic sets for the cross-track error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CteSet {
    Nbx,
    Nb,
    Nmb,
    Nm,
    Nms,
    Ns,
    Zo,
    Ps,
    Pms,
    Pm,
    Pmb,
    Pb,
    Pbx,
}

impl CteSet {
    /// Signed index, NBX..PBX -> -6..+6.
    pub fn index(self) -> i32 {
        self as i32 - 6
    }
}

/// Rule table: rows are EOA sets NB..PB, columns are EOD sets NB..PB.
pub const RULE_TABLE: [[CteSet; 7]; 7] = {
    use CteSet::*;
    [
        [Nbx, Nb, Nmb, Nm, Nms, Ns, Zo],
        [Nb, Nmb, Nm, Nms, Ns, Zo, Ps],
        [Nmb, Nm, Nms, Ns, Zo, Ps, Pms],
        [Nm, Nms, Ns, Zo, Ps, Pms, Pm],
        [Nms, Ns, Zo, Ps, Pms, Pm, Pmb],
        [Ns, Zo, Ps, Pms, Pm, Pmb, Pb],
        [Zo, Ps, Pms, Pm, Pmb, Pb, Pbx],
    ]
};

/// Uniform triangular partition with saturating end shoulders. Adjacent
/// triangles overlap at 50%, so memberships at any crisp input sum to 1 and
/// at most two are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    centers: Vec<f64>,
    spacing: f64,
}

impl Partition {
    /// Centers symmetric about zero: -n*spacing ..= n*spacing.
    pub fn symmetric(half_sets: usize, spacing: f64) -> Self {
        assert!(spacing > 0.0);
        let centers = (-(half_sets as i64)..=half_sets as i64)
            .map(|i| i as f64 * spacing)
            .collect();
        Self { centers, spacing }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Membership vector for a crisp value.
    pub fn fuzzify(&self, value: f64) -> Vec<f64> {
        let n = self.centers.len();
        let mut mu = vec![0.0; n];
        if value <= self.centers[0] {
            mu[0] = 1.0;
            return mu;
        }
        if value >= self.centers[n - 1] {
            mu[n - 1] = 1.0;
            return mu;
        }
        // Bracketing centers; exact hits collapse to a single set.
        let mut i = 0;
        while self.centers[i + 1] < value {
            i += 1;
        }
        let t = (value - self.centers[i]) / (self.centers[i + 1] - self.centers[i]);
        mu[i] = 1.0 - t;
        mu[i + 1] = t;
        mu
    }
}

/// The complete EOD/EOA -> CTE fuzzy stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyController {
    pub eod_partition: Partition,
    pub eoa_partition: Partition,
    pub cte_partition: Partition,
}

impl Default for FuzzyController {
    /// Partitions matched to the default detector geometry so that the
    /// published PID gains close the loop on the experiment tracks:
    /// EOD sets every 50 px across the overhead width, EOA sets every
    /// 45 degrees, CTE sets on the integers -6..=6.
    fn default() -> Self {
        Self {
            eod_partition: Partition::symmetric(3, 50.0),
            eoa_partition: Partition::symmetric(3, 45.0),
            cte_partition: Partition::symmetric(6, 1.0),
        }
    }
}

/// Mamdani min-max composition: firing strength of each table cell is the
/// min of its antecedent memberships, aggregated per output set by max.
pub fn infer(mu_eod: &[f64], mu_eoa: &[f64]) -> [f64; 13] {
    let mut k = [0.0f64; 13];
    for (row, mu_a) in mu_eoa.iter().enumerate() {
        if *mu_a == 0.0 {
            continue;
        }
        for (col, mu_d) in mu_eod.iter().enumerate() {
            let strength = mu_a.min(*mu_d);
            if strength > 0.0 {
                let out = (RULE_TABLE[row][col].index() + 6) as usize;
                if strength > k[out] {
                    k[out] = strength;
                }
            }
        }
    }
    k
}

/// Center-of-gravity defuzzification over the aggregated memberships:
/// U = sum(u_i * K_i) / sum(K_i) with u_i the output-set centers.
pub fn defuzzify_cog(cte_partition: &Partition, k: &[f64; 13]) -> Result<f64, FuzzyError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, ki) in k.iter().enumerate() {
        num += cte_partition.centers()[i] * ki;
        den += ki;
    }
    if den == 0.0 {
        return Err(FuzzyError::NoRuleFired);
    }
    Ok(num / den)
}

impl FuzzyController {
    /// Fuzzify both inputs, run the rule table, defuzzify. Output lies in
    /// [min center, max center] of the CTE partition.
    pub fn evaluate(&self, eod_px: f64, eoa_deg: f64) -> Result<f64, FuzzyError> {
        let mu_eod = self.eod_partition.fuzzify(eod_px);
        let mu_eoa = self.eoa_partition.fuzzify(eoa_deg);
        let k = infer(&mu_eod, &mu_eoa);
        defuzzify_cog(&self.cte_partition, &k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_matches_additive_index_law() {
        for (row, cells) in RULE_TABLE.iter().enumerate() {
            for (col, out) in cells.iter().enumerate() {
                let expected = (row as i32 - 3) + (col as i32 - 3);
                assert_eq!(out.index(), expected, "row {row} col {col}");
            }
        }
    }

    #[test]
    fn fuzzify_at_center_is_one_hot() {
        let p = Partition::symmetric(3, 50.0);
        let mu = p.fuzzify(0.0);
        assert_eq!(mu, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fuzzify_midway_splits_evenly() {
        let p = Partition::symmetric(3, 50.0);
        // Midway between NS (-50) and ZO (0).
        let mu = p.fuzzify(-25.0);
        assert_eq!(mu[2], 0.5);
        assert_eq!(mu[3], 0.5);
    }

    #[test]
    fn fuzzify_saturates_below_first_center() {
        let p = Partition::symmetric(3, 50.0);
        let mu = p.fuzzify(-1e6);
        assert_eq!(mu[0], 1.0);
        assert_eq!(mu.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn infer_corner_and_center_cells() {
        let one_hot = |i: usize| {
            let mut v = vec![0.0; 7];
            v[i] = 1.0;
            v
        };
        // EOD = NB, EOA = NB -> NBX.
        let k = infer(&one_hot(0), &one_hot(0));
        assert_eq!(k[0], 1.0);
        assert_eq!(k[1..].iter().sum::<f64>(), 0.0);
        // EOD = ZO, EOA = ZO -> ZO.
        let k = infer(&one_hot(3), &one_hot(3));
        assert_eq!(k[6], 1.0);
        // EOD = NB, EOA = PB -> ZO.
        let k = infer(&one_hot(0), &one_hot(6));
        assert_eq!(k[6], 1.0);
        assert_eq!(k.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn cog_single_and_split_sets() {
        let p = Partition::symmetric(6, 1.0);
        let mut k = [0.0; 13];
        k[6] = 1.0; // ZO
        assert_eq!(defuzzify_cog(&p, &k).unwrap(), 0.0);
        let mut k = [0.0; 13];
        k[5] = 0.5; // NS at -1
        k[6] = 0.5; // ZO at 0
        assert_eq!(defuzzify_cog(&p, &k).unwrap(), -0.5);
    }

    #[test]
    fn cog_empty_is_error() {
        let p = Partition::symmetric(6, 1.0);
        assert_eq!(defuzzify_cog(&p, &[0.0; 13]), Err(FuzzyError::NoRuleFired));
    }

    #[test]
    fn evaluate_crisp_centers_follow_additive_law() {
        let ctrl = FuzzyController::default();
        // EOD at NM's center, EOA at PS's center -> NS's center.
        let eod = ctrl.eod_partition.centers()[1]; // NM
        let eoa = ctrl.eoa_partition.centers()[4]; // PS
        assert_eq!(ctrl.evaluate(eod, eoa).unwrap(), -1.0);
        assert_eq!(ctrl.evaluate(0.0, 0.0).unwrap(), 0.0);
        // Far beyond both PB centers saturates at the PBX center.
        assert_eq!(ctrl.evaluate(1e4, 1e4).unwrap(), 6.0);
    }

    #[test]
    fn evaluate_monotone_on_grid() {
        let ctrl = FuzzyController::default();
        let steps = 81;
        let at = |i: usize, span: f64| -span + 2.0 * span * i as f64 / (steps - 1) as f64;
        for i in 0..steps {
            let eoa = at(i, 160.0);
            let mut prev = f64::NEG_INFINITY;
            for j in 0..steps {
                let u = ctrl.evaluate(at(j, 200.0), eoa).unwrap();
                assert!(u >= prev - 1e-12, "eoa={eoa} eod={}", at(j, 200.0));
                prev = u;
            }
        }
        for j in 0..steps {
            let eod = at(j, 200.0);
            let mut prev = f64::NEG_INFINITY;
            for i in 0..steps {
                let u = ctrl.evaluate(eod, at(i, 160.0)).unwrap();
                assert!(u >= prev - 1e-12);
                prev = u;
            }
        }
    }

    proptest! {
        #[test]
        fn memberships_sum_to_one_with_at_most_two_nonzero(v in -500.0f64..500.0) {
            let p = Partition::symmetric(3, 50.0);
            let mu = p.fuzzify(v);
            let nonzero = mu.iter().filter(|m| **m > 0.0).count();
            prop_assert!((1..=2).contains(&nonzero));
            prop_assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn evaluate_is_bounded_and_odd(eod in -400.0f64..400.0, eoa in -200.0f64..200.0) {
            let ctrl = FuzzyController::default();
            let u = ctrl.evaluate(eod, eoa).unwrap();
            prop_assert!((-6.0..=6.0).contains(&u));
            let v = ctrl.evaluate(-eod, -eoa).unwrap();
            prop_assert!((u + v).abs() < 1e-9);
        }

        #[test]
        fn cog_matches_discretized_centroid_oracle(raw in proptest::collection::vec(0.0f64..1.0, 13)) {
            let p = Partition::symmetric(6, 1.0);
            let mut k = [0.0; 13];
            for (i, r) in raw.iter().enumerate() { k[i] = *r; }
            prop_assume!(k.iter().sum::<f64>() > 0.0);
            // Independent oracle: centroid of height-scaled singletons laid
            // out on a dense grid over the output universe.
            let grid_step = 1e-3;
            let mut num = 0.0;
            let mut den = 0.0;
            let mut x = -6.0;
            while x <= 6.0 + grid_step / 2.0 {
                for (i, c) in p.centers().iter().enumerate() {
                    if (x - c).abs() < grid_step / 2.0 {
                        num += x * k[i];
                        den += k[i];
                    }
                }
                x += grid_step;
            }
            let expected = num / den;
            let got = defuzzify_cog(&p, &k).unwrap();
            prop_assert!((got - expected).abs() < 1e-9);
        }
    }
}
