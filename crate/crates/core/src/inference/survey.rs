use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{IndexEstimate, InferenceMethod, DEFAULT_LEVEL};
use crate::error::{DisparityError, Result};
use crate::index::{
    is_unit_alpha, GroupRecord, GroupedDistribution, IndexKind, IndexParams, IndexValue,
};
use crate::numeric::compensated_sum;

/// One sampled observation. `group` is zero-based, lowest SES first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub stratum: String,
    pub cluster: String,
    pub weight: f64,
    pub y: f64,
    pub group: usize,
}

/// Stratified cluster sample. Clusters are nested in strata: the same cluster
/// label in two strata names two different clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyMicrodata {
    records: Vec<SurveyRecord>,
    group_labels: Vec<String>,
    strata: Vec<String>,
    /// stratum -> cluster -> record indices
    design: Vec<Vec<Vec<usize>>>,
}

/// Sort key that orders numeric labels numerically and the rest lexically.
fn label_key(s: &str) -> (Option<i64>, &str) {
    (s.trim().parse::<i64>().ok(), s)
}

fn label_cmp(a: &str, b: &str) -> Ordering {
    match (label_key(a), label_key(b)) {
        ((Some(x), _), (Some(y), _)) => x.cmp(&y).then(a.cmp(b)),
        ((Some(_), _), (None, _)) => Ordering::Less,
        ((None, _), (Some(_), _)) => Ordering::Greater,
        _ => a.cmp(b),
    }
}

#[derive(PartialEq, Eq)]
struct Label(String);

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        label_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SurveyMicrodata {
    pub fn new(records: Vec<SurveyRecord>, group_labels: Vec<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(DisparityError::InvalidInput("no survey records".into()));
        }
        if group_labels.is_empty() {
            return Err(DisparityError::InvalidInput("no groups".into()));
        }
        let mut map: BTreeMap<Label, BTreeMap<Label, Vec<usize>>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if !(r.weight.is_finite() && r.weight > 0.0) {
                return Err(DisparityError::InvalidInput(format!(
                    "record {i}: weight must be positive, got {}",
                    r.weight
                )));
            }
            if !(r.y.is_finite() && r.y >= 0.0) {
                return Err(DisparityError::InvalidInput(format!(
                    "record {i}: outcome must be nonnegative, got {}",
                    r.y
                )));
            }
            if r.group >= group_labels.len() {
                return Err(DisparityError::InvalidInput(format!(
                    "record {i}: group index {} outside 0..{}",
                    r.group,
                    group_labels.len()
                )));
            }
            map.entry(Label(r.stratum.clone()))
                .or_default()
                .entry(Label(r.cluster.clone()))
                .or_default()
                .push(i);
        }
        let mut strata = Vec::with_capacity(map.len());
        let mut design = Vec::with_capacity(map.len());
        for (s, clusters) in map {
            if clusters.len() < 2 {
                log::warn!("stratum '{}' has a single cluster; variance estimation will fail", s.0);
            }
            strata.push(s.0);
            design.push(clusters.into_values().collect());
        }
        Ok(Self {
            records,
            group_labels,
            strata,
            design,
        })
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn n_groups(&self) -> usize {
        self.group_labels.len()
    }

    pub fn strata(&self) -> &[String] {
        &self.strata
    }

    pub fn clusters_per_stratum(&self) -> Vec<usize> {
        self.design.iter().map(Vec::len).collect()
    }

    /// Every stratum must hold at least two clusters.
    pub fn check_design(&self) -> Result<()> {
        for (s, clusters) in self.strata.iter().zip(&self.design) {
            if clusters.len() < 2 {
                return Err(DisparityError::DesignError(format!(
                    "stratum '{s}' has {} cluster(s); at least 2 are required",
                    clusters.len()
                )));
            }
        }
        Ok(())
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn with_scaled_weights(&self, factor: f64) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| SurveyRecord {
                weight: r.weight * factor,
                ..r.clone()
            })
            .collect();
        Self::new(records, self.group_labels.clone())
    }

    /// Drops groups without observations, renumbering the rest. Returns the
    /// original indices of the dropped groups.
    pub fn without_empty_groups(&self) -> Result<(Self, Vec<usize>)> {
        let mut present = vec![false; self.n_groups()];
        for r in &self.records {
            present[r.group] = true;
        }
        let dropped: Vec<usize> = (0..present.len()).filter(|&g| !present[g]).collect();
        if dropped.is_empty() {
            return Ok((self.clone(), dropped));
        }
        log::warn!("dropping groups without observations: {dropped:?}");
        let mut remap = vec![usize::MAX; present.len()];
        let mut labels = Vec::new();
        for (g, &p) in present.iter().enumerate() {
            if p {
                remap[g] = labels.len();
                labels.push(self.group_labels[g].clone());
            }
        }
        let records = self
            .records
            .iter()
            .map(|r| SurveyRecord {
                group: remap[r.group],
                ..r.clone()
            })
            .collect();
        Ok((Self::new(records, labels)?, dropped))
    }

    pub(crate) fn cluster_totals(&self) -> ClusterTotals {
        let m = self.n_groups();
        let strata = self
            .design
            .iter()
            .map(|clusters| {
                clusters
                    .iter()
                    .map(|idx| {
                        let mut u0 = vec![0.0; m];
                        let mut u1 = vec![0.0; m];
                        for &i in idx {
                            let r = &self.records[i];
                            u0[r.group] += r.weight;
                            u1[r.group] += r.weight * r.y;
                        }
                        GroupTotals { u0, u1 }
                    })
                    .collect()
            })
            .collect();
        ClusterTotals { strata, groups: m }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GroupTotals {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

/// Per-cluster weighted group totals, grouped by stratum.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ClusterTotals {
    pub strata: Vec<Vec<GroupTotals>>,
    pub groups: usize,
}

/// Weighted group totals `U_{0j}`, `U_{1j}` with the rank complements
/// `V_{0j} = U_{0j}/2 + Σ_{ℓ>j} U_{0ℓ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalsDecomposition {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub u0_total: f64,
    pub v0: Vec<f64>,
}

/// The four logarithmic terms of the totals form of RI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiTerms {
    /// `ln Σ U_1 V^{ν−1}`
    pub i: f64,
    /// `ln Σ U_0 (U_1/U_0)^{1−α} V^{ν−1}`
    pub ii: f64,
    /// `ln Σ U_0 V^{ν−1}`
    pub iii: f64,
    /// `Σ U_0 ln(U_1/U_0) V^{ν−1} / Σ U_0 V^{ν−1}`
    pub iv: f64,
}

impl TotalsDecomposition {
    pub fn from_group_totals(u0: Vec<f64>, u1: Vec<f64>) -> Result<Self> {
        if u0.is_empty() || u0.len() != u1.len() {
            return Err(DisparityError::InvalidInput(
                "group totals must be nonempty and aligned".into(),
            ));
        }
        for (j, (&a, &b)) in u0.iter().zip(&u1).enumerate() {
            if !(a > 0.0) {
                return Err(DisparityError::EmptyGroup { group: j });
            }
            if !(a.is_finite() && b.is_finite() && b >= 0.0) {
                return Err(DisparityError::InvalidInput(format!(
                    "group {j}: totals must be finite and nonnegative"
                )));
            }
        }
        let mut v0 = vec![0.0; u0.len()];
        let mut above = 0.0;
        for j in (0..u0.len()).rev() {
            v0[j] = u0[j] / 2.0 + above;
            above += u0[j];
        }
        let u0_total = compensated_sum(u0.iter().copied());
        Ok(Self {
            u0,
            u1,
            u0_total,
            v0,
        })
    }

    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }

    /// `1 − R_j = V_{0j}/U_{0·}`.
    pub fn rank_complements(&self) -> Vec<f64> {
        self.v0.iter().map(|v| v / self.u0_total).collect()
    }

    /// Grouped distribution with `p_j = U_{0j}/U_{0·}` and `ȳ_j = U_{1j}/U_{0j}`.
    pub fn induced_distribution(&self, labels: &[String]) -> Result<GroupedDistribution> {
        let groups = self
            .u0
            .iter()
            .zip(&self.u1)
            .enumerate()
            .map(|(j, (&a, &b))| {
                let label = labels.get(j).cloned().unwrap_or_else(|| format!("g{}", j + 1));
                GroupRecord::new(label, a / self.u0_total, b / a)
            })
            .collect();
        GroupedDistribution::new(groups, "")
    }

    /// Literal values of the terms (I)–(IV).
    pub fn terms(&self, params: &IndexParams) -> Result<RenyiTerms> {
        params.validate()?;
        let e = params.nu - 1.0;
        let k: Vec<f64> = self.v0.iter().map(|&v| kernel(v, e)).collect();
        let m = self.ratios();
        let d = compensated_sum(self.u0.iter().zip(&k).map(|(u, k)| u * k));
        Ok(RenyiTerms {
            i: compensated_sum(self.u1.iter().zip(&k).map(|(u, k)| u * k)).ln(),
            ii: compensated_sum(
                self.u0
                    .iter()
                    .zip(&m)
                    .zip(&k)
                    .map(|((u, m), k)| u * m.powf(1.0 - params.alpha) * k),
            )
            .ln(),
            iii: d.ln(),
            iv: compensated_sum(
                self.u0
                    .iter()
                    .zip(&m)
                    .zip(&k)
                    .map(|((u, m), k)| u * m.ln() * k),
            ) / d,
        })
    }

    fn ratios(&self) -> Vec<f64> {
        self.u1.iter().zip(&self.u0).map(|(b, a)| b / a).collect()
    }
}

/// `V^e`, with `V^0 = 1`.
fn kernel(v: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        v.powf(e)
    }
}

pub fn survey_totals(data: &SurveyMicrodata) -> Result<TotalsDecomposition> {
    let m = data.n_groups();
    let mut u0 = vec![Vec::new(); m];
    let mut u1 = vec![Vec::new(); m];
    for r in data.records() {
        u0[r.group].push(r.weight);
        u1[r.group].push(r.weight * r.y);
    }
    TotalsDecomposition::from_group_totals(
        u0.into_iter().map(compensated_sum).collect(),
        u1.into_iter().map(compensated_sum).collect(),
    )
}

/// RI from survey totals: `(I) − (II)/(1−α) + α(III)/(1−α)`, or
/// `(I) − (IV) − (III)` at α = 1. Evaluated as
/// `(I) − (III) − [(II) − (III)]/(1−α)` with each log difference formed as the
/// log of a ratio, which keeps the result accurate when the terms are large.
pub fn renyi_from_totals(tot: &TotalsDecomposition, params: &IndexParams) -> Result<IndexValue> {
    params.validate()?;
    let e = params.nu - 1.0;
    let c = tot.u0_total;
    let weights: Vec<f64> = tot
        .u0
        .iter()
        .zip(&tot.v0)
        .map(|(&u, &v)| u / c * kernel(v / c, e))
        .collect();
    let d = compensated_sum(weights.iter().copied());
    let q: Vec<f64> = weights.iter().map(|w| w / d).collect();
    let m = tot.ratios();
    // exp[(I) − (III)]
    let mu = compensated_sum(q.iter().zip(&m).map(|(q, m)| q * m));
    if !(mu > 0.0) {
        return Err(DisparityError::DegenerateReference(
            "all outcome totals are zero".into(),
        ));
    }
    let value = if params.unit_alpha() {
        if m.contains(&0.0) {
            f64::INFINITY
        } else {
            -compensated_sum(q.iter().zip(&m).map(|(q, m)| q * (m / mu).ln()))
        }
    } else {
        let k = 1.0 - params.alpha;
        // exp{[(II) − (III)] − (1−α)[(I) − (III)]} − 1
        let s = compensated_sum(
            q.iter()
                .zip(&m)
                .map(|(q, m)| q * (k * (m / mu).ln()).exp_m1()),
        );
        if s.is_infinite() {
            f64::INFINITY
        } else {
            -s.ln_1p() / k
        }
    };
    Ok(IndexValue {
        kind: IndexKind::RI,
        value: value.max(0.0),
        params: *params,
    })
}

/// `∂RI/∂U_{0k}` and `∂RI/∂U_{1k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalsPartials {
    pub d_u0: Vec<f64>,
    pub d_u1: Vec<f64>,
}

/// Analytic partial derivatives of RI in the group totals, assembled from the
/// derivatives of (I)–(IV). `∂V_{0j}/∂U_{0k}` is 1 for j < k, ½ for j = k and
/// 0 otherwise.
pub fn totals_partials(tot: &TotalsDecomposition, params: &IndexParams) -> Result<TotalsPartials> {
    params.validate()?;
    let alpha = params.alpha;
    let m_raw = tot.ratios();
    if alpha > 0.0 && m_raw.contains(&0.0) {
        return Err(DisparityError::DomainError(
            "RI is not differentiable at a zero outcome total when alpha > 0".into(),
        ));
    }
    // RI is invariant to rescaling U_0 and U_1 (separately); work with
    // totals of order one and undo the scaling at the end.
    let c0 = tot.u0_total;
    let c1 = compensated_sum(tot.u1.iter().copied()) / c0;
    if !(c1 > 0.0) {
        return Err(DisparityError::DegenerateReference(
            "all outcome totals are zero".into(),
        ));
    }
    let n = tot.len();
    let e = params.nu - 1.0;
    let u0: Vec<f64> = tot.u0.iter().map(|u| u / c0).collect();
    let u1: Vec<f64> = tot.u1.iter().map(|u| u / (c0 * c1)).collect();
    let v: Vec<f64> = tot.v0.iter().map(|v| v / c0).collect();
    let m: Vec<f64> = m_raw.iter().map(|m| m / c1).collect();
    let ve: Vec<f64> = v.iter().map(|&v| kernel(v, e)).collect();
    let vd: Vec<f64> = v.iter().map(|&v| if e == 0.0 { 0.0 } else { v.powf(e - 1.0) }).collect();
    let unit = is_unit_alpha(alpha);
    let mp: Vec<f64> = m.iter().map(|&m| m.powf(1.0 - alpha)).collect();
    let lm: Vec<f64> = m.iter().map(|m| m.ln()).collect();

    let s_i = compensated_sum((0..n).map(|j| u1[j] * ve[j]));
    let s_ii = compensated_sum((0..n).map(|j| u0[j] * mp[j] * ve[j]));
    let d = compensated_sum((0..n).map(|j| u0[j] * ve[j]));
    let num_iv = if unit {
        compensated_sum((0..n).map(|j| u0[j] * lm[j] * ve[j]))
    } else {
        0.0
    };

    let mut d_u0 = vec![0.0; n];
    let mut d_u1 = vec![0.0; n];
    // Running sums over j < k.
    let (mut p_i, mut p_ii, mut p_iii, mut p_iv) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let di0 = e * (0.5 * u1[k] * vd[k] + p_i) / s_i;
        let di1 = ve[k] / s_i;
        let dd0 = ve[k] + e * (0.5 * u0[k] * vd[k] + p_iii);
        let diii0 = dd0 / d;
        let (g0, g1) = if unit {
            let dn0 = (lm[k] - 1.0) * ve[k] + e * (0.5 * u0[k] * lm[k] * vd[k] + p_iv);
            let dn1 = ve[k] / m[k];
            let div0 = dn0 / d - num_iv * dd0 / (d * d);
            let div1 = dn1 / d;
            (di0 - div0 - diii0, di1 - div1)
        } else {
            let dii0 = (alpha * mp[k] * ve[k] + e * (0.5 * u0[k] * mp[k] * vd[k] + p_ii)) / s_ii;
            let dii1 = (1.0 - alpha) * m[k].powf(-alpha) * ve[k] / s_ii;
            let k1 = 1.0 - alpha;
            (di0 - (dii0 - alpha * diii0) / k1, di1 - dii1 / k1)
        };
        d_u0[k] = g0 / c0;
        d_u1[k] = g1 / (c0 * c1);
        p_i += u1[k] * vd[k];
        p_ii += u0[k] * mp[k] * vd[k];
        p_iii += u0[k] * vd[k];
        if unit {
            p_iv += u0[k] * lm[k] * vd[k];
        }
    }
    Ok(TotalsPartials { d_u0, d_u1 })
}

/// Taylor-linearized standard error of RI under the with-replacement
/// stratified cluster estimator of the variance of a total.
pub fn linearized_variance(data: &SurveyMicrodata, params: &IndexParams) -> Result<IndexEstimate> {
    data.check_design()?;
    let (data, _) = data.without_empty_groups()?;
    let tot = survey_totals(&data)?;
    let value = renyi_from_totals(&tot, params)?;
    if value.is_infinite() {
        return Err(DisparityError::DomainError(
            "RI is infinite; linearization is undefined".into(),
        ));
    }
    let grad = totals_partials(&tot, params)?;
    let clusters = data.cluster_totals();
    let var = stratified_variance(&clusters, |g| {
        compensated_sum(
            (0..clusters.groups).map(|j| grad.d_u0[j] * g.u0[j] + grad.d_u1[j] * g.u1[j]),
        )
    });
    Ok(IndexEstimate::normal(
        value,
        var.sqrt(),
        DEFAULT_LEVEL,
        InferenceMethod::Linearization,
    ))
}

/// Linearized standard errors of the group means `ȳ_j = U_{1j}/U_{0j}`.
pub fn group_mean_std_errors(data: &SurveyMicrodata) -> Result<Vec<f64>> {
    data.check_design()?;
    let tot = survey_totals(data)?;
    let clusters = data.cluster_totals();
    Ok((0..tot.len())
        .map(|j| {
            let mean = tot.u1[j] / tot.u0[j];
            stratified_variance(&clusters, |g| (g.u1[j] - mean * g.u0[j]) / tot.u0[j]).sqrt()
        })
        .collect())
}

/// `Σ_s C_s/(C_s − 1) Σ_c (z_sc − z̄_s)²` for cluster scores `z`.
fn stratified_variance(clusters: &ClusterTotals, score: impl Fn(&GroupTotals) -> f64) -> f64 {
    compensated_sum(clusters.strata.iter().map(|stratum| {
        let z: Vec<f64> = stratum.iter().map(&score).collect();
        let c = z.len() as f64;
        let mean = compensated_sum(z.iter().copied()) / c;
        let ss = compensated_sum(z.iter().map(|z| (z - mean) * (z - mean)));
        c / (c - 1.0) * ss
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::renyi_index;

    fn rec(s: &str, c: &str, w: f64, y: f64, g: usize) -> SurveyRecord {
        SurveyRecord {
            stratum: s.into(),
            cluster: c.into(),
            weight: w,
            y,
            group: g,
        }
    }

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|j| format!("g{j}")).collect()
    }

    /// Two strata, two clusters each, three groups.
    fn small() -> SurveyMicrodata {
        let rows = vec![
            rec("1", "1", 1.5, 1.0, 0),
            rec("1", "1", 2.0, 0.0, 1),
            rec("1", "2", 1.0, 1.0, 0),
            rec("1", "2", 3.0, 0.0, 2),
            rec("2", "1", 2.5, 0.0, 0),
            rec("2", "1", 1.0, 1.0, 1),
            rec("2", "2", 2.0, 1.0, 2),
            rec("2", "2", 0.5, 0.0, 1),
            rec("2", "2", 1.2, 1.0, 2),
        ];
        SurveyMicrodata::new(rows, labels(3)).unwrap()
    }

    #[test]
    fn totals_match_hand_sums() {
        let t = survey_totals(&small()).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(a, b)| (a - b).abs() < 1e-12);
        assert!(close(&t.u0, &[5.0, 3.5, 6.2]));
        assert!(close(&t.u1, &[2.5, 1.0, 3.2]));
        assert!((t.u0_total - 14.7).abs() < 1e-12);
        assert!(close(&t.v0, &[2.5 + 9.7, 1.75 + 6.2, 3.1]));
    }

    #[test]
    fn unweighted_totals_are_counts() {
        let rows = (0..10)
            .map(|i| rec(&(i % 2).to_string(), &(i % 4).to_string(), 1.0, (i % 3 == 0) as u8 as f64, i % 2))
            .collect();
        let t = survey_totals(&SurveyMicrodata::new(rows, labels(2)).unwrap()).unwrap();
        assert_eq!(t.u0, vec![5.0, 5.0]);
        assert_eq!(t.u1, vec![2.0, 2.0]);
    }

    #[test]
    fn single_group_rank_is_half() {
        let t = TotalsDecomposition::from_group_totals(vec![8.0], vec![2.0]).unwrap();
        assert_eq!(t.rank_complements(), vec![0.5]);
    }

    #[test]
    fn empty_group_rejected() {
        assert_eq!(
            TotalsDecomposition::from_group_totals(vec![1.0, 0.0], vec![0.5, 0.0]),
            Err(DisparityError::EmptyGroup { group: 1 })
        );
    }

    #[test]
    fn totals_route_matches_direct() {
        let t = survey_totals(&small()).unwrap();
        let dist = t.induced_distribution(&labels(3)).unwrap();
        for (alpha, nu) in [(0.0, 1.0), (0.5, 2.0), (1.0, 1.0), (1.0, 3.0), (2.0, 2.5), (6.0, 4.0)] {
            let p = IndexParams::with(alpha, nu).unwrap();
            let a = renyi_from_totals(&t, &p).unwrap().value;
            let b = renyi_index(&dist, &p).unwrap().value;
            assert!((a - b).abs() <= 1e-10 * b.max(1e-300), "{alpha} {nu}: {a} {b}");
        }
    }

    #[test]
    fn literal_terms_combine_to_ri() {
        let t = survey_totals(&small()).unwrap();
        for (alpha, nu) in [(2.0, 2.0), (0.5, 3.0)] {
            let p = IndexParams::with(alpha, nu).unwrap();
            let x = t.terms(&p).unwrap();
            let lit = x.i - x.ii / (1.0 - alpha) + alpha * x.iii / (1.0 - alpha);
            assert!((lit - renyi_from_totals(&t, &p).unwrap().value).abs() < 1e-12);
        }
        let p = IndexParams::with(1.0, 2.0).unwrap();
        let x = t.terms(&p).unwrap();
        assert!((x.i - x.iv - x.iii - renyi_from_totals(&t, &p).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn rank_complements_match_ranks() {
        let t = survey_totals(&small()).unwrap();
        let ranks = crate::index::ranks_from_shares(
            &t.u0.iter().map(|u| u / t.u0_total).collect::<Vec<_>>(),
        )
        .unwrap();
        for (c, r) in t.rank_complements().iter().zip(ranks) {
            assert!((c - (1.0 - r)).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_stratum_is_design_error() {
        let rows = vec![rec("1", "1", 1.0, 1.0, 0), rec("1", "1", 1.0, 0.0, 1)];
        let d = SurveyMicrodata::new(rows, labels(2)).unwrap();
        assert!(matches!(
            linearized_variance(&d, &IndexParams::with(2.0, 1.0).unwrap()),
            Err(DisparityError::DesignError(_))
        ));
    }

    #[test]
    fn identical_rates_give_zero_se() {
        let rows = (0..16)
            .map(|i| rec(&(i / 8).to_string(), &((i / 4) % 2).to_string(), 1.0 + i as f64, 1.0, i % 4))
            .collect();
        let d = SurveyMicrodata::new(rows, labels(4)).unwrap();
        let est = linearized_variance(&d, &IndexParams::with(2.0, 2.0).unwrap()).unwrap();
        assert_eq!(est.value.value, 0.0);
        assert!(est.std_error < 1e-12);
    }

    #[test]
    fn weight_rescaling_leaves_se() {
        let d = small();
        let p = IndexParams::with(2.0, 2.0).unwrap();
        let a = linearized_variance(&d, &p).unwrap().std_error;
        let b = linearized_variance(&d.with_scaled_weights(37.5).unwrap(), &p).unwrap().std_error;
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn cluster_order_ignores_record_order() {
        let d = small();
        let mut rows = d.records().to_vec();
        rows.reverse();
        let r = SurveyMicrodata::new(rows, labels(3)).unwrap();
        assert_eq!(d.strata(), r.strata());
        assert_eq!(d.clusters_per_stratum(), r.clusters_per_stratum());
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let mut v = vec!["10", "2", "a", "1"];
        v.sort_by(|a, b| label_cmp(a, b));
        assert_eq!(v, vec!["1", "2", "10", "a"]);
    }

    #[test]
    fn empty_groups_dropped() {
        let rows = vec![
            rec("1", "1", 1.0, 1.0, 0),
            rec("1", "2", 1.0, 0.0, 2),
        ];
        let d = SurveyMicrodata::new(rows, labels(3)).unwrap();
        let (c, dropped) = d.without_empty_groups().unwrap();
        assert_eq!(dropped, vec![1]);
        assert_eq!(c.group_labels(), &["g1".to_string(), "g3".to_string()]);
    }

    #[test]
    fn partials_match_central_differences() {
        let t = survey_totals(&small()).unwrap();
        for (alpha, nu) in [(0.0, 2.0), (0.5, 1.0), (1.0, 1.0), (1.0, 3.0), (2.0, 2.0), (4.5, 3.5)] {
            let p = IndexParams::with(alpha, nu).unwrap();
            let g = totals_partials(&t, &p).unwrap();
            let ri = |u0: &[f64], u1: &[f64]| {
                let t = TotalsDecomposition::from_group_totals(u0.to_vec(), u1.to_vec()).unwrap();
                renyi_from_totals(&t, &p).unwrap().value
            };
            for k in 0..t.len() {
                for which in 0..2 {
                    let (mut a, mut b) = ((t.u0.clone(), t.u1.clone()), (t.u0.clone(), t.u1.clone()));
                    let base = if which == 0 { t.u0[k] } else { t.u1[k] };
                    let h = 1e-5 * base;
                    if which == 0 {
                        a.0[k] += h;
                        b.0[k] -= h;
                    } else {
                        a.1[k] += h;
                        b.1[k] -= h;
                    }
                    let fd = (ri(&a.0, &a.1) - ri(&b.0, &b.1)) / (2.0 * h);
                    let an = if which == 0 { g.d_u0[k] } else { g.d_u1[k] };
                    assert!(
                        (fd - an).abs() <= 1e-6 * an.abs().max(1e-4),
                        "alpha {alpha} nu {nu} k {k} which {which}: {fd} vs {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn group_mean_se_matches_hand_computation() {
        // One stratum, two clusters, one group: SE of a ratio mean.
        let rows = vec![
            rec("1", "a", 1.0, 1.0, 0),
            rec("1", "a", 1.0, 0.0, 0),
            rec("1", "b", 1.0, 1.0, 0),
            rec("1", "b", 1.0, 1.0, 0),
        ];
        let d = SurveyMicrodata::new(rows, labels(1)).unwrap();
        let se = group_mean_std_errors(&d).unwrap()[0];
        // mean 0.75; scores (1 - 1.5)/4 and (2 - 1.5)/4; variance 2 * 2 * 0.125^2
        assert!((se - (4.0f64 * 0.015625).sqrt()).abs() < 1e-15);
    }
}
