use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use rank_disparity::inference::RegistryRates;
use rank_disparity::io::{load_fixture, synthesize_microdata, DesignSpec};
use rank_disparity::resampling::{bootstrap_difference, poisson_null_test, BootstrapConfig, NullSimConfig};
use rank_disparity::{GroupedDistribution, IndexParams};

const SEER: [&str; 5] = ["seer-2006", "seer-2007", "seer-2008", "seer-2009", "seer-2010"];

fn grid() -> Vec<IndexParams> {
    let mut out = Vec::new();
    for nu in [1.0, 3.0] {
        for alpha in [1.0, 2.0, 4.0] {
            out.push(IndexParams::with(alpha, nu).unwrap());
        }
    }
    out
}

#[test]
fn seer_observed_above_null_upper_percentile() {
    for year in SEER {
        let t = load_fixture(year).unwrap();
        let rates = t.registry_rates().unwrap();
        for p in grid() {
            let r = poisson_null_test(&rates, &t.dist, &p, &NullSimConfig::new(1000, 0)).unwrap();
            let mut null = r.null_values.clone();
            null.sort_by(f64::total_cmp);
            let q975 = null[(0.975 * null.len() as f64) as usize];
            assert!(r.observed.value > q975, "{year} {p:?}: {} vs {q975}", r.observed.value);
        }
    }
}

#[test]
fn doubling_null_replicates_is_stable() {
    for year in SEER {
        let t = load_fixture(year).unwrap();
        let rates = t.registry_rates().unwrap();
        for p in grid() {
            let a = poisson_null_test(&rates, &t.dist, &p, &NullSimConfig::new(1000, 3)).unwrap();
            let b = poisson_null_test(&rates, &t.dist, &p, &NullSimConfig::new(2000, 3)).unwrap();
            assert!((a.p_value - b.p_value).abs() < 0.02, "{year} {p:?}: {} vs {}", a.p_value, b.p_value);
        }
    }
}

/// Data drawn under the null: p-values spread over (0, 1] with mean near
/// one half. Exactly equal observed rates give RI = 0 and p = 1 instead.
#[test]
fn null_consistent_data_gives_central_p() {
    let t = load_fixture("seer-2010").unwrap();
    let base = t.registry_rates().unwrap();
    let shares = t.dist.shares();
    let pooled: f64 = shares.iter().zip(t.dist.means()).map(|(p, y)| p * y).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let p = IndexParams::with(2.0, 3.0).unwrap();
    let mut pvals = Vec::new();
    for s in 0..100 {
        let rates: Vec<Vec<f64>> = base
            .denominators()
            .iter()
            .map(|n| {
                n.iter()
                    .map(|&n| Poisson::new(pooled * n).unwrap().sample(&mut rng) / n)
                    .collect()
            })
            .collect();
        let r = RegistryRates::new(base.age_weights().to_vec(), rates, base.denominators().to_vec()).unwrap();
        let (means, _) = rank_disparity::inference::registry_moments(&r);
        let dist = t.dist.with_means(&means).unwrap();
        pvals.push(poisson_null_test(&r, &dist, &p, &NullSimConfig::new(199, s)).unwrap().p_value);
    }
    let mean = pvals.iter().sum::<f64>() / pvals.len() as f64;
    let rejections = pvals.iter().filter(|&&p| p < 0.05).count();
    assert!((0.4..=0.6).contains(&mean), "mean p {mean}");
    assert!(rejections <= 12, "{rejections} rejections at 5%");
}

fn nhanes_margins(name: &str) -> GroupedDistribution {
    load_fixture(name).unwrap().dist
}

#[test]
fn shifted_low_ses_rates_are_detected() {
    let a_margins = nhanes_margins("nhanes-2009-2010");
    let mut shifted = a_margins.means();
    shifted[0] *= 1.5;
    shifted[1] *= 1.5;
    let b_margins = a_margins.with_means(&shifted).unwrap();
    let spec = DesignSpec::default();
    let a = synthesize_microdata(&a_margins, &spec, 1).unwrap();
    let b = synthesize_microdata(&b_margins, &spec, 2).unwrap();
    let d = bootstrap_difference(&b, &a, &IndexParams::with(2.0, 2.0).unwrap(), &BootstrapConfig::new(1000, 0)).unwrap();
    assert!(d.difference > 0.0);
    assert!(d.interval.lo > 0.0, "{:?}", d.interval);
    assert!(d.p_value < 0.05);
}

#[test]
fn adjacent_nhanes_periods_do_not_differ() {
    let periods = ["nhanes-2001-2004", "nhanes-2005-2008", "nhanes-2009-2010"];
    let spec = DesignSpec::default();
    let data: Vec<_> = periods
        .iter()
        .enumerate()
        .map(|(k, n)| synthesize_microdata(&nhanes_margins(n), &spec, 100 + k as u64).unwrap())
        .collect();
    for p in grid() {
        for k in 0..2 {
            let d = bootstrap_difference(&data[k], &data[k + 1], &p, &BootstrapConfig::new(1000, 0)).unwrap();
            assert!(d.p_value > 0.05, "{} vs {} {p:?}: p = {}", periods[k], periods[k + 1], d.p_value);
        }
    }
}
