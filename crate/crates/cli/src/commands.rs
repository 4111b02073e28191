use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rank_disparity::inference::{
    delta_method_variance, difference_test, linearized_variance, IndexEstimate, InferenceMethod,
    Interval, SurveyMicrodata,
};
use rank_disparity::io::{
    emit_results, fixture, fixture_set, load_fixture, read_grouped_csv,
    read_microdata_csv, synthesize_microdata, write_microdata_csv, DesignSpec, GroupedTable,
    ResultRow, FIXTURES,
};
use rank_disparity::resampling::{
    bootstrap_difference, poisson_null_test, rescaled_bootstrap, BootstrapConfig, NullSimConfig,
};
use rank_disparity::sweep::{linear_grid, SweepGrid};
use rank_disparity::{Aversion, DisparityError, IndexParams, Result};

use crate::{ComputeArgs, FixturesArgs, InferArgs, InputArgs, OutputArgs, SweepArgs, SynthArgs};

struct Named<T> {
    name: String,
    data: T,
}

fn usage(msg: impl Into<String>) -> DisparityError {
    DisparityError::InvalidInput(msg.into())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn fixture_names(names: &[String]) -> Result<Vec<&'static str>> {
    let mut out = Vec::new();
    for n in names {
        match fixture(n) {
            Ok(f) => out.push(f.name),
            Err(e) => {
                let set = fixture_set(n);
                if set.is_empty() {
                    return Err(e);
                }
                out.extend(set.iter().map(|f| f.name));
            }
        }
    }
    Ok(out)
}

fn grouped_inputs(input: &InputArgs) -> Result<Vec<Named<GroupedTable>>> {
    let mut out = Vec::new();
    for path in &input.data {
        out.push(Named {
            name: stem(path),
            data: read_grouped_csv(path)?,
        });
    }
    for name in fixture_names(&input.fixture)? {
        out.push(Named {
            name: name.to_string(),
            data: load_fixture(name)?,
        });
    }
    if out.is_empty() {
        return Err(usage("no input: give --data or --fixture"));
    }
    Ok(out)
}

fn microdata_inputs(input: &InputArgs, method: InferenceMethod) -> Result<Vec<Named<SurveyMicrodata>>> {
    if !input.fixture.is_empty() {
        return Err(usage(format!(
            "--method {method} needs survey microdata (stratum, psu, weight, y, group); \
             fixtures are grouped tables. Generate microdata with `synth` first"
        )));
    }
    if input.data.is_empty() {
        return Err(usage("no input: give --data with a microdata file"));
    }
    input
        .data
        .iter()
        .map(|p| {
            Ok(Named {
                name: stem(p),
                data: read_microdata_csv(p)?,
            })
        })
        .collect()
}

fn writer(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(rows: &[ResultRow], out: &OutputArgs) -> Result<()> {
    emit_results(rows, out.format, writer(out.output.as_ref())?)
}

fn check_units(datasets: &[Named<GroupedTable>], grid: &SweepGrid) -> Result<()> {
    if !grid.kinds.iter().any(|k| k.carries_units()) {
        return Ok(());
    }
    let first = datasets[0].data.dist.units();
    if let Some(other) = datasets.iter().find(|d| d.data.dist.units() != first) {
        return Err(usage(format!(
            "achievement indices are in outcome units; '{}' ({}) and '{}' ({}) are not comparable",
            datasets[0].name,
            first,
            other.name,
            other.data.dist.units()
        )));
    }
    Ok(())
}

fn run_grid(input: &InputArgs, grid: &SweepGrid, out: &OutputArgs) -> Result<()> {
    let datasets = grouped_inputs(input)?;
    check_units(&datasets, grid)?;
    let refs: Vec<(&str, &rank_disparity::GroupedDistribution)> =
        datasets.iter().map(|d| (d.name.as_str(), &d.data.dist)).collect();
    let rows = rank_disparity::sweep::sweep(&refs, grid)?;
    emit(&rows, out)
}

pub fn compute(a: ComputeArgs) -> Result<()> {
    let mut grid = SweepGrid::new(a.kinds, a.alpha, a.nu);
    grid.reference = a.reference;
    run_grid(&a.input, &grid, &a.output)
}

fn parse_grid(spec: &str) -> Result<Vec<Aversion>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("bad --alpha-grid '{spec}', expected lo:hi:step")))?;
    if nums.len() != 3 {
        return Err(usage(format!("bad --alpha-grid '{spec}', expected lo:hi:step")));
    }
    Ok(linear_grid(nums[0], nums[1], nums[2])?.into_iter().map(Aversion::Finite).collect())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let alphas = if a.alpha.is_empty() {
        parse_grid(&a.alpha_grid)?
    } else {
        a.alpha
    };
    let mut grid = SweepGrid::new(a.kinds, alphas, a.nu);
    grid.reference = a.reference;
    run_grid(&a.input, &grid, &a.output)
}

fn param_grid(a: &InferArgs) -> Result<Vec<IndexParams>> {
    let mut out = Vec::new();
    for nu in &a.nu {
        for alpha in &a.alpha {
            if alpha.is_infinite() || nu.is_infinite() {
                return Err(usage("inference is only available for finite alpha and nu"));
            }
            out.push(IndexParams::new(alpha.as_f64(), nu.as_f64(), a.reference)?);
        }
    }
    Ok(out)
}

fn pair_name(x: &str, y: &str) -> String {
    format!("{x}-vs-{y}")
}

/// Row for `first − second`, labelled with the parameters of `first`.
fn difference_row(
    name: String,
    first: &IndexEstimate,
    difference: f64,
    std_error: f64,
    interval: Interval,
    p_value: f64,
) -> ResultRow {
    let mut row = ResultRow::estimate(name, first).with_p_value(p_value);
    row.kind = format!("{}-difference", row.kind);
    row.value = difference;
    row.se = Some(std_error);
    row.ci_lo = Some(interval.lo);
    row.ci_hi = Some(interval.hi);
    row
}

fn infer_grouped(a: &InferArgs, params: &[IndexParams]) -> Result<Vec<ResultRow>> {
    let datasets = grouped_inputs(&a.input)?;
    let run_estimates = a.method == InferenceMethod::DeltaMethod;
    let null_test = a.null_test || a.method == InferenceMethod::NullSimulation;
    let mut rows = Vec::new();
    for p in params {
        let mut estimates = Vec::new();
        for d in &datasets {
            if run_estimates || a.compare {
                let variances = d.data.outcome_variances()?;
                let e = delta_method_variance(&d.data.dist, &variances, p)?.at_level(a.level)?;
                if run_estimates {
                    rows.push(ResultRow::estimate(&d.name, &e));
                }
                estimates.push(e);
            }
            if null_test {
                let cfg = NullSimConfig::new(a.replicates, a.seed);
                let r = poisson_null_test(&d.data.registry_rates()?, &d.data.dist, p, &cfg)?;
                info!("{}: null test p = {}", d.name, r.p_value);
                rows.push(
                    ResultRow::point(&d.name, &r.observed)
                        .with_method(InferenceMethod::NullSimulation.name())
                        .with_p_value(r.p_value),
                );
            }
        }
        if a.compare {
            for i in 0..datasets.len() {
                for j in i + 1..datasets.len() {
                    let t = difference_test(&estimates[i], &estimates[j])?;
                    rows.push(difference_row(
                        pair_name(&datasets[i].name, &datasets[j].name),
                        &estimates[i],
                        t.difference,
                        t.std_error,
                        t.interval,
                        t.p_value,
                    ));
                }
            }
        }
    }
    Ok(rows)
}

fn infer_survey(a: &InferArgs, params: &[IndexParams]) -> Result<Vec<ResultRow>> {
    if a.null_test {
        return Err(usage(
            "--null-test needs grouped registry rates (--method delta or null-simulation)",
        ));
    }
    let datasets = microdata_inputs(&a.input, a.method)?;
    let cfg = BootstrapConfig {
        replicates: a.replicates,
        seed: a.seed,
        interval: a.interval,
        level: a.level,
    };
    let mut rows = Vec::new();
    for p in params {
        let mut estimates = Vec::new();
        for d in &datasets {
            let e = match a.method {
                InferenceMethod::Bootstrap => {
                    let r = rescaled_bootstrap(&d.data, p, &cfg)?;
                    if r.replicates_with_dropped_groups > 0 {
                        log::warn!(
                            "{}: {} bootstrap replicates dropped an empty group",
                            d.name,
                            r.replicates_with_dropped_groups
                        );
                    }
                    r.estimate
                }
                _ => linearized_variance(&d.data, p)?.at_level(a.level)?,
            };
            rows.push(ResultRow::estimate(&d.name, &e));
            estimates.push(e);
        }
        if a.compare {
            for i in 0..datasets.len() {
                for j in i + 1..datasets.len() {
                    let name = pair_name(&datasets[i].name, &datasets[j].name);
                    let row = if a.method == InferenceMethod::Bootstrap {
                        let d = bootstrap_difference(&datasets[i].data, &datasets[j].data, p, &cfg)?;
                        difference_row(name, &estimates[i], d.difference, d.std_error, d.interval, d.p_value)
                    } else {
                        let t = difference_test(&estimates[i], &estimates[j])?;
                        difference_row(name, &estimates[i], t.difference, t.std_error, t.interval, t.p_value)
                    };
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

pub fn infer(a: InferArgs) -> Result<()> {
    let params = param_grid(&a)?;
    let rows = match a.method {
        InferenceMethod::Linearization | InferenceMethod::Bootstrap => infer_survey(&a, &params)?,
        InferenceMethod::DeltaMethod | InferenceMethod::NullSimulation => infer_grouped(&a, &params)?,
    };
    emit(&rows, &a.output)
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let mut datasets = grouped_inputs(&a.input)?;
    if datasets.len() != 1 {
        return Err(usage("synth takes exactly one grouped input"));
    }
    let margins = datasets.remove(0);
    let d = DesignSpec::default();
    let spec = DesignSpec {
        strata: a.strata.unwrap_or(d.strata),
        clusters_per_stratum: a.clusters.unwrap_or(d.clusters_per_stratum),
        obs_per_cluster: a.obs_per_cluster.unwrap_or(d.obs_per_cluster),
        stratum_sd: a.stratum_sd.unwrap_or(d.stratum_sd),
        cluster_sd: a.cluster_sd.unwrap_or(d.cluster_sd),
        calibrate: !a.no_calibrate,
        ..d
    };
    let data = synthesize_microdata(&margins.data.dist, &spec, a.seed)?;
    write_microdata_csv(&data, writer(a.output.as_ref())?)
}

pub fn fixtures(a: FixturesArgs) -> Result<()> {
    let mut w = writer(a.output.as_ref())?;
    match a.name {
        Some(name) => {
            let f = fixture(&name)?;
            load_fixture(&name)?;
            w.write_all(f.csv.as_bytes())?;
        }
        None => {
            writeln!(w, "name,sha256,checksum_ok,description")?;
            for f in FIXTURES {
                writeln!(
                    w,
                    "{},{},{},\"{}\"",
                    f.name,
                    f.sha256,
                    f.checksum_matches(),
                    f.description
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

