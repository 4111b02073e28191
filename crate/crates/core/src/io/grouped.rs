use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::format::{format_exact, parse_float};
use crate::error::{DisparityError, Result};
use crate::index::{GroupRecord, GroupedDistribution};
use crate::inference::{registry_moments, RegistryRates};

/// A parsed grouped-rate table: the distribution plus whatever inference
/// inputs the file carried.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedTable {
    pub dist: GroupedDistribution,
    /// Standard errors of the group outcomes, when an `se` column is present.
    pub std_errors: Option<Vec<f64>>,
    /// Age-stratified rates, when `age_k_rate`/`age_k_n` columns are present.
    pub age_rates: Option<RegistryRates>,
}

impl GroupedTable {
    pub fn new(dist: GroupedDistribution) -> Self {
        Self {
            dist,
            std_errors: None,
            age_rates: None,
        }
    }

    pub fn with_std_errors(mut self, se: Vec<f64>) -> Self {
        self.std_errors = Some(se);
        self
    }

    /// Registry rates for the delta method and the null test: the age strata
    /// when present, otherwise one pseudo stratum recovered from the outcome
    /// and its standard error.
    pub fn registry_rates(&self) -> Result<RegistryRates> {
        if let Some(r) = &self.age_rates {
            return Ok(r.clone());
        }
        match &self.std_errors {
            Some(se) => RegistryRates::from_mean_se(&self.dist.means(), se),
            None => Err(DisparityError::InvalidInput(
                "table has neither standard errors nor age-stratified rates".into(),
            )),
        }
    }

    /// Outcome variances: from the age strata when present, else `se²`.
    pub fn outcome_variances(&self) -> Result<Vec<f64>> {
        if let Some(r) = &self.age_rates {
            return Ok(registry_moments(r).1);
        }
        match &self.std_errors {
            Some(se) => Ok(se.iter().map(|s| s * s).collect()),
            None => Err(DisparityError::InvalidInput(
                "table has neither standard errors nor age-stratified rates".into(),
            )),
        }
    }
}

/// `# key=value` lines before the header.
fn metadata(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map(str::trim)
        .take_while(|l| l.is_empty() || l.starts_with('#'))
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
        .collect()
}

fn read_text<R: Read>(mut reader: R) -> Result<String> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|_| DisparityError::parse(0, "input is not UTF-8"))?;
    Ok(text.strip_prefix('\u{feff}').unwrap_or(&text).to_string())
}

pub(crate) fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(e: csv::Error) -> DisparityError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    DisparityError::parse(row, e.to_string())
}

struct Columns {
    group: usize,
    order: usize,
    share: Option<usize>,
    count: Option<usize>,
    mean: usize,
    se: Option<usize>,
    /// (rate column, denominator column) per age stratum
    ages: Vec<(usize, usize)>,
}

fn columns(headers: &csv::StringRecord, row: usize) -> Result<Columns> {
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let find = |n: &str| names.iter().position(|h| h == n);
    let need = |n: &str| find(n).ok_or_else(|| DisparityError::parse(row, format!("missing column '{n}'")));
    let mut age_rate = BTreeMap::new();
    let mut age_n = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        let known = ["group", "order", "share", "count", "mean", "se"].contains(&n.as_str());
        if known {
            continue;
        }
        let parsed = n.strip_prefix("age_").and_then(|rest| {
            let (k, kind) = rest.split_once('_')?;
            Some((k.parse::<usize>().ok()?, kind))
        });
        match parsed {
            Some((k, "rate")) => {
                age_rate.insert(k, i);
            }
            Some((k, "n")) => {
                age_n.insert(k, i);
            }
            _ => return Err(DisparityError::parse(row, format!("unknown column '{n}'"))),
        }
    }
    if age_rate.keys().ne(age_n.keys()) {
        return Err(DisparityError::parse(row, "age columns must come in rate/n pairs"));
    }
    let (share, count) = (find("share"), find("count"));
    match (share, count) {
        (Some(_), Some(_)) => {
            return Err(DisparityError::parse(row, "file mixes share and count columns"))
        }
        (None, None) => return Err(DisparityError::parse(row, "missing column 'share' or 'count'")),
        _ => {}
    }
    Ok(Columns {
        group: need("group")?,
        order: need("order")?,
        share,
        count,
        mean: need("mean")?,
        se: find("se"),
        ages: age_rate.iter().map(|(k, &r)| (r, age_n[k])).collect(),
    })
}

fn number(record: &csv::StringRecord, idx: usize, name: &str, row: usize) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("");
    let v = parse_float(raw)
        .filter(|v| v.is_finite())
        .ok_or_else(|| DisparityError::parse(row, format!("{name}: '{raw}' is not a number")))?;
    if v < 0.0 {
        return Err(DisparityError::parse(row, format!("{name} is negative ({raw})")));
    }
    Ok(v)
}

struct Row {
    label: String,
    order: f64,
    size: f64,
    count: Option<u64>,
    mean: f64,
    se: Option<f64>,
    rates: Vec<f64>,
    denominators: Vec<f64>,
    line: usize,
}

/// Parses `group,order,share|count,mean[,se][,age_k_rate,age_k_n ...]`.
/// Leading `# units=...` and `# age_weights=w1,w2,...` lines carry metadata.
pub fn parse_grouped_csv<R: Read>(reader: R) -> Result<GroupedTable> {
    let text = read_text(reader)?;
    let meta = metadata(&text);
    let mut rdr = csv_reader(&text);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let header_line = headers.position().map_or(1, |p| p.line() as usize);
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(DisparityError::parse(header_line, "empty input"));
    }
    let cols = columns(&headers, header_line)?;

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        let label = rec.get(cols.group).unwrap_or("").to_string();
        if label.is_empty() {
            return Err(DisparityError::parse(line, "empty group label"));
        }
        let order_raw = rec.get(cols.order).unwrap_or("");
        let order = parse_float(order_raw)
            .filter(|v| v.is_finite())
            .ok_or_else(|| DisparityError::parse(line, format!("order: '{order_raw}' is not a number")))?;
        let (size, count) = match (cols.share, cols.count) {
            (Some(i), _) => {
                let p = number(&rec, i, "share", line)?;
                if p == 0.0 {
                    return Err(DisparityError::parse(line, "share must be positive"));
                }
                (p, None)
            }
            (_, Some(i)) => {
                let raw = rec.get(i).unwrap_or("");
                let c: u64 = raw.parse().map_err(|_| {
                    DisparityError::parse(line, format!("count: '{raw}' is not a positive integer"))
                })?;
                if c == 0 {
                    return Err(DisparityError::parse(line, "count must be positive"));
                }
                (c as f64, Some(c))
            }
            _ => unreachable!(),
        };
        let mean = number(&rec, cols.mean, "mean", line)?;
        let se = cols.se.map(|i| number(&rec, i, "se", line)).transpose()?;
        let mut rates = Vec::new();
        let mut denominators = Vec::new();
        for (k, &(ri, ni)) in cols.ages.iter().enumerate() {
            rates.push(number(&rec, ri, &format!("age {} rate", k + 1), line)?);
            let n = number(&rec, ni, &format!("age {} n", k + 1), line)?;
            if n == 0.0 {
                return Err(DisparityError::parse(line, format!("age {} n must be positive", k + 1)));
            }
            denominators.push(n);
        }
        rows.push(Row {
            label,
            order,
            size,
            count,
            mean,
            se,
            rates,
            denominators,
            line,
        });
    }
    if rows.is_empty() {
        return Err(DisparityError::parse(header_line, "no data rows"));
    }
    for (i, r) in rows.iter().enumerate() {
        if rows[..i].iter().any(|q| q.order == r.order) {
            return Err(DisparityError::parse(r.line, format!("duplicate order key {}", r.order)));
        }
    }
    rows.sort_by(|a, b| a.order.total_cmp(&b.order));

    if cols.share.is_some() {
        let total: f64 = rows.iter().map(|r| r.size).sum();
        if (total - 1.0).abs() > 1e-12 {
            log::warn!("group shares sum to {total}; normalizing");
        }
    }
    let groups = rows
        .iter()
        .map(|r| {
            let g = GroupRecord::new(r.label.clone(), r.size, r.mean);
            match r.count {
                Some(c) => g.with_count(c),
                None => g,
            }
        })
        .collect();
    let units = meta.get("units").cloned().unwrap_or_default();
    let dist = GroupedDistribution::new(groups, units)
        .map_err(|e| DisparityError::parse(header_line, e.to_string()))?;

    let age_rates = if cols.ages.is_empty() {
        None
    } else {
        let raw = meta.get("age_weights").ok_or_else(|| {
            DisparityError::parse(header_line, "age columns need a '# age_weights=' line")
        })?;
        let weights = raw
            .split(',')
            .map(|w| parse_float(w).filter(|v| v.is_finite() && *v >= 0.0))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| DisparityError::parse(0, format!("bad age weights '{raw}'")))?;
        if weights.len() != cols.ages.len() {
            return Err(DisparityError::parse(
                header_line,
                format!("{} age weights for {} age strata", weights.len(), cols.ages.len()),
            ));
        }
        let reg = RegistryRates::new(
            weights,
            rows.iter().map(|r| r.rates.clone()).collect(),
            rows.iter().map(|r| r.denominators.clone()).collect(),
        )
        .map_err(|e| DisparityError::parse(header_line, e.to_string()))?;
        let (adjusted, _) = registry_moments(&reg);
        for (r, a) in rows.iter().zip(&adjusted) {
            if (r.mean - a).abs() > 1e-6 * a.abs().max(1.0) {
                log::warn!(
                    "group {}: mean {} differs from age-adjusted rate {a}",
                    r.label,
                    r.mean
                );
            }
        }
        Some(reg)
    };

    Ok(GroupedTable {
        dist,
        std_errors: cols.se.map(|_| rows.iter().map(|r| r.se.unwrap_or(0.0)).collect()),
        age_rates,
    })
}

pub fn read_grouped_csv(path: impl AsRef<Path>) -> Result<GroupedTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| DisparityError::Io(format!("{}: {e}", path.display())))?;
    parse_grouped_csv(file)
}

/// Writes the table in the format read by [`parse_grouped_csv`], with
/// normalized shares and order keys `1..M`.
pub fn write_grouped_csv<W: Write>(table: &GroupedTable, mut writer: W) -> Result<()> {
    if !table.dist.units().is_empty() {
        writeln!(writer, "# units={}", table.dist.units())?;
    }
    if let Some(r) = &table.age_rates {
        let w: Vec<String> = r.age_weights().iter().map(|&w| format_exact(w)).collect();
        writeln!(writer, "# age_weights={}", w.join(","))?;
    }
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["group".to_string(), "order".into(), "share".into(), "mean".into()];
    if table.std_errors.is_some() {
        header.push("se".into());
    }
    let n_age = table.age_rates.as_ref().map_or(0, |r| r.age_weights().len());
    for k in 1..=n_age {
        header.push(format!("age_{k}_rate"));
        header.push(format!("age_{k}_n"));
    }
    out.write_record(&header).map_err(|e| DisparityError::Io(e.to_string()))?;
    for (j, g) in table.dist.groups().iter().enumerate() {
        let mut rec = vec![
            g.label.clone(),
            (j + 1).to_string(),
            format_exact(g.share),
            format_exact(g.mean_outcome),
        ];
        if let Some(se) = &table.std_errors {
            rec.push(format_exact(se[j]));
        }
        if let Some(r) = &table.age_rates {
            for k in 0..n_age {
                rec.push(format_exact(r.rates()[j][k]));
                rec.push(format_exact(r.denominators()[j][k]));
            }
        }
        out.write_record(&rec).map_err(|e| DisparityError::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<GroupedTable> {
        parse_grouped_csv(s.as_bytes())
    }

    const POP1: &str = "group,order,share,mean\nPoor,1,0.05,30\nNear poor,2,0.15,20\nMiddle income,3,0.60,15\nHigh income,4,0.20,5\n";

    #[test]
    fn hypothetical_population() {
        let t = parse(POP1).unwrap();
        assert_eq!(t.dist.shares(), vec![0.05, 0.15, 0.6, 0.2]);
        assert_eq!(t.dist.means(), vec![30.0, 20.0, 15.0, 5.0]);
        assert_eq!(t.dist.labels()[0], "Poor");
    }

    #[test]
    fn rows_sorted_by_order() {
        let t = parse("group,order,share,mean\nb,2,0.5,1\na,1,0.5,2\n").unwrap();
        assert_eq!(t.dist.labels(), vec!["a", "b"]);
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse(""), Err(DisparityError::ParseError { .. })));
        assert!(matches!(parse("group,order,share,mean\n"), Err(DisparityError::ParseError { .. })));
    }

    #[test]
    fn error_rows() {
        let dup = parse("group,order,share,mean\na,1,0.5,1\nb,1,0.5,2\n");
        assert_eq!(dup.unwrap_err(), DisparityError::parse(3, "duplicate order key 1"));
        match parse("group,order,share,mean\na,1,0.5,1\nb,2,-0.5,2\n") {
            Err(DisparityError::ParseError { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        match parse("group,order,share,count,mean\na,1,0.5,3,1\n") {
            Err(DisparityError::ParseError { row, message }) => {
                assert_eq!(row, 1);
                assert!(message.contains("mixes"));
            }
            other => panic!("{other:?}"),
        }
        match parse("group,order,share,mean\na,1,0.5,1\nb,2,0.5,-2\n") {
            Err(DisparityError::ParseError { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comment_lines_count_toward_row_numbers() {
        match parse("# units=percent\ngroup,order,share,mean\na,1,0.5,1\nb,2,0.5,x\n") {
            Err(DisparityError::ParseError { row, .. }) => assert_eq!(row, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn crlf_and_counts() {
        let t = parse("group,order,count,mean\r\na,1,30,1.5\r\nb,2,70,0.5\r\n").unwrap();
        assert_eq!(t.dist.shares(), vec![0.3, 0.7]);
        assert_eq!(t.dist.groups()[1].count, Some(70));
    }

    #[test]
    fn display_rounded_shares_normalized() {
        let t = parse(
            "group,order,share,mean\n1,1,0.241,17.9\n2,2,0.242,16.7\n3,3,0.291,17.8\n4,4,0.095,13.1\n5,5,0.132,9.8\n",
        )
        .unwrap();
        assert!((t.dist.raw_share_total() - 1.001).abs() < 1e-12);
        assert!((t.dist.shares().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn age_columns() {
        let text = "# age_weights=0.25,0.75\ngroup,order,share,mean,age_1_rate,age_1_n,age_2_rate,age_2_n\na,1,0.5,3.5,2,10,4,20\nb,2,0.5,1.75,1,5,2,8\n";
        let t = parse(text).unwrap();
        let r = t.registry_rates().unwrap();
        let (m, v) = registry_moments(&r);
        assert!((m[0] - 3.5).abs() < 1e-12 && (m[1] - 1.75).abs() < 1e-12);
        assert!((v[0] - (0.0625 * 2.0 / 10.0 + 0.5625 * 4.0 / 20.0)).abs() < 1e-15);
        assert!(parse(&text.replace("# age_weights=0.25,0.75\n", "")).is_err());
    }

    #[test]
    fn round_trip() {
        let text = "# units=per-100k\ngroup,order,share,mean,se\nq5,1,0.104,9.6,0.484\nq4,2,0.267,8.9,0.285\nq3,3,0.159,7.5,0.339\nq2,4,0.179,7.5,0.314\nq1,5,0.292,6.4,0.226\n";
        let t = parse(text).unwrap();
        let mut buf = Vec::new();
        write_grouped_csv(&t, &mut buf).unwrap();
        let back = parse_grouped_csv(buf.as_slice()).unwrap();
        assert_eq!(back.dist.units(), "per-100k");
        for (a, b) in t.dist.groups().iter().zip(back.dist.groups()) {
            assert!((a.share - b.share).abs() <= 1e-10 * a.share);
            assert!((a.mean_outcome - b.mean_outcome).abs() <= 1e-10 * a.mean_outcome);
            assert_eq!(a.label, b.label);
        }
        assert_eq!(t.std_errors, back.std_errors);
    }
}
