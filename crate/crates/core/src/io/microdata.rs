use std::io::{Read, Write};
use std::path::Path;

use super::format::{format_exact, parse_float};
use super::grouped::csv_reader;
use crate::error::{DisparityError, Result};
use crate::inference::{SurveyMicrodata, SurveyRecord};

/// Parses `stratum,psu,weight,y,group` (`cluster` is accepted for `psu`).
/// `group` is the 1-based SES position, lowest first; a leading
/// `# groups=label1,label2,...` line names the groups.
pub fn parse_microdata_csv<R: Read>(mut reader: R) -> Result<SurveyMicrodata> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| DisparityError::parse(0, e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let labels_meta: Option<Vec<String>> = text
        .lines()
        .map(str::trim)
        .take_while(|l| l.is_empty() || l.starts_with('#'))
        .filter_map(|l| l.strip_prefix('#')?.trim().strip_prefix("groups="))
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
        .next();

    let mut rdr = csv_reader(text);
    let headers = rdr
        .headers()
        .map_err(|e| DisparityError::parse(1, e.to_string()))?
        .clone();
    let header_line = headers.position().map_or(1, |p| p.line() as usize);
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let find = |alts: &[&str]| names.iter().position(|h| alts.contains(&h.as_str()));
    let need = |alts: &[&str]| {
        find(alts).ok_or_else(|| DisparityError::parse(header_line, format!("missing column '{}'", alts[0])))
    };
    let c_stratum = need(&["stratum"])?;
    let c_psu = need(&["psu", "cluster"])?;
    let c_weight = need(&["weight"])?;
    let c_y = need(&["y"])?;
    let c_group = need(&["group"])?;

    let mut records = Vec::new();
    let mut max_group = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            DisparityError::parse(e.position().map_or(0, |p| p.line() as usize), e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let weight = parse_float(field(c_weight))
            .ok_or_else(|| DisparityError::parse(line, format!("weight '{}' is not a number", field(c_weight))))?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(DisparityError::parse(line, format!("weight must be positive, got {weight}")));
        }
        let y = parse_float(field(c_y))
            .filter(|v| v.is_finite())
            .ok_or_else(|| DisparityError::parse(line, format!("y '{}' is not a number", field(c_y))))?;
        if y < 0.0 {
            return Err(DisparityError::parse(line, format!("y is negative ({y})")));
        }
        let group: usize = field(c_group)
            .parse()
            .ok()
            .filter(|&g| g >= 1)
            .ok_or_else(|| DisparityError::parse(line, format!("group '{}' is not a positive integer", field(c_group))))?;
        if field(c_stratum).is_empty() || field(c_psu).is_empty() {
            return Err(DisparityError::parse(line, "empty stratum or psu"));
        }
        max_group = max_group.max(group);
        records.push(SurveyRecord {
            stratum: field(c_stratum).to_string(),
            cluster: field(c_psu).to_string(),
            weight,
            y,
            group: group - 1,
        });
    }
    if records.is_empty() {
        return Err(DisparityError::parse(header_line, "no data rows"));
    }
    let labels = match labels_meta {
        Some(l) if l.len() >= max_group => l,
        Some(l) => {
            return Err(DisparityError::parse(
                header_line,
                format!("{} group labels but group index {max_group}", l.len()),
            ))
        }
        None => (1..=max_group).map(|j| j.to_string()).collect(),
    };
    SurveyMicrodata::new(records, labels).map_err(|e| DisparityError::parse(header_line, e.to_string()))
}

pub fn read_microdata_csv(path: impl AsRef<Path>) -> Result<SurveyMicrodata> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| DisparityError::Io(format!("{}: {e}", path.display())))?;
    parse_microdata_csv(file)
}

pub fn write_microdata_csv<W: Write>(data: &SurveyMicrodata, mut writer: W) -> Result<()> {
    writeln!(writer, "# groups={}", data.group_labels().join(","))?;
    let mut out = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| DisparityError::Io(e.to_string());
    out.write_record(["stratum", "psu", "weight", "y", "group"]).map_err(io)?;
    for r in data.records() {
        out.write_record([
            r.stratum.clone(),
            r.cluster.clone(),
            format_exact(r.weight),
            format_exact(r.y),
            (r.group + 1).to_string(),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
