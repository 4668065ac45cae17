//! `report`: comparison table and plots over design/simulate bundles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::design::{Descriptor, CURVE_FILE, DESCRIPTOR_FILE};
use super::simulate::{SimReport, REPORT_FILE};
use super::svg::{profile_svg, trajectory_svg};
use crate::error::{Error, Result};
use crate::io;
use crate::kinematics::Curve;

pub const TABLE_HEADER: &str = "scheme,T_s,T_OC_s,r,psnr_db,radial_w2";
pub const TABLE_FILE: &str = "report.csv";

#[derive(Clone, Debug)]
pub struct Row {
    pub bundle: PathBuf,
    pub descriptor: Descriptor,
    pub sim: Option<SimReport>,
}

impl Row {
    /// `psnr_db` column: empty without a simulation, `inf` for exact recovery.
    fn psnr_cell(&self) -> String {
        match &self.sim {
            None => String::new(),
            Some(s) if s.psnr_infinite => "inf".into(),
            Some(s) => s.psnr_db.map(|v| v.to_string()).unwrap_or_default(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Loads every bundle, failing with the full list of missing files.
pub fn load_rows(dirs: &[PathBuf]) -> Result<Vec<Row>> {
    if dirs.is_empty() {
        return Err(Error::InvalidArgument("report needs at least one bundle directory".into()));
    }
    let missing: Vec<String> = dirs
        .iter()
        .flat_map(|d| [d.join(DESCRIPTOR_FILE), d.join(CURVE_FILE)])
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }
    dirs.iter()
        .map(|d| {
            let descriptor: Descriptor = io::read_json(&d.join(DESCRIPTOR_FILE))?;
            let sim_path = d.join(REPORT_FILE);
            let sim = if sim_path.is_file() { Some(io::read_json(&sim_path)?) } else { None };
            Ok(Row { bundle: d.clone(), descriptor, sim })
        })
        .collect()
}

/// Values are copied from the bundle files unchanged.
pub fn table_csv(rows: &[Row]) -> String {
    let mut s = String::from(TABLE_HEADER);
    s.push('\n');
    for r in rows {
        let d = &r.descriptor;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            d.scheme,
            d.t_s,
            opt(d.t_oc_s),
            d.r,
            r.psnr_cell(),
            d.radial_w2
        );
    }
    s
}

fn label(i: usize, r: &Row) -> String {
    format!("{i}: {}", r.descriptor.scheme)
}

pub fn cmd_report(dirs: &[PathBuf], out: &Path) -> Result<Vec<Row>> {
    let rows = load_rows(dirs)?;
    std::fs::create_dir_all(out)?;
    let table = table_csv(&rows);
    std::fs::write(out.join(TABLE_FILE), &table)?;
    let curves: Vec<Curve> = rows
        .iter()
        .map(|r| io::read_curve_csv(&r.bundle.join(CURVE_FILE)))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = rows.iter().enumerate().map(|(i, r)| label(i, r)).collect();
    let pairs: Vec<(&str, &Curve)> = labels.iter().map(String::as_str).zip(&curves).collect();
    std::fs::write(out.join("trajectories.svg"), trajectory_svg(&pairs))?;
    for (i, (row, c)) in rows.iter().zip(&curves).enumerate() {
        let lim = row.descriptor.config.limits()?;
        std::fs::write(out.join(format!("profile_{i}.svg")), profile_svg(&labels[i], c, &lim))?;
    }
    print!("{table}");
    Ok(rows)
}
