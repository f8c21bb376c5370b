//! CSV and JSON serialization of series and susceptibility maps.

use std::fmt::Write as _;

use serde::Serialize;

use crate::observables::{ObservableSeries, Peak, SusceptibilityMap};

/// Formats `x` with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// `omega,t,chi_F`, one row per grid point, frequency-major.
pub fn susceptibility_csv(map: &SusceptibilityMap) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# omega in units of g, t in units of 1/g, chi_F in units of 1/g^2; delta_omega={}",
        fmt_sig(map.delta_omega)
    );
    out.push_str("omega,t,chi_F\n");
    for (omega, row) in map.omegas.iter().zip(&map.values) {
        for (t, chi) in map.times.iter().zip(row) {
            let _ = writeln!(out, "{},{},{}", fmt_sig(*omega), fmt_sig(*t), fmt_sig(*chi));
        }
    }
    out
}

/// `n,t,sz_1..sz_L,C_1..C_{L-1},fidelity`. Without period indices the row
/// number is used for `n`; a missing fidelity column is left empty.
pub fn series_csv(series: &ObservableSeries) -> String {
    let l = series.num_sites;
    let mut out = String::new();
    out.push_str("# t in units of 1/g; n counts driving periods; sz_j = <sigma^z_j>; C_j = connected <sigma^z_j sigma^z_j+1>\n");
    let mut header = vec!["n".to_string(), "t".to_string()];
    header.extend((1..=l).map(|j| format!("sz_{j}")));
    header.extend((1..l).map(|j| format!("C_{j}")));
    header.push("fidelity".to_string());
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..series.len() {
        let n = series.periods.as_ref().map_or(k, |p| p[k]);
        let mut row = vec![n.to_string(), fmt_sig(series.times[k])];
        row.extend(series.magnetizations[k].iter().map(|x| fmt_sig(*x)));
        row.extend(series.correlations[k].iter().map(|x| fmt_sig(*x)));
        row.push(
            series
                .fidelity
                .as_ref()
                .map_or(String::new(), |f| fmt_sig(f[k])),
        );
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakSummary<'a> {
    pub num_sites: usize,
    pub coupling: f64,
    pub multipliers: &'a [u32],
    pub delta_omega: f64,
    pub omega_range: [f64; 2],
    pub time_range: [f64; 2],
    pub min_chi_f: f64,
    pub one_sided_frequencies: Vec<f64>,
    pub peaks: &'a [Peak],
}

pub fn peaks_json(summary: &PeakSummary<'_>) -> String {
    serde_json::to_string_pretty(summary).expect("peak summary is serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-1.0), "-1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig(123.456789012345), "123.456789012");
        assert_eq!(fmt_sig(1.5e-7), "1.50000000000e-7");
        assert_eq!(fmt_sig(-1e-17), "-1.00000000000e-17");
    }

    #[test]
    fn series_header() {
        let s = ObservableSeries {
            num_sites: 3,
            times: vec![0.0],
            periods: Some(vec![0]),
            magnetizations: vec![vec![-1.0; 3]],
            correlations: vec![vec![0.0; 2]],
            fidelity: Some(vec![1.0]),
        };
        let csv = series_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "n,t,sz_1,sz_2,sz_3,C_1,C_2,fidelity");
        assert_eq!(lines[2], "0,0,-1,-1,-1,0,0,1");
    }
}
