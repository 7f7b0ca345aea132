//! Report records shared by the command line front end, with deterministic
//! CSV (header row, `{:.12e}` floats) and JSON renderings.

use crate::classify::Verdict;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::spectra::{Pairing, SpectrumReport};
use crate::timoshenko::{Branch, Regime};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// A report with a tabular view.
pub trait Report: Serialize + DeserializeOwned {
    fn csv(&self) -> String;

    fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub input: String,
    pub schema: String,
    pub valid: bool,
    pub error: Option<String>,
    /// `b_k` in canonical order.
    pub b: Vec<f64>,
    pub theta: Option<f64>,
    pub blocks: Vec<usize>,
    pub j_plus: Option<C64>,
    pub j_minus: Option<C64>,
    pub regular: Option<bool>,
    pub warning: Option<String>,
    pub tolerance: f64,
}

impl Report for ValidationReport {
    fn csv(&self) -> String {
        let mut s = String::from("input,schema,valid,error,theta,re_j_plus,im_j_plus,re_j_minus,im_j_minus,regular,tolerance\n");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{:.12e}",
            csv_text(&self.input),
            self.schema,
            self.valid,
            csv_text(self.error.as_deref().unwrap_or("")),
            opt(self.theta),
            opt(self.j_plus.map(|z| z.re)),
            opt(self.j_plus.map(|z| z.im)),
            opt(self.j_minus.map(|z| z.re)),
            opt(self.j_minus.map(|z| z.im)),
            self.regular.map(|r| r.to_string()).unwrap_or_default(),
            self.tolerance
        );
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub input: String,
    pub verdict: Verdict,
    pub j_plus: C64,
    pub j_minus: C64,
    pub tolerance: f64,
}

impl Report for ClassifyReport {
    fn csv(&self) -> String {
        let mut s = String::from("input,status,clause,detail,re_j_plus,im_j_plus,re_j_minus,im_j_minus,tolerance\n");
        let _ = writeln!(
            s,
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            csv_text(&self.input),
            self.verdict.status,
            self.verdict.clause,
            csv_text(&self.verdict.detail),
            self.j_plus.re,
            self.j_plus.im,
            self.j_minus.re,
            self.j_minus.im,
            self.tolerance
        );
        s
    }
}

impl Report for SpectrumReport {
    fn csv(&self) -> String {
        let mut s = String::from("re,im,multiplicity,residual,tolerance\n");
        for e in &self.eigenvalues {
            let _ = writeln!(s, "{:.12e},{:.12e},{},{:.12e},{:.12e}", e.lambda.re, e.lambda.im, e.multiplicity, e.residual, self.tolerance);
        }
        s
    }
}

fn pairing_rows(s: &mut String, p: &Pairing, label: impl Fn(C64) -> String, tol: f64) {
    for &(z, z0, d) in &p.pairs {
        let _ = writeln!(s, "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e}", z.re, z.im, z0.re, z0.im, d, label(z0), tol);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub input: String,
    pub reference: String,
    pub window: (f64, f64),
    pub strip: f64,
    pub pairing: Pairing,
    pub tolerance: f64,
}

impl Report for CompareReport {
    fn csv(&self) -> String {
        let mut s = String::from("re,im,re_ref,im_ref,deviation,band,tolerance\n");
        pairing_rows(&mut s, &self.pairing, |z0| crate::spectra::band_of(z0.re).to_string(), self.tolerance);
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimoshenkoReport {
    pub input: String,
    pub regime: Regime,
    pub branches: Vec<Branch>,
    pub verdict: Verdict,
    pub window: (f64, f64),
    pub strip: f64,
    pub computed: Vec<C64>,
    pub reference: Vec<C64>,
    pub pairing: Pairing,
    pub tolerance: f64,
}

impl TimoshenkoReport {
    /// Label of the branch with a point nearest to `z`.
    pub fn nearest_branch(&self, z: C64) -> &str {
        let dist = |b: &Branch| {
            let m = ((z.re - b.offset.re) / b.step).round();
            (b.offset + b.step * m - z).norm()
        };
        self.branches
            .iter()
            .min_by(|a, b| dist(a).total_cmp(&dist(b)))
            .map(|b| b.label.as_str())
            .unwrap_or("")
    }
}

impl Report for TimoshenkoReport {
    fn csv(&self) -> String {
        let mut s = String::from("re,im,re_ref,im_ref,deviation,branch,tolerance\n");
        pairing_rows(&mut s, &self.pairing, |z0| self.nearest_branch(z0).to_string(), self.tolerance);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Status;
    use crate::spectra::Band;
    use crate::zeros::Eigenvalue;

    fn pairing() -> Pairing {
        Pairing {
            pairs: vec![(C64::new(3.2, 0.1), C64::new(3.1, 0.2), 0.1414), (C64::new(6.3, -0.25), C64::new(6.25, -0.2), 0.054)],
            bands: vec![Band { k: 0, count: 1, max_deviation: 0.1414, tail_max: 0.1414 }, Band { k: 1, count: 1, max_deviation: 0.054, tail_max: 0.054 }],
            max_deviation: 0.1414,
            count_mismatch: None,
            empirical_onset_band: Some(0),
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = SpectrumReport {
            window: (-1.0, 1.0),
            strip: 2.5,
            eigenvalues: vec![Eigenvalue { lambda: C64::new(0.1, 1.0 / 3.0), multiplicity: 2, residual: 1e-14 }],
            pairing: Some(pairing()),
            warning: None,
            tolerance: 1e-13,
        };
        assert_eq!(SpectrumReport::parse_json(&spec.json()).unwrap(), spec);
        let cmp = CompareReport { input: "a.json".into(), reference: "b.json".into(), window: (0.0, 9.0), strip: 3.0, pairing: pairing(), tolerance: 1e-10 };
        assert_eq!(CompareReport::parse_json(&cmp.json()).unwrap(), cmp);
        let tim = TimoshenkoReport {
            input: "beam.json".into(),
            regime: Regime::DistinctSpeedsII,
            branches: vec![Branch { step: std::f64::consts::PI, offset: C64::new(0.0, 0.35), label: "beam-1".into() }],
            verdict: Verdict { status: Status::StrictlyRegular, clause: "ln-clause".into(), pair: None, detail: "x".into() },
            window: (0.0, 10.0),
            strip: 3.1,
            computed: vec![C64::new(3.2, 0.1)],
            reference: vec![C64::new(3.1, 0.2)],
            pairing: pairing(),
            tolerance: 1e-10,
        };
        assert_eq!(TimoshenkoReport::parse_json(&tim.json()).unwrap(), tim);
        assert_eq!(tim.nearest_branch(C64::new(6.2, 0.3)), "beam-1");
    }

    #[test]
    fn csv_layout() {
        let cmp = CompareReport { input: "a".into(), reference: "b".into(), window: (0.0, 9.0), strip: 3.0, pairing: pairing(), tolerance: 1e-10 };
        let csv = cmp.csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re,im,re_ref,im_ref,deviation,band,tolerance");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("3.200000000000e0,1.000000000000e-1,"));
        assert_eq!(csv_text("a,b"), "\"a,b\"");
    }

    proptest::proptest! {
        #[test]
        fn spectrum_json_round_trips_exactly(v in proptest::collection::vec((proptest::num::f64::NORMAL, proptest::num::f64::NORMAL, 1usize..4), 0..8)) {
            let r = SpectrumReport {
                window: (-1.0, 1.0),
                strip: 2.0,
                eigenvalues: v.iter().map(|&(a, b, m)| Eigenvalue { lambda: C64::new(a, b), multiplicity: m, residual: a.abs() }).collect(),
                pairing: None,
                warning: None,
                tolerance: 1e-13,
            };
            proptest::prop_assert_eq!(SpectrumReport::parse_json(&r.json()).unwrap(), r.clone());
            proptest::prop_assert_eq!(r.csv().lines().count(), 1 + v.len());
        }
    }
}
