//! Report envelope shared by every command, and its three renderings.
//!
//! The JSON field names are a stable contract. Floats that identify inputs or
//! outputs are written as hex literals so no bits are lost.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algos::AlgorithmId;
use crate::fp::Precision;
use crate::harness::{BenchReport, InvariantReport, ScanRow, UlpHistogram};
use crate::hexfloat::to_hex;
use crate::oracle::CandidateClass;

type CellFn = fn(&HistogramRow) -> String;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected md, csv or json)")),
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prng: Option<String>,
    pub algorithms: Vec<AlgorithmId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_range: Option<[i32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub algo: AlgorithmId,
    pub zero_ulp: u64,
    pub one_ulp: u64,
    pub two_plus_ulp: u64,
    pub total: u64,
    pub worst_x_hex: Option<String>,
    pub worst_ulp: u64,
    pub unfaithful: u64,
}

impl HistogramRow {
    pub fn from_histogram(h: &UlpHistogram, precision: Precision) -> Self {
        let worst_x_hex = h.worst.map(|w| match precision {
            Precision::Binary32 => to_hex(w.x as f32),
            Precision::Binary64 => to_hex(w.x),
        });
        HistogramRow {
            algo: h.algorithm,
            zero_ulp: h.zero_ulp,
            one_ulp: h.one_ulp,
            two_plus_ulp: h.two_plus_ulp,
            total: h.total,
            worst_x_hex,
            worst_ulp: h.worst.map_or(0, |w| w.ulp),
            unfaithful: h.unfaithful,
        }
    }

    fn pct(&self, count: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRowOut {
    pub k: i32,
    pub x_hex: String,
    pub algo: AlgorithmId,
    pub output_hex: String,
    pub correct_hex: String,
    pub verdict: CandidateClass,
    pub ulp: u64,
}

impl ScanRowOut {
    pub fn from_row(r: &ScanRow, precision: Precision) -> Self {
        let hex = |v: f64| match precision {
            Precision::Binary32 => to_hex(v as f32),
            Precision::Binary64 => to_hex(v),
        };
        ScanRowOut {
            k: r.k,
            x_hex: hex(r.x),
            algo: r.algorithm,
            output_hex: hex(r.output),
            correct_hex: hex(r.correct),
            verdict: r.class,
            ulp: r.ulp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonzeroInputs {
    pub algo: AlgorithmId,
    pub inputs_hex: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub version: String,
    pub command: String,
    pub precision: Precision,
    pub plan: PlanEcho,
    pub fma_ok: bool,
    pub rows: Vec<HistogramRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonzero_inputs: Option<Vec<NonzeroInputs>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<Vec<ScanRowOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
    pub wall_ms: u64,
}

impl ReportEnvelope {
    pub fn new(command: &str, precision: Precision, plan: PlanEcho, fma_ok: bool) -> Self {
        ReportEnvelope {
            version: VERSION.to_string(),
            command: command.to_string(),
            precision,
            plan,
            fma_ok,
            rows: Vec::new(),
            nonzero_inputs: None,
            scan: None,
            invariants: None,
            bench: None,
            wall_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
            Format::Csv => self.to_csv(),
        }
    }

    fn interval_label(&self) -> String {
        match &self.plan.interval {
            Some([lo, hi]) => format!("x ~ U({lo}, {hi})"),
            None => "x".to_string(),
        }
    }

    fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "**{}** ({}", self.command, self.precision);
        if let Some(c) = self.plan.count {
            let _ = write!(out, ", {c} samples");
        }
        if let Some(s) = self.plan.seed {
            let _ = write!(out, ", seed {s}");
        }
        let _ = writeln!(out, ", fma ok: {}, {} ms)\n", self.fma_ok, self.wall_ms);

        if !self.rows.is_empty() {
            let _ = write!(out, "| {} |", self.interval_label());
            for r in &self.rows {
                let _ = write!(out, " {} |", r.algo);
            }
            out.push_str("\n|---|");
            for _ in &self.rows {
                out.push_str("---:|");
            }
            out.push('\n');
            let lines: [(&str, CellFn); 6] = [
                ("Zero ulp", |r| format!("{:.3}", r.pct(r.zero_ulp))),
                ("One ulp", |r| format!("{:.3}", r.pct(r.one_ulp))),
                ("Two+ ulp", |r| format!("{:.3}", r.pct(r.two_plus_ulp))),
                ("Unfaithful", |r| r.unfaithful.to_string()),
                ("Total", |r| r.total.to_string()),
                ("Worst", |r| match &r.worst_x_hex {
                    Some(x) => format!("{} ulp at {x}", r.worst_ulp),
                    None => "-".into(),
                }),
            ];
            for (label, cell) in lines {
                let _ = write!(out, "| {label} |");
                for r in &self.rows {
                    let _ = write!(out, " {} |", cell(r));
                }
                out.push('\n');
            }
        }

        if let Some(nz) = &self.nonzero_inputs {
            for entry in nz {
                let _ = writeln!(
                    out,
                    "\n{} missed the correctly rounded value on {} inputs",
                    entry.algo,
                    entry.inputs_hex.len()
                );
                for x in entry.inputs_hex.iter().take(20) {
                    let _ = writeln!(out, "- {x}");
                }
                if entry.inputs_hex.len() > 20 {
                    out.push_str("- ... (full list in the JSON report)\n");
                }
            }
        }

        if let Some(scan) = &self.scan {
            out.push_str("| k | x | algo | output | correct | verdict | ulp |\n");
            out.push_str("|---:|---|---|---|---|---|---:|\n");
            for r in scan {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    r.k, r.x_hex, r.algo, r.output_hex, r.correct_hex, r.verdict, r.ulp
                );
            }
        }

        if let Some(inv) = &self.invariants {
            out.push_str("| invariant | checked | skipped | failed | first witness |\n");
            out.push_str("|---|---:|---:|---:|---|\n");
            for f in &inv.families {
                let witness = f
                    .witnesses
                    .first()
                    .map(|w| format!("{}: {}", to_hex(w.x), w.detail))
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    f.family, f.checked, f.skipped, f.failed, witness
                );
            }
        }

        if let Some(bench) = &self.bench {
            let _ = writeln!(out, "Timings are hardware dependent and informational only.\n");
            out.push_str("| algo | median ns/op | min | max |\n|---|---:|---:|---:|\n");
            for r in &bench.rows {
                let _ = writeln!(
                    out,
                    "| {} | {:.3} | {:.3} | {:.3} |",
                    r.algo, r.median_ns, r.min_ns, r.max_ns
                );
            }
            if let Some(ratio) = bench.ratio_331d_halley_over_331d {
                let _ = writeln!(out, "\nrcpsqrt331dhalley / rcpsqrt331d median ratio: {ratio:.3}");
            }
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.rows.is_empty() {
            out.push_str(
                "algo,zero_ulp,one_ulp,two_plus_ulp,unfaithful,total,zero_ulp_pct,one_ulp_pct,two_plus_ulp_pct,worst_x_hex,worst_ulp\n",
            );
            for r in &self.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{:.3},{:.3},{:.3},{},{}",
                    r.algo,
                    r.zero_ulp,
                    r.one_ulp,
                    r.two_plus_ulp,
                    r.unfaithful,
                    r.total,
                    r.pct(r.zero_ulp),
                    r.pct(r.one_ulp),
                    r.pct(r.two_plus_ulp),
                    r.worst_x_hex.as_deref().unwrap_or(""),
                    r.worst_ulp
                );
            }
        }
        if let Some(scan) = &self.scan {
            out.push_str("k,x_hex,algo,output_hex,correct_hex,verdict,ulp\n");
            for r in scan {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.k, r.x_hex, r.algo, r.output_hex, r.correct_hex, r.verdict, r.ulp
                );
            }
        }
        if let Some(inv) = &self.invariants {
            out.push_str("invariant,checked,skipped,failed\n");
            for f in &inv.families {
                let _ = writeln!(out, "{},{},{},{}", f.family, f.checked, f.skipped, f.failed);
            }
        }
        if let Some(bench) = &self.bench {
            out.push_str("algo,median_ns,min_ns,max_ns\n");
            for r in &bench.rows {
                let _ = writeln!(out, "{},{:.3},{:.3},{:.3}", r.algo, r.median_ns, r.min_ns, r.max_ns);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::WorstCase;

    fn sample_envelope() -> ReportEnvelope {
        let plan = PlanEcho {
            interval: Some(["0x1p+0".into(), "0x1p+1".into()]),
            count: Some(4),
            seed: Some(42),
            prng: Some("chacha20".into()),
            algorithms: vec![AlgorithmId::Naive],
            ..Default::default()
        };
        let mut env = ReportEnvelope::new("accuracy", Precision::Binary64, plan, true);
        let mut h = UlpHistogram::new(AlgorithmId::Naive);
        for (x, d) in [(1.25, 0), (1.5, 1), (1.75, 0)] {
            h.record(x, d, true);
        }
        h.worst = Some(WorstCase { x: 1.5, ulp: 1 });
        env.rows.push(HistogramRow::from_histogram(&h, Precision::Binary64));
        env
    }

    #[test]
    fn markdown_uses_three_decimals() {
        let md = sample_envelope().render(Format::Markdown);
        assert!(md.contains("| Zero ulp | 66.667 |"), "{md}");
        assert!(md.contains("| One ulp | 33.333 |"));
        assert!(md.contains("1 ulp at 0x1.8p+0"));
    }

    #[test]
    fn csv_header_and_row() {
        let csv = sample_envelope().render(Format::Csv);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("algo,zero_ulp"));
        assert_eq!(lines.next().unwrap(), "naive,2,1,0,0,3,66.667,33.333,0.000,0x1.8p+0,1");
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let json = sample_envelope().to_json();
        let parsed = ReportEnvelope::from_json(&json).unwrap();
        assert_eq!(parsed.to_json(), json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["version", "precision", "plan", "fma_ok", "rows", "wall_ms"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["algo", "zero_ulp", "one_ulp", "two_plus_ulp", "total", "worst_x_hex", "worst_ulp"] {
            assert!(v["rows"][0].get(key).is_some(), "{key}");
        }
        assert_eq!(v["precision"], "binary64");
        assert_eq!(v["rows"][0]["algo"], "naive");
    }

    #[test]
    fn format_parsing() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
