//! Machine-readable report: a canonical JSON shape whose writer emits keys
//! in a fixed order and whose parser round-trips byte-identically.
//! Scalars are carried as strings ("19/3" exact, shortest decimal float),
//! so no numeric corruption can occur on the way through.

use mintime_core::canonical::{TimeReport, TinfValue};
use mintime_core::model::Scalar;
use mintime_core::reduction::StepOutcome;
use serde_json::Value;

use crate::specfile::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TinfDoc {
    Exact(String),
    Bounds { lower: String, upper: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDoc {
    /// 1-based row index.
    pub row: usize,
    pub replaced: bool,
    pub s: usize,
    pub consumed: usize,
    pub outcome: String,
    pub a: Vec<Vec<String>>,
    pub omegas: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsDoc {
    pub russell: String,
    pub max_m: String,
    pub m_zero_formula: String,
    pub t_cn: Option<String>,
    pub rank_p_formula: Option<String>,
}

/// The full report document.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDoc {
    pub status: String,
    pub mode: String,
    pub m: usize,
    pub p: usize,
    pub regularity: usize,
    pub times: Vec<String>,
    pub tinf: TinfDoc,
    /// 1-based (row, column) pivots.
    pub pivots: Vec<(usize, usize)>,
    pub bounds: BoundsDoc,
    pub trace: Vec<StepDoc>,
    pub diagnostics: Vec<String>,
    pub oracle_bracket: Option<(f64, f64)>,
}

impl ReportDoc {
    pub fn from_report<T: Scalar>(
        report: &TimeReport<T>,
        mode: &str,
        m: usize,
        p: usize,
        regularity: usize,
    ) -> Self {
        let fmt = |v: &T| v.to_string();
        let tinf = match &report.tinf {
            TinfValue::Exact(v) => TinfDoc::Exact(fmt(v)),
            TinfValue::Bounds { lower, upper } => TinfDoc::Bounds {
                lower: fmt(lower),
                upper: fmt(upper),
            },
        };
        let trace = report
            .reduction
            .trace
            .iter()
            .map(|step| StepDoc {
                row: step.row + 1,
                replaced: step.replaced,
                s: step.derivative_iterations,
                consumed: step.consumed,
                outcome: match step.outcome {
                    StepOutcome::Independent => "independent".into(),
                    StepOutcome::Exhausted => "exhausted".into(),
                },
                a: step
                    .a_vectors
                    .iter()
                    .map(|row| row.iter().map(&fmt).collect())
                    .collect(),
                omegas: step
                    .omegas
                    .iter()
                    .map(|row| row.iter().map(&fmt).collect())
                    .collect(),
            })
            .collect();
        ReportDoc {
            status: if report.is_exact() { "exact" } else { "bounded" }.into(),
            mode: mode.into(),
            m,
            p,
            regularity,
            times: report.times.values.iter().map(&fmt).collect(),
            tinf,
            pivots: report.pivots.iter().map(|&(r, c)| (r + 1, c + 1)).collect(),
            bounds: BoundsDoc {
                russell: fmt(&report.bounds.russell),
                max_m: fmt(&report.bounds.max_m),
                m_zero_formula: fmt(&report.bounds.m_zero_formula),
                t_cn: report.bounds.t_cn.as_ref().map(&fmt),
                rank_p_formula: report.bounds.rank_p_formula.as_ref().map(&fmt),
            },
            trace,
            diagnostics: report.diagnostics.clone(),
            oracle_bracket: None,
        }
    }

    /// Canonical serialization: fixed key order, scalars as JSON strings.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push('{');
        push_str_field(&mut out, "status", &self.status);
        out.push(',');
        push_str_field(&mut out, "mode", &self.mode);
        out.push(',');
        push_raw_field(&mut out, "m", &self.m.to_string());
        out.push(',');
        push_raw_field(&mut out, "p", &self.p.to_string());
        out.push(',');
        push_raw_field(&mut out, "r", &self.regularity.to_string());
        out.push(',');
        push_key(&mut out, "times");
        push_str_array(&mut out, &self.times);
        out.push(',');
        push_key(&mut out, "tinf");
        match &self.tinf {
            TinfDoc::Exact(v) => push_json_string(&mut out, v),
            TinfDoc::Bounds { lower, upper } => {
                out.push('{');
                push_str_field(&mut out, "lower", lower);
                out.push(',');
                push_str_field(&mut out, "upper", upper);
                out.push('}');
            }
        }
        out.push(',');
        push_key(&mut out, "pivots");
        out.push('[');
        for (i, (r, c)) in self.pivots.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{r},{c}]"));
        }
        out.push(']');
        out.push(',');
        push_key(&mut out, "bounds");
        out.push('{');
        push_str_field(&mut out, "russell", &self.bounds.russell);
        out.push(',');
        push_str_field(&mut out, "max_m", &self.bounds.max_m);
        out.push(',');
        push_str_field(&mut out, "m_zero_formula", &self.bounds.m_zero_formula);
        out.push(',');
        push_opt_field(&mut out, "t_cn", self.bounds.t_cn.as_deref());
        out.push(',');
        push_opt_field(&mut out, "rank_p_formula", self.bounds.rank_p_formula.as_deref());
        out.push('}');
        out.push(',');
        push_key(&mut out, "trace");
        out.push('[');
        for (i, step) in self.trace.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('{');
            push_raw_field(&mut out, "row", &step.row.to_string());
            out.push(',');
            push_raw_field(&mut out, "replaced", if step.replaced { "true" } else { "false" });
            out.push(',');
            push_raw_field(&mut out, "s", &step.s.to_string());
            out.push(',');
            push_raw_field(&mut out, "consumed", &step.consumed.to_string());
            out.push(',');
            push_str_field(&mut out, "outcome", &step.outcome);
            out.push(',');
            push_key(&mut out, "a");
            push_str_matrix(&mut out, &step.a);
            out.push(',');
            push_key(&mut out, "omegas");
            push_str_matrix(&mut out, &step.omegas);
            out.push('}');
        }
        out.push(']');
        out.push(',');
        push_key(&mut out, "diagnostics");
        push_str_array(&mut out, &self.diagnostics);
        out.push(',');
        push_key(&mut out, "oracle");
        match self.oracle_bracket {
            None => out.push_str("null"),
            Some((lo, hi)) => {
                out.push('{');
                push_key(&mut out, "bracket");
                out.push_str(&format!("[{lo},{hi}]"));
                out.push('}');
            }
        }
        out.push('}');
        out.push('\n');
        out
    }

    /// Parse a report emitted by `to_json` (used for round-tripping).
    pub fn from_json(text: &str) -> Result<ReportDoc, ParseError> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| ParseError(format!("report JSON error: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| ParseError("report must be an object".into()))?;
        let get_str = |key: &str| -> Result<String, ParseError> {
            obj.get(key)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| ParseError(format!("missing string \"{key}\"")))
        };
        let get_usize = |key: &str| -> Result<usize, ParseError> {
            obj.get(key)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| ParseError(format!("missing integer \"{key}\"")))
        };
        let str_array = |v: &Value, ctx: &str| -> Result<Vec<String>, ParseError> {
            v.as_array()
                .ok_or_else(|| ParseError(format!("{ctx} must be an array")))?
                .iter()
                .map(|e| {
                    e.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| ParseError(format!("{ctx} entries must be strings")))
                })
                .collect()
        };
        let tinf = match obj.get("tinf") {
            Some(Value::String(s)) => TinfDoc::Exact(s.clone()),
            Some(Value::Object(b)) => TinfDoc::Bounds {
                lower: b
                    .get("lower")
                    .and_then(Value::as_str)
                    .ok_or_else(|| ParseError("tinf.lower missing".into()))?
                    .to_string(),
                upper: b
                    .get("upper")
                    .and_then(Value::as_str)
                    .ok_or_else(|| ParseError("tinf.upper missing".into()))?
                    .to_string(),
            },
            _ => return Err(ParseError("missing \"tinf\"".into())),
        };
        let pivots = obj
            .get("pivots")
            .and_then(Value::as_array)
            .ok_or_else(|| ParseError("missing \"pivots\"".into()))?
            .iter()
            .map(|pair| {
                let pair = pair.as_array().filter(|a| a.len() == 2)?;
                Some((pair[0].as_u64()? as usize, pair[1].as_u64()? as usize))
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ParseError("pivots must be [row, col] pairs".into()))?;
        let bounds_obj = obj
            .get("bounds")
            .and_then(Value::as_object)
            .ok_or_else(|| ParseError("missing \"bounds\"".into()))?;
        let opt_str = |key: &str| -> Result<Option<String>, ParseError> {
            match bounds_obj.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.clone())),
                _ => Err(ParseError(format!("bounds.{key} must be a string or null"))),
            }
        };
        let bstr = |key: &str| -> Result<String, ParseError> {
            bounds_obj
                .get(key)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| ParseError(format!("missing bounds.{key}")))
        };
        let trace = obj
            .get("trace")
            .and_then(Value::as_array)
            .ok_or_else(|| ParseError("missing \"trace\"".into()))?
            .iter()
            .map(|step| -> Result<StepDoc, ParseError> {
                let s_obj = step
                    .as_object()
                    .ok_or_else(|| ParseError("trace entries must be objects".into()))?;
                let matrix = |key: &str| -> Result<Vec<Vec<String>>, ParseError> {
                    s_obj
                        .get(key)
                        .and_then(Value::as_array)
                        .ok_or_else(|| ParseError(format!("trace.{key} missing")))?
                        .iter()
                        .map(|row| str_array(row, &format!("trace.{key}")))
                        .collect()
                };
                Ok(StepDoc {
                    row: s_obj
                        .get("row")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| ParseError("trace.row missing".into()))?
                        as usize,
                    replaced: s_obj
                        .get("replaced")
                        .and_then(Value::as_bool)
                        .ok_or_else(|| ParseError("trace.replaced missing".into()))?,
                    s: s_obj
                        .get("s")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| ParseError("trace.s missing".into()))? as usize,
                    consumed: s_obj
                        .get("consumed")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| ParseError("trace.consumed missing".into()))?
                        as usize,
                    outcome: s_obj
                        .get("outcome")
                        .and_then(Value::as_str)
                        .ok_or_else(|| ParseError("trace.outcome missing".into()))?
                        .to_string(),
                    a: matrix("a")?,
                    omegas: matrix("omegas")?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let oracle_bracket = match obj.get("oracle") {
            None | Some(Value::Null) => None,
            Some(Value::Object(o)) => {
                let arr = o
                    .get("bracket")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| ParseError("oracle.bracket must be [lo, hi]".into()))?;
                Some((
                    arr[0]
                        .as_f64()
                        .ok_or_else(|| ParseError("oracle.bracket entries must be numbers".into()))?,
                    arr[1]
                        .as_f64()
                        .ok_or_else(|| ParseError("oracle.bracket entries must be numbers".into()))?,
                ))
            }
            Some(_) => return Err(ParseError("\"oracle\" must be an object or null".into())),
        };
        Ok(ReportDoc {
            status: get_str("status")?,
            mode: get_str("mode")?,
            m: get_usize("m")?,
            p: get_usize("p")?,
            regularity: get_usize("r")?,
            times: str_array(
                obj.get("times")
                    .ok_or_else(|| ParseError("missing \"times\"".into()))?,
                "times",
            )?,
            tinf,
            pivots,
            bounds: BoundsDoc {
                russell: bstr("russell")?,
                max_m: bstr("max_m")?,
                m_zero_formula: bstr("m_zero_formula")?,
                t_cn: opt_str("t_cn")?,
                rank_p_formula: opt_str("rank_p_formula")?,
            },
            trace,
            diagnostics: str_array(
                obj.get("diagnostics")
                    .ok_or_else(|| ParseError("missing \"diagnostics\"".into()))?,
                "diagnostics",
            )?,
            oracle_bracket,
        })
    }

    /// Human-readable rendering.
    pub fn render_text(&self, verbose_trace: bool) -> String {
        let mut out = String::new();
        let n = self.m + self.p;
        out.push_str(&format!(
            "system: {} negative + {} positive speeds ({} equations), regularity r = {}, {} mode\n",
            self.m, self.p, n, self.regularity, self.mode
        ));
        out.push_str("transport times:\n");
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("  T_{} = {}\n", i + 1, t));
        }
        out.push_str("bounds:\n");
        out.push_str(&format!(
            "  universal upper bound (T_{{m+1}} + T_m): {}\n",
            self.bounds.russell
        ));
        out.push_str(&format!(
            "  largest time over internal couplings:    {}\n",
            self.bounds.max_m
        ));
        out.push_str(&format!(
            "  time without internal coupling (lower):  {}\n",
            self.bounds.m_zero_formula
        ));
        match &self.bounds.t_cn {
            Some(v) => out.push_str(&format!("  leading-minor class bound:               {v}\n")),
            None => out.push_str("  leading-minor class bound:               not applicable\n"),
        }
        match &self.bounds.rank_p_formula {
            Some(v) => out.push_str(&format!("  full-row-rank formula:                   {v}\n")),
            None => out.push_str("  full-row-rank formula:                   not applicable\n"),
        }
        out.push_str("reduction:\n");
        for step in &self.trace {
            match (step.replaced, step.outcome.as_str()) {
                (false, "independent") => {
                    out.push_str(&format!("  row {}: already independent, untouched\n", step.row))
                }
                (true, _) => out.push_str(&format!(
                    "  row {}: replaced after s = {} derivative iterations (budget used {})\n",
                    step.row, step.s, step.consumed
                )),
                (false, _) => out.push_str(&format!(
                    "  row {}: budget exhausted after {} levels\n",
                    step.row,
                    step.omegas.len().saturating_sub(1)
                )),
            }
            if verbose_trace {
                for (l, a) in step.a.iter().enumerate() {
                    out.push_str(&format!("    a^{} = [{}]\n", l, a.join(", ")));
                }
                for (l, w) in step.omegas.iter().enumerate() {
                    let label = if step.row == 1 { "gamma" } else { "omega" };
                    out.push_str(&format!("    {label}^{} = [{}]\n", l, w.join(", ")));
                }
            }
        }
        if !self.pivots.is_empty() {
            let pivots: Vec<String> = self
                .pivots
                .iter()
                .map(|(r, c)| format!("({r},{c})"))
                .collect();
            out.push_str(&format!("pivots: {}\n", pivots.join(" ")));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("note: {d}\n"));
        }
        if let Some((lo, hi)) = self.oracle_bracket {
            out.push_str(&format!(
                "oracle: controllability transition bracketed in [{lo}, {hi}]\n"
            ));
        }
        match &self.tinf {
            TinfDoc::Exact(v) => out.push_str(&format!("T_inf = {v}\n")),
            TinfDoc::Bounds { lower, upper } => {
                out.push_str(&format!("T_inf in [{lower}, {upper}]\n"))
            }
        }
        out
    }
}

fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn push_key(out: &mut String, key: &str) {
    push_json_string(out, key);
    out.push(':');
}

fn push_str_field(out: &mut String, key: &str, value: &str) {
    push_key(out, key);
    push_json_string(out, value);
}

fn push_raw_field(out: &mut String, key: &str, raw: &str) {
    push_key(out, key);
    out.push_str(raw);
}

fn push_opt_field(out: &mut String, key: &str, value: Option<&str>) {
    push_key(out, key);
    match value {
        Some(v) => push_json_string(out, v),
        None => out.push_str("null"),
    }
}

fn push_str_array(out: &mut String, values: &[String]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_json_string(out, v);
    }
    out.push(']');
}

fn push_str_matrix(out: &mut String, rows: &[Vec<String>]) {
    out.push('[');
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_str_array(out, row);
    }
    out.push(']');
}
