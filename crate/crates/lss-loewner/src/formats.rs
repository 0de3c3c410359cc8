//! On-disk interchange formats: the model JSON contract, tuple-spec JSON,
//! sample CSV, trajectory/response/error CSV, and report JSON.
//!
//! Model JSON: `{"D":2,"m":1,"p":1,"modes":[{"E":[[..]],"A":[[..]],"B":[[..]],
//! "C":[[..]]},..],"couplings":[{"from":1,"to":2,"K":[[..]]},..]}` with modes
//! 1-indexed and matrices as arrays of row arrays of finite doubles.
//! Complex scalars are `[re, im]` pairs everywhere. CSV floats are written
//! with 17 significant digits; all formatting is locale-independent.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loewner::LoewnerData;
use crate::lss::{C64, LssModel, ModeSystem};
use crate::reduction::ReductionReport;
use crate::sim::{CompareMetrics, FreqResponse, Trajectory};
use crate::transfer::SampleSet;
use crate::tuples::{GammaSet, ThetaSet, Word, build_cyclic_tuples, build_two_mode_tuples};

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    #[serde(rename = "D")]
    d: usize,
    m: usize,
    p: usize,
    modes: Vec<ModeJson>,
    #[serde(default)]
    couplings: Vec<CouplingJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModeJson {
    #[serde(rename = "E")]
    e: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CouplingJson {
    from: usize,
    to: usize,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{what}: empty matrix")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput(format!("{what}: ragged or empty rows")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what}: non-finite entry")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Parses the model JSON contract and checks every structural invariant.
pub fn model_from_json(text: &str) -> Result<LssModel> {
    let model = model_from_json_unchecked(text)?;
    let violations = model.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidInput(format!("invalid model: {}", list.join("; "))));
    }
    Ok(model)
}

/// Parses the model JSON without the validity gate; used by `validate` itself.
pub fn model_from_json_unchecked(text: &str) -> Result<LssModel> {
    let parsed: ModelJson = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("model JSON at line {}: {e}", e.line())))?;
    if parsed.modes.len() != parsed.d {
        return Err(Error::InvalidInput(format!(
            "model declares D={} but lists {} modes",
            parsed.d,
            parsed.modes.len()
        )));
    }
    let modes = parsed
        .modes
        .iter()
        .enumerate()
        .map(|(i, mj)| {
            let q = i + 1;
            Ok(ModeSystem::new(
                rows_to_matrix(&mj.e, &format!("mode {q} E"))?,
                rows_to_matrix(&mj.a, &format!("mode {q} A"))?,
                rows_to_matrix(&mj.b, &format!("mode {q} B"))?,
                rows_to_matrix(&mj.c, &format!("mode {q} C"))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut couplings = BTreeMap::new();
    for cj in &parsed.couplings {
        let k = rows_to_matrix(&cj.k, &format!("coupling {}->{}", cj.from, cj.to))?;
        if couplings.insert((cj.from, cj.to), k).is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate coupling {}->{}",
                cj.from, cj.to
            )));
        }
    }
    Ok(LssModel::new(modes, couplings, parsed.m, parsed.p))
}

pub fn model_to_json(model: &LssModel) -> String {
    let out = ModelJson {
        d: model.num_modes(),
        m: model.num_inputs(),
        p: model.num_outputs(),
        modes: model
            .modes()
            .iter()
            .map(|ms| ModeJson {
                e: matrix_to_rows(&ms.e),
                a: matrix_to_rows(&ms.a),
                b: matrix_to_rows(&ms.b),
                c: matrix_to_rows(&ms.c),
            })
            .collect(),
        couplings: model
            .couplings()
            .iter()
            .map(|(&(from, to), k)| CouplingJson { from, to, k: matrix_to_rows(k) })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("model serialization cannot fail")
}

/// Tuple-spec JSON: interpolation points as `[re, im]` plus a layout.
#[derive(Debug, Serialize, Deserialize)]
pub struct TupleSpec {
    pub right: Vec<[f64; 2]>,
    pub left: Vec<[f64; 2]>,
    pub layout: TupleLayout,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TupleLayout {
    /// Nested two-mode multi-tuples; `groups` are the per-group depths, with
    /// an optional distinct grouping for the left side.
    #[serde(rename = "two-mode")]
    TwoMode {
        groups: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        groups_left: Option<Vec<usize>>,
    },
    /// Cyclic layout; the mode count is `right.len() / depth`.
    #[serde(rename = "cyclic")]
    Cyclic { depth: usize },
}

pub fn tuple_spec_from_json(text: &str) -> Result<TupleSpec> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("tuple spec JSON at line {}: {e}", e.line())))
}

pub fn tuple_spec_to_json(spec: &TupleSpec) -> String {
    serde_json::to_string_pretty(spec).expect("tuple spec serialization cannot fail")
}

/// Materializes the word sets a spec describes.
pub fn build_tuples(spec: &TupleSpec) -> Result<(GammaSet, ThetaSet)> {
    if spec.right.is_empty() || spec.left.is_empty() {
        return Err(Error::InvalidInput("no interpolation points".into()));
    }
    let right: Vec<C64> = spec.right.iter().map(|p| C64::new(p[0], p[1])).collect();
    let left: Vec<C64> = spec.left.iter().map(|p| C64::new(p[0], p[1])).collect();
    match &spec.layout {
        TupleLayout::TwoMode { groups, groups_left } => {
            let gl = groups_left.as_ref().unwrap_or(groups);
            build_two_mode_tuples(&right, &left, groups, gl)
        }
        TupleLayout::Cyclic { depth } => {
            if *depth == 0 || !right.len().is_multiple_of(*depth) {
                return Err(Error::InvalidInput(format!(
                    "cyclic layout: {} right points not divisible by depth {depth}",
                    right.len()
                )));
            }
            let d = right.len() / depth;
            build_cyclic_tuples(d, &right, &left, *depth)
        }
    }
}

/// Writes samples as CSV with columns
/// `modes,points_re,points_im,value_re,value_im`; modes dash-separated,
/// point coordinates semicolon-separated.
pub fn samples_to_csv(samples: &SampleSet) -> String {
    let mut out = String::from("modes,points_re,points_im,value_re,value_im\n");
    for (w, v) in samples.iter() {
        let modes: Vec<String> = w.modes.iter().map(|m| m.to_string()).collect();
        let re: Vec<String> = w.points.iter().map(|p| fmt17(p.re)).collect();
        let im: Vec<String> = w.points.iter().map(|p| fmt17(p.im)).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            modes.join("-"),
            re.join(";"),
            im.join(";"),
            fmt17(v.re),
            fmt17(v.im)
        ));
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut out = SampleSet::new("external");
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let rec = record.map_err(|e| Error::InvalidInput(format!("samples CSV line {line}: {e}")))?;
        if rec.len() != 5 {
            return Err(Error::InvalidInput(format!(
                "samples CSV line {line}: expected 5 columns, got {}",
                rec.len()
            )));
        }
        let modes: Vec<usize> = rec[0]
            .split('-')
            .map(|s| s.parse().map_err(|_| Error::InvalidInput(format!("samples CSV line {line}: bad mode {s:?}"))))
            .collect::<Result<_>>()?;
        let parse_list = |field: &str, what: &str| -> Result<Vec<f64>> {
            field
                .split(';')
                .map(|s| {
                    s.trim().parse().map_err(|_| {
                        Error::InvalidInput(format!("samples CSV line {line}: bad {what} {s:?}"))
                    })
                })
                .collect()
        };
        let re = parse_list(&rec[1], "points_re")?;
        let im = parse_list(&rec[2], "points_im")?;
        if re.len() != modes.len() || im.len() != modes.len() {
            return Err(Error::InvalidInput(format!(
                "samples CSV line {line}: {} modes but {}/{} point coordinates",
                modes.len(),
                re.len(),
                im.len()
            )));
        }
        let points: Vec<C64> = re.iter().zip(&im).map(|(&r, &i)| C64::new(r, i)).collect();
        let value = C64::new(
            rec[3].trim().parse().map_err(|_| Error::InvalidInput(format!("samples CSV line {line}: bad value_re")))?,
            rec[4].trim().parse().map_err(|_| Error::InvalidInput(format!("samples CSV line {line}: bad value_im")))?,
        );
        out.insert(Word::new(modes, points), value);
    }
    Ok(out)
}

/// Trajectory CSV: `t,y,mode` (first output channel).
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,y,mode\n");
    for i in 0..traj.len() {
        out.push_str(&format!("{},{},{}\n", fmt17(traj.t[i]), fmt17(traj.y[i][0]), traj.mode[i]));
    }
    out
}

/// Frequency-response CSV for one mode: `omega,re,im,mag`.
pub fn freq_response_to_csv(resp: &FreqResponse, q: usize) -> String {
    let mut out = String::from("omega,re,im,mag\n");
    for (i, &w) in resp.omega.iter().enumerate() {
        let h = resp.h[q - 1][i];
        out.push_str(&format!("{},{},{},{}\n", fmt17(w), fmt17(h.re), fmt17(h.im), fmt17(h.norm())));
    }
    out
}

/// Frequency-error CSV: `omega` then one relative-error column per mode.
pub fn freq_errors_to_csv(metrics: &CompareMetrics) -> String {
    let d = metrics.freq_rel_err.len();
    let mut out = String::from("omega");
    for q in 1..=d {
        out.push_str(&format!(",rel_err_mode{q}"));
    }
    out.push('\n');
    for (i, &w) in metrics.omega.iter().enumerate() {
        out.push_str(&fmt17(w));
        for q in 0..d {
            out.push(',');
            out.push_str(&fmt17(metrics.freq_rel_err[q][i]));
        }
        out.push('\n');
    }
    out
}

/// Time-error CSV: `t,abs_err,rel_err`.
pub fn time_errors_to_csv(metrics: &CompareMetrics) -> String {
    let mut out = String::from("t,abs_err,rel_err\n");
    for i in 0..metrics.time.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt17(metrics.time[i]),
            fmt17(metrics.time_abs_err[i]),
            fmt17(metrics.time_rel_err[i])
        ));
    }
    out
}

/// Summary JSON for a comparison run.
pub fn compare_summary_json(metrics: &CompareMetrics) -> String {
    #[derive(Serialize)]
    struct Summary {
        max_freq_rel_err: f64,
        l2_freq_rel_err: f64,
        max_time_abs_err: f64,
        max_time_rel_err: f64,
        l2_time_abs_err: f64,
    }
    serde_json::to_string_pretty(&Summary {
        max_freq_rel_err: metrics.max_freq_err,
        l2_freq_rel_err: metrics.l2_freq_err,
        max_time_abs_err: metrics.max_time_err,
        max_time_rel_err: metrics.max_time_rel_err,
        l2_time_abs_err: metrics.l2_time_err,
    })
    .expect("summary serialization cannot fail")
}

/// Reduction report JSON: tolerance, per-mode ranks and singular values.
pub fn reduction_report_to_json(report: &ReductionReport) -> String {
    #[derive(Serialize)]
    struct ModeOut<'a> {
        mode: usize,
        rank: usize,
        largest_neglected: f64,
        singular_values: &'a [f64],
    }
    #[derive(Serialize)]
    struct Out<'a> {
        tolerance: Option<f64>,
        modes: Vec<ModeOut<'a>>,
    }
    serde_json::to_string_pretty(&Out {
        tolerance: report.tolerance,
        modes: report
            .modes
            .iter()
            .map(|m| ModeOut {
                mode: m.mode,
                rank: m.rank,
                largest_neglected: m.largest_neglected,
                singular_values: &m.singular_values,
            })
            .collect(),
    })
    .expect("report serialization cannot fail")
}

/// Singular-value CSV across modes: `mode,index,sigma`.
pub fn singular_values_to_csv(report: &ReductionReport) -> String {
    let mut out = String::from("mode,index,sigma\n");
    for m in &report.modes {
        for (i, s) in m.singular_values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", m.mode, i + 1, fmt17(*s)));
        }
    }
    out
}

fn complex_matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Loewner data export with complex entries as `[re, im]` pairs.
pub fn loewner_data_to_json(data: &LoewnerData) -> String {
    #[derive(Serialize)]
    struct XiOut {
        i: usize,
        j: usize,
        xi: Vec<Vec<[f64; 2]>>,
    }
    #[derive(Serialize)]
    struct Out {
        num_modes: usize,
        realified: bool,
        loewner: Vec<Vec<Vec<[f64; 2]>>>,
        shifted: Vec<Vec<Vec<[f64; 2]>>>,
        v: Vec<Vec<Vec<[f64; 2]>>>,
        w: Vec<Vec<Vec<[f64; 2]>>>,
        couplings: Vec<XiOut>,
    }
    serde_json::to_string_pretty(&Out {
        num_modes: data.num_modes,
        realified: data.realified,
        loewner: data.loewner.iter().map(complex_matrix_to_rows).collect(),
        shifted: data.shifted.iter().map(complex_matrix_to_rows).collect(),
        v: data.v.iter().map(complex_matrix_to_rows).collect(),
        w: data.w.iter().map(complex_matrix_to_rows).collect(),
        couplings: data
            .coupling
            .iter()
            .map(|(&(i, j), xi)| XiOut { i, j, xi: complex_matrix_to_rows(xi) })
            .collect(),
    })
    .expect("loewner data serialization cannot fail")
}

/// BT report JSON: average Hankel values and the order actually used.
pub fn bt_report_to_json(report: &crate::bt::BtReport) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        hankel: &'a [f64],
        order: usize,
        rank_capped: bool,
    }
    serde_json::to_string_pretty(&Out {
        hankel: &report.hankel,
        order: report.order,
        rank_capped: report.rank_capped,
    })
    .expect("bt report serialization cannot fail")
}

/// Atomic file write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::InvalidInput(format!("write failed: {e}")))?;
    tmp.persist(path)
        .map_err(|e| Error::InvalidInput(format!("cannot move into place {}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{evaporator, evaporator_tuples};
    use crate::transfer::sample_for_loewner;

    #[test]
    fn model_json_round_trip() {
        let m = evaporator();
        let text = model_to_json(&m);
        let back = model_from_json(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn model_json_spec_shape() {
        let text = model_to_json(&evaporator());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["D"], 2);
        assert_eq!(v["m"], 1);
        assert_eq!(v["modes"][0]["A"][0][0], -1.0);
    }

    #[test]
    fn invalid_model_json_rejected() {
        let text = r#"{"D":1,"m":1,"p":1,"modes":[{"E":[[0.0]],"A":[[1.0]],"B":[[1.0]],"C":[[1.0]]}]}"#;
        let err = model_from_json(text).unwrap_err();
        assert!(err.to_string().contains("singular"), "{err}");
        assert!(model_from_json("{").is_err());
    }

    #[test]
    fn tuple_spec_round_trip_and_build() {
        let spec = TupleSpec {
            right: vec![[-1.5, 0.0], [1.0, 0.0], [-2.0, 0.0], [1.5, 0.0]],
            left: vec![[2.0, 0.0], [0.0, 0.0], [0.5, 0.0], [-0.5, 0.0]],
            layout: TupleLayout::TwoMode { groups: vec![2], groups_left: None },
        };
        let text = tuple_spec_to_json(&spec);
        let back = tuple_spec_from_json(&text).unwrap();
        let (g, t) = build_tuples(&back).unwrap();
        let (g0, t0) = evaporator_tuples();
        assert_eq!(g.words, g0.words);
        assert_eq!(t.words, t0.words);
    }

    #[test]
    fn cyclic_spec_infers_mode_count() {
        let spec = TupleSpec {
            right: (1..=9).map(|i| [i as f64, 0.0]).collect(),
            left: (1..=9).map(|i| [-(i as f64), 0.0]).collect(),
            layout: TupleLayout::Cyclic { depth: 3 },
        };
        let (g, _) = build_tuples(&spec).unwrap();
        assert_eq!(g.num_modes, 3);
    }

    #[test]
    fn samples_csv_round_trip() {
        let m = evaporator();
        let (g, t) = evaporator_tuples();
        let samples = sample_for_loewner(&m, &g, &t).unwrap();
        let csv_text = samples_to_csv(&samples);
        let back = samples_from_csv(&csv_text).unwrap();
        assert_eq!(back.len(), samples.len());
        for (w, v) in samples.iter() {
            let got = back.get(w).unwrap();
            assert_eq!(got, v, "{w}");
        }
    }

    #[test]
    fn samples_csv_bad_line_reports_position() {
        let text = "modes,points_re,points_im,value_re,value_im\n1,0.5,0.0,1.0,0.0\n1-2,0.5,0.0,1.0,0.0\n";
        let err = samples_from_csv(text).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
