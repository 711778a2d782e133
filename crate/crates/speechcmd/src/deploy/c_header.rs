//! C header export: the trained model as flash-resident constant arrays.

use std::fmt::Write as _;
use std::path::Path;

use crate::bytesio::atomic_write;
use crate::deploy::ModelFileError;
use crate::lognet::LogNetModel;

/// Render the model as a self-contained C header: generator constants,
/// architecture defines, normalization statistics, readout weights, and
/// the label strings. Floats carry 9 significant digits, enough to
/// round-trip the f32 values exactly.
pub fn render_c_header(model: &LogNetModel) -> String {
    let mut out = String::new();
    let arch = &model.arch;

    writeln!(out, "/* LogNet speech-command model ({arch}). */").unwrap();
    writeln!(out, "/* Generated by speechcmd export-header; do not edit. */").unwrap();
    writeln!(out, "#ifndef LOGNET_MODEL_H").unwrap();
    writeln!(out, "#define LOGNET_MODEL_H").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "#define LOGNET_N_INPUT {}", arch.n_input).unwrap();
    writeln!(out, "#define LOGNET_P_RESERVOIR {}", arch.p_reservoir).unwrap();
    writeln!(out, "#define LOGNET_M_HIDDEN {}", arch.m_hidden).unwrap();
    writeln!(out, "#define LOGNET_N_CLASSES {}", arch.n_classes).unwrap();
    writeln!(out).unwrap();

    let g = &model.reservoir.generator;
    writeln!(
        out,
        "/* x[n+1] = (a * x[n] + c) mod m, weight = x/m - 0.5; order: a, c, m, seed */"
    )
    .unwrap();
    writeln!(
        out,
        "static const unsigned long lognet_lcg_params[4] = {{ {}UL, {}UL, {}UL, {}UL }};",
        g.multiplier, g.increment, g.modulus, g.seed
    )
    .unwrap();
    writeln!(out).unwrap();

    let labels: Vec<String> = model.labels.iter().map(|l| format!("\"{l}\"")).collect();
    writeln!(
        out,
        "static const char *const lognet_labels[LOGNET_N_CLASSES] = {{ {} }};",
        labels.join(", ")
    )
    .unwrap();
    writeln!(out).unwrap();

    write_float_array_1d(
        &mut out,
        "lognet_input_max",
        "LOGNET_N_INPUT + 1",
        &model.norms.input_max,
    );
    let stats_flat: Vec<f64> = model
        .norms
        .reservoir_stats
        .iter()
        .flat_map(|&(max, min, mean)| [max, min, mean])
        .collect();
    writeln!(out, "/* per reservoir row: max, min, mean */").unwrap();
    write_float_array_2d(
        &mut out,
        "lognet_reservoir_stats",
        "LOGNET_P_RESERVOIR",
        "3",
        &stats_flat,
        3,
    );
    let hidden_flat: Vec<f64> = model.readout.hidden.iter().flatten().copied().collect();
    write_float_array_2d(
        &mut out,
        "lognet_hidden_weights",
        "LOGNET_M_HIDDEN",
        "LOGNET_P_RESERVOIR + 1",
        &hidden_flat,
        model.arch.p_reservoir + 1,
    );
    let output_flat: Vec<f64> = model.readout.output.iter().flatten().copied().collect();
    write_float_array_2d(
        &mut out,
        "lognet_output_weights",
        "LOGNET_N_CLASSES",
        "LOGNET_M_HIDDEN + 1",
        &output_flat,
        model.arch.m_hidden + 1,
    );

    writeln!(out, "#endif /* LOGNET_MODEL_H */").unwrap();
    out
}

/// Write the rendered header to disk atomically.
pub fn export_c_header(model: &LogNetModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    let path = path.as_ref();
    atomic_write(path, render_c_header(model).as_bytes()).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{:.8e}f", v as f32)
}

fn write_float_array_1d(out: &mut String, name: &str, len_expr: &str, values: &[f64]) {
    writeln!(out, "static const float {name}[{len_expr}] = {{").unwrap();
    for chunk in values.chunks(4) {
        let row: Vec<String> = chunk.iter().map(|&v| fmt_float(v)).collect();
        writeln!(out, "    {},", row.join(", ")).unwrap();
    }
    writeln!(out, "}};").unwrap();
    writeln!(out).unwrap();
}

fn write_float_array_2d(
    out: &mut String,
    name: &str,
    rows_expr: &str,
    cols_expr: &str,
    flat: &[f64],
    cols: usize,
) {
    writeln!(out, "static const float {name}[{rows_expr}][{cols_expr}] = {{").unwrap();
    for row in flat.chunks(cols) {
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        writeln!(out, "    {{ {} }},", cells.join(", ")).unwrap();
    }
    writeln!(out, "}};").unwrap();
    writeln!(out).unwrap();
}
