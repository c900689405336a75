//! CSV traces: one row per integrator step with the path parameter, every
//! coordinate and the constraint residual.

use std::io::Write;
use std::path::Path;

use sflab_core::symplectic::TracePoint;

use crate::CliError;

pub fn write_trace_to<W: Write>(out: &mut W, trace: &[TracePoint]) -> std::io::Result<()> {
    let dim = trace.first().map_or(0, |p| p.point.len());
    let mut header = String::from("step,param");
    for k in 0..dim {
        header.push_str(&format!(",c{k}"));
    }
    header.push_str(",residual");
    writeln!(out, "{header}")?;
    for (i, p) in trace.iter().enumerate() {
        let mut row = format!("{i},{:.16e}", p.param);
        for x in p.point.iter() {
            row.push_str(&format!(",{x:.16e}"));
        }
        row.push_str(&format!(",{:.16e}", p.residual));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    write_trace_to(&mut f, trace).map_err(io)?;
    f.flush().map_err(io)
}
