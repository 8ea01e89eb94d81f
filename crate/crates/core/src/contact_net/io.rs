//! Line-oriented trace files.
//!
//! ```text
//! #spdt-trace v1 variant=spdt nodes=.. steps=.. step_minutes=.. lambda=.. ...
//! host neighbor start_step t_a t_c t_d delta
//! ```

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::trace::{ContactTrace, SpdtLink, Variant};
use super::GeneratorConfig;
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "#spdt-trace";
pub const FORMAT_VERSION: &str = "v1";

pub fn header_line(config: &GeneratorConfig, variant: Variant) -> String {
    format!(
        "{FORMAT_TAG} {FORMAT_VERSION} variant={} nodes={} steps={} step_minutes={} lambda={} alpha={} \
         rho_min={} rho_max={} beta={} mu_min={} mu_max={} delta={} p_c={} p_b={} theta={} phi={} master_seed={}",
        variant,
        config.nodes,
        config.steps,
        config.step_minutes,
        config.lambda,
        config.alpha,
        config.rho_bounds.0,
        config.rho_bounds.1,
        config.beta,
        config.mu_bounds.0,
        config.mu_bounds.1,
        config.delta,
        config.p_c,
        config.p_b,
        config.theta,
        config.phi,
        config.master_seed,
    )
}

pub fn write_trace<W: Write>(trace: &ContactTrace, mut out: W) -> Result<()> {
    writeln!(out, "{}", header_line(&trace.config, trace.variant))?;
    for l in trace.links() {
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            l.host, l.neighbor, l.start_step, l.t_a, l.t_c, l.t_d, l.delta
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Raw file contents: links in file order with their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct TraceRecords {
    pub config: GeneratorConfig,
    pub variant: Variant,
    pub links: Vec<(usize, SpdtLink)>,
}

impl TraceRecords {
    pub fn into_trace(self) -> ContactTrace {
        ContactTrace::new(
            self.config,
            self.variant,
            self.links.into_iter().map(|(_, l)| l).collect(),
        )
    }
}

pub fn parse_header(line: &str) -> Result<(GeneratorConfig, Variant)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(FORMAT_TAG) {
        return Err(Error::parse(1, format!("missing `{FORMAT_TAG}` header")));
    }
    match parts.next() {
        Some(FORMAT_VERSION) => {}
        other => {
            return Err(Error::parse(
                1,
                format!("unsupported format version {:?}", other.unwrap_or("")),
            ))
        }
    }
    let mut fields = HashMap::new();
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field `{kv}`")))?;
        if fields.insert(k, v).is_some() {
            return Err(Error::parse(1, format!("duplicate header field `{k}`")));
        }
    }
    fn take<T: std::str::FromStr>(fields: &mut HashMap<&str, &str>, key: &str) -> Result<T> {
        let raw = fields
            .remove(key)
            .ok_or_else(|| Error::parse(1, format!("header is missing `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::parse(1, format!("header field `{key}` has invalid value `{raw}`")))
    }
    let variant_raw: String = take(&mut fields, "variant")?;
    let variant = Variant::parse(&variant_raw)
        .ok_or_else(|| Error::parse(1, format!("unknown variant `{variant_raw}`")))?;
    let config = GeneratorConfig {
        nodes: take(&mut fields, "nodes")?,
        steps: take(&mut fields, "steps")?,
        step_minutes: take(&mut fields, "step_minutes")?,
        lambda: take(&mut fields, "lambda")?,
        alpha: take(&mut fields, "alpha")?,
        rho_bounds: (take(&mut fields, "rho_min")?, take(&mut fields, "rho_max")?),
        beta: take(&mut fields, "beta")?,
        mu_bounds: (take(&mut fields, "mu_min")?, take(&mut fields, "mu_max")?),
        delta: take(&mut fields, "delta")?,
        p_c: take(&mut fields, "p_c")?,
        p_b: take(&mut fields, "p_b")?,
        theta: take(&mut fields, "theta")?,
        phi: take(&mut fields, "phi")?,
        master_seed: take(&mut fields, "master_seed")?,
    };
    if let Some(k) = fields.keys().min() {
        return Err(Error::parse(1, format!("unknown header field `{k}`")));
    }
    config.validate().map_err(|e| Error::parse(1, e))?;
    Ok((config, variant))
}

fn parse_link(line_no: usize, line: &str) -> Result<SpdtLink> {
    let mut vals = [0u32; 7];
    let mut parts = line.split_whitespace();
    for slot in vals.iter_mut() {
        let raw = parts
            .next()
            .ok_or_else(|| Error::parse(line_no, "expected 7 fields: host neighbor start_step t_a t_c t_d delta"))?;
        *slot = raw
            .parse()
            .map_err(|_| Error::parse(line_no, format!("`{raw}` is not a non-negative integer")))?;
    }
    if parts.next().is_some() {
        return Err(Error::parse(line_no, "too many fields, expected 7"));
    }
    let [host, neighbor, start_step, t_a, t_c, t_d, delta] = vals;
    Ok(SpdtLink {
        host,
        neighbor,
        start_step,
        t_a,
        t_c,
        t_d,
        delta,
    })
}

/// Parse a trace file without checking semantic link invariants.
pub fn read_trace_records<R: BufRead>(input: R) -> Result<TraceRecords> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::parse(1, "empty file, expected a trace header"))?;
    let (config, variant) = parse_header(&header)?;
    let mut links = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        links.push((line_no, parse_link(line_no, &line)?));
    }
    Ok(TraceRecords {
        config,
        variant,
        links,
    })
}

pub fn read_trace<R: BufRead>(input: R) -> Result<ContactTrace> {
    Ok(read_trace_records(input)?.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_net::generate_trace;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            nodes: 50,
            steps: 2 * 288,
            ..GeneratorConfig::desk()
        }
    }

    #[test]
    fn round_trip_preserves_trace() {
        let trace = generate_trace(&small()).unwrap();
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut text = header_line(&small(), Variant::Spdt);
        text.push_str("\n1 2 3 4 5 6 7\n1 2 x 4 5 6 7\n");
        match read_trace(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        assert!(read_trace("".as_bytes()).is_err());
        assert!(read_trace("# something else\n".as_bytes()).is_err());
        let h = header_line(&small(), Variant::Spdt).replace("v1", "v9");
        assert!(read_trace(h.as_bytes()).is_err());
        let h = header_line(&small(), Variant::Spdt) + " extra=1";
        assert!(read_trace(h.as_bytes()).unwrap_err().to_string().contains("extra"));
    }
}
