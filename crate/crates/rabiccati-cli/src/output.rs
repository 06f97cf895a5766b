//! Trace writers. Floating-point text uses scientific notation with 12
//! significant digits and a signed two-digit exponent; JSON mirrors the
//! CSV fields per sample plus a metadata header.

use std::io::Write;

use num_complex::Complex64;
use rabiccati::riccati::GeneralIntegral;

use crate::model::{Model, Sample};

pub const CSV_HEADER: &str = "t,re_a,im_a,re_b,im_b,abs_a,abs_b,omega_mag,omega_phase,Omega,re_u,im_u,unitarity_defect,schrodinger_residual,riccati_residual";

/// 12 significant digits, C-style exponent (`6.48054273664e-01`).
pub fn sci12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
    let s = format!("{v:.11e}");
    let (mantissa, exponent) = s.split_once('e').expect("{:e} always carries an exponent");
    let (sign, digits) = match exponent.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exponent),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Metadata echoed into JSON output.
pub struct TraceMeta<'a> {
    pub case: &'a str,
    pub parameters: Vec<(&'a str, String)>,
    pub quad_tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    pub steps: usize,
}

fn sample_fields(s: &Sample) -> [(&'static str, f64); 15] {
    [
        ("t", s.t),
        ("re_a", s.a.re),
        ("im_a", s.a.im),
        ("re_b", s.b.re),
        ("im_b", s.b.im),
        ("abs_a", s.a.norm()),
        ("abs_b", s.b.norm()),
        ("omega_mag", s.omega_mag),
        ("omega_phase", s.omega_phase),
        ("Omega", s.omega_z),
        ("re_u", s.u.re),
        ("im_u", s.u.im),
        ("unitarity_defect", s.unitarity_defect),
        ("schrodinger_residual", s.schrodinger_residual),
        ("riccati_residual", s.riccati_residual),
    ]
}

pub fn write_trace_csv(
    sink: &mut dyn Write,
    model: &Model,
    times: impl Iterator<Item = f64>,
) -> std::io::Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for t in times {
        let sample = model.sample(t);
        let row: Vec<String> = sample_fields(&sample)
            .iter()
            .map(|(_, v)| sci12(*v))
            .collect();
        writeln!(sink, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_trace_json(
    sink: &mut dyn Write,
    model: &Model,
    meta: &TraceMeta,
    times: impl Iterator<Item = f64>,
) -> std::io::Result<()> {
    writeln!(sink, "{{")?;
    write_meta(sink, meta)?;
    writeln!(sink, "  \"samples\": [")?;
    let times: Vec<f64> = times.collect();
    for (k, &t) in times.iter().enumerate() {
        let sample = model.sample(t);
        let body: Vec<String> = sample_fields(&sample)
            .iter()
            .map(|(name, v)| format!("\"{name}\": {}", sci12(*v)))
            .collect();
        let comma = if k + 1 < times.len() { "," } else { "" };
        writeln!(sink, "    {{{}}}{comma}", body.join(", "))?;
    }
    writeln!(sink, "  ]")?;
    writeln!(sink, "}}")
}

fn write_meta(sink: &mut dyn Write, meta: &TraceMeta) -> std::io::Result<()> {
    writeln!(sink, "  \"schema_version\": \"1.0\",")?;
    writeln!(
        sink,
        "  \"case\": {},",
        serde_json::to_string(meta.case).expect("string")
    )?;
    let params: Vec<String> = meta
        .parameters
        .iter()
        .map(|(k, v)| format!("\"{k}\": {}", serde_json::to_string(v).expect("string")))
        .collect();
    writeln!(sink, "  \"parameters\": {{{}}},", params.join(", "))?;
    writeln!(
        sink,
        "  \"tolerances\": {{\"quad\": {}, \"rel\": {}, \"abs\": {}}},",
        sci12(meta.quad_tol),
        sci12(meta.rel_tol),
        sci12(meta.abs_tol)
    )?;
    writeln!(
        sink,
        "  \"grid\": {{\"t_max\": {}, \"steps\": {}}},",
        sci12(meta.t_max),
        meta.steps
    )
}

pub const FAMILY_CSV_HEADER: &str = "re_c0,im_c0,t,re_u,im_u,abs_denominator,near_pole";

/// One general-integral trace for a single constant.
pub struct FamilyTrace {
    pub c0: Complex64,
    pub samples: Vec<FamilySample>,
    pub pole_bands: Vec<(f64, f64)>,
}

pub struct FamilySample {
    pub t: f64,
    /// None inside an exact movable pole.
    pub u: Option<Complex64>,
    pub abs_denominator: f64,
}

pub fn family_trace(gi: &GeneralIntegral, c0: Complex64, times: &[f64]) -> FamilyTrace {
    let samples = times
        .iter()
        .map(|&t| FamilySample {
            t,
            u: gi.value(t).ok(),
            abs_denominator: gi.denominator(t).norm(),
        })
        .collect();
    FamilyTrace {
        c0,
        samples,
        pole_bands: gi.pole_bands().to_vec(),
    }
}

pub fn write_family_csv(sink: &mut dyn Write, traces: &[FamilyTrace]) -> std::io::Result<()> {
    writeln!(sink, "{FAMILY_CSV_HEADER}")?;
    for trace in traces {
        for s in &trace.samples {
            let (re_u, im_u) = match s.u {
                Some(u) => (sci12(u.re), sci12(u.im)),
                None => (String::new(), String::new()),
            };
            writeln!(
                sink,
                "{},{},{},{re_u},{im_u},{},{}",
                sci12(trace.c0.re),
                sci12(trace.c0.im),
                sci12(s.t),
                sci12(s.abs_denominator),
                u8::from(s.abs_denominator < 1e-3)
            )?;
        }
    }
    Ok(())
}

pub fn write_family_json(
    sink: &mut dyn Write,
    meta: &TraceMeta,
    traces: &[FamilyTrace],
) -> std::io::Result<()> {
    writeln!(sink, "{{")?;
    write_meta(sink, meta)?;
    writeln!(sink, "  \"traces\": [")?;
    for (i, trace) in traces.iter().enumerate() {
        writeln!(sink, "    {{")?;
        writeln!(
            sink,
            "      \"c0\": {{\"re\": {}, \"im\": {}}},",
            sci12(trace.c0.re),
            sci12(trace.c0.im)
        )?;
        let bands: Vec<String> = trace
            .pole_bands
            .iter()
            .map(|(lo, hi)| format!("{{\"t_lo\": {}, \"t_hi\": {}}}", sci12(*lo), sci12(*hi)))
            .collect();
        writeln!(sink, "      \"pole_bands\": [{}],", bands.join(", "))?;
        writeln!(sink, "      \"samples\": [")?;
        for (k, s) in trace.samples.iter().enumerate() {
            let u = match s.u {
                Some(u) => format!("{{\"re\": {}, \"im\": {}}}", sci12(u.re), sci12(u.im)),
                None => "null".to_string(),
            };
            let comma = if k + 1 < trace.samples.len() { "," } else { "" };
            writeln!(
                sink,
                "        {{\"t\": {}, \"u\": {u}, \"abs_denominator\": {}}}{comma}",
                sci12(s.t),
                sci12(s.abs_denominator)
            )?;
        }
        writeln!(sink, "      ]")?;
        let comma = if i + 1 < traces.len() { "," } else { "" };
        writeln!(sink, "    }}{comma}")?;
    }
    writeln!(sink, "  ]")?;
    writeln!(sink, "}}")
}
