//! Sample files and textual complex numbers.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use powmean::{Complex, Sample};

use crate::error::CliError;

/// Parse `a+bi`, `a-bi`, `bi`, `i` or a plain real.
pub fn parse_complex(text: &str) -> Result<Complex, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let z: Complex = compact
        .parse()
        .map_err(|_| format!("cannot parse {text:?} as a complex number (expected a+bi)"))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("complex number {text:?} is not finite"));
    }
    Ok(z)
}

/// A real rounded to 12 significant digits for display.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let mag = rounded.abs();
    if (1e-4..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Real and imaginary parts for display; a part below `1e-12 |z|` becomes zero.
pub fn display_parts(z: Complex) -> (String, String) {
    let floor = 1e-12 * z.norm();
    let snap = |x: f64| if x.abs() <= floor { 0.0 } else { x };
    (format_real(snap(z.re)), format_real(snap(z.im)))
}

/// `a+bi` for display.
pub fn format_complex(z: Complex) -> String {
    let (re, im) = display_parts(z);
    match im.strip_prefix('-') {
        Some(abs) => format!("{re}-{abs}i"),
        None => format!("{re}+{im}i"),
    }
}

/// One real per line; `#` starts a comment line, blank lines are skipped.
pub fn parse_sample<R: Read>(reader: R, origin: &str) -> Result<Sample, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Parse {
            origin: origin.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| CliError::Parse {
            origin: origin.to_string(),
            line,
            message,
        };
        if record.len() != 1 {
            return Err(fail(format!(
                "expected one value per line, found {}",
                record.len()
            )));
        }
        let field = &record[0];
        let x: f64 = field
            .parse()
            .map_err(|_| fail(format!("{field:?} is not a real number")))?;
        if !x.is_finite() {
            return Err(fail(format!("{field:?} is not finite")));
        }
        values.push(x);
    }
    if values.is_empty() {
        return Err(CliError::Parse {
            origin: origin.to_string(),
            line: 0,
            message: "no observations".into(),
        });
    }
    Ok(Sample::new(values)?)
}

pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_sample(file, &path.display().to_string())
}

pub fn write_sample<W: Write>(writer: W, values: &[f64]) -> std::io::Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for x in values {
        wtr.write_record([x.to_string()])?;
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let cases = [
            ("0+1i", Complex::new(0.0, 1.0)),
            ("i", Complex::new(0.0, 1.0)),
            ("-i", Complex::new(0.0, -1.0)),
            ("2+3i", Complex::new(2.0, 3.0)),
            ("2 - 3i", Complex::new(2.0, -3.0)),
            ("1.5", Complex::new(1.5, 0.0)),
            ("-0.5", Complex::new(-0.5, 0.0)),
            ("4i", Complex::new(0.0, 4.0)),
            ("1e-3+2e-4i", Complex::new(1e-3, 2e-4)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex(text), Ok(want), "{text}");
        }
        for bad in ["", "abc", "1+", "inf", "1+2k"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_rounding() {
        assert_eq!(
            format_complex(Complex::new(1.2246467991473532e-16, 1.0)),
            "0+1i"
        );
        assert_eq!(
            format_complex(Complex::new(1.9999999999999998, -0.5)),
            "2-0.5i"
        );
        assert_eq!(format_complex(Complex::new(-2.5e-7, 3e20)), "0+3e20i");
        assert_eq!(format_real(1.5e-7), "1.5e-7");
        for z in [
            Complex::new(0.25, 1.0),
            Complex::new(-2.5, -0.125),
            Complex::new(1e-7, 3.0),
        ] {
            assert_eq!(parse_complex(&format_complex(z)), Ok(z));
        }
    }

    #[test]
    fn comments_and_blanks() {
        let text = "# header\n1.5\n\n  -2\n# mid\n3e2\n";
        let s = parse_sample(text.as_bytes(), "mem").unwrap();
        assert_eq!(s.values(), &[1.5, -2.0, 300.0]);
    }

    #[test]
    fn bad_line_is_reported() {
        let err = parse_sample("1\n2\nx\n".as_bytes(), "mem").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_sample("1,2\n".as_bytes(), "mem").is_err());
        assert!(parse_sample("# only\n\n".as_bytes(), "mem").is_err());
        assert!(parse_sample("NaN\n".as_bytes(), "mem").is_err());
    }
}
