use std::io::{BufRead, BufReader, Read, Write};

use crate::dataset::{Dataset, Label, Sample};
use crate::error::{Error, Result};

pub const WISCONSIN_ATTRIBUTES: usize = 9;
pub const MUSHROOM_ATTRIBUTES: usize = 22;

const WISCONSIN_RANGE: (f64, f64) = (1.0, 10.0);
// Nominal mushroom attributes are lowercase letters.
const MUSHROOM_RANGE: (f64, f64) = (b'a' as f64, b'z' as f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `id, 9 attributes in 1..=10 or ?, class 2|4`.
    WisconsinBreastCancer,
    /// `class e|p, 22 single-character attributes`.
    Mushroom,
    /// `label, feat1, ..., featd` with label ±1.
    GenericCsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    /// Replace `?` by [`IngestSpec::substitute_value`].
    SubstituteOutOfRange,
    /// Skip records containing `?`.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestSpec {
    pub format: Format,
    pub missing_policy: MissingPolicy,
    pub substitute_value: f64,
    /// Generic CSV only: skip the first non-empty line.
    pub has_header: bool,
}

impl IngestSpec {
    pub fn new(format: Format) -> Self {
        IngestSpec {
            format,
            missing_policy: MissingPolicy::SubstituteOutOfRange,
            substitute_value: 0.0,
            has_header: false,
        }
    }

    pub fn wisconsin() -> Self {
        Self::new(Format::WisconsinBreastCancer)
    }

    pub fn mushroom() -> Self {
        Self::new(Format::Mushroom)
    }

    pub fn csv() -> Self {
        Self::new(Format::GenericCsv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.missing_policy == MissingPolicy::Drop {
            return Ok(());
        }
        let v = self.substitute_value;
        if !v.is_finite() {
            return Err(Error::invalid("substitute value must be finite"));
        }
        let range = match self.format {
            Format::WisconsinBreastCancer => Some(WISCONSIN_RANGE),
            Format::Mushroom => Some(MUSHROOM_RANGE),
            Format::GenericCsv => None,
        };
        if let Some((lo, hi)) = range {
            if (lo..=hi).contains(&v) {
                return Err(Error::invalid(format!(
                    "substitute value {v} lies inside the attribute range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Reads a dataset in `spec.format`.
pub fn load<R: Read>(source: R, spec: &IngestSpec) -> Result<Dataset> {
    match spec.format {
        Format::WisconsinBreastCancer => load_wisconsin(source, spec),
        Format::Mushroom => load_mushroom(source, spec),
        Format::GenericCsv => load_csv(source, spec),
    }
}

/// Visits each non-blank line with its 1-based line number.
fn for_each_record<R: Read>(source: R, mut visit: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        visit(i + 1, trimmed)?;
    }
    Ok(())
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn finish(samples: Vec<Sample>, dim: usize) -> Result<Dataset> {
    if samples.is_empty() {
        return Err(Error::Empty("no records"));
    }
    Dataset::with_dim(samples, dim)
}

/// Wisconsin breast-cancer records. Class 2 (benign) becomes +1, class 4
/// (malignant) −1; the sample id is discarded.
pub fn load_wisconsin<R: Read>(source: R, spec: &IngestSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut samples = Vec::new();
    for_each_record(source, |n, line| {
        let f = fields(line);
        if f.len() != WISCONSIN_ATTRIBUTES + 2 {
            return Err(Error::parse(n, format!("expected 11 fields, found {}", f.len())));
        }
        let mut x = Vec::with_capacity(WISCONSIN_ATTRIBUTES);
        let mut missing = false;
        for raw in &f[1..=WISCONSIN_ATTRIBUTES] {
            if *raw == "?" {
                missing = true;
                x.push(spec.substitute_value);
                continue;
            }
            let v: i64 = raw
                .parse()
                .map_err(|_| Error::parse(n, format!("attribute `{raw}` is not an integer")))?;
            if !(1..=10).contains(&v) {
                return Err(Error::parse(n, format!("attribute {v} outside 1..=10")));
            }
            x.push(v as f64);
        }
        let y = match f[WISCONSIN_ATTRIBUTES + 1] {
            "2" => Label::Positive,
            "4" => Label::Negative,
            other => return Err(Error::parse(n, format!("unknown class code `{other}`"))),
        };
        if !(missing && spec.missing_policy == MissingPolicy::Drop) {
            samples.push(Sample::new(x, y));
        }
        Ok(())
    })?;
    finish(samples, WISCONSIN_ATTRIBUTES)
}

/// Mushroom records. Each nominal attribute becomes the ASCII code of its
/// character; class `e` (edible) becomes +1, `p` (poisonous) −1.
pub fn load_mushroom<R: Read>(source: R, spec: &IngestSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut samples = Vec::new();
    for_each_record(source, |n, line| {
        let f = fields(line);
        if f.len() != MUSHROOM_ATTRIBUTES + 1 {
            return Err(Error::parse(n, format!("expected 23 fields, found {}", f.len())));
        }
        let y = match f[0] {
            "e" => Label::Positive,
            "p" => Label::Negative,
            other => return Err(Error::parse(n, format!("unknown class `{other}`"))),
        };
        let mut x = Vec::with_capacity(MUSHROOM_ATTRIBUTES);
        let mut missing = false;
        for raw in &f[1..] {
            match raw.as_bytes() {
                [b'?'] => {
                    missing = true;
                    x.push(spec.substitute_value);
                }
                [c] if c.is_ascii_graphic() => x.push(f64::from(*c)),
                _ => return Err(Error::parse(n, format!("attribute `{raw}` is not a single character"))),
            }
        }
        if !(missing && spec.missing_policy == MissingPolicy::Drop) {
            samples.push(Sample::new(x, y));
        }
        Ok(())
    })?;
    finish(samples, MUSHROOM_ATTRIBUTES)
}

/// Generic `label,feat1,...,featd` rows. Empty or `?` features are missing.
pub fn load_csv<R: Read>(source: R, spec: &IngestSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut samples = Vec::new();
    let mut dim: Option<usize> = None;
    let mut skip_header = spec.has_header;
    for_each_record(source, |n, line| {
        if std::mem::take(&mut skip_header) {
            return Ok(());
        }
        let f = fields(line);
        if f.len() < 2 {
            return Err(Error::parse(n, "expected a label and at least one feature"));
        }
        let d = *dim.get_or_insert(f.len() - 1);
        if f.len() - 1 != d {
            return Err(Error::parse(n, format!("expected {d} features, found {}", f.len() - 1)));
        }
        let y: Label = f[0].parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
        let mut x = Vec::with_capacity(d);
        let mut missing = false;
        for raw in &f[1..] {
            if raw.is_empty() || *raw == "?" {
                missing = true;
                x.push(spec.substitute_value);
                continue;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::parse(n, format!("feature `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(n, format!("feature `{raw}` is not finite")));
            }
            x.push(v);
        }
        if !(missing && spec.missing_policy == MissingPolicy::Drop) {
            samples.push(Sample::new(x, y));
        }
        Ok(())
    })?;
    finish(samples, dim.unwrap_or(0))
}

/// Writes `label,feat1,...` rows that [`load_csv`] reads back exactly.
pub fn write_csv<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    for s in data.samples() {
        write!(out, "{}", s.y)?;
        for v in &s.x {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wisconsin_first_record() {
        let d = load_wisconsin("1000025,5,1,1,1,2,1,3,1,1,2\n".as_bytes(), &IngestSpec::wisconsin()).unwrap();
        assert_eq!(d.dim(), 9);
        assert_eq!(d.samples()[0].x, vec![5.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0, 1.0]);
        assert_eq!(d.samples()[0].y, Label::Positive);
    }

    #[test]
    fn wisconsin_missing_values() {
        let text = "1057013,8,4,5,1,2,?,7,3,1,4\n1000025,5,1,1,1,2,1,3,1,1,2\n";
        let d = load_wisconsin(text.as_bytes(), &IngestSpec::wisconsin()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples()[0].x[5], 0.0);
        assert_eq!(d.samples()[0].y, Label::Negative);

        let spec = IngestSpec {
            substitute_value: 11.0,
            ..IngestSpec::wisconsin()
        };
        assert_eq!(load_wisconsin(text.as_bytes(), &spec).unwrap().samples()[0].x[5], 11.0);

        let drop = IngestSpec {
            missing_policy: MissingPolicy::Drop,
            ..IngestSpec::wisconsin()
        };
        assert_eq!(load_wisconsin(text.as_bytes(), &drop).unwrap().len(), 1);

        let inside = IngestSpec {
            substitute_value: 5.0,
            ..IngestSpec::wisconsin()
        };
        assert!(load_wisconsin(text.as_bytes(), &inside).is_err());
    }

    #[test]
    fn wisconsin_malformed_rows_report_line() {
        for (text, line) in [
            ("1000025,5,1,1,1,2,1,3,1,1,2\n1000025,5,1,1,1,2,1,3,1,2\n", 2),
            ("1000025,5,1,1,1,2,1,3,1,1,2\n\n1000025,5,x,1,1,2,1,3,1,1,2\n", 3),
            ("1000025,5,1,1,1,2,1,3,1,1,3\n", 1),
            ("1000025,5,1,1,1,2,1,3,1,11,2\n", 1),
        ] {
            match load_wisconsin(text.as_bytes(), &IngestSpec::wisconsin()) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(load_wisconsin("".as_bytes(), &IngestSpec::wisconsin()).is_err());
    }

    #[test]
    fn mushroom_rows() {
        let text = "p,x,s,n,t,p,f,c,n,k,e,e,s,s,w,w,p,w,o,p,k,s,u\ne,x,s,y,t,a,f,c,b,k,e,?,s,s,w,w,p,w,o,p,n,n,g\n";
        let d = load_mushroom(text.as_bytes(), &IngestSpec::mushroom()).unwrap();
        assert_eq!(d.dim(), 22);
        assert_eq!(d.samples()[0].y, Label::Negative);
        assert_eq!(d.samples()[1].y, Label::Positive);
        assert_eq!(d.samples()[0].x[0], 120.0);
        assert_eq!(d.samples()[1].x[10], 0.0);

        let bad = "q,x,s,n,t,p,f,c,n,k,e,e,s,s,w,w,p,w,o,p,k,s,u\n";
        assert!(matches!(load_mushroom(bad.as_bytes(), &IngestSpec::mushroom()), Err(Error::Parse { line: 1, .. })));
        let bad = "p,xx,s,n,t,p,f,c,n,k,e,e,s,s,w,w,p,w,o,p,k,s,u\n";
        assert!(load_mushroom(bad.as_bytes(), &IngestSpec::mushroom()).is_err());
        let inside = IngestSpec {
            substitute_value: 100.0,
            ..IngestSpec::mushroom()
        };
        assert!(inside.validate().is_err());
    }

    #[test]
    fn csv_rows() {
        let text = "label,a,b\n+1,0.5,2\n-1.0,?,3e-1\n1,1,1\n";
        let spec = IngestSpec {
            has_header: true,
            ..IngestSpec::csv()
        };
        let d = load_csv(text.as_bytes(), &spec).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.samples()[1].x, vec![0.0, 0.3]);
        assert_eq!(d.class_counts(), (2, 1));
        assert!(load_csv(text.as_bytes(), &IngestSpec::csv()).is_err());
        assert!(matches!(
            load_csv("1,2,3\n-1,2\n".as_bytes(), &IngestSpec::csv()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(load_csv("0,2\n".as_bytes(), &IngestSpec::csv()).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = Dataset::from_parts(
            vec![vec![0.1, -1e-300, 1.0 / 3.0], vec![12345.678, 2.0f64.sqrt(), -0.0]],
            vec![Label::Positive, Label::Negative],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = load_csv(buf.as_slice(), &IngestSpec::csv()).unwrap();
        assert_eq!(back, d);
    }
}
