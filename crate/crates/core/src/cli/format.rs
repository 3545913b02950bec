use std::fmt::Write;

/// `printf("%.12g")`: twelve significant digits, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV text with a `#` metadata line, a header row and `\n` line endings.
#[derive(Debug)]
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    pub fn new<I, S>(comment: &str, header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut preamble = String::new();
        writeln!(preamble, "# qflow {} {comment}", crate::VERSION).expect("string write");
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(preamble.into_bytes());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.writer
            .write_record(row.iter().map(|&x| format_number(x)))
            .expect("in-memory write");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("ascii output")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.33476), "0.33476");
        assert_eq!(format_number(-2.5e-7), "-2.5e-07");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(99999999999.99999), "100000000000");
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new("x=1", ["t", "d"]);
        t.push(&[0.0, 1.0]);
        let text = t.finish();
        assert!(text.starts_with("# qflow "));
        assert!(text.ends_with("t,d\n0,1\n"));
    }
}
