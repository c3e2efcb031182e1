//! NORAD two-line element sets: parsing with per-record diagnostics, and
//! formatting with valid checksums.

use chrono::{DateTime, Datelike, NaiveDate, NaiveTime, Timelike, Utc};
use serde::Serialize;

use super::OrbitalElements;
use crate::{Error, Result};

pub const TLE_LINE_LEN: usize = 69;

/// One problem found while reading a TLE file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TleDiagnostic {
    /// 1-based line number in the input, 0 when the whole input is concerned.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for TleDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TleParse {
    pub records: Vec<OrbitalElements>,
    pub diagnostics: Vec<TleDiagnostic>,
}

/// Modulo-10 checksum over the first 68 columns: digits count at face
/// value, minus signs count as 1.
pub fn tle_checksum(line: &str) -> u8 {
    let sum: u32 = line
        .bytes()
        .take(TLE_LINE_LEN - 1)
        .map(|b| match b {
            b'0'..=b'9' => (b - b'0') as u32,
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

fn is_data_line(line: &str, tag: u8) -> bool {
    let b = line.as_bytes();
    b.len() >= 2 && b[0] == tag && b[1] == b' '
}

/// Parses 2-line and 3-line element sets. Invalid records are skipped and
/// reported; the error case is reserved for input with no valid record at
/// all.
pub fn parse_tle(text: &str) -> Result<TleParse> {
    let out = parse_tle_lenient(text);
    if out.records.is_empty() {
        return Err(Error::NoTleRecords(out.diagnostics));
    }
    Ok(out)
}

/// What to do with a line whose column-69 checksum does not match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChecksumPolicy {
    #[default]
    Reject,
    /// Keep the record and clear `line_checksums_ok`. Some reference test
    /// files carry deliberately wrong checksums.
    Flag,
}

/// Like [`parse_tle`] but never fails: an empty or fully broken input gives
/// an empty record list with diagnostics.
pub fn parse_tle_lenient(text: &str) -> TleParse {
    parse_tle_with(text, ChecksumPolicy::Reject)
}

pub fn parse_tle_with(text: &str, checksums: ChecksumPolicy) -> TleParse {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();

    let mut out = TleParse::default();
    let mut name: Option<String> = None;
    let mut i = 0;
    while i < lines.len() {
        let (no, line) = lines[i];
        if is_data_line(line, b'1') {
            match lines.get(i + 1) {
                Some(&(no2, line2)) if is_data_line(line2, b'2') => {
                    match parse_pair(line, line2, no, no2, checksums) {
                        Ok(mut el) => {
                            el.name = name.take();
                            out.records.push(el);
                        }
                        Err(d) => {
                            name = None;
                            out.diagnostics.push(d);
                        }
                    }
                    i += 2;
                }
                _ => {
                    out.diagnostics.push(TleDiagnostic { line: no, message: "line 1 without a following line 2".into() });
                    name = None;
                    i += 1;
                }
            }
        } else if is_data_line(line, b'2') {
            out.diagnostics.push(TleDiagnostic { line: no, message: "line 2 without a preceding line 1".into() });
            name = None;
            i += 1;
        } else {
            if let Some(prev) = name.replace(line.trim().trim_start_matches("0 ").to_string()) {
                out.diagnostics.push(TleDiagnostic { line: no - 1, message: format!("name `{prev}` has no element set") });
            }
            i += 1;
        }
    }
    if let Some(prev) = name {
        out.diagnostics.push(TleDiagnostic { line: lines.last().map_or(0, |l| l.0), message: format!("name `{prev}` has no element set") });
    }
    if out.records.is_empty() && out.diagnostics.is_empty() {
        out.diagnostics.push(TleDiagnostic { line: 0, message: "no records".into() });
    }
    out
}

struct Fields<'a> {
    line: &'a str,
    no: usize,
}

impl<'a> Fields<'a> {
    fn err(&self, msg: String) -> TleDiagnostic {
        TleDiagnostic { line: self.no, message: msg }
    }

    fn raw(&self, a: usize, b: usize) -> &'a str {
        &self.line[a..b]
    }

    fn float(&self, a: usize, b: usize, what: &str) -> std::result::Result<f64, TleDiagnostic> {
        let s = self.raw(a, b).trim();
        if s.is_empty() {
            return Ok(0.0);
        }
        s.parse::<f64>().map_err(|_| self.err(format!("columns {}-{}: bad {what} `{s}`", a + 1, b)))
    }

    fn uint(&self, a: usize, b: usize, what: &str) -> std::result::Result<u64, TleDiagnostic> {
        let s = self.raw(a, b).trim();
        if s.is_empty() {
            return Ok(0);
        }
        s.parse::<u64>().map_err(|_| self.err(format!("columns {}-{}: bad {what} `{s}`", a + 1, b)))
    }

    /// `±NNNNN±E` with an implied leading decimal point.
    fn implied(&self, a: usize, b: usize, what: &str) -> std::result::Result<f64, TleDiagnostic> {
        let s = self.raw(a, b).trim();
        if s.is_empty() {
            return Ok(0.0);
        }
        let bad = || self.err(format!("columns {}-{}: bad {what} `{s}`", a + 1, b));
        let (sign, body) = match s.as_bytes()[0] {
            b'-' => (-1.0, &s[1..]),
            b'+' => (1.0, &s[1..]),
            _ => (1.0, s),
        };
        let split = body.rfind(['-', '+']).filter(|&k| k > 0).ok_or_else(bad)?;
        let mantissa: f64 = format!("0.{}", body[..split].trim()).parse().map_err(|_| bad())?;
        let exponent: i32 = body[split..].parse().map_err(|_| bad())?;
        Ok(sign * mantissa * 10f64.powi(exponent))
    }

    fn satnum(&self) -> std::result::Result<u64, TleDiagnostic> {
        let s = self.raw(2, 7);
        let first = s.as_bytes()[0];
        if first.is_ascii_uppercase() {
            // Alpha-5: A=10 … Z=33 with I and O skipped.
            let mut v = (first - b'A') as u64 + 10;
            if first > b'I' {
                v -= 1;
            }
            if first > b'O' {
                v -= 1;
            }
            let rest: u64 = s[1..].trim().parse().map_err(|_| self.err(format!("bad catalog number `{s}`")))?;
            return Ok(v * 10_000 + rest);
        }
        self.uint(2, 7, "catalog number")
    }
}

/// Returns whether the checksum matched; a mismatch is an error unless the
/// policy flags it.
fn check_line(line: &str, no: usize, policy: ChecksumPolicy) -> std::result::Result<bool, TleDiagnostic> {
    if !line.is_ascii() {
        return Err(TleDiagnostic { line: no, message: "non-ASCII characters".into() });
    }
    if line.len() != TLE_LINE_LEN {
        return Err(TleDiagnostic { line: no, message: format!("expected {TLE_LINE_LEN} columns, found {}", line.len()) });
    }
    let expect = tle_checksum(line);
    let found = line.as_bytes()[TLE_LINE_LEN - 1];
    let ok = found.is_ascii_digit() && found - b'0' == expect;
    if !ok && policy == ChecksumPolicy::Reject {
        return Err(TleDiagnostic {
            line: no,
            message: format!("checksum mismatch: column 69 is `{}`, computed {expect}", found as char),
        });
    }
    Ok(ok)
}

/// TLE epoch → UTC, rounding the day fraction to the nanosecond.
fn epoch_from(year2: u64, day: f64) -> Option<DateTime<Utc>> {
    let year = if year2 < 57 { 2000 + year2 as i32 } else { 1900 + year2 as i32 };
    let seconds = day.fract() * 86_400.0;
    let mut nsecs = (seconds.fract() * 1e9).round() as u32;
    let mut secs = seconds as u32;
    if nsecs >= 1_000_000_000 {
        nsecs -= 1_000_000_000;
        secs += 1;
    }
    let date = NaiveDate::from_yo_opt(year, day as u32)?;
    let time = NaiveTime::from_num_seconds_from_midnight_opt(secs, nsecs)?;
    Some(date.and_time(time).and_utc())
}

fn parse_pair(
    l1: &str,
    l2: &str,
    n1: usize,
    n2: usize,
    policy: ChecksumPolicy,
) -> std::result::Result<OrbitalElements, TleDiagnostic> {
    let sums_ok = check_line(l1, n1, policy)? & check_line(l2, n2, policy)?;
    let f1 = Fields { line: l1, no: n1 };
    let f2 = Fields { line: l2, no: n2 };

    let id1 = f1.satnum()?;
    let id2 = f2.satnum()?;
    if id1 != id2 {
        return Err(f2.err(format!("catalog number {id2} does not match line 1 ({id1})")));
    }
    let year2 = f1.uint(18, 20, "epoch year")?;
    let day = f1.float(20, 32, "epoch day")?;
    let epoch = epoch_from(year2, day).ok_or_else(|| f1.err(format!("invalid epoch {year2:02}{day}")))?;

    let eccentricity = f2.float(26, 33, "eccentricity").and_then(|_| {
        let s = f2.raw(26, 33).trim();
        format!("0.{s}").parse::<f64>().map_err(|_| f2.err(format!("bad eccentricity `{s}`")))
    })?;
    let el = OrbitalElements {
        satellite_id: id1,
        name: None,
        classification: l1.as_bytes()[7] as char,
        international_designator: f1.raw(9, 17).trim().to_string(),
        epoch,
        mean_motion_dot: f1.float(33, 43, "first derivative of mean motion")?,
        mean_motion_ddot: f1.implied(44, 52, "second derivative of mean motion")?,
        bstar: f1.implied(53, 61, "B*")?,
        ephemeris_type: f1.uint(62, 63, "ephemeris type")? as u8,
        element_set_number: f1.uint(64, 68, "element set number")?,
        inclination_deg: f2.float(8, 16, "inclination")?,
        raan_deg: f2.float(17, 25, "right ascension")?,
        eccentricity,
        arg_perigee_deg: f2.float(34, 42, "argument of perigee")?,
        mean_anomaly_deg: f2.float(43, 51, "mean anomaly")?,
        mean_motion_revday: f2.float(52, 63, "mean motion")?,
        revolution_number: f2.uint(63, 68, "revolution number")?,
        line_checksums_ok: sums_ok,
    };
    el.validate().map_err(|e| f2.err(e.to_string()))?;
    Ok(el)
}

fn implied_field(v: f64) -> String {
    if v == 0.0 {
        return " 00000-0".into();
    }
    let sign = if v < 0.0 { '-' } else { ' ' };
    let a = v.abs();
    let mut exp = a.log10().floor() as i32 + 1;
    let mut mant = (a / 10f64.powi(exp) * 1e5).round() as u64;
    if mant >= 100_000 {
        mant /= 10;
        exp += 1;
    }
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{mant:05}{esign}{}", exp.abs().min(9))
}

fn ndot_field(v: f64) -> String {
    let s = format!("{:.8}", v.abs());
    let s = s.trim_start_matches('0');
    format!("{}{s:>9}", if v < 0.0 { '-' } else { ' ' })
}

fn with_checksum(mut line: String) -> String {
    let c = tle_checksum(&line);
    line.push((b'0' + c) as char);
    line
}

/// Formats the two data lines with checksums.
pub fn format_tle(el: &OrbitalElements) -> Result<(String, String)> {
    el.validate()?;
    if el.satellite_id > 99_999 {
        return Err(Error::param("satellite_id", "alpha-5 output is not supported"));
    }
    let year2 = el.epoch.year() % 100;
    let start_of_day = el.epoch.num_seconds_from_midnight() as f64 + el.epoch.nanosecond() as f64 * 1e-9;
    let day = el.epoch.ordinal() as f64 + start_of_day / 86_400.0;
    let l1 = format!(
        "1 {:05}{} {:<8} {:02}{:012.8} {} {} {} {} {:>4}",
        el.satellite_id,
        el.classification,
        el.international_designator,
        year2,
        day,
        ndot_field(el.mean_motion_dot),
        implied_field(el.mean_motion_ddot),
        implied_field(el.bstar),
        el.ephemeris_type,
        el.element_set_number % 10_000,
    );
    let ecc = format!("{:.7}", el.eccentricity);
    let l2 = format!(
        "2 {:05} {:8.4} {:8.4} {} {:8.4} {:8.4} {:11.8}{:>5}",
        el.satellite_id,
        el.inclination_deg,
        el.raan_deg,
        &ecc[2..],
        el.arg_perigee_deg,
        el.mean_anomaly_deg,
        el.mean_motion_revday,
        el.revolution_number % 100_000,
    );
    debug_assert_eq!(l1.len(), TLE_LINE_LEN - 1, "{l1}");
    debug_assert_eq!(l2.len(), TLE_LINE_LEN - 1, "{l2}");
    Ok((with_checksum(l1), with_checksum(l2)))
}

/// Formats a list of element sets as 3-line TLE text (name line first when
/// a name is present).
pub fn format_tle_file(records: &[OrbitalElements]) -> Result<String> {
    let mut out = String::new();
    for el in records {
        if let Some(name) = &el.name {
            out.push_str(name);
            out.push('\n');
        }
        let (a, b) = format_tle(el)?;
        out.push_str(&a);
        out.push('\n');
        out.push_str(&b);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ISS: (&str, &str) = (
        "1 25544U 98067A   20194.88612269 -.00002218  00000-0 -31515-4 0  9992",
        "2 25544  51.6461 221.2784 0001413  89.1723 280.4612 15.49507896236008",
    );

    #[test]
    fn parses_a_valid_set() {
        let text = format!("ISS (ZARYA)\n{}\n{}\n", ISS.0, ISS.1);
        let p = parse_tle(&text).unwrap();
        assert_eq!(p.records.len(), 1);
        assert!(p.diagnostics.is_empty());
        let el = &p.records[0];
        assert_eq!(el.satellite_id, 25544);
        assert_eq!(el.name.as_deref(), Some("ISS (ZARYA)"));
        assert_eq!(el.inclination_deg, 51.6461);
        assert_eq!(el.eccentricity, 0.0001413);
        assert!((el.bstar + 0.31515e-4).abs() < 1e-15);
        assert_eq!(el.mean_motion_dot, -0.00002218);
        assert_eq!(el.epoch.year(), 2020);
        assert_eq!(el.epoch.ordinal(), 194);
        assert_eq!(el.international_designator, "98067A");
    }

    #[test]
    fn matches_reference_parser() {
        let ours = &parse_tle(&format!("{}\n{}", ISS.0, ISS.1)).unwrap().records[0];
        let theirs = sgp4::Elements::from_tle(None, ISS.0.as_bytes(), ISS.1.as_bytes()).unwrap();
        assert_eq!(ours.epoch.naive_utc(), theirs.datetime);
        assert_eq!(ours.bstar, theirs.drag_term);
        assert_eq!(ours.mean_motion_revday, theirs.mean_motion);
    }

    #[test]
    fn checksum_perturbation_is_rejected() {
        let mut bad = ISS.0.to_string();
        bad.replace_range(68..69, "3");
        let p = parse_tle_lenient(&format!("{bad}\n{}\n", ISS.1));
        assert!(p.records.is_empty());
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].line, 1);
        assert!(p.diagnostics[0].message.contains("checksum"));
        assert!(matches!(parse_tle(&format!("{bad}\n{}\n", ISS.1)), Err(Error::NoTleRecords(_))));

        let p = parse_tle_with(&format!("{bad}\n{}\n", ISS.1), ChecksumPolicy::Flag);
        assert!(p.diagnostics.is_empty());
        assert!(!p.records[0].line_checksums_ok);
    }

    #[test]
    fn empty_input() {
        let p = parse_tle_lenient("");
        assert!(p.records.is_empty());
        assert_eq!(p.diagnostics[0].message, "no records");
        assert!(parse_tle("\n\n").is_err());
    }

    #[test]
    fn partial_success_keeps_valid_records() {
        let text = format!("{}\n{}\ngarbage\n1 short\n{}\n{}\n", ISS.0, ISS.1, ISS.0, ISS.1);
        let p = parse_tle(&text).unwrap();
        assert_eq!(p.records.len(), 2);
        assert!(!p.diagnostics.is_empty());
        assert_eq!(p.records[1].name, None);
    }

    #[test]
    fn wrong_length_is_reported_with_line_number() {
        let text = format!("X\n{}\n{} extra\n", ISS.0, ISS.1);
        let p = parse_tle_lenient(&text);
        assert_eq!(p.diagnostics[0].line, 3);
        assert!(p.diagnostics[0].message.contains("69"));
    }

    #[test]
    fn implied_decimal_fields() {
        let f = Fields { line: " 12345-3 -10000+1 00000-0", no: 1 };
        assert!((f.implied(0, 8, "x").unwrap() - 0.12345e-3).abs() < 1e-18);
        assert!((f.implied(9, 17, "x").unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(f.implied(18, 25, "x").unwrap(), 0.0);
        assert_eq!(implied_field(-0.31515e-4), "-31515-4");
        assert_eq!(implied_field(0.0), " 00000-0");
        assert_eq!(implied_field(1.0), " 10000+1");
        assert_eq!(ndot_field(-0.00002218), "-.00002218");
        assert_eq!(ndot_field(0.0), " .00000000");
    }

    #[test]
    fn format_round_trips() {
        let el = parse_tle(&format!("{}\n{}", ISS.0, ISS.1)).unwrap().records.remove(0);
        let (a, b) = format_tle(&el).unwrap();
        assert_eq!(a, ISS.0);
        assert_eq!(b, ISS.1);
    }

    #[test]
    fn alpha5_catalog_numbers() {
        let f = Fields { line: "1 A0001", no: 1 };
        assert_eq!(f.satnum().unwrap(), 100_001);
        let f = Fields { line: "1 J0001", no: 1 };
        assert_eq!(f.satnum().unwrap(), 180_001);
        let f = Fields { line: "1 P0001", no: 1 };
        assert_eq!(f.satnum().unwrap(), 230_001);
    }
}
