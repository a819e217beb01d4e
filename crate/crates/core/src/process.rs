//! Realizations of a temporal point process, their inter-event-time form,
//! and the line-oriented dataset format.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed observation window `[t1, t2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain")]
pub struct TimeDomain {
    t1: f64,
    t2: f64,
}

#[derive(Deserialize)]
struct RawDomain {
    t1: f64,
    t2: f64,
}

impl TryFrom<RawDomain> for TimeDomain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        TimeDomain::new(raw.t1, raw.t2)
    }
}

impl TimeDomain {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1.is_finite() && t2.is_finite() && t1 < t2) {
            return Err(Error::InvalidDomain { t1, t2 });
        }
        Ok(Self { t1, t2 })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self { t1: 0.0, t2: 1.0 }
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn span(&self) -> f64 {
        self.t2 - self.t1
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t1 && t <= self.t2
    }

    /// Image of the window under `t -> a t + b` with `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "affine map needs a > 0 and finite b, got a={a}, b={b}"
            )));
        }
        Self::new(a * self.t1 + b, a * self.t2 + b)
    }
}

/// One observed point process: nondecreasing event times inside a window.
///
/// Ties and events sitting on the window edges are accepted; they sit on the
/// simplex boundary and score zero Dirichlet depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    domain: TimeDomain,
    events: Vec<f64>,
}

impl Realization {
    pub fn new(domain: TimeDomain, events: Vec<f64>) -> Result<Self> {
        for (i, &t) in events.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidRealization(format!("event {i} is not finite")));
            }
            if !domain.contains(t) {
                return Err(Error::InvalidRealization(format!(
                    "event {t} lies outside [{}, {}]",
                    domain.t1, domain.t2
                )));
            }
            if i > 0 && t < events[i - 1] {
                return Err(Error::InvalidRealization(format!(
                    "events decrease at position {i} ({} > {t})",
                    events[i - 1]
                )));
            }
        }
        Ok(Self { domain, events })
    }

    pub fn empty(domain: TimeDomain) -> Self {
        Self { domain, events: Vec::new() }
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn into_events(self) -> Vec<f64> {
        self.events
    }

    pub fn cardinality(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Consecutive gaps with the window edges as sentinels.
    pub fn to_iet(&self) -> IetVector {
        let mut gaps = Vec::with_capacity(self.events.len() + 1);
        let mut prev = self.domain.t1;
        for &t in &self.events {
            gaps.push(t - prev);
            prev = t;
        }
        gaps.push(self.domain.t2 - prev);
        IetVector { domain: self.domain, gaps, cuts: self.events.clone() }
    }

    /// Applies `t -> a t + b` to the events and the window.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        let domain = self.domain.affine(a, b)?;
        let events = self.events.iter().map(|&t| (a * t + b).clamp(domain.t1, domain.t2)).collect();
        Realization::new(domain, events)
    }
}

/// Inter-event-time vector on the scaled simplex
/// `{u >= 0 : sum(u) = t2 - t1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IetVector {
    domain: TimeDomain,
    gaps: Vec<f64>,
    // Event positions; kept alongside the gaps so that the round trip back to
    // a realization is exact.
    cuts: Vec<f64>,
}

impl IetVector {
    pub fn new(domain: TimeDomain, gaps: Vec<f64>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::InvalidIet("need at least one gap".into()));
        }
        if let Some(g) = gaps.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::InvalidIet(format!("gap {g} is negative or not finite")));
        }
        let total: f64 = gaps.iter().sum();
        if (total - domain.span()).abs() > 1e-9 * domain.span() {
            return Err(Error::InvalidIet(format!("gaps sum to {total}, expected {}", domain.span())));
        }
        let mut cuts = Vec::with_capacity(gaps.len() - 1);
        let mut acc = domain.t1;
        for g in &gaps[..gaps.len() - 1] {
            acc = (acc + g).min(domain.t2);
            cuts.push(acc);
        }
        Ok(Self { domain, gaps, cuts })
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// True when some gap is exactly zero.
    pub fn is_boundary(&self) -> bool {
        self.gaps.contains(&0.0)
    }

    pub fn to_realization(&self) -> Realization {
        Realization { domain: self.domain, events: self.cuts.clone() }
    }
}

impl From<&Realization> for IetVector {
    fn from(s: &Realization) -> Self {
        s.to_iet()
    }
}

impl From<&IetVector> for Realization {
    fn from(u: &IetVector) -> Self {
        u.to_realization()
    }
}

/// A collection of realizations on a common window, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    domain: TimeDomain,
    realizations: Vec<Realization>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(domain: TimeDomain, realizations: Vec<Realization>) -> Result<Self> {
        if realizations.iter().any(|s| s.domain != domain) {
            return Err(Error::DomainMismatch);
        }
        Ok(Self { domain, realizations, labels: None })
    }

    pub fn labeled(domain: TimeDomain, realizations: Vec<Realization>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != realizations.len() {
            return Err(Error::DimensionMismatch { expected: realizations.len(), got: labels.len() });
        }
        if let Some(bad) = labels.iter().find(|l| !valid_label(l)) {
            return Err(Error::InvalidParameter(format!("invalid label {bad:?}")));
        }
        let mut data = Self::new(domain, realizations)?;
        data.labels = Some(labels);
        Ok(data)
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn realizations(&self) -> &[Realization] {
        &self.realizations
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.realizations.iter().map(Realization::cardinality).collect()
    }

    pub fn max_cardinality(&self) -> usize {
        self.realizations.iter().map(Realization::cardinality).max().unwrap_or(0)
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<String> {
        match &self.labels {
            Some(labels) => labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            None => Vec::new(),
        }
    }

    /// Unlabeled dataset holding the realizations tagged `label`.
    pub fn class(&self, label: &str) -> Dataset {
        let realizations = match &self.labels {
            Some(labels) => self
                .realizations
                .iter()
                .zip(labels)
                .filter(|(_, l)| l.as_str() == label)
                .map(|(s, _)| s.clone())
                .collect(),
            None => Vec::new(),
        };
        Dataset { domain: self.domain, realizations, labels: None }
    }

    pub fn parse(text: &str, domain: TimeDomain) -> Result<Self> {
        Self::read(text.as_bytes(), domain)
    }

    /// Reads the line format: one realization per line, whitespace-separated
    /// ascending times, an optional leading `label:` token, `#` comments, and
    /// a lone `-` for an unlabeled realization with no events.
    pub fn read<R: BufRead>(reader: R, domain: TimeDomain) -> Result<Self> {
        let mut realizations = Vec::new();
        let mut labels: Vec<Option<String>> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (label, rest) = split_label(content, lineno)?;
            let mut events = Vec::new();
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens != ["-"] {
                for tok in tokens {
                    let t: f64 = tok.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("not a number: {tok:?}"),
                    })?;
                    if !t.is_finite() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("not a finite number: {tok:?}"),
                        });
                    }
                    events.push(t);
                }
            }
            let s = Realization::new(domain, events)
                .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
            realizations.push(s);
            labels.push(label);
        }
        let labeled = labels.iter().filter(|l| l.is_some()).count();
        if labeled == 0 {
            return Ok(Self { domain, realizations, labels: None });
        }
        if labeled != labels.len() {
            let line = labels.iter().position(Option::is_none).map_or(0, |i| i + 1);
            return Err(Error::Parse {
                line,
                message: "labels must be given on every realization or on none".into(),
            });
        }
        Ok(Self { domain, realizations, labels: Some(labels.into_iter().flatten().collect()) })
    }

    /// Inverse of [`Dataset::parse`]; times use shortest round-trip decimal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.realizations.iter().enumerate() {
            if let Some(labels) = &self.labels {
                out.push_str(&labels[i]);
                out.push(':');
            } else if s.is_empty() {
                out.push('-');
            }
            for (j, t) in s.events.iter().enumerate() {
                if j > 0 || self.labels.is_some() {
                    out.push(' ');
                }
                let _ = write!(out, "{t}");
            }
            out.push('\n');
        }
        out
    }

    /// [`Dataset::render`] preceded by a `# domain:` comment that
    /// [`sniff_domain`] understands.
    pub fn render_with_header(&self) -> String {
        format!("# domain: {} {}\n{}", self.domain.t1, self.domain.t2, self.render())
    }
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label.contains(|c: char| c.is_whitespace() || c == ':' || c == '#')
        && label.parse::<f64>().is_err()
}

fn split_label(content: &str, line: usize) -> Result<(Option<String>, &str)> {
    let first = content.split_whitespace().next().unwrap_or("");
    match first.find(':') {
        Some(pos) => {
            let label = &first[..pos];
            if !valid_label(label) {
                return Err(Error::Parse { line, message: format!("invalid label {label:?}") });
            }
            let start = content.find(':').expect("colon present") + 1;
            Ok((Some(label.to_string()), &content[start..]))
        }
        None => Ok((None, content)),
    }
}

/// Reads a `# domain: t1 t2` header comment, if the text has one.
pub fn sniff_domain(text: &str) -> Option<TimeDomain> {
    text.lines().find_map(|line| {
        let rest = line.trim().strip_prefix('#')?.trim().strip_prefix("domain:")?;
        let mut it = rest.split_whitespace().map(str::parse::<f64>);
        let t1 = it.next()?.ok()?;
        let t2 = it.next()?.ok()?;
        TimeDomain::new(t1, t2).ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(t1: f64, t2: f64) -> TimeDomain {
        TimeDomain::new(t1, t2).unwrap()
    }

    #[test]
    fn domain_requires_strict_order() {
        assert!(TimeDomain::new(1.0, 1.0).is_err());
        assert!(TimeDomain::new(2.0, 1.0).is_err());
        assert!(TimeDomain::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn to_iet_examples() {
        let s = Realization::new(dom(0.0, 1.0), vec![0.5]).unwrap();
        assert_eq!(s.to_iet().gaps(), &[0.5, 0.5]);

        let s = Realization::empty(dom(0.0, 10.0));
        assert_eq!(s.to_iet().gaps(), &[10.0]);

        let s = Realization::new(dom(0.0, 10.0), vec![1.0, 4.0, 9.0]).unwrap();
        assert_eq!(s.to_iet().gaps(), &[1.0, 3.0, 5.0, 1.0]);
    }

    #[test]
    fn from_iet_examples() {
        let u = IetVector::new(dom(0.0, 10.0), vec![10.0]).unwrap();
        assert!(u.to_realization().is_empty());

        let u = IetVector::new(dom(0.0, 10.0), vec![1.0, 3.0, 5.0, 1.0]).unwrap();
        assert_eq!(u.to_realization().events(), &[1.0, 4.0, 9.0]);

        let u = IetVector::new(dom(0.0, 1.0), vec![0.5, 0.5]).unwrap();
        assert_eq!(u.to_realization().events(), &[0.5]);
    }

    #[test]
    fn iet_rejects_bad_sums_and_negative_gaps() {
        assert!(IetVector::new(dom(0.0, 1.0), vec![0.5, 0.6]).is_err());
        assert!(IetVector::new(dom(0.0, 1.0), vec![1.5, -0.5]).is_err());
        assert!(IetVector::new(dom(0.0, 1.0), vec![]).is_err());
    }

    #[test]
    fn boundary_detection() {
        let tied = Realization::new(dom(0.0, 1.0), vec![0.3, 0.3]).unwrap();
        assert!(tied.to_iet().is_boundary());
        let edge = Realization::new(dom(0.0, 1.0), vec![0.0, 0.4]).unwrap();
        assert!(edge.to_iet().is_boundary());
        let inner = Realization::new(dom(0.0, 1.0), vec![0.2, 0.4]).unwrap();
        assert!(!inner.to_iet().is_boundary());
    }

    #[test]
    fn realization_validation() {
        assert!(Realization::new(dom(0.0, 1.0), vec![0.5, 0.2]).is_err());
        assert!(Realization::new(dom(0.0, 1.0), vec![1.5]).is_err());
        assert!(Realization::new(dom(0.0, 1.0), vec![f64::NAN]).is_err());
    }

    #[test]
    fn parse_examples() {
        let d = Dataset::parse("0.5\n", dom(0.0, 1.0)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.realizations()[0].events(), &[0.5]);
        assert!(d.labels().is_none());

        let d = Dataset::parse("A: 1 4 9\nB: 2 3\n", dom(0.0, 10.0)).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.realizations()[0].events(), &[1.0, 4.0, 9.0]);
        assert_eq!(d.realizations()[1].events(), &[2.0, 3.0]);
        assert_eq!(d.labels().unwrap(), &["A".to_string(), "B".to_string()]);
        assert_eq!(d.classes(), vec!["A", "B"]);

        match Dataset::parse("0.5 0.2\n", dom(0.0, 1.0)) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error on line 1, got {other:?}"),
        }
    }

    #[test]
    fn parse_comments_and_empty_realizations() {
        let text = "# header\nA:\nB: 0.1 # trailing\n\nA: -\n";
        let d = Dataset::parse(text, dom(0.0, 1.0)).unwrap();
        assert_eq!(d.counts(), vec![0, 1, 0]);
        let d = Dataset::parse("-\n0.2\n", dom(0.0, 1.0)).unwrap();
        assert_eq!(d.counts(), vec![0, 1]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [("0.1\n0.2 x\n", 2), ("0.1\n\n1.5\n", 3), ("A: 0.1\n0.2\n", 2), ("0.1 nan\n", 1)];
        for (text, line) in cases {
            match Dataset::parse(text, dom(0.0, 1.0)) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn render_round_trip_with_labels_and_empties() {
        let domain = dom(0.0, 10.0);
        let reals = vec![
            Realization::new(domain, vec![0.1, 1.0 / 3.0, 9.999999999]).unwrap(),
            Realization::empty(domain),
        ];
        let plain = Dataset::new(domain, reals.clone()).unwrap();
        assert_eq!(Dataset::parse(&plain.render(), domain).unwrap(), plain);
        let labeled = Dataset::labeled(domain, reals, vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(Dataset::parse(&labeled.render(), domain).unwrap(), labeled);
    }

    #[test]
    fn sniff_domain_header() {
        let d = Dataset::new(dom(-1.5, 2.0), vec![]).unwrap();
        assert_eq!(sniff_domain(&d.render_with_header()), Some(dom(-1.5, 2.0)));
        assert_eq!(sniff_domain("0.1 0.2\n"), None);
    }
}
