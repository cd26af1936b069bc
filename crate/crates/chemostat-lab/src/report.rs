//! Structured verdicts with numeric margins for every checkable hypothesis
//! and threshold condition.
//!
//! Every checker reports a margin, the amount by which the decisive
//! inequality holds at its worst point, so a verdict is never a bare
//! boolean: `holds` means margin > 0 beyond the equality band, `fails`
//! means margin < 0 beyond it, and anything within the band is
//! `inconclusive` (grid evaluation cannot decide a strict inequality that
//! close to equality).

use std::fmt;

use serde::Serialize;

use crate::defaults::EQUALITY_BAND;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConditionId {
    /// Forcing functions are positive and periodic.
    H1,
    /// Uptake responses vanish at 0 and are non-decreasing.
    H2,
    /// Per-species extinction inequality with the delayed-rate comparison.
    ExtI,
    /// Uniform extinction-stability inequality (non-strict).
    ExtStab,
    /// Extinction-stability plus strictness somewhere (global attraction).
    ExtGas,
    /// Sign constancy of the threshold integrand backing the r_i test.
    RiSign,
    /// Windowed-integral existence condition.
    H3,
    /// Pointwise sufficient condition for H3.
    H3A,
    /// Period-average sufficient condition for H3 (non-strict).
    H3B,
    /// Ratio-form sufficient condition for H3.
    H3C,
    /// Constant-input windowed-integral condition.
    H4,
    /// Constant-input pointwise condition.
    H40,
    /// Constant-input average condition (non-strict).
    H41,
    /// Persistence via the substrate lower bound m0.
    Pers,
    /// Competitive exclusion: designated survivor dominates, rest are washed
    /// out.
    Excl1,
    /// Coexistence cascade pointwise condition at each stage.
    Coex,
    /// Coexistence cascade average condition.
    CoexAvg,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::H1 => "H1",
            ConditionId::H2 => "H2",
            ConditionId::ExtI => "EXT_I",
            ConditionId::ExtStab => "EXT_STAB",
            ConditionId::ExtGas => "EXT_GAS",
            ConditionId::RiSign => "RI_SIGN",
            ConditionId::H3 => "H3",
            ConditionId::H3A => "H3A",
            ConditionId::H3B => "H3B",
            ConditionId::H3C => "H3C",
            ConditionId::H4 => "H4",
            ConditionId::H40 => "H4_0",
            ConditionId::H41 => "H4_1",
            ConditionId::Pers => "PERS",
            ConditionId::Excl1 => "EXCL_1",
            ConditionId::Coex => "COEX",
            ConditionId::CoexAvg => "COEX_AVG",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Verdict from a margin: positive beyond the equality band holds, negative
/// beyond it fails, anything else (including NaN) is inconclusive.
pub fn verdict_from_margin(margin: f64) -> Verdict {
    if !margin.is_finite() {
        Verdict::Inconclusive
    } else if margin > EQUALITY_BAND {
        Verdict::Holds
    } else if margin < -EQUALITY_BAND {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// One checked condition: verdict, margin, and where the worst case sits.
/// Species indices are 1-based to match config section labels.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub id: ConditionId,
    pub species: Option<usize>,
    pub verdict: Verdict,
    pub margin: f64,
    pub witness_t: Option<f64>,
    pub note: Option<String>,
}

impl ConditionEntry {
    /// Entry with the verdict derived from the margin sign.
    pub fn from_margin(id: ConditionId, margin: f64) -> Self {
        ConditionEntry {
            id,
            species: None,
            verdict: verdict_from_margin(margin),
            margin,
            witness_t: None,
            note: None,
        }
    }

    pub fn species(mut self, one_based: usize) -> Self {
        self.species = Some(one_based);
        self
    }

    pub fn witness(mut self, t: f64) -> Self {
        self.witness_t = Some(t);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Force a verdict that the margin sign alone cannot express (for
    /// example a checker precondition that failed).
    pub fn verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }
}

impl fmt::Display for ConditionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)?;
        if let Some(i) = self.species {
            write!(f, "[species {i}]")?;
        }
        write!(f, ": {}  margin = {:.6e}", self.verdict, self.margin)?;
        if let Some(t) = self.witness_t {
            write!(f, "  at t = {t:.6}")?;
        }
        if let Some(note) = &self.note {
            write!(f, "  ({note})")?;
        }
        Ok(())
    }
}

/// Ordered collection of condition entries; checkers append, the CLI
/// renders.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ConditionEntry) {
        self.entries.push(entry);
    }

    pub fn merge(&mut self, other: ConditionReport) {
        self.entries.extend(other.entries);
    }

    /// First entry for a condition (and species, when given).
    pub fn get(&self, id: ConditionId, species: Option<usize>) -> Option<&ConditionEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id && (species.is_none() || e.species == species))
    }

    pub fn holds(&self, id: ConditionId, species: Option<usize>) -> bool {
        self.get(id, species)
            .map(|e| e.verdict == Verdict::Holds)
            .unwrap_or(false)
    }

    /// True when every entry holds (used by model validation gates).
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Holds)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            writeln!(f, "{entry}")?;
        }
        Ok(())
    }
}

/// Substrate persistence floor estimates for the constant-washout-rate case.
#[derive(Debug, Clone, Serialize)]
pub struct PersistenceEstimate {
    /// Leftmost root of h(s) = d * min S0 on [0, max S0]; the liminf-S lower
    /// bound.
    pub m0: f64,
    /// (s, h(s)) samples backing the root search, for plotting.
    pub h_samples: Vec<(f64, f64)>,
    /// B = d^{-1} sum_i b_i e^{-d tau_i}; defined for closed-form responses
    /// with constant d.
    pub b_bound: Option<f64>,
    /// Closed-form lower bound as printed in its source, using the
    /// d/(d^2+1) offset.
    pub m0_closed: Option<f64>,
    /// Same closed form with the d/sqrt(d^2+1) offset that matches the
    /// washout extrema; kept as a diagnostic because the two disagree.
    pub m0_closed_sqrt: Option<f64>,
    /// Root of the h-equation with the washout-solution extrema substituted
    /// for the input-concentration extrema (the bound the closed form is
    /// actually derived against).
    pub m0_band: Option<f64>,
    /// True when a nonconstant washout rate forced the conservative d_lower
    /// substitution.
    pub conservative: bool,
    /// False when h(s) = d * min S0 had no root in range and m0 fell back to
    /// the upper endpoint.
    pub root_found: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_sign_fixes_verdict() {
        assert_eq!(verdict_from_margin(1e-3), Verdict::Holds);
        assert_eq!(verdict_from_margin(-1e-3), Verdict::Fails);
        assert_eq!(verdict_from_margin(0.0), Verdict::Inconclusive);
        assert_eq!(verdict_from_margin(5e-13), Verdict::Inconclusive);
        assert_eq!(verdict_from_margin(-5e-13), Verdict::Inconclusive);
        assert_eq!(verdict_from_margin(f64::NAN), Verdict::Inconclusive);
    }

    #[test]
    fn report_lookup_by_id_and_species() {
        let mut report = ConditionReport::new();
        report.push(ConditionEntry::from_margin(ConditionId::H3A, 0.5).species(1));
        report.push(ConditionEntry::from_margin(ConditionId::H3A, -0.2).species(2));
        assert!(report.holds(ConditionId::H3A, Some(1)));
        assert!(!report.holds(ConditionId::H3A, Some(2)));
        assert!(!report.all_hold());
        let e = report.get(ConditionId::H3A, Some(2)).unwrap();
        assert_eq!(e.verdict, Verdict::Fails);
    }

    #[test]
    fn entry_renders_with_witness() {
        let e = ConditionEntry::from_margin(ConditionId::ExtStab, 1.988)
            .species(1)
            .witness(0.25)
            .note("worst case at the washout maximum");
        let s = e.to_string();
        assert!(s.contains("EXT_STAB"));
        assert!(s.contains("species 1"));
        assert!(s.contains("holds"));
        assert!(s.contains("t = 0.25"));
    }
}
