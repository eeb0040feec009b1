//! Text and JSON renderings of command results.

use std::fmt::Write as _;

use serde::Serialize;

use crate::measures::fraction_text;
use crate::numerics::{ExactRational, RationalMatrix};
use crate::renorm::{ConstantsTable, RBounds};
use crate::singularity::{AffinitySeries, CriterionSummary, MartingaleTrace};
use crate::words::ConditionBEvidence;

/// Integers print bare, other rationals as `num/den`.
fn exact(x: &ExactRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        fraction_text(x)
    }
}

/// 17 significant digits.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
pub struct RenormRow {
    pub nu: u32,
    pub r: String,
    pub s: String,
    pub lower: String,
    pub upper: String,
    pub bounds_hold: bool,
}

impl RenormRow {
    pub fn new(b: &RBounds, s: &ExactRational) -> Self {
        RenormRow {
            nu: b.level,
            r: exact(&b.r),
            s: exact(s),
            lower: exact(&b.lower),
            upper: exact(&b.upper),
            bounds_hold: b.pass,
        }
    }

    pub fn long_line(&self) -> String {
        format!(
            "r({}) = {}\ts = {}\t{} < r < {}: {}",
            self.nu,
            self.r,
            self.s,
            self.lower,
            self.upper,
            if self.bounds_hold { "ok" } else { "FAIL" }
        )
    }
}

pub fn matrix_rows(m: &RationalMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(exact).collect())
        .collect()
}

#[derive(Serialize)]
pub struct ConstantsRecord {
    pub beta1: String,
    pub beta2: f64,
    pub beta2_ratio: Option<String>,
    pub beta3: String,
    pub beta4: String,
    pub beta5: String,
    pub beta6: String,
    pub delta0: String,
    pub delta_prime: String,
    pub theta: String,
    pub pairings: Vec<Vec<String>>,
}

impl From<&ConstantsTable> for ConstantsRecord {
    fn from(t: &ConstantsTable) -> Self {
        ConstantsRecord {
            beta1: exact(&t.beta1),
            beta2: t.beta2,
            beta2_ratio: t.beta2_ratio.as_ref().map(exact),
            beta3: exact(&t.beta3),
            beta4: exact(&t.beta4),
            beta5: exact(&t.beta5),
            beta6: exact(&t.beta6),
            delta0: exact(&t.delta0),
            delta_prime: exact(&t.delta_prime),
            theta: exact(&t.theta),
            pairings: t
                .pairings
                .iter()
                .map(|row| row.iter().map(exact).collect())
                .collect(),
        }
    }
}

impl ConstantsRecord {
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "beta1\t{}", self.beta1);
        match &self.beta2_ratio {
            Some(r) => {
                let _ = writeln!(s, "beta2\t{}\t(|log {r}|)", float(self.beta2));
            }
            None => {
                let _ = writeln!(s, "beta2\t{}", float(self.beta2));
            }
        }
        for (name, v) in [
            ("beta3", &self.beta3),
            ("beta4", &self.beta4),
            ("beta5", &self.beta5),
            ("beta6", &self.beta6),
            ("delta0", &self.delta0),
            ("delta_prime", &self.delta_prime),
            ("theta", &self.theta),
        ] {
            let _ = writeln!(s, "{name}\t{v}");
        }
        for (i, row) in self.pairings.iter().enumerate() {
            let _ = writeln!(s, "(u_{},v_j)\t{}", i + 1, row.join("\t"));
        }
        s
    }
}

pub fn affinity_text(a: &AffinitySeries) -> String {
    let mut s = String::from("m\tcylinders\tH_m\n");
    for (m, (h, c)) in a.h.iter().zip(&a.counts).enumerate() {
        let _ = writeln!(s, "{m}\t{c}\t{}", float(*h));
    }
    let _ = writeln!(
        s,
        "nonincreasing: {}",
        if a.is_nonincreasing() { "yes" } else { "no" }
    );
    if a.truncated {
        let _ = writeln!(
            s,
            "truncated at depth {} of {} by the enumeration ceiling",
            a.max_depth(),
            a.requested_depth
        );
    }
    s
}

pub fn trace_text(t: &MartingaleTrace) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "path\t{}", t.path);
    let _ = writeln!(s, "n\tz_n\talpha_n\tcond_exp\tgap_bound\tS_n");
    for (b, sum) in t.blocks.iter().zip(&t.partial_sums) {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            b.n,
            b.z,
            b.alpha,
            float(b.cond_exp),
            float(b.simplex_gap),
            float(*sum)
        );
    }
    let _ = writeln!(s, "{}", crate::singularity::CAVEAT);
    s
}

pub fn summary_text(c: &CriterionSummary) -> String {
    let mut s = String::from("path\tS_N\tslope\tterms_in_[0,1]\tnondecreasing\tgap_bound\n");
    let yes = |b: bool| if b { "yes" } else { "no" };
    for p in &c.paths {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            p.index,
            float(p.final_sum),
            float(p.slope),
            yes(p.terms_in_unit_interval),
            yes(p.nondecreasing),
            yes(p.gap_bound_holds)
        );
    }
    let _ = writeln!(s, "min S_{}\t{}", c.blocks, float(c.min_final_sum));
    let _ = writeln!(s, "median S_{}\t{}", c.blocks, float(c.median_final_sum));
    let _ = writeln!(s, "{}", c.caveat);
    s
}

#[derive(Serialize)]
pub struct ConditionBRecord {
    pub horizon: usize,
    pub window: usize,
    pub case_a_windows: usize,
    pub case_b_max_run: usize,
    pub star_hits_window: usize,
    pub star_hits_single: usize,
    pub holds_up_to_horizon: bool,
}

impl From<&ConditionBEvidence> for ConditionBRecord {
    fn from(e: &ConditionBEvidence) -> Self {
        ConditionBRecord {
            horizon: e.horizon,
            window: e.window,
            case_a_windows: e.covering_windows,
            case_b_max_run: e.max_run,
            star_hits_window: e.star_hits_window,
            star_hits_single: e.star_hits_single,
            holds_up_to_horizon: e.holds_up_to_horizon,
        }
    }
}

impl ConditionBRecord {
    pub fn text(&self) -> String {
        format!(
            "horizon\t{}\n\
             case (a) windows covering T (length {})\t{}\n\
             case (b) longest constant run\t{}\n\
             (★) inclusion hits, l2 = |T|\t{}\n\
             (★) inclusion hits, l2 = 1\t{}\n\
             holds up to horizon\t{}\n\
             finite-horizon evidence only\n",
            self.horizon,
            self.window,
            self.case_a_windows,
            self.case_b_max_run,
            self.star_hits_window,
            self.star_hits_single,
            if self.holds_up_to_horizon {
                "yes"
            } else {
                "no"
            }
        )
    }
}
